//! Group multi-criteria decision engine.
//!
//! A [`GroupProblem`] carries several decision makers' judgments over the
//! same alternatives and criteria. The engine classifies the kind of
//! uncertainty in those judgments, ranks alternatives with a method suited
//! to it, projects individual planes onto a group plane, measures how far
//! each maker sits from the group result and probes how weight changes move
//! the ranking. [`run_pipeline`] strings all of this together.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classic;
pub mod error;
pub mod fuzzy;
pub mod group;
pub mod methods;
pub mod model;
pub mod pipeline;
pub mod rank;
pub mod rough;
pub mod scheme;
pub mod stochastic;
pub mod uncertainty;

pub use error::{Error, Result};
pub use methods::{rank_group, rank_plane, MethodId, MethodOptions};
pub use model::{
    Alternative, CellKind, CellValue, Criterion, DecisionMaker, DecisionMatrix, Direction, GroupProblem, ProblemFile,
    Scaling, ScoreMatrix, ValidationReport,
};
pub use pipeline::{run_pipeline, PipelineOptions, PipelineReport, PipelineRun, Stage, StageStatus};
pub use rank::RankResult;
pub use scheme::{SchemeDescriptor, SchemeLookup, SimilarScheme};
pub use uncertainty::{classify_problem, recommend_methods, EnvironmentReport, UncertaintyClass};
