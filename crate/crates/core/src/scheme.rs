use serde::{Deserialize, Serialize};

use crate::methods::MethodId;
use crate::model::GroupProblem;
use crate::uncertainty::UncertaintyClass;

/// Size and uncertainty profile used to find comparable past schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemeDescriptor {
    pub alternative_count: usize,
    pub criterion_count: usize,
    pub maker_count: usize,
    pub uncertainty_class: UncertaintyClass,
}

impl SchemeDescriptor {
    pub const DIMENSIONS: usize = 8;

    pub fn of(problem: &GroupProblem, class: UncertaintyClass) -> Self {
        SchemeDescriptor {
            alternative_count: problem.alternatives.len(),
            criterion_count: problem.criteria.len(),
            maker_count: problem.makers.len(),
            uncertainty_class: class,
        }
    }

    /// `ln(1 + count)` for the three counts followed by a one-hot
    /// uncertainty class.
    pub fn features(&self) -> [f64; Self::DIMENSIONS] {
        let mut v = [0.0; Self::DIMENSIONS];
        v[0] = (self.alternative_count as f64).ln_1p();
        v[1] = (self.criterion_count as f64).ln_1p();
        v[2] = (self.maker_count as f64).ln_1p();
        v[3 + self.uncertainty_class.index()] = 1.0;
        v
    }

    pub fn similarity(&self, other: &SchemeDescriptor) -> f64 {
        cosine(&self.features(), &other.features())
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarScheme {
    pub id: String,
    pub method: MethodId,
    pub result_order: Vec<String>,
    pub similarity: f64,
}

/// Source of previously emitted problem-solving schemes.
pub trait SchemeLookup {
    fn similar(&self, descriptor: &SchemeDescriptor, k: usize) -> Vec<SimilarScheme>;
}
