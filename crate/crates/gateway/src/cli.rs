use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use gdss_core::group::{consensus, whatif_weights, ConsensusConfig};
use gdss_core::model::validate_problem;
use gdss_core::rough::{induce_rules, quality_gamma, union_approximations};
use gdss_core::{classify_problem, rank_group, recommend_methods, GroupProblem, MethodId, MethodOptions, ProblemFile};
use gdss_store::{Clock, KnowledgeStore};
use serde_json::json;

use crate::runner::{execute, random_token, render};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn parse_method(s: &str) -> Result<MethodId, String> {
    s.parse::<MethodId>().map_err(|_| {
        let known: Vec<&str> = MethodId::ALL.iter().map(|m| m.as_str()).collect();
        format!("unknown method {s:?}; expected one of {}", known.join(", "))
    })
}

#[derive(Debug, Parser)]
#[command(name = "gdss", version, about = "Group multi-criteria decision engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a problem file against every structural invariant.
    Validate {
        file: PathBuf,
        /// Treat missing cells as errors.
        #[arg(long)]
        strict: bool,
    },
    /// Report the uncertainty class and recommended methods.
    Classify { file: PathBuf },
    /// Rank the aggregated group plane with one method.
    Rank {
        file: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: MethodId,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the full six-stage process and print its report.
    Pipeline {
        file: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Knowledge store directory; enables scheme retrieval and persistence.
        #[arg(long, env = "GDSS_STORE")]
        store: Option<PathBuf>,
        /// Fixed clock and sequential session ids for reproducible output.
        #[arg(long)]
        deterministic: bool,
    },
    /// Distance of each maker's ranking from the group ranking.
    Consensus {
        file: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: MethodId,
    },
    /// Shift one criterion's group weight and re-rank.
    Whatif {
        file: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: MethodId,
        #[arg(long)]
        criterion: String,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
    },
    /// Rough approximations and certain rules from the sorting table.
    Drsa {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_conditions: usize,
    },
    /// Serve the session API (and optionally a static UI).
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "GDSS_STORE")]
        store: PathBuf,
        /// Directory of static files served under `/`.
        #[arg(long)]
        ui: Option<PathBuf>,
        #[arg(long)]
        deterministic: bool,
    },
}

struct Failure {
    code: &'static str,
    message: String,
    detail: Option<serde_json::Value>,
}

impl Failure {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
            detail: None,
        }
    }
}

impl From<gdss_core::Error> for Failure {
    fn from(e: gdss_core::Error) -> Self {
        Failure::new(e.code(), e.to_string())
    }
}

impl From<gdss_store::StoreError> for Failure {
    fn from(e: gdss_store::StoreError) -> Self {
        Failure::new(e.code(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new("IO_FAILURE", e.to_string())
    }
}

fn load(path: &Path) -> Result<GroupProblem, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new("IO_FAILURE", format!("{}: {e}", path.display())))?;
    ProblemFile::from_json(&text).map_err(|e| Failure::new("PARSE_ERROR", format!("{}: {e}", path.display())))
}

/// Loads a problem that must pass strict validation before ranking.
fn load_valid(path: &Path) -> Result<GroupProblem, Failure> {
    let problem = load(path)?;
    let report = validate_problem(&problem, true);
    if !report.is_valid() {
        return Err(Failure {
            detail: Some(serde_json::to_value(&report.violations).expect("violations serialize")),
            ..Failure::new("VALIDATION_FAILED", "problem failed strict validation")
        });
    }
    Ok(problem)
}

/// Parses `args` (program name first) and runs the command, writing JSON
/// documents to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let mut body = json!({"error": {"code": f.code, "message": f.message}});
            if let Some(detail) = f.detail {
                body["error"]["violations"] = detail;
            }
            let _ = err.write_all(render(&body).as_bytes());
            EXIT_INPUT
        }
    }
}

fn emit(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    out.write_all(render(value).as_bytes())?;
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Validate { file, strict } => {
            let report = validate_problem(&load(&file)?, strict);
            emit(out, &report)?;
            Ok(if report.is_valid() { EXIT_OK } else { EXIT_INPUT })
        }
        Command::Classify { file } => {
            let env = classify_problem(&load(&file)?);
            let recommended = recommend_methods(&env);
            emit(out, &json!({"environment": env, "recommended": recommended}))?;
            Ok(EXIT_OK)
        }
        Command::Rank {
            file,
            method,
            seed,
            samples,
        } => {
            let problem = load_valid(&file)?;
            let mut options = MethodOptions::default();
            if let Some(seed) = seed {
                options.seed = seed;
            }
            if let Some(samples) = samples {
                options.samples = samples;
            }
            emit(out, &rank_group(&problem, method, &options)?)?;
            Ok(EXIT_OK)
        }
        Command::Pipeline {
            file,
            out: path,
            store,
            deterministic,
        } => {
            let problem = load(&file)?;
            let clock = if deterministic { Clock::epoch() } else { Clock::System };
            let store = store.map(|dir| KnowledgeStore::open_with_clock(dir, clock)).transpose()?;
            let session_id = match (&store, deterministic) {
                (Some(s), true) => format!("session-{:04}", s.session_ids().len() + 1),
                _ => random_token(),
            };
            let run = execute(&problem, store.as_ref(), &session_id)?;
            let text = render(&run.report);
            match path {
                Some(path) => std::fs::write(path, text)?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(if run.report.failure().is_some() { EXIT_INPUT } else { EXIT_OK })
        }
        Command::Consensus { file, method } => {
            let problem = load_valid(&file)?;
            let report = consensus(&problem, method, &MethodOptions::default(), &ConsensusConfig::default())?;
            emit(out, &report)?;
            Ok(EXIT_OK)
        }
        Command::Whatif {
            file,
            method,
            criterion,
            delta,
        } => {
            let problem = load_valid(&file)?;
            emit(out, &whatif_weights(&problem, method, &criterion, delta, &MethodOptions::default())?)?;
            Ok(EXIT_OK)
        }
        Command::Drsa { file, max_conditions } => {
            let problem = load(&file)?;
            let report = validate_problem(&problem, false);
            if !report.is_valid() {
                return Err(Failure {
                    detail: Some(serde_json::to_value(&report.violations).expect("violations serialize")),
                    ..Failure::new("VALIDATION_FAILED", "problem failed validation")
                });
            }
            let block = problem
                .sorting
                .as_ref()
                .ok_or_else(|| Failure::new("METHOD_INAPPLICABLE", "problem has no sorting table"))?;
            let table = block.to_table(&problem.criteria)?;
            let rules = induce_rules(&table, max_conditions)?;
            let options = MethodOptions {
                max_conditions,
                ..MethodOptions::default()
            };
            let classification = rank_group(&problem, MethodId::Drsa, &options).ok();
            emit(
                out,
                &json!({
                    "qualityOfApproximation": quality_gamma(&table),
                    "approximations": union_approximations(&table),
                    "rules": rules,
                    "classification": classification,
                }),
            )?;
            Ok(EXIT_OK)
        }
        Command::Serve {
            port,
            host,
            store,
            ui,
            deterministic,
        } => {
            let clock = if deterministic { Clock::epoch() } else { Clock::System };
            let store = KnowledgeStore::open_with_clock(store, clock)?;
            let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            runtime.block_on(async move {
                let app = crate::api::router(crate::api::AppState::new(store), ui);
                let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, app).await
            })?;
            Ok(EXIT_OK)
        }
    }
}
