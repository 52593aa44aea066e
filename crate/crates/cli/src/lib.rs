//! Campaign orchestration, learned target selection and evaluation.
//!
//! The `holab` binary wraps [`cli::run`]; the modules below are usable on
//! their own for scripted experiments.

pub mod cli;
pub mod config_file;
pub mod ecdf;
pub mod error;
pub mod eval;
pub mod pipeline;

pub use ecdf::{ecdf, EcdfSeries};
pub use error::{Error, Result};
pub use eval::{
    assemble_report, cross_scenario_eval, evaluate, oracle_select, regret, select_target,
    EvalReport, PolicyResult, Scorer,
};
