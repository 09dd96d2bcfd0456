//! Exhaustive classifications and the checks built on them.

mod engine;
mod report;
mod suites;

pub use engine::{
    enumerate_classes, shared_engine, ClassEngine, ClassRecord, ElementFilter, EngineStats,
    SpacePredicate, MAX_ENUM_DIM,
};
pub use report::{CheckLine, ClassSummary, ClassificationReport, Status};
pub use suites::{n2_formula, Suite, Verifier, DEFAULT_SEED};
