//! Cautious reasoning over ground answer set programs.
//!
//! A cautious consequence is an atom true in every stable model. This crate
//! provides the ground program model, text and ASPIF parsers, an exhaustive
//! enumeration oracle for the semantics, an incremental conflict-driven
//! solver with assumptions and unsatisfiable cores, and five anytime
//! strategies for computing cautious consequences on top of it (plus the
//! enumeration baseline).

pub mod engine;
pub mod oracle;
pub mod parse;
pub mod program;
pub mod solver;

pub use engine::{
    cautious_reasoning, CmAudit, EngineError, EngineOptions, EngineStats, EventKind, OneOfPolicy,
    ProgressEvent, Strategy,
};
pub use oracle::CautiousResult;
pub use program::{
    AtomId, AtomTable, ChoiceRule, DisjunctiveRule, Interpretation, Literal, Program,
    ProgramBuilder,
};
pub use solver::{
    check_head_cycle_free, translate, CdclSolver, SolveError, SolveResult, SolverStats,
    TranslateError, TranslateOptions,
};
