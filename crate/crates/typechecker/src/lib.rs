//! Typechecking of MAGπ processes against local session types.
//!
//! The procedure inverts the typing rules: every process shape has one
//! applicable rule, parallel contexts are split by free names, buffers are
//! typed entry by entry and leftovers must be garbage-collectable. The
//! safety premise of a restriction is decided by `magpi-verify`.

mod judge;
mod report;

pub use judge::{check_restriction_safety, BufferTracker, CheckOptions, ProcVarContext, Typechecker};
pub use magpi_core::{end_predicate, gc_predicate, insert_message, TypeContext};
pub use report::{TraceStep, TypingReport, TypingVerdict};

use magpi_core::{ProcDecl, Process, Reliability, TypeDefs};

/// Checks a whole program: declarations, then the closed system.
pub fn typecheck_program(
    defs: &TypeDefs,
    reliability: &Reliability,
    procs: &[ProcDecl],
    system: &Process,
    options: CheckOptions,
) -> TypingReport {
    Typechecker::new(defs, reliability.clone(), options).typecheck_program(procs, system)
}
