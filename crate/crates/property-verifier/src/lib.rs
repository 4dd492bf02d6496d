//! Properties of typing contexts, decided on the reachable transition
//! system: safety (and its TCP strengthening), deadlock-freedom,
//! termination, never-termination, liveness, communication safety under
//! full reliability, and buffer bounds.
//!
//! A limit trip yields [`Verdict::Inconclusive`] unless the explored part
//! already contains a violation.

mod checks;
mod suite;
mod verdict;

pub use checks::{
    bound_k, bound_limits, check_bound_k, check_bounded, check_comm_safe_rf, check_deadlock_free, check_live,
    check_never_terminating, check_safety, check_tcp_ordering, check_tcp_safety, check_terminating, comm_safe,
    deadlock_free, live, never_terminating, safety, safety_violation, static_safety, tcp_limits,
    tcp_order_violation, tcp_safety, terminating,
};
pub use suite::{verify_suite, Property, PropertySuiteResult, Stats, SuiteOptions};
pub use verdict::{replay, Verdict, VerdictJson};
