//! Runtime checks that every branch reached agrees with the reliability
//! assumptions: unreliable sources need a timeout, reliable-only branches
//! must not have one.

use std::collections::BTreeSet;

use magpi_core::{Process, Reliability, Span, Value};
use serde::Serialize;

use crate::config::Config;
use crate::run::Trace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MonitorKind {
    /// A branch without a timeout that waits on an unreliable role.
    Cor1Violation,
    /// A branch with a timeout whose sources are all reliable.
    Cor2Violation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonitorViolation {
    pub kind: MonitorKind,
    /// First step at which the branch was active.
    pub step: usize,
    pub endpoint: String,
    pub span: Span,
}

/// Violations among the active branches of `c`.
pub fn check_config(c: &Config, r: &Reliability) -> Vec<MonitorViolation> {
    c.threads.iter().filter_map(|t| check_thread(t, c.step, r)).collect()
}

fn check_thread(t: &Process, step: usize, r: &Reliability) -> Option<MonitorViolation> {
    let Process::Branch {
        channel: Value::Endpoint(e),
        arms,
        timeout,
        span,
    } = t
    else {
        return None;
    };
    let unreliable = arms.iter().any(|a| !r.reliable(&e.role, &a.from));
    let kind = match (timeout.is_some(), unreliable) {
        (false, true) => MonitorKind::Cor1Violation,
        (true, false) => MonitorKind::Cor2Violation,
        _ => return None,
    };
    Some(MonitorViolation {
        kind,
        step,
        endpoint: e.to_string(),
        span: *span,
    })
}

/// Violations over every configuration of `t`, each branch reported once.
pub fn monitor_corollaries(t: &Trace, r: &Reliability) -> Vec<MonitorViolation> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for c in &t.states {
        for v in check_config(c, r) {
            if seen.insert((v.kind, v.endpoint.clone(), v.span)) {
                out.push(v);
            }
        }
    }
    out
}
