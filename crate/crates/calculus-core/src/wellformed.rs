use std::collections::BTreeSet;

use crate::diagnostic::Diagnostic;
use crate::names::{Ident, Role};
use crate::process::Process;
use crate::span::Span;
use crate::value::Value;

/// Structural checks every runnable process must pass: one top-level buffer
/// per restricted session, distinct branch arms, channel subjects, and a
/// binding for every role of a restricted session that occurs under it.
pub fn well_formed(p: &Process) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    p.visit(&mut |q| check_node(q, &mut out));
    out
}

fn check_node(p: &Process, out: &mut Vec<Diagnostic>) {
    match p {
        Process::Restriction {
            session,
            binding,
            body,
            span,
        } => {
            let n = count_top_buffers(body, session);
            if n == 0 {
                out.push(Diagnostic::error(
                    "MissingBuffer",
                    *span,
                    format!("session `{session}` has no buffer at the top level of its scope"),
                ));
            } else if n > 1 {
                out.push(Diagnostic::error(
                    "DuplicateBuffer",
                    *span,
                    format!("session `{session}` has {n} buffers"),
                ));
            }
            let used: BTreeSet<Role> = body
                .free_endpoints()
                .into_iter()
                .filter(|e| &e.session == session)
                .map(|e| e.role)
                .chain(buffer_roles(body, session))
                .collect();
            for r in used {
                if !binding.contains_key(&r) {
                    out.push(Diagnostic::error(
                        "MissingRoleBinding",
                        *span,
                        format!("role `{r}` of session `{session}` has no type in the restriction"),
                    ));
                }
            }
        }
        Process::Branch {
            channel, arms, span, ..
        } => {
            check_channel(channel, *span, out);
            if arms.is_empty() {
                out.push(Diagnostic::error("EmptyArms", *span, "branch without alternatives"));
            }
            let mut seen = BTreeSet::new();
            for a in arms {
                if !seen.insert((&a.from, &a.label)) {
                    out.push(Diagnostic::error(
                        "DuplicateArm",
                        a.span,
                        format!("duplicate arm `{}?{}`", a.from, a.label),
                    ));
                }
            }
        }
        Process::Select { channel, span, .. } => check_channel(channel, *span, out),
        _ => {}
    }
}

fn check_channel(v: &Value, span: Span, out: &mut Vec<Diagnostic>) {
    if let Value::Basic(b) = v {
        out.push(Diagnostic::error("BadChannel", span, format!("`{b}` is not a channel")));
    }
}

/// Buffers of `session` reachable through parallel composition, other
/// restrictions and declaration scopes.
fn count_top_buffers(p: &Process, session: &Ident) -> usize {
    match p {
        Process::Buffer { session: s, .. } => usize::from(s == session),
        Process::Par(a, b) => count_top_buffers(a, session) + count_top_buffers(b, session),
        Process::Restriction { session: s, body, .. } if s != session => count_top_buffers(body, session),
        Process::Def { body, .. } => count_top_buffers(body, session),
        _ => 0,
    }
}

fn buffer_roles(p: &Process, session: &Ident) -> Vec<Role> {
    let mut out = Vec::new();
    p.visit(&mut |q| {
        if let Process::Buffer { session: s, queue, .. } = q {
            if s == session {
                out.extend(queue.iter().map(|m| m.from.clone()));
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn buffer() -> Process {
        Process::Buffer {
            session: "s".into(),
            queue: vec![],
            span: Span::DUMMY,
        }
    }

    fn restrict(body: Process) -> Process {
        Process::Restriction {
            session: "s".into(),
            binding: BTreeMap::new(),
            body: Box::new(body),
            span: Span::DUMMY,
        }
    }

    fn codes(p: &Process) -> Vec<String> {
        well_formed(p).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn buffer_counts() {
        assert!(codes(&restrict(Process::par(Process::Inaction, buffer()))).is_empty());
        assert_eq!(codes(&restrict(Process::Inaction)), ["MissingBuffer"]);
        assert_eq!(
            codes(&restrict(Process::par_all([buffer(), buffer(), Process::Inaction]))),
            ["DuplicateBuffer"]
        );
    }
}
