//! Buffer, type and structural congruences and their canonical forms.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bisim::Bisim;
use crate::context::{BufEntryTy, SbType};
use crate::names::{Ident, Role};
use crate::process::{Message, ProcDecl, Process};
use crate::value::Value;

/// How in-transit messages may be reordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CongruenceMode {
    /// Buffers are multisets.
    #[default]
    #[serde(rename = "total")]
    TotalReorder,
    /// Entries on the same (sender, receiver) channel keep their order.
    #[serde(rename = "tcp")]
    TcpFifo,
}

impl CongruenceMode {
    pub fn name(self) -> &'static str {
        match self {
            CongruenceMode::TotalReorder => "total",
            CongruenceMode::TcpFifo => "tcp",
        }
    }
}

/// Sorts by `(from, to, label, payload digest)`, or stable-partitions by
/// `(from, to)` channel under `TcpFifo`.
pub fn canonical_queue(queue: &[Message], mode: CongruenceMode) -> Vec<Message> {
    let mut out = queue.to_vec();
    match mode {
        CongruenceMode::TotalReorder => {
            out.sort_by(|a, b| {
                (&a.from, &a.to, &a.label, a.payload.digest_key()).cmp(&(&b.from, &b.to, &b.label, b.payload.digest_key()))
            });
        }
        CongruenceMode::TcpFifo => out.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to))),
    }
    out
}

/// Canonical form of one sender's buffer type. Session payloads compare by
/// node identity; pass them through [`Bisim::rep_payload`] first when they
/// should compare up to bisimilarity.
pub fn canonical_buffer_type(buffer: &[BufEntryTy], mode: CongruenceMode) -> Vec<BufEntryTy> {
    let mut out = buffer.to_vec();
    match mode {
        CongruenceMode::TotalReorder => out.sort(),
        CongruenceMode::TcpFifo => out.sort_by(|a, b| a.to.cmp(&b.to)),
    }
    out
}

pub fn queue_congruent(a: &[Message], b: &[Message], mode: CongruenceMode) -> bool {
    canonical_queue(a, mode) == canonical_queue(b, mode)
}

/// Canonical representative of `τ` within one graph.
pub fn canonical_sb_type(bisim: &Bisim, t: &SbType, mode: CongruenceMode) -> SbType {
    let buffer: Vec<BufEntryTy> = t
        .buffer
        .iter()
        .map(|e| BufEntryTy {
            payload: bisim.rep_payload(e.payload),
            ..e.clone()
        })
        .collect();
    SbType {
        buffer: canonical_buffer_type(&buffer, mode),
        session: t.session.map(|s| bisim.rep(s)),
    }
}

/// `τ ≡ τ′` for two types interned in the graph `bisim` was computed on.
pub fn type_congruent(bisim: &Bisim, a: &SbType, b: &SbType, mode: CongruenceMode) -> bool {
    canonical_sb_type(bisim, a, mode) == canonical_sb_type(bisim, b, mode)
}

/// A process flattened under its reduction contexts.
///
/// Restrictions are extruded to the top (session names are not
/// alpha-renamed), `0` components vanish, and a restricted session whose
/// buffer is all that refers to it is dropped together with the buffer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalForm {
    pub sessions: BTreeSet<Ident>,
    pub defs: Vec<String>,
    pub atoms: Vec<String>,
    pub buffers: BTreeMap<Ident, Vec<String>>,
}

impl NormalForm {
    pub fn is_inaction(&self) -> bool {
        self.atoms.is_empty() && self.defs.is_empty() && self.buffers.is_empty() && self.sessions.is_empty()
    }

    fn render(&self) -> String {
        let mut s = String::new();
        for x in &self.sessions {
            s.push_str(&format!("new {x}; "));
        }
        for d in &self.defs {
            s.push_str(&format!("def {d}; "));
        }
        let mut parts = self.atoms.clone();
        for (x, q) in &self.buffers {
            parts.push(format!("{x}:[{}]", q.join(", ")));
        }
        if parts.is_empty() {
            s.push('0');
        } else {
            s.push_str(&parts.join(" | "));
        }
        s
    }
}

pub fn normal_form(p: &Process, mode: CongruenceMode) -> NormalForm {
    let mut sessions = BTreeSet::new();
    let mut defs: Vec<ProcDecl> = Vec::new();
    let mut atoms: Vec<&Process> = Vec::new();
    let mut queues: BTreeMap<Ident, Vec<Message>> = BTreeMap::new();
    flatten(p, &mut sessions, &mut defs, &mut atoms, &mut queues);

    let mut mentioned: BTreeSet<Ident> = BTreeSet::new();
    for a in &atoms {
        mentioned.extend(a.free_endpoints().into_iter().map(|e| e.session));
        mentioned.extend(a.free_buffers());
    }
    for q in queues.values() {
        for m in q {
            if let Value::Endpoint(e) = &m.payload {
                mentioned.insert(e.session.clone());
            }
        }
    }
    for d in &defs {
        mentioned.extend(d.body.free_endpoints().into_iter().map(|e| e.session));
    }
    let dead: Vec<Ident> = sessions.iter().filter(|s| !mentioned.contains(*s)).cloned().collect();
    for s in dead {
        sessions.remove(&s);
        queues.remove(&s);
    }

    let mut atoms: Vec<String> = atoms.iter().map(|a| canon_atom(a, mode)).collect();
    atoms.sort();
    let buffers = queues
        .into_iter()
        .map(|(s, q)| (s, canonical_queue(&q, mode).iter().map(|m| m.to_string()).collect()))
        .collect();
    NormalForm {
        sessions,
        defs: defs.iter().map(|d| d.to_string()).collect(),
        atoms,
        buffers,
    }
}

fn flatten<'a>(
    p: &'a Process,
    sessions: &mut BTreeSet<Ident>,
    defs: &mut Vec<ProcDecl>,
    atoms: &mut Vec<&'a Process>,
    queues: &mut BTreeMap<Ident, Vec<Message>>,
) {
    match p {
        Process::Inaction => {}
        Process::Par(a, b) => {
            flatten(a, sessions, defs, atoms, queues);
            flatten(b, sessions, defs, atoms, queues);
        }
        Process::Restriction { session, body, .. } => {
            sessions.insert(session.clone());
            flatten(body, sessions, defs, atoms, queues);
        }
        Process::Def { decl, body } => {
            defs.push((**decl).clone());
            flatten(body, sessions, defs, atoms, queues);
        }
        Process::Buffer { session, queue, .. } => {
            queues.entry(session.clone()).or_default().extend(queue.iter().cloned());
        }
        _ => atoms.push(p),
    }
}

fn canon_atom(p: &Process, mode: CongruenceMode) -> String {
    match p {
        Process::Select {
            channel,
            to,
            label,
            payload,
            cont,
            ..
        } => format!("{channel}!{to}.{label}({payload}).{{{}}}", normal_form(cont, mode).render()),
        Process::Branch {
            channel,
            arms,
            timeout,
            ..
        } => {
            let mut arms: Vec<(&Role, String)> = arms
                .iter()
                .map(|a| {
                    let binder = a.binder.as_ref().map(|b| b.to_string()).unwrap_or_default();
                    (
                        &a.from,
                        format!("{}?{}({binder}).{{{}}}", a.from, a.label, normal_form(&a.cont, mode).render()),
                    )
                })
                .collect();
            arms.sort();
            let mut s = format!("{channel}&{{");
            s.push_str(&arms.into_iter().map(|(_, a)| a).collect::<Vec<_>>().join(", "));
            if let Some(t) = timeout {
                s.push_str(&format!(", timeout.{{{}}}", normal_form(t, mode).render()));
            }
            s.push('}');
            s
        }
        Process::Choice(a, b) => format!("({{{}}} + {{{}}})", normal_form(a, mode).render(), normal_form(b, mode).render()),
        other => other.to_string(),
    }
}

pub fn structural_congruent(p: &Process, q: &Process, mode: CongruenceMode) -> bool {
    normal_form(p, mode) == normal_form(q, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::Endpoint;
    use crate::span::Span;

    fn msg(from: &str, to: &str, label: &str) -> Message {
        Message {
            from: from.into(),
            to: to.into(),
            label: label.into(),
            payload: Value::unit(),
        }
    }

    fn buf(q: Vec<Message>) -> Process {
        Process::Buffer {
            session: "s".into(),
            queue: q,
            span: Span::DUMMY,
        }
    }

    fn send(role: &str, to: &str, label: &str) -> Process {
        Process::Select {
            channel: Value::Endpoint(Endpoint::new("s", role)),
            to: to.into(),
            label: label.into(),
            payload: Value::unit(),
            cont: Box::new(Process::Inaction),
            span: Span::DUMMY,
        }
    }

    #[test]
    fn queue_examples() {
        let q = vec![msg("p", "q", "a"), msg("p", "r", "b")];
        assert_eq!(canonical_queue(&q, CongruenceMode::TotalReorder), q);
        let q = vec![msg("p", "q", "b"), msg("p", "q", "a")];
        assert_eq!(canonical_queue(&q, CongruenceMode::TcpFifo), q);
    }

    #[test]
    fn structural_examples() {
        let p = send("p", "q", "a");
        let q = send("q", "p", "b");
        assert!(structural_congruent(
            &Process::par(p.clone(), q.clone()),
            &Process::par(q, p),
            CongruenceMode::TotalReorder
        ));
        let only_buffer = Process::Restriction {
            session: "s".into(),
            binding: BTreeMap::new(),
            body: Box::new(buf(vec![])),
            span: Span::DUMMY,
        };
        assert!(structural_congruent(&only_buffer, &Process::Inaction, CongruenceMode::TotalReorder));
        let h1 = msg("p", "q", "a");
        let h2 = msg("p", "q", "b");
        assert!(!structural_congruent(
            &buf(vec![h1.clone(), h2.clone()]),
            &buf(vec![h2.clone(), h1.clone()]),
            CongruenceMode::TcpFifo
        ));
        assert!(structural_congruent(
            &buf(vec![h1.clone(), h2.clone()]),
            &buf(vec![h2, h1]),
            CongruenceMode::TotalReorder
        ));
    }
}
