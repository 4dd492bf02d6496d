//! Runtime configurations: a process flattened into active threads, one
//! record per restricted session and the hoisted local definitions.

use std::collections::BTreeMap;

use magpi_core::{
    canonical_queue, normal_form, BufEntryExpr, CongruenceMode, Ident, Message, ProcDecl, Process, Role, SbType,
    SbTypeExpr, Span, TypeGraph,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Session {
    pub name: Ident,
    /// The restriction's annotation, advanced along with the process.
    pub types: BTreeMap<Role, SbType>,
    /// `None` until the session's buffer has been seen.
    pub queue: Option<Vec<Message>>,
    pub span: Span,
    pub buffer_span: Span,
}

/// Invariant: every thread is a prefix, a choice or a call; parallel
/// compositions, restrictions, definitions, buffers and `0` are absorbed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub sessions: Vec<Session>,
    pub threads: Vec<Process>,
    pub defs: Vec<ProcDecl>,
    pub step: usize,
}

impl Config {
    pub fn session(&self, name: &Ident) -> Option<&Session> {
        self.sessions.iter().find(|s| &s.name == name)
    }

    pub(crate) fn session_mut(&mut self, name: &Ident) -> Option<&mut Session> {
        self.sessions.iter_mut().find(|s| &s.name == name)
    }

    pub fn queue(&self, name: &Ident) -> &[Message] {
        self.session(name).and_then(|s| s.queue.as_deref()).unwrap_or(&[])
    }

    pub fn buffered(&self) -> usize {
        self.sessions.iter().map(|s| s.queue.as_ref().map_or(0, Vec::len)).sum()
    }

    /// The configuration as a closed process. Restrictions are outermost in
    /// the order sessions were opened, inside the hoisted definitions.
    pub fn process(&self, g: &TypeGraph) -> Process {
        self.assemble(Some(g), &self.threads)
    }

    pub(crate) fn assemble(&self, g: Option<&TypeGraph>, threads: &[Process]) -> Process {
        let mut parts: Vec<Process> = threads.to_vec();
        if parts.is_empty() {
            parts.push(Process::Inaction);
        }
        for s in &self.sessions {
            if let Some(q) = &s.queue {
                parts.push(Process::Buffer {
                    session: s.name.clone(),
                    queue: q.clone(),
                    span: s.buffer_span,
                });
            }
        }
        let mut p = Process::par_all(parts);
        for s in self.sessions.iter().rev() {
            p = Process::Restriction {
                session: s.name.clone(),
                binding: match g {
                    Some(g) => s.types.iter().map(|(r, t)| (r.clone(), sb_expr(g, t))).collect(),
                    None => BTreeMap::new(),
                },
                body: Box::new(p),
                span: s.span,
            };
        }
        for d in self.defs.iter().rev() {
            p = Process::Def {
                decl: Box::new(d.clone()),
                body: Box::new(p),
            };
        }
        p
    }

    /// Identifies configurations up to thread order and the reorder
    /// congruence; annotations are ignored.
    pub fn key(&self, mode: CongruenceMode) -> String {
        let mut threads: Vec<String> = self.threads.iter().map(|t| t.to_string()).collect();
        threads.sort();
        let mut out = threads.join(" | ");
        for s in &self.sessions {
            out.push_str(&format!(" ; {}:[", s.name));
            if let Some(q) = &s.queue {
                let q: Vec<String> = canonical_queue(q, mode).iter().map(|m| m.to_string()).collect();
                out.push_str(&q.join(", "));
            }
            out.push(']');
        }
        out
    }

    /// `≡ 0` once the threads in `frozen` are discarded. Definitions are
    /// ignored, since `def D in 0 ≡ 0`.
    pub fn is_inaction_without(&self, frozen: &[usize], mode: CongruenceMode) -> bool {
        let live: Vec<Process> = self
            .threads
            .iter()
            .enumerate()
            .filter(|(i, _)| !frozen.contains(i))
            .map(|(_, t)| t.clone())
            .collect();
        let mut nf = normal_form(&self.assemble(None, &live), mode);
        nf.defs.clear();
        nf.is_inaction()
    }
}

pub(crate) fn sb_expr(g: &TypeGraph, t: &SbType) -> SbTypeExpr {
    SbTypeExpr {
        buffer: (!t.buffer.is_empty()).then(|| {
            t.buffer
                .iter()
                .map(|e| BufEntryExpr {
                    to: e.to.clone(),
                    label: e.label.clone(),
                    payload: g.payload_expr(e.payload),
                })
                .collect()
        }),
        session: t.session.map(|s| g.to_expr(s)),
    }
}
