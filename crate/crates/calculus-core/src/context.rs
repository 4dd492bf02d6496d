//! Typing contexts over interned types, with the `end`, `gc` and message
//! insertion predicates.

use std::collections::BTreeMap;

use crate::bisim::Bisim;
use crate::graph::{NodeId, PayloadType, TypeError, TypeGraph};
use crate::names::{Endpoint, Ident, Label, Role};
use crate::typeexpr::{BufEntryExpr, SbTypeExpr};
use crate::value::BasicKind;

/// `q!m(T)` in a buffer type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BufEntryTy {
    pub to: Role,
    pub label: Label,
    pub payload: PayloadType,
}

/// `⟨M;S⟩`. An empty `buffer` stands for an absent buffer component.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SbType {
    pub buffer: Vec<BufEntryTy>,
    pub session: Option<NodeId>,
}

impl SbType {
    pub fn session(s: NodeId) -> SbType {
        SbType {
            buffer: Vec::new(),
            session: Some(s),
        }
    }

    pub fn buffer(entries: Vec<BufEntryTy>) -> SbType {
        SbType {
            buffer: entries,
            session: None,
        }
    }

    pub fn intern(g: &mut TypeGraph, e: &SbTypeExpr) -> Result<SbType, TypeError> {
        let buffer = match &e.buffer {
            Some(entries) => entries
                .iter()
                .map(|b| BufEntryTy::intern(g, b))
                .collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        let session = match &e.session {
            Some(s) => Some(g.intern(s)?),
            None => None,
        };
        Ok(SbType { buffer, session })
    }

    /// Length of the longest per-recipient subsequence of the buffer.
    pub fn channel_len(&self) -> usize {
        let mut counts: BTreeMap<&Role, usize> = BTreeMap::new();
        for e in &self.buffer {
            *counts.entry(&e.to).or_default() += 1;
        }
        counts.into_values().max().unwrap_or(0)
    }

    pub fn render(&self, g: &TypeGraph) -> String {
        let buf = || {
            if self.buffer.is_empty() {
                "eps".to_string()
            } else {
                self.buffer.iter().map(|e| e.render(g)).collect::<Vec<_>>().join(" . ")
            }
        };
        match (self.buffer.is_empty(), self.session) {
            (true, Some(s)) => g.render(s),
            (_, Some(s)) => format!("<{}; {}>", buf(), g.render(s)),
            (_, None) => format!("<{}>", buf()),
        }
    }
}

impl BufEntryTy {
    pub fn new(to: impl Into<Role>, label: impl Into<Label>, payload: PayloadType) -> BufEntryTy {
        BufEntryTy {
            to: to.into(),
            label: label.into(),
            payload,
        }
    }

    pub fn intern(g: &mut TypeGraph, e: &BufEntryExpr) -> Result<BufEntryTy, TypeError> {
        Ok(BufEntryTy {
            to: e.to.clone(),
            label: e.label.clone(),
            payload: g.intern_payload(&e.payload)?,
        })
    }

    pub fn render(&self, g: &TypeGraph) -> String {
        match self.payload {
            PayloadType::Basic(BasicKind::Unit) => format!("{}!{}()", self.to, self.label),
            p => format!("{}!{}({})", self.to, self.label, g.render_payload(p)),
        }
    }
}

/// `Γ`: variable and endpoint bindings.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TypeContext {
    pub vars: BTreeMap<Ident, PayloadType>,
    pub endpoints: BTreeMap<Endpoint, SbType>,
}

impl TypeContext {
    pub fn new() -> TypeContext {
        TypeContext::default()
    }

    pub fn with_endpoint(mut self, e: Endpoint, t: SbType) -> TypeContext {
        self.endpoints.insert(e, t);
        self
    }

    pub fn with_var(mut self, x: Ident, t: PayloadType) -> TypeContext {
        self.vars.insert(x, t);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.endpoints.is_empty()
    }

    pub fn roles(&self) -> impl Iterator<Item = &Role> {
        self.endpoints
            .iter()
            .flat_map(|(e, t)| std::iter::once(&e.role).chain(t.buffer.iter().map(|b| &b.to)))
    }

    pub fn render(&self, g: &TypeGraph) -> String {
        let mut parts: Vec<String> = self
            .vars
            .iter()
            .map(|(x, t)| format!("{x}: {}", g.render_payload(*t)))
            .collect();
        parts.extend(self.endpoints.iter().map(|(e, t)| format!("{e}: {}", t.render(g))));
        format!("{{{}}}", parts.join(", "))
    }
}

/// `end(Γ)`: variables are basic or `end`; endpoints are `end` with no buffer.
pub fn end_predicate(g: &TypeGraph, ctx: &TypeContext) -> bool {
    let vars_ok = ctx.vars.values().all(|t| match t {
        PayloadType::Basic(_) => true,
        PayloadType::Session(s) => g.is_end(*s),
    });
    vars_ok
        && ctx
            .endpoints
            .values()
            .all(|t| t.buffer.is_empty() && t.session.is_some_and(|s| g.is_end(s)))
}

/// `gc(Γ)`: buffer types whose entries carry basic values, or carry an
/// endpoint whose session binding is elsewhere in `Γ` and absorbed by it.
pub fn gc_predicate(bisim: &Bisim, ctx: &TypeContext) -> bool {
    if !ctx.vars.is_empty() {
        return false;
    }
    let mut pool: Vec<NodeId> = ctx.endpoints.values().filter_map(|t| t.session).collect();
    for t in ctx.endpoints.values() {
        for e in &t.buffer {
            if let PayloadType::Session(s) = e.payload {
                match pool.iter().position(|&p| bisim.equiv(p, s)) {
                    Some(i) => {
                        pool.swap_remove(i);
                    }
                    None => return false,
                }
            }
        }
    }
    pool.is_empty()
}

/// `s[p]:q!m(T)·ε ⇝ Γ`: append to the buffer component of `s[p]`, or bind a
/// fresh singleton buffer. Undefined on a binding with only a session part.
pub fn insert_message(endpoint: &Endpoint, entry: BufEntryTy, into: &TypeContext) -> Option<TypeContext> {
    let mut out = into.clone();
    match out.endpoints.get_mut(endpoint) {
        Some(t) if t.buffer.is_empty() && t.session.is_some() => None,
        Some(t) => {
            t.buffer.push(entry);
            Some(out)
        }
        None => {
            out.endpoints.insert(endpoint.clone(), SbType::buffer(vec![entry]));
            Some(out)
        }
    }
}
