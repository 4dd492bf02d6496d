//! Context reduction `→(Σ;R)` over interned types.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use magpi_core::{
    congruence::canonical_sb_type, BasicKind, Bisim, BufEntryTy, CongruenceMode, Endpoint, Ident, Label, Node, NodeId, PayloadType,
    Process, Reliability, Role, SbType, SbTypeExpr, TypeContext, TypeDefs, TypeError, TypeGraph,
};
use serde::{Deserialize, Serialize};

/// `α ::= s:p!q:m(T) | s:p,q:m | s:p⊙`
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Send {
        session: Ident,
        from: Role,
        to: Role,
        label: Label,
        payload: PayloadType,
    },
    /// `from`'s entry consumed by `to`.
    Com {
        session: Ident,
        from: Role,
        to: Role,
        label: Label,
    },
    Timeout { session: Ident, role: Role },
}

impl Action {
    pub fn session(&self) -> &Ident {
        match self {
            Action::Send { session, .. } | Action::Com { session, .. } | Action::Timeout { session, .. } => session,
        }
    }

    pub fn is_timeout(&self) -> bool {
        matches!(self, Action::Timeout { .. })
    }

    /// `s:p!q:m(T)`, `s:p,q:m` or `s:p:timeout`.
    pub fn render(&self, g: &TypeGraph) -> String {
        match self {
            Action::Send {
                session,
                from,
                to,
                label,
                payload,
            } => match payload {
                PayloadType::Basic(BasicKind::Unit) => format!("{session}:{from}!{to}:{label}()"),
                p => format!("{session}:{from}!{to}:{label}({})", g.render_payload(*p)),
            },
            Action::Com {
                session,
                from,
                to,
                label,
            } => format!("{session}:{from},{to}:{label}"),
            Action::Timeout { session, role } => format!("{session}:{role}:timeout"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// Send, communication and timeout steps.
    #[default]
    Full,
    /// `→Σ`: timeouts suppressed.
    SendComOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Traversal {
    #[default]
    Bfs,
    Dfs,
}

/// How `|M|` is measured for buffer limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BufferMeasure {
    /// Longest per-recipient subsequence.
    #[default]
    #[serde(rename = "per-recipient")]
    PerRecipient,
    #[serde(rename = "total")]
    Total,
}

impl BufferMeasure {
    pub fn of(self, t: &SbType) -> usize {
        match self {
            BufferMeasure::PerRecipient => t.channel_len(),
            BufferMeasure::Total => t.buffer.len(),
        }
    }
}

/// What happens when a successor reaches `max_buffer_len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum BoundPolicy {
    /// Stop with [`crate::ExceededKind::BufferLen`].
    #[default]
    Stop,
    /// Leave the successor out and keep going; the result is the graph of
    /// contexts below the bound.
    Prune,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreLimits {
    /// At least 1.
    pub max_states: usize,
    /// Exploration stops at the first state whose measure reaches this.
    pub max_buffer_len: Option<usize>,
    pub mode: CongruenceMode,
    pub relation: Relation,
    pub traversal: Traversal,
    pub measure: BufferMeasure,
    pub on_bound: BoundPolicy,
}

impl Default for ExploreLimits {
    fn default() -> ExploreLimits {
        ExploreLimits {
            max_states: 100_000,
            max_buffer_len: None,
            mode: CongruenceMode::TotalReorder,
            relation: Relation::Full,
            traversal: Traversal::Bfs,
            measure: BufferMeasure::PerRecipient,
            on_bound: BoundPolicy::Stop,
        }
    }
}

/// A typing context to explore, together with the graph its types live in.
#[derive(Clone, Debug)]
pub struct Model {
    pub graph: TypeGraph,
    pub bisim: Bisim,
    pub initial: TypeContext,
    pub sigma: BTreeSet<Ident>,
    pub reliability: Reliability,
}

impl Model {
    /// `graph` must already contain every type of `initial`; nothing is
    /// interned afterwards.
    pub fn new(graph: TypeGraph, initial: TypeContext, sigma: BTreeSet<Ident>, reliability: Reliability) -> Model {
        let bisim = Bisim::compute(&graph);
        Model {
            graph,
            bisim,
            initial,
            sigma,
            reliability,
        }
    }

    /// One context out of restriction bindings; `Σ` is their sessions.
    pub fn from_bindings<'a>(
        defs: &TypeDefs,
        bindings: impl IntoIterator<Item = (&'a Ident, &'a BTreeMap<Role, SbTypeExpr>)>,
        reliability: Reliability,
    ) -> Result<Model, TypeError> {
        let mut graph = TypeGraph::with_defs(defs.clone());
        let mut ctx = TypeContext::new();
        let mut sigma = BTreeSet::new();
        for (s, binding) in bindings {
            sigma.insert(s.clone());
            for (r, t) in binding {
                ctx.endpoints
                    .insert(Endpoint::new(s.clone(), r.clone()), SbType::intern(&mut graph, t)?);
            }
        }
        Ok(Model::new(graph, ctx, sigma, reliability))
    }

    /// The context of every restriction at the top of `system`, that is not
    /// under a prefix or a choice.
    pub fn from_system(defs: &TypeDefs, system: &Process, reliability: Reliability) -> Result<Model, TypeError> {
        Model::from_bindings(defs, top_restrictions(system), reliability)
    }

    /// Same graph with a different reliability map.
    pub fn with_reliability(&self, reliability: Reliability) -> Model {
        Model {
            reliability,
            ..self.clone()
        }
    }

    /// `R_F` over every role mentioned in the initial context.
    pub fn fully_reliable(&self) -> Model {
        let roles: BTreeSet<Role> = self.initial.roles().cloned().collect();
        self.with_reliability(Reliability::full(&roles))
    }

    pub fn canonical(&self, ctx: &TypeContext, mode: CongruenceMode) -> TypeContext {
        TypeContext {
            vars: ctx.vars.iter().map(|(x, t)| (x.clone(), self.bisim.rep_payload(*t))).collect(),
            endpoints: ctx
                .endpoints
                .iter()
                .map(|(e, t)| (e.clone(), canonical_sb_type(&self.bisim, t, mode)))
                .collect(),
        }
    }

    /// `[Γ-⊙]` premise: some arm source is outside `R(role)`.
    pub fn timeout_enabled(&self, role: &Role, arms: &[magpi_core::Arm]) -> bool {
        arms.iter().any(|a| !self.reliability.reliable(role, &a.role))
    }

    /// The enabled set of `ctx`, targets canonical under `limits.mode`, in a
    /// deterministic order without duplicates.
    pub fn transitions(&self, ctx: &TypeContext, limits: &ExploreLimits) -> Vec<(Action, TypeContext)> {
        let mut out = BTreeSet::new();
        for (ep, t) in &ctx.endpoints {
            if !self.sigma.contains(&ep.session) {
                continue;
            }
            let Some(s) = t.session else { continue };
            match self.graph.head_node(s) {
                Node::End | Node::Rec { .. } | Node::Ref { .. } => {}
                Node::Select { arms } => {
                    for a in arms {
                        let mut next = ctx.clone();
                        let b = next.endpoints.get_mut(ep).expect("bound");
                        b.buffer.push(BufEntryTy::new(a.role.clone(), a.label.clone(), a.payload));
                        b.session = Some(a.cont);
                        let action = Action::Send {
                            session: ep.session.clone(),
                            from: ep.role.clone(),
                            to: a.role.clone(),
                            label: a.label.clone(),
                            payload: self.bisim.rep_payload(a.payload),
                        };
                        out.insert((action, self.canonical(&next, limits.mode)));
                    }
                }
                Node::Branch { arms, timeout } => {
                    for a in arms {
                        let sender = Endpoint::new(ep.session.clone(), a.role.clone());
                        if sender == *ep {
                            continue;
                        }
                        let Some(st) = ctx.endpoints.get(&sender) else { continue };
                        for i in self.consumable(&st.buffer, &ep.role, &a.label, a.payload, limits.mode) {
                            let mut next = ctx.clone();
                            next.endpoints.get_mut(&sender).expect("bound").buffer.remove(i);
                            next.endpoints.get_mut(ep).expect("bound").session = Some(a.cont);
                            let action = Action::Com {
                                session: ep.session.clone(),
                                from: a.role.clone(),
                                to: ep.role.clone(),
                                label: a.label.clone(),
                            };
                            out.insert((action, self.canonical(&next, limits.mode)));
                        }
                    }
                    if let Some(t) = timeout {
                        if limits.relation == Relation::Full && self.timeout_enabled(&ep.role, arms) {
                            let mut next = ctx.clone();
                            next.endpoints.get_mut(ep).expect("bound").session = Some(*t);
                            let action = Action::Timeout {
                                session: ep.session.clone(),
                                role: ep.role.clone(),
                            };
                            out.insert((action, self.canonical(&next, limits.mode)));
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Indices of entries of a sender's buffer that `to` may consume with
    /// the arm `label(payload)`: any matching one under total reordering,
    /// only the channel head under TCP.
    fn consumable(
        &self,
        buffer: &[BufEntryTy],
        to: &Role,
        label: &Label,
        payload: PayloadType,
        mode: CongruenceMode,
    ) -> Vec<usize> {
        let matches = |e: &BufEntryTy| &e.label == label && self.bisim.eq_payload(e.payload, payload);
        let mut channel = buffer.iter().enumerate().filter(|(_, e)| &e.to == to);
        match mode {
            CongruenceMode::TcpFifo => channel.next().filter(|(_, e)| matches(e)).map(|(i, _)| i).into_iter().collect(),
            CongruenceMode::TotalReorder => {
                let mut seen = BTreeSet::new();
                channel
                    .filter(|(_, e)| matches(e) && seen.insert((*e).clone()))
                    .map(|(i, _)| i)
                    .collect()
            }
        }
    }

    pub fn max_buffer(&self, ctx: &TypeContext, measure: BufferMeasure) -> usize {
        ctx.endpoints.values().map(|t| measure.of(t)).max().unwrap_or(0)
    }

    /// `Γ = Γ0, Γ1` with `end(Γ0)` and `gc(Γ1)`. Session components go to the
    /// end part unless a buffered channel payload absorbs them.
    pub fn end_gc_split(&self, ctx: &TypeContext) -> bool {
        let vars_ok = ctx.vars.values().all(|t| match t {
            PayloadType::Basic(_) => true,
            PayloadType::Session(s) => self.graph.is_end(*s),
        });
        if !vars_ok {
            return false;
        }
        let sessions: Vec<NodeId> = ctx.endpoints.values().filter_map(|t| t.session).collect();
        let (mut ends, mut live): (Vec<NodeId>, Vec<NodeId>) = sessions.into_iter().partition(|s| self.graph.is_end(*s));
        for e in ctx.endpoints.values().flat_map(|t| &t.buffer) {
            if let PayloadType::Session(carried) = e.payload {
                let pool = if self.graph.is_end(carried) { &mut ends } else { &mut live };
                match pool.iter().position(|&n| self.bisim.equiv(n, carried)) {
                    Some(i) => {
                        pool.swap_remove(i);
                    }
                    None => return false,
                }
            }
        }
        live.is_empty()
    }

    pub fn buffers_empty(ctx: &TypeContext) -> bool {
        ctx.endpoints.values().all(|t| t.buffer.is_empty())
    }

    pub fn render(&self, ctx: &TypeContext) -> String {
        ctx.render(&self.graph)
    }
}

pub fn top_restrictions(p: &Process) -> Vec<(&Ident, &BTreeMap<Role, SbTypeExpr>)> {
    fn go<'a>(p: &'a Process, out: &mut Vec<(&'a Ident, &'a BTreeMap<Role, SbTypeExpr>)>) {
        match p {
            Process::Restriction {
                session, binding, body, ..
            } => {
                out.push((session, binding));
                go(body, out);
            }
            Process::Par(a, b) => {
                go(a, out);
                go(b, out);
            }
            Process::Def { body, .. } => go(body, out),
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(p, &mut out);
    out
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Full => "full",
            Relation::SendComOnly => "sendcom",
        })
    }
}
