//! Context properties decided on the reachable graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use magpi_core::{BufEntryTy, CongruenceMode, Endpoint, Node, NodeId, Role, TypeContext};
use magpi_lts::{Action, ExceededKind, ExploreLimits, Explored, LtsGraph, Model, Relation, StateId};

use crate::verdict::Verdict;

/// Entries of `sender`'s buffer that `to` could consume as `label`, under
/// `mode`: all of them with total reordering, the channel head under TCP.
fn visible<'a>(
    ctx: &'a TypeContext,
    sender: &Endpoint,
    to: &'a Role,
    label: &'a magpi_core::Label,
    mode: CongruenceMode,
) -> Vec<&'a BufEntryTy> {
    let Some(t) = ctx.endpoints.get(sender) else { return Vec::new() };
    let mut channel = t.buffer.iter().filter(move |e| &e.to == to);
    match mode {
        CongruenceMode::TotalReorder => channel.filter(|e| &e.label == label).collect(),
        CongruenceMode::TcpFifo => channel.next().filter(|e| &e.label == label).into_iter().collect(),
    }
}

/// SP1, SP2 and SP-Com on one context.
pub fn safety_violation(model: &Model, ctx: &TypeContext, mode: CongruenceMode) -> Option<&'static str> {
    for (ep, t) in &ctx.endpoints {
        let Some(s) = t.session else { continue };
        let Node::Branch { arms, timeout } = model.graph.head_node(s) else { continue };
        let unreliable = model.timeout_enabled(&ep.role, arms);
        if timeout.is_none() && unreliable {
            return Some("SP1");
        }
        if timeout.is_some() && !unreliable {
            return Some("SP2");
        }
        for a in arms {
            let sender = Endpoint::new(ep.session.clone(), a.role.clone());
            if visible(ctx, &sender, &ep.role, &a.label, mode)
                .iter()
                .any(|e| !model.bisim.eq_payload(e.payload, a.payload))
            {
                return Some("SPCom");
            }
        }
    }
    None
}

/// Sufficient condition for safety of every reachable context, read off the
/// type graph: SP1 and SP2 hold at every branch position an endpoint can
/// reach, and every entry a sender can ever emit towards a branch arm with
/// that label carries the arm's payload type.
pub fn static_safety(model: &Model) -> bool {
    let ctx = &model.initial;
    let emitted = |sender: &Endpoint, to: &Role, label: &magpi_core::Label| -> Vec<magpi_core::PayloadType> {
        let Some(t) = ctx.endpoints.get(sender) else { return Vec::new() };
        let mut out: Vec<_> = t
            .buffer
            .iter()
            .filter(|e| &e.to == to && &e.label == label)
            .map(|e| e.payload)
            .collect();
        for n in t.session.map(|s| model.graph.reachable(s)).unwrap_or_default() {
            if let Node::Select { arms } = model.graph.node(n) {
                out.extend(arms.iter().filter(|a| &a.role == to && &a.label == label).map(|a| a.payload));
            }
        }
        out
    };
    for (ep, t) in &ctx.endpoints {
        let Some(s) = t.session else { continue };
        for n in model.graph.reachable(s) {
            let Node::Branch { arms, timeout } = model.graph.node(n) else { continue };
            if timeout.is_some() != model.timeout_enabled(&ep.role, arms) {
                return false;
            }
            for a in arms {
                let sender = Endpoint::new(ep.session.clone(), a.role.clone());
                if emitted(&sender, &ep.role, &a.label)
                    .into_iter()
                    .any(|p| !model.bisim.eq_payload(p, a.payload))
                {
                    return false;
                }
            }
        }
    }
    true
}

/// First violating state in discovery order (shortest witness under BFS),
/// then the state that tripped a limit.
fn scan(explored: &Explored, bad: impl Fn(&TypeContext) -> Option<&'static str>) -> Verdict {
    for (id, ctx) in explored.lts.states.iter().enumerate() {
        if let Some(reason) = bad(ctx) {
            return Verdict::Violated {
                witness: explored.lts.path_to(id),
                reason,
            };
        }
    }
    match &explored.exceeded {
        None => Verdict::Holds,
        Some(ex) => match bad(&ex.state) {
            Some(reason) => Verdict::Violated {
                witness: ex.witness.clone(),
                reason,
            },
            None => Verdict::Inconclusive(ex.kind.clone()),
        },
    }
}

/// `φs` on every reachable context.
pub fn check_safety(model: &Model, limits: &ExploreLimits) -> Verdict {
    if static_safety(model) {
        return Verdict::Holds;
    }
    let explored = model.explore(limits);
    safety(model, &explored, limits.mode)
}

pub fn safety(model: &Model, explored: &Explored, mode: CongruenceMode) -> Verdict {
    scan(explored, |c| safety_violation(model, c, mode))
}

/// Limits for the TCP-compliant subset: no timeouts, per-channel FIFO.
pub fn tcp_limits(limits: &ExploreLimits) -> ExploreLimits {
    ExploreLimits {
        relation: Relation::SendComOnly,
        mode: CongruenceMode::TcpFifo,
        ..*limits
    }
}

/// Channel heads towards a branch carry an arm's label and payload type.
pub fn tcp_order_violation(model: &Model, ctx: &TypeContext) -> Option<&'static str> {
    for (ep, t) in &ctx.endpoints {
        let Some(s) = t.session else { continue };
        let Node::Branch { arms, .. } = model.graph.head_node(s) else { continue };
        let sources: BTreeSet<&Role> = arms.iter().map(|a| &a.role).collect();
        for q in sources {
            let sender = Endpoint::new(ep.session.clone(), q.clone());
            let Some(head) = ctx.endpoints.get(&sender).and_then(|b| b.buffer.iter().find(|e| e.to == ep.role))
            else {
                continue;
            };
            let matched = arms
                .iter()
                .any(|a| &a.role == q && a.label == head.label && model.bisim.eq_payload(a.payload, head.payload));
            if !matched {
                return Some("TcpOrder");
            }
        }
    }
    None
}

fn tcp_violation(model: &Model, ctx: &TypeContext) -> Option<&'static str> {
    let timeout = ctx.endpoints.values().filter_map(|t| t.session).any(|s| {
        matches!(model.graph.head_node(s), Node::Branch { timeout: Some(_), .. })
    });
    if timeout {
        return Some("TcpTimeout");
    }
    tcp_order_violation(model, ctx)
}

/// Head-only label and payload agreement over `→Σ` with TCP congruence.
pub fn check_tcp_ordering(model: &Model, limits: &ExploreLimits) -> Verdict {
    let explored = model.explore(&tcp_limits(limits));
    scan(&explored, |c| tcp_order_violation(model, c))
}

/// `φTCP`: [`check_tcp_ordering`], and no reachable branch carries a
/// failure-handling timeout.
pub fn check_tcp_safety(model: &Model, limits: &ExploreLimits) -> Verdict {
    let explored = model.explore(&tcp_limits(limits));
    tcp_safety(model, &explored)
}

pub fn tcp_safety(model: &Model, explored: &Explored) -> Verdict {
    scan(explored, |c| tcp_violation(model, c))
}

/// Violated at the first expanded state failing `bad`; Inconclusive when the
/// graph is truncated and no expanded state fails.
fn scan_expanded(explored: &Explored, bad: impl Fn(StateId) -> Option<&'static str>) -> Verdict {
    let lts = &explored.lts;
    for id in 0..lts.len() {
        if lts.flags[id].expanded {
            if let Some(reason) = bad(id) {
                return Verdict::Violated {
                    witness: lts.path_to(id),
                    reason,
                };
            }
        }
    }
    match &explored.exceeded {
        None => Verdict::Holds,
        Some(ex) => Verdict::Inconclusive(ex.kind.clone()),
    }
}

/// Stuck contexts split into an `end` part and a `gc` part.
pub fn deadlock_free(explored: &Explored) -> Verdict {
    let f = &explored.lts.flags;
    scan_expanded(explored, |id| (f[id].stuck && !f[id].end_partition).then_some("Deadlock"))
}

pub fn check_deadlock_free(model: &Model, limits: &ExploreLimits) -> Verdict {
    deadlock_free(&model.explore(limits))
}

/// Strongly connected components (iterative Tarjan); `comp[v]` numbers them.
fn components(lts: &LtsGraph) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let n = lts.len();
    let (mut index, mut low, mut comp) = (vec![UNSEEN; n], vec![0; n], vec![UNSEEN; n]);
    let mut on_stack = vec![false; n];
    let (mut next, mut ncomp) = (0, 0);
    let mut stack = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(StateId, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (u, ref mut i)) = call.last_mut() {
            if let Some(&e) = lts.out[u].get(*i) {
                *i += 1;
                let v = lts.edges[e].to;
                if index[v] == UNSEEN {
                    index[v] = next;
                    low[v] = next;
                    next += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    call.push((v, 0));
                } else if on_stack[v] {
                    low[u] = low[u].min(index[v]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[u]);
            }
            if low[u] == index[u] {
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    comp[w] = ncomp;
                    if w == u {
                        break;
                    }
                }
                ncomp += 1;
            }
        }
    }
    comp
}

/// The earliest-discovered state lying on a cycle, with the shortest cycle
/// through it as edge indices.
fn find_cycle(lts: &LtsGraph) -> Option<(StateId, Vec<usize>)> {
    let comp = components(lts);
    let mut size = vec![0usize; lts.len()];
    for &c in &comp {
        size[c] += 1;
    }
    let cyclic = |v: StateId| size[comp[v]] > 1 || lts.successors(v).any(|e| e.to == v);
    let entry = (0..lts.len()).find(|&v| cyclic(v))?;
    // BFS inside the component back to `entry`.
    let mut via: Vec<Option<usize>> = vec![None; lts.len()];
    let mut queue = VecDeque::from([entry]);
    while let Some(u) = queue.pop_front() {
        for &e in &lts.out[u] {
            let v = lts.edges[e].to;
            if comp[v] != comp[entry] {
                continue;
            }
            if v == entry {
                let mut cycle = vec![e];
                let mut at = u;
                while at != entry {
                    let back = via[at].expect("visited");
                    cycle.push(back);
                    at = lts.edges[back].from;
                }
                cycle.reverse();
                return Some((entry, cycle));
            }
            if via[v].is_none() {
                via[v] = Some(e);
                queue.push_back(v);
            }
        }
    }
    unreachable!("a cyclic state reaches itself")
}

/// Deadlock-free, finite and acyclic. A cycle is reported as a lasso.
pub fn terminating(explored: &Explored) -> Verdict {
    let d = deadlock_free(explored);
    if d.violated() {
        return d;
    }
    let lts = &explored.lts;
    if let Some((entry, cycle)) = find_cycle(lts) {
        let mut witness = lts.path_to(entry);
        witness.extend(cycle.into_iter().map(|e| lts.edges[e].action.clone()));
        return Verdict::Violated {
            witness,
            reason: "Cycle",
        };
    }
    d
}

pub fn check_terminating(model: &Model, limits: &ExploreLimits) -> Verdict {
    terminating(&model.explore(limits))
}

/// Every reachable context can move.
pub fn never_terminating(explored: &Explored) -> Verdict {
    let f = &explored.lts.flags;
    scan_expanded(explored, |id| f[id].stuck.then_some("Terminal"))
}

pub fn check_never_terminating(model: &Model, limits: &ExploreLimits) -> Verdict {
    never_terminating(&model.explore(limits))
}

/// From every context where an endpoint waits at a timeout-less branch, a
/// communication into that endpoint at that branch stays reachable.
pub fn live(model: &Model, explored: &Explored) -> Verdict {
    let lts = &explored.lts;
    if let Some(ex) = &explored.exceeded {
        return Verdict::Inconclusive(ex.kind.clone());
    }
    let mut waiting: BTreeMap<(Endpoint, NodeId), Vec<StateId>> = BTreeMap::new();
    for (id, ctx) in lts.states.iter().enumerate() {
        for (ep, t) in &ctx.endpoints {
            let Some(s) = t.session else { continue };
            if !model.sigma.contains(&ep.session) {
                continue;
            }
            if let Node::Branch { timeout: None, .. } = model.graph.head_node(s) {
                waiting.entry((ep.clone(), s)).or_default().push(id);
            }
        }
    }
    let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); lts.len()];
    for e in &lts.edges {
        rev[e.to].push(e.from);
    }
    let mut first_bad: Option<StateId> = None;
    for ((ep, _), states) in &waiting {
        let mut can = vec![false; lts.len()];
        let mut queue = VecDeque::new();
        for &id in states {
            let fed = lts.successors(id).any(|e| match &e.action {
                Action::Com { session, to, .. } => session == &ep.session && to == &ep.role,
                _ => false,
            });
            if fed && !can[id] {
                can[id] = true;
                queue.push_back(id);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &u in &rev[v] {
                if !can[u] {
                    can[u] = true;
                    queue.push_back(u);
                }
            }
        }
        if let Some(&bad) = states.iter().find(|&&id| !can[id]) {
            first_bad = Some(first_bad.map_or(bad, |b| b.min(bad)));
        }
    }
    match first_bad {
        Some(id) => Verdict::Violated {
            witness: lts.path_to(id),
            reason: "Starvation",
        },
        None => Verdict::Holds,
    }
}

pub fn check_live(model: &Model, limits: &ExploreLimits) -> Verdict {
    live(model, &model.explore(limits))
}

/// Stuck contexts have empty buffers. Meant for a fully reliable model.
pub fn comm_safe(explored: &Explored) -> Verdict {
    let f = &explored.lts.flags;
    scan_expanded(explored, |id| (f[id].stuck && !f[id].buffers_empty).then_some("OrphanMessage"))
}

/// Communication safety under `R_F`.
pub fn check_comm_safe_rf(model: &Model, limits: &ExploreLimits) -> Verdict {
    comm_safe(&model.fully_reliable().explore(limits))
}

/// Every reachable buffer type is shorter than `k`. Decided by a bounded
/// exploration, so only the state cap can make it inconclusive.
pub fn check_bound_k(model: &Model, k: usize, limits: &ExploreLimits) -> Verdict {
    bound_k(&model.explore(&bound_limits(k, limits)))
}

pub fn bound_limits(k: usize, limits: &ExploreLimits) -> ExploreLimits {
    ExploreLimits {
        max_buffer_len: Some(k.max(1)),
        ..*limits
    }
}

pub fn bound_k(explored: &Explored) -> Verdict {
    match &explored.exceeded {
        None => Verdict::Holds,
        Some(ex) => match ex.kind {
            ExceededKind::BufferLen(_) => Verdict::Violated {
                witness: ex.witness.clone(),
                reason: "BufferBound",
            },
            ExceededKind::MaxStates(_) => Verdict::Inconclusive(ex.kind.clone()),
        },
    }
}

/// Sweeps `k = 1..=k_max`; the minimal `k` that holds, if any.
pub fn check_bounded(model: &Model, k_max: usize, limits: &ExploreLimits) -> (Verdict, Option<usize>) {
    for k in 1..=k_max.max(1) {
        match check_bound_k(model, k, limits) {
            Verdict::Holds => return (Verdict::Holds, Some(k)),
            v @ Verdict::Inconclusive(_) => return (v, None),
            Verdict::Violated { .. } => {}
        }
    }
    (Verdict::Inconclusive(ExceededKind::BufferLen(k_max.max(1))), None)
}
