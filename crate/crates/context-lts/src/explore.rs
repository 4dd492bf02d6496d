//! Reachable closure of a context under `→(Σ;R)`.

use std::collections::VecDeque;

use indexmap::IndexSet;
use magpi_core::TypeContext;

use crate::model::{Action, BoundPolicy, ExploreLimits, Model, Traversal};

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: StateId,
    pub action: Action,
    pub to: StateId,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StateFlags {
    /// Successors have been computed. Only false on a truncated graph.
    pub expanded: bool,
    /// Expanded with no successor, counting pruned ones.
    pub stuck: bool,
    pub buffers_empty: bool,
    pub end_partition: bool,
}

/// States are canonical contexts, numbered in discovery order; state 0 is
/// the initial one.
#[derive(Clone, Debug, Default)]
pub struct LtsGraph {
    pub states: IndexSet<TypeContext>,
    pub edges: Vec<Edge>,
    pub flags: Vec<StateFlags>,
    /// Discovering edge of each non-initial state.
    pub parent: Vec<Option<usize>>,
    /// Outgoing edge indices.
    pub out: Vec<Vec<usize>>,
}

impl LtsGraph {
    pub const INITIAL: StateId = 0;

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: StateId) -> &TypeContext {
        &self.states[id]
    }

    pub fn successors(&self, id: StateId) -> impl Iterator<Item = &Edge> + '_ {
        self.out[id].iter().map(|&e| &self.edges[e])
    }

    /// Actions along discovering edges from the initial state to `id`.
    pub fn path_to(&self, id: StateId) -> Vec<Action> {
        let mut path = Vec::new();
        let mut at = id;
        while let Some(e) = self.parent[at] {
            path.push(self.edges[e].action.clone());
            at = self.edges[e].from;
        }
        path.reverse();
        path
    }

    /// `states: N, edges: M`
    pub fn summary(&self) -> String {
        format!("states: {}, edges: {}", self.len(), self.edges.len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExceededKind {
    MaxStates(usize),
    BufferLen(usize),
}

#[derive(Clone, Debug)]
pub struct Exceeded {
    pub kind: ExceededKind,
    pub witness: Vec<Action>,
    /// The state that tripped the limit; not part of the graph.
    pub state: TypeContext,
}

#[derive(Clone, Debug)]
pub struct Explored {
    pub lts: LtsGraph,
    pub exceeded: Option<Exceeded>,
}

impl Explored {
    pub fn complete(&self) -> bool {
        self.exceeded.is_none()
    }
}

impl Model {
    /// With `Traversal::Bfs` a buffer-limit witness has minimal length.
    pub fn explore(&self, limits: &ExploreLimits) -> Explored {
        let mut lts = LtsGraph::default();
        let init = self.canonical(&self.initial, limits.mode);
        if let Some(k) = limits.max_buffer_len.filter(|_| limits.on_bound == BoundPolicy::Stop) {
            if self.max_buffer(&init, limits.measure) >= k {
                return Explored {
                    lts,
                    exceeded: Some(Exceeded {
                        kind: ExceededKind::BufferLen(k),
                        witness: Vec::new(),
                        state: init,
                    }),
                };
            }
        }
        add_state(self, &mut lts, init, None);
        let mut work: VecDeque<StateId> = VecDeque::from([LtsGraph::INITIAL]);
        let next = |work: &mut VecDeque<StateId>| match limits.traversal {
            Traversal::Bfs => work.pop_front(),
            Traversal::Dfs => work.pop_back(),
        };
        while let Some(id) = next(&mut work) {
            let succ = self.transitions(&lts.states[id], limits);
            let stuck = succ.is_empty();
            for (action, target) in succ {
                let to = match lts.states.get_index_of(&target) {
                    Some(to) => to,
                    None => {
                        let over = limits
                            .max_buffer_len
                            .filter(|&k| self.max_buffer(&target, limits.measure) >= k);
                        let trip = match over {
                            Some(_) if limits.on_bound == BoundPolicy::Prune => continue,
                            Some(k) => Some(ExceededKind::BufferLen(k)),
                            None if lts.len() >= limits.max_states => Some(ExceededKind::MaxStates(limits.max_states)),
                            None => None,
                        };
                        if let Some(kind) = trip {
                            let mut witness = lts.path_to(id);
                            witness.push(action);
                            return Explored {
                                lts,
                                exceeded: Some(Exceeded {
                                    kind,
                                    witness,
                                    state: target,
                                }),
                            };
                        }
                        let parent = Some(lts.edges.len());
                        let to = add_state(self, &mut lts, target, parent);
                        work.push_back(to);
                        to
                    }
                };
                lts.out[id].push(lts.edges.len());
                lts.edges.push(Edge { from: id, action, to });
            }
            lts.flags[id].expanded = true;
            lts.flags[id].stuck = stuck;
        }
        Explored { lts, exceeded: None }
    }
}

fn add_state(model: &Model, lts: &mut LtsGraph, ctx: TypeContext, parent: Option<usize>) -> StateId {
    let flags = StateFlags {
        expanded: false,
        stuck: false,
        buffers_empty: Model::buffers_empty(&ctx),
        end_partition: model.end_gc_split(&ctx),
    };
    let (id, _) = lts.states.insert_full(ctx);
    lts.flags.push(flags);
    lts.parent.push(parent);
    lts.out.push(Vec::new());
    id
}
