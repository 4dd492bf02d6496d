//! Bisimilarity of session-type graph positions.
//!
//! Two positions are equivalent iff their unfoldings are the same (possibly
//! infinite) tree up to the order of arms.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::graph::{Arm, Node, NodeId, PayloadType, TypeGraph};
use crate::names::{Label, Role};
use crate::value::BasicKind;

/// Partition of every node of one graph into bisimilarity classes.
#[derive(Clone, Debug)]
pub struct Bisim {
    class: Vec<u32>,
    rep: Vec<NodeId>,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum PaySig {
    Basic(BasicKind),
    Session(u32),
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Sig {
    End,
    Branch(Vec<(Role, Label, PaySig, u32)>, Option<u32>),
    Select(Vec<(Role, Label, PaySig, u32)>),
}

impl Bisim {
    /// Moore-style refinement, starting from a single block.
    pub fn compute(g: &TypeGraph) -> Bisim {
        let n = g.len();
        let heads: Vec<NodeId> = g.ids().map(|i| g.head(i)).collect();
        let mut class = vec![0u32; n];
        let mut count = 1usize;
        loop {
            let pay = |p: &PayloadType, class: &[u32]| match p {
                PayloadType::Basic(k) => PaySig::Basic(*k),
                PayloadType::Session(s) => PaySig::Session(class[heads[s.index()].index()]),
            };
            let arms_sig = |arms: &[Arm], class: &[u32]| {
                let mut v: Vec<_> = arms
                    .iter()
                    .map(|a| (a.role.clone(), a.label.clone(), pay(&a.payload, class), class[heads[a.cont.index()].index()]))
                    .collect();
                v.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
                v
            };
            let mut ids: HashMap<(u32, Sig), u32> = HashMap::new();
            let mut next = vec![0u32; n];
            for i in 0..n {
                let h = heads[i];
                if h.index() != i {
                    continue;
                }
                let sig = match g.node(h) {
                    Node::End => Sig::End,
                    Node::Branch { arms, timeout } => Sig::Branch(
                        arms_sig(arms, &class),
                        timeout.map(|t| class[heads[t.index()].index()]),
                    ),
                    Node::Select { arms } => Sig::Select(arms_sig(arms, &class)),
                    Node::Rec { .. } | Node::Ref { .. } => unreachable!("heads are constructors"),
                };
                let fresh = ids.len() as u32;
                next[i] = *ids.entry((class[i], sig)).or_insert(fresh);
            }
            for i in 0..n {
                next[i] = next[heads[i].index()];
            }
            let new_count = ids.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let mut rep = vec![NodeId(u32::MAX); count.max(1)];
        for i in (0..n).rev() {
            // Smallest head node of each class.
            if heads[i].index() == i {
                rep[class[i] as usize] = NodeId(i as u32);
            }
        }
        Bisim { class, rep }
    }

    pub fn class(&self, n: NodeId) -> u32 {
        self.class[n.index()]
    }

    pub fn equiv(&self, a: NodeId, b: NodeId) -> bool {
        self.class(a) == self.class(b)
    }

    /// Canonical representative: the smallest head node of the class.
    pub fn rep(&self, n: NodeId) -> NodeId {
        self.rep[self.class(n) as usize]
    }

    pub fn rep_payload(&self, p: PayloadType) -> PayloadType {
        match p {
            PayloadType::Session(s) => PayloadType::Session(self.rep(s)),
            b => b,
        }
    }

    pub fn eq_payload(&self, a: PayloadType, b: PayloadType) -> bool {
        match (a, b) {
            (PayloadType::Basic(x), PayloadType::Basic(y)) => x == y,
            (PayloadType::Session(x), PayloadType::Session(y)) => self.equiv(x, y),
            _ => false,
        }
    }
}

/// Coinductive pairwise check, possibly across two graphs.
pub fn bisimilar(ga: &TypeGraph, a: NodeId, gb: &TypeGraph, b: NodeId) -> bool {
    let mut assumed: HashSet<(NodeId, NodeId)> = HashSet::new();
    let mut work = vec![(a, b)];
    while let Some((x, y)) = work.pop() {
        let (x, y) = (ga.head(x), gb.head(y));
        if !assumed.insert((x, y)) {
            continue;
        }
        let ok = match (ga.node(x), gb.node(y)) {
            (Node::End, Node::End) => true,
            (Node::Branch { arms: ax, timeout: tx }, Node::Branch { arms: ay, timeout: ty }) => {
                match (tx, ty) {
                    (Some(p), Some(q)) => work.push((*p, *q)),
                    (None, None) => {}
                    _ => return false,
                }
                match_arms(ax, ay, &mut work)
            }
            (Node::Select { arms: ax }, Node::Select { arms: ay }) => match_arms(ax, ay, &mut work),
            _ => false,
        };
        if !ok {
            return false;
        }
    }
    true
}

fn match_arms(ax: &[Arm], ay: &[Arm], work: &mut Vec<(NodeId, NodeId)>) -> bool {
    if ax.len() != ay.len() {
        return false;
    }
    let by_key: BTreeMap<(&Role, &Label), &Arm> = ay.iter().map(|a| ((&a.role, &a.label), a)).collect();
    for a in ax {
        let Some(b) = by_key.get(&(&a.role, &a.label)) else {
            return false;
        };
        match (a.payload, b.payload) {
            (PayloadType::Basic(k1), PayloadType::Basic(k2)) if k1 == k2 => {}
            (PayloadType::Session(s1), PayloadType::Session(s2)) => work.push((s1, s2)),
            _ => return false,
        }
        work.push((a.cont, b.cont));
    }
    true
}
