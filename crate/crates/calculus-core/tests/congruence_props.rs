use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use magpi_core::*;
use proptest::prelude::*;

const ROLES: [&str; 3] = ["p", "q", "r"];
const LABELS: [&str; 2] = ["a", "b"];

fn alphabet() -> Vec<Message> {
    let mut out = Vec::new();
    for f in ROLES {
        for t in ROLES {
            if f == t {
                continue;
            }
            for l in LABELS {
                out.push(Message {
                    from: f.into(),
                    to: t.into(),
                    label: l.into(),
                    payload: Value::unit(),
                });
            }
        }
    }
    out
}

fn all_queues(max_len: usize) -> Vec<Vec<Message>> {
    let alpha = alphabet();
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for q in &layer {
            for m in &alpha {
                let mut q2: Vec<Message> = q.clone();
                q2.push(m.clone());
                next.push(q2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Closure of a queue under the adjacent swaps the mode permits.
fn swap_class(q: &[Message], mode: CongruenceMode) -> BTreeSet<Vec<String>> {
    let key = |q: &[Message]| q.iter().map(|m| m.to_string()).collect::<Vec<_>>();
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    let mut out = BTreeSet::new();
    let mut work = VecDeque::from([q.to_vec()]);
    while let Some(cur) = work.pop_front() {
        if !seen.insert(key(&cur)) {
            continue;
        }
        out.insert(key(&cur));
        for i in 0..cur.len().saturating_sub(1) {
            let (a, b) = (&cur[i], &cur[i + 1]);
            let allowed = match mode {
                CongruenceMode::TotalReorder => true,
                CongruenceMode::TcpFifo => a.from != b.from || a.to != b.to,
            };
            if allowed {
                let mut n = cur.clone();
                n.swap(i, i + 1);
                work.push_back(n);
            }
        }
    }
    out
}

fn check_brute_force(mode: CongruenceMode) {
    let mut classes: HashMap<BTreeSet<Vec<String>>, Vec<String>> = HashMap::new();
    let mut canon_seen: HashMap<Vec<String>, BTreeSet<Vec<String>>> = HashMap::new();
    for q in all_queues(4) {
        let canon: Vec<String> = canonical_queue(&q, mode).iter().map(|m| m.to_string()).collect();
        let again: Vec<String> = canonical_queue(&canonical_queue(&q, mode), mode)
            .iter()
            .map(|m| m.to_string())
            .collect();
        assert_eq!(canon, again, "idempotent");
        let class = swap_class(&q, mode);
        assert!(class.contains(&canon), "canonical form is congruent to its input");
        if let Some(prev) = classes.get(&class) {
            assert_eq!(prev, &canon, "congruent queues share a canonical form");
        } else {
            classes.insert(class.clone(), canon.clone());
        }
        if let Some(prev) = canon_seen.get(&canon) {
            assert_eq!(prev, &class, "equal canonical forms imply congruence");
        } else {
            canon_seen.insert(canon, class);
        }
    }
}

#[test]
fn canonical_queue_matches_swap_closure_total() {
    check_brute_force(CongruenceMode::TotalReorder);
}

#[test]
fn canonical_queue_matches_swap_closure_tcp() {
    check_brute_force(CongruenceMode::TcpFifo);
}

#[test]
fn type_congruence_examples() {
    let mut g = TypeGraph::new();
    let end = g.end();
    let a = BufEntryTy::new("q", "a", PayloadType::Basic(BasicKind::Int));
    let b = BufEntryTy::new("r", "b", PayloadType::Basic(BasicKind::Bool));
    let qb = BufEntryTy::new("q", "b", PayloadType::Basic(BasicKind::Int));
    let bis = Bisim::compute(&g);
    let t1 = SbType {
        buffer: vec![a.clone(), b.clone()],
        session: Some(end),
    };
    let t2 = SbType {
        buffer: vec![b, a.clone()],
        session: Some(end),
    };
    assert!(type_congruent(&bis, &t1, &t2, CongruenceMode::TotalReorder));
    assert!(type_congruent(&bis, &t1, &t2, CongruenceMode::TcpFifo));
    let t3 = SbType {
        buffer: vec![a.clone(), qb.clone()],
        session: Some(end),
    };
    let t4 = SbType {
        buffer: vec![qb, a],
        session: Some(end),
    };
    assert!(!type_congruent(&bis, &t3, &t4, CongruenceMode::TcpFifo));
    assert!(type_congruent(&bis, &t3, &t4, CongruenceMode::TotalReorder));
    for t in [&t1, &t2, &t3, &t4] {
        for mode in [CongruenceMode::TotalReorder, CongruenceMode::TcpFifo] {
            assert!(type_congruent(&bis, t, t, mode));
        }
    }
}

fn arb_session(depth: u32) -> impl Strategy<Value = SessionTypeExpr> {
    let leaf = prop_oneof![Just(SessionTypeExpr::End), Just(SessionTypeExpr::Var("t".into(), Span::DUMMY))];
    leaf.prop_recursive(depth, 6, 2, |inner| {
        let arm = (0..2usize, 0..2usize, inner.clone()).prop_map(|(r, l, cont)| ArmExpr {
            role: ["q", "r"][r].into(),
            label: LABELS[l].into(),
            payload: PayloadTypeExpr::unit(),
            cont,
            span: Span::DUMMY,
        });
        prop_oneof![
            (prop::collection::vec(arm.clone(), 1..3), prop::option::of(inner.clone())).prop_map(
                |(arms, timeout)| SessionTypeExpr::Branch {
                    arms: dedup(arms),
                    timeout: timeout.map(Box::new),
                    span: Span::DUMMY,
                }
            ),
            prop::collection::vec(arm, 1..3).prop_map(|arms| SessionTypeExpr::Select {
                arms: dedup(arms),
                span: Span::DUMMY,
            }),
        ]
    })
}

fn dedup(arms: Vec<ArmExpr>) -> Vec<ArmExpr> {
    let mut seen = BTreeSet::new();
    arms.into_iter()
        .filter(|a| seen.insert((a.role.clone(), a.label.clone())))
        .collect()
}

/// Closes free `t` occurrences under a guarded `rec t`.
fn close(e: SessionTypeExpr) -> SessionTypeExpr {
    match e {
        SessionTypeExpr::End => SessionTypeExpr::End,
        SessionTypeExpr::Var(..) => SessionTypeExpr::End,
        body => SessionTypeExpr::Rec {
            var: "t".into(),
            body: Box::new(body),
            span: Span::DUMMY,
        },
    }
}

proptest! {
    #[test]
    fn bisimilarity_is_an_equivalence(xs in prop::collection::vec(arb_session(3), 3)) {
        let mut g = TypeGraph::new();
        let ids: Vec<NodeId> = xs.into_iter().map(|x| g.intern(&close(x)).unwrap()).collect();
        let bis = Bisim::compute(&g);
        for &a in &ids {
            prop_assert!(bisimilar(&g, a, &g, a));
            for &b in &ids {
                let ab = bisimilar(&g, a, &g, b);
                prop_assert_eq!(ab, bisimilar(&g, b, &g, a));
                prop_assert_eq!(ab, bis.equiv(a, b), "refinement agrees with the pairwise check");
                for &c in &ids {
                    if ab && bisimilar(&g, b, &g, c) {
                        prop_assert!(bisimilar(&g, a, &g, c));
                    }
                }
            }
        }
    }

    #[test]
    fn read_back_is_bisimilar(x in arb_session(4)) {
        let mut g = TypeGraph::new();
        let n = g.intern(&close(x)).unwrap();
        for m in g.reachable(n) {
            let e = g.to_expr(m);
            let mut h = TypeGraph::new();
            let k = h.intern(&e).unwrap();
            prop_assert!(bisimilar(&g, m, &h, k), "{}", e);
        }
    }

    #[test]
    fn unfolding_is_semantically_invisible(x in arb_session(4)) {
        let mut g = TypeGraph::new();
        let n = g.intern(&close(x)).unwrap();
        if let Ok(body) = g.unfold_once(n) {
            prop_assert!(bisimilar(&g, n, &g, body));
            let bis = Bisim::compute(&g);
            prop_assert!(bis.equiv(n, body));
        }
    }
}
