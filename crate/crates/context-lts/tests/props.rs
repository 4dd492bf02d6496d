mod support {
    pub mod gen;
}

use std::collections::BTreeSet;

use magpi_core::CongruenceMode;
use magpi_lts::{Action, ExploreLimits, Model, Relation, Traversal};
use proptest::prelude::*;
use support::gen;

fn bounded(mode: CongruenceMode) -> ExploreLimits {
    ExploreLimits {
        max_states: 3000,
        max_buffer_len: Some(3),
        mode,
        ..ExploreLimits::default()
    }
}

/// Rendered states and (from, action, to) edges.
type Labelled = (BTreeSet<String>, BTreeSet<(String, String, String)>);

fn labelled(m: &Model, limits: &ExploreLimits) -> Option<Labelled> {
    let out = m.explore(limits);
    if !out.complete() {
        return None;
    }
    let name = |id: usize| m.render(out.lts.state(id));
    Some((
        (0..out.lts.len()).map(name).collect(),
        out.lts
            .edges
            .iter()
            .map(|e| (name(e.from), e.action.render(&m.graph), name(e.to)))
            .collect(),
    ))
}

fn modes() -> impl Strategy<Value = CongruenceMode> {
    prop_oneof![Just(CongruenceMode::TotalReorder), Just(CongruenceMode::TcpFifo)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bfs_and_dfs_agree(c in gen::case(3), mode in modes()) {
        let m = c.model();
        let bfs = bounded(mode);
        let dfs = ExploreLimits { traversal: Traversal::Dfs, ..bfs };
        let (a, b) = (labelled(&m, &bfs), labelled(&m, &dfs));
        // A truncated search may stop at different places.
        if a.is_some() && b.is_some() {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn full_and_sendcom_agree_under_full_reliability(c in gen::reliable_case(3, true)) {
        let m = c.model();
        let full = bounded(CongruenceMode::TotalReorder);
        let sendcom = ExploreLimits { relation: Relation::SendComOnly, ..full };
        let out = m.explore(&full);
        prop_assert!(out.lts.edges.iter().all(|e| !e.action.is_timeout()));
        prop_assert_eq!(labelled(&m, &full), labelled(&m, &sendcom));
    }

    #[test]
    fn every_step_moves_one_buffer_by_at_most_one(c in gen::case(3), mode in modes()) {
        let m = c.model();
        let out = m.explore(&bounded(mode));
        for e in &out.lts.edges {
            let len = |id| -> Vec<usize> { out.lts.state(id).endpoints.values().map(|t| t.buffer.len()).collect() };
            let (a, b) = (len(e.from), len(e.to));
            let diffs: Vec<i64> = a.iter().zip(&b).map(|(x, y)| *y as i64 - *x as i64).filter(|d| *d != 0).collect();
            let expected: Vec<i64> = match e.action {
                Action::Send { .. } => vec![1],
                Action::Com { .. } => vec![-1],
                Action::Timeout { .. } => vec![],
            };
            prop_assert_eq!(diffs, expected);
        }
    }

    #[test]
    fn canonical_form_is_idempotent(c in gen::case(3), mode in modes()) {
        let m = c.model();
        let out = m.explore(&bounded(mode));
        for s in &out.lts.states {
            prop_assert_eq!(&m.canonical(s, mode), s);
        }
    }
}
