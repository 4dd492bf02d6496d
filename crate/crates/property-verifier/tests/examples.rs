use std::collections::BTreeMap;

use magpi_core::{Ident, Reliability, Role, SbTypeExpr, TypeDefs};
use magpi_lts::{Action, BoundPolicy, BufferMeasure, ExceededKind, ExploreLimits, Model};
use magpi_verify::*;

fn fixture(name: &str) -> Model {
    let path = format!("{}/../../fixtures/{name}.magpi", env!("CARGO_MANIFEST_DIR"));
    let f = magpi_parser::parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    Model::from_system(&f.type_defs, &f.system, f.reliability).unwrap()
}

fn model(bindings: &[(&str, &str)], reliable: &[(&str, &[&str])]) -> Model {
    let binding: BTreeMap<Role, SbTypeExpr> = bindings
        .iter()
        .map(|(r, t)| (Role::new(r), magpi_parser::parse_sb_type(t).expect("type parses")))
        .collect();
    let mut rel = Reliability::new();
    for (p, qs) in reliable {
        rel.set(Role::new(p), qs.iter().map(|q| Role::new(q)));
    }
    let s = Ident::new("s");
    Model::from_bindings(&TypeDefs::new(), [(&s, &binding)], rel).unwrap()
}

fn lim() -> ExploreLimits {
    ExploreLimits::default()
}

fn reason(v: &Verdict) -> Option<&'static str> {
    v.reason()
}

const END_ONLY: &[(&str, &str)] = &[("p", "end"), ("q", "end")];

#[test]
fn ping_properties() {
    let m = fixture("ping");
    assert!(static_safety(&m));
    assert_eq!(check_safety(&m, &lim()), Verdict::Holds);
    // The static shortcut agrees with the fused exploration.
    assert_eq!(safety(&m, &m.explore(&lim()), lim().mode), Verdict::Holds);
    assert_eq!(check_comm_safe_rf(&m, &lim()), Verdict::Holds);
    assert_eq!(check_deadlock_free(&m, &lim()), Verdict::Holds);
    assert_eq!(check_terminating(&m, &lim()), Verdict::Holds);
    assert_eq!(check_live(&m, &lim()), Verdict::Holds);
    assert_eq!(reason(&check_never_terminating(&m, &lim())), Some("Terminal"));
    assert_eq!(check_bound_k(&m, 4, &lim()), Verdict::Holds);
}

#[test]
fn ping_bound_one_is_violated_by_the_first_send() {
    let m = fixture("ping");
    let v = check_bound_k(&m, 1, &lim());
    assert_eq!(reason(&v), Some("BufferBound"));
    let w = v.witness().unwrap();
    assert_eq!(w.len(), 1);
    assert!(matches!(&w[0], Action::Send { from, to, .. } if from.as_str() == "p" && to.as_str() == "q"));
    let end = replay(&m, &lim(), w).expect("witness replays");
    assert!(m.max_buffer(&end, BufferMeasure::PerRecipient) >= 1);
}

/// Minimal bound straight from the unbounded graph: one more than the
/// largest buffer measure over all reachable contexts.
fn oracle_min_bound(m: &Model, measure: BufferMeasure) -> usize {
    let out = m.explore(&lim());
    assert!(out.complete());
    1 + out.lts.states.iter().map(|c| m.max_buffer(c, measure)).max().unwrap()
}

#[test]
fn ping_minimal_bound() {
    let m = fixture("ping");
    assert_eq!(oracle_min_bound(&m, BufferMeasure::PerRecipient), 4);
    assert_eq!(check_bounded(&m, 8, &lim()), (Verdict::Holds, Some(4)));
    for k in 1..4 {
        assert!(check_bound_k(&m, k, &lim()).violated(), "k = {k}");
    }
    let total = ExploreLimits {
        measure: BufferMeasure::Total,
        ..lim()
    };
    assert_eq!(oracle_min_bound(&m, BufferMeasure::Total), 5);
    assert_eq!(check_bounded(&m, 8, &total), (Verdict::Holds, Some(5)));
}

#[test]
fn dns_properties() {
    let m = fixture("dns");
    assert_eq!(check_safety(&m, &lim()), Verdict::Holds);
    assert_eq!(safety(&m, &m.explore(&lim()), lim().mode), Verdict::Holds);
    assert_eq!(check_comm_safe_rf(&m, &lim()), Verdict::Holds);
    assert_eq!(check_deadlock_free(&m, &lim()), Verdict::Holds);
    assert_eq!(check_terminating(&m, &lim()), Verdict::Holds);
    assert_eq!(check_live(&m, &lim()), Verdict::Holds);
}

#[test]
fn dns_over_tcp() {
    let m = fixture("dns").fully_reliable();
    assert_eq!(check_tcp_ordering(&m, &lim()), Verdict::Holds);
    // Failure-handling timeouts fall outside the TCP-compliant subset.
    assert_eq!(reason(&check_tcp_safety(&m, &lim())), Some("TcpTimeout"));
}

#[test]
fn payload_mismatch_violates_sp_com() {
    let m = model(&[("p", "<q!m(int)>"), ("q", "&{p?m(bool).end, timeout.end}")], &[]);
    let v = check_safety(&m, &lim());
    assert_eq!(reason(&v), Some("SPCom"));
    assert!(v.witness().unwrap().is_empty());
}

#[test]
fn timeout_placement() {
    let sp1 = model(&[("p", "q?m().end")], &[]);
    assert_eq!(reason(&check_safety(&sp1, &lim())), Some("SP1"));
    let sp2 = model(&[("p", "&{q?m().end, timeout.end}")], &[("p", &["q"])]);
    assert_eq!(reason(&check_safety(&sp2, &lim())), Some("SP2"));
}

#[test]
fn safety_violation_after_some_steps_has_a_shortest_witness() {
    // q only reaches the bad branch after p's first message.
    let m = model(
        &[("p", "q!a().q!b(int).end"), ("q", "p?a().p?b(bool).end")],
        &[("q", &["p"])],
    );
    assert!(!static_safety(&m));
    let v = check_safety(&m, &lim());
    assert_eq!(reason(&v), Some("SPCom"));
    let w = v.witness().unwrap();
    // a sent and received, then b sent.
    assert_eq!(w.len(), 3);
    let end = replay(&m, &lim(), w).unwrap();
    assert_eq!(safety_violation(&m, &end, lim().mode), Some("SPCom"));
}

#[test]
fn end_only_context() {
    let m = model(END_ONLY, &[]);
    assert_eq!(check_safety(&m, &lim()), Verdict::Holds);
    assert_eq!(check_tcp_safety(&m, &lim()), Verdict::Holds);
    assert_eq!(check_deadlock_free(&m, &lim()), Verdict::Holds);
    assert_eq!(check_terminating(&m, &lim()), Verdict::Holds);
    assert!(check_never_terminating(&m, &lim()).violated());
    assert_eq!(check_comm_safe_rf(&m, &lim()), Verdict::Holds);
    assert_eq!(check_bounded(&m, 1, &lim()), (Verdict::Holds, Some(1)));
}

#[test]
fn mutual_wait_deadlocks_immediately() {
    let m = model(&[("p", "q?m().end"), ("q", "p?n().end")], &[("p", &["q"]), ("q", &["p"])]);
    let v = check_deadlock_free(&m, &lim());
    assert_eq!(reason(&v), Some("Deadlock"));
    assert!(v.witness().unwrap().is_empty());
    let f = fixture("deadlock");
    let v = check_deadlock_free(&f, &lim());
    assert_eq!(reason(&v), Some("Deadlock"));
    assert!(v.witness().unwrap().is_empty());
}

const PING_FOREVER: &[(&str, &str)] = &[("p", "rec t.q!m().t"), ("q", "rec u.p?m().u")];

#[test]
fn ping_forever_cycles() {
    let m = model(PING_FOREVER, &[("q", &["p"])]);
    let small = ExploreLimits {
        max_states: 200,
        ..lim()
    };
    let v = check_terminating(&m, &small);
    assert_eq!(reason(&v), Some("Cycle"));
    let w = v.witness().unwrap();
    // p sends, q receives, back where it started.
    assert_eq!(w.len(), 2);
    assert_eq!(replay(&m, &small, w).unwrap(), m.canonical(&m.initial, small.mode));
}

#[test]
fn ping_forever_never_terminates_below_a_bound() {
    let m = model(PING_FOREVER, &[("q", &["p"])]);
    let pruned = ExploreLimits {
        max_buffer_len: Some(3),
        on_bound: BoundPolicy::Prune,
        ..lim()
    };
    let out = m.explore(&pruned);
    assert!(out.complete());
    assert_eq!(out.lts.len(), 3);
    // Every state has a successor in the pruned graph itself.
    assert!((0..out.lts.len()).all(|id| out.lts.successors(id).next().is_some()));
    assert_eq!(never_terminating(&out), Verdict::Holds);
    // Without pruning the graph is infinite.
    let capped = ExploreLimits {
        max_states: 50,
        ..lim()
    };
    assert_eq!(
        check_never_terminating(&m, &capped),
        Verdict::Inconclusive(ExceededKind::MaxStates(50))
    );
}

#[test]
fn reliable_branch_without_sender_starves() {
    let m = model(&[("q", "p?m().end"), ("p", "end")], &[("q", &["p"])]);
    let v = check_live(&m, &lim());
    assert_eq!(reason(&v), Some("Starvation"));
    assert!(v.witness().unwrap().is_empty());
    let fed = model(&[("q", "p?m().end"), ("p", "q!m().end")], &[("q", &["p"])]);
    assert_eq!(check_live(&fed, &lim()), Verdict::Holds);
}

#[test]
fn orphan_message_breaks_communication_safety() {
    let m = model(&[("p", "q!m().end"), ("q", "end")], &[]);
    let v = check_comm_safe_rf(&m, &lim());
    assert_eq!(reason(&v), Some("OrphanMessage"));
    assert_eq!(v.witness().unwrap().len(), 1);
}

#[test]
fn unbounded_sender_is_not_bounded() {
    let m = model(&[("p", "rec t.q!m().t"), ("q", "end")], &[]);
    assert_eq!(
        check_bounded(&m, 5, &lim()),
        (Verdict::Inconclusive(ExceededKind::BufferLen(5)), None)
    );
    let v = check_bound_k(&m, 3, &lim());
    assert_eq!(v.witness().unwrap().len(), 3);
}

#[test]
fn tcp_label_order() {
    let m = model(&[("p", "q!a().q!b().end"), ("q", "p?b().p?a().end")], &[]).fully_reliable();
    assert_eq!(reason(&check_tcp_safety(&m, &lim())), Some("TcpOrder"));
    let ok = model(&[("p", "q!a().q!b().end"), ("q", "p?a().p?b().end")], &[]).fully_reliable();
    assert_eq!(check_tcp_safety(&ok, &lim()), Verdict::Holds);
    // Total reordering lets q take b first, so the same context is safe.
    assert_eq!(check_safety(&m, &lim()), Verdict::Holds);
}

#[test]
fn suite_json_is_stable() {
    let m = fixture("ping");
    let props: Vec<Property> = "safety,comm-rf,terminating,live,bound_4"
        .split(',')
        .map(|p| p.parse().unwrap())
        .collect();
    let opts = SuiteOptions::default();
    let a = verify_suite(&m, &props, &opts);
    let b = verify_suite(&m, &props, &opts);
    assert_eq!(a.worst(), 0);
    assert_eq!(a.to_json(&m), b.to_json(&m));
    let json: serde_json::Value = serde_json::from_str(&a.to_json(&m)).unwrap();
    assert_eq!(json["properties"]["bound_4"]["verdict"], "holds");
    assert!(json["stats"]["ms"].is_null());
    assert!(json["stats"]["states"].as_u64().unwrap() < 10_000);
    let one = verify_suite(&m, &[Property::Bound(1)], &opts);
    assert_eq!(one.worst(), 1);
    let json: serde_json::Value = serde_json::from_str(&one.to_json(&m)).unwrap();
    assert_eq!(json["properties"]["bound_1"]["reason"], "BufferBound");
    assert_eq!(json["properties"]["bound_1"]["witness"][0], "s:p!q:ping()");
}

#[test]
fn property_names_parse() {
    for p in ["safety", "deadlock", "terminating", "live", "never", "comm-rf", "tcp", "bound_3", "bounded"] {
        assert_eq!(p.parse::<Property>().unwrap().name(), p);
    }
    assert!("bound_0".parse::<Property>().is_err());
    assert!("fairness".parse::<Property>().is_err());
}
