use magpi_core::{CongruenceMode, Reliability, Role};
use magpi_parser::{parse, ProtocolFile};
use magpi_sim::*;

fn load(name: &str) -> ProtocolFile {
    let path = format!("{}/../../fixtures/{name}.magpi", env!("CARGO_MANIFEST_DIR"));
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn scenario(name: &str) -> FailureScenario {
    let path = format!("{}/../../fixtures/scenarios/{name}.json", env!("CARGO_MANIFEST_DIR"));
    FailureScenario::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sim(f: &ProtocolFile, policy: ReductionPolicy, sc: FailureScenario) -> (Simulator, Config) {
    let mut s = Simulator::new(&f.type_defs, &f.proc_defs, f.reliability.clone(), policy, sc).unwrap();
    let c = s.initial(&f.system).unwrap();
    (s, c)
}

fn inline(reliability: &str, system: &str) -> ProtocolFile {
    let src = format!("protocol T\nroles p, q, r\nreliability {{ {reliability} }}\nsystem\n{system}\n");
    parse(&src).unwrap_or_else(|d| panic!("{d:?}"))
}

fn rules(steps: &[Step]) -> Vec<&'static str> {
    steps.iter().map(|s| s.rule.label()).collect()
}

#[test]
fn ping_starts_with_the_first_ping() {
    for policy in [ReductionPolicy::Reliable, ReductionPolicy::Unrestricted] {
        let (mut s, c) = sim(&load("ping"), policy, FailureScenario::failure_free());
        let steps = s.enabled_steps(&c);
        assert_eq!(rules(&steps), ["R-⊕"]);
        assert_eq!(steps[0].detail, "s[p]!q.ping()");
        assert_eq!(steps[0].next.queue(&"s".into()).len(), 1);
    }
}

#[test]
fn a_buffered_message_can_be_received_delayed_or_lost() {
    let f = inline(
        "",
        "new s : {p: <q!ping()>, q: &{p?ping().end, timeout.end}} in s[q] & {p?ping().0, timeout.0} | s:[(p,q)!ping()]",
    );
    let sc = FailureScenario {
        drop: [("p->q".to_string(), 0.5)].into(),
        delay_bias: 0.2,
        ..FailureScenario::default()
    };
    let (mut s, c) = sim(&f, ReductionPolicy::Reliable, sc.clone());
    let mut got = rules(&s.enabled_steps(&c));
    got.sort();
    assert_eq!(got, ["R-&", "R-↓", "R-⊙"]);
    // Without delay bias the timeout waits for the buffer to empty.
    let (mut s, c) = sim(&f, ReductionPolicy::Reliable, FailureScenario { delay_bias: 0.0, ..sc });
    let mut got = rules(&s.enabled_steps(&c));
    got.sort();
    assert_eq!(got, ["R-&", "R-↓"]);
}

#[test]
fn reliable_entries_are_never_lost() {
    let f = inline("p: {r}, r: {p}", "new s : {p: <r!ok()>, r: p?ok().end} in s[r] & {p?ok().0} | s:[(p,r)!ok()]");
    let sc = FailureScenario {
        drop: [("p->r".to_string(), 1.0)].into(),
        ..FailureScenario::default()
    };
    let (mut s, c) = sim(&f, ReductionPolicy::Reliable, sc.clone());
    assert_eq!(rules(&s.enabled_steps(&c)), ["R-&"]);
    let (mut s, c) = sim(&f, ReductionPolicy::Unrestricted, sc);
    let mut got = rules(&s.enabled_steps(&c));
    got.sort();
    assert_eq!(got, ["R-&", "R-↓"]);
}

#[test]
fn reliable_policy_needs_an_unreliable_source_for_timeouts() {
    let f = inline("p: {q}, q: {p}", "new s : {q: &{p?m().end, timeout.end}} in s[q] & {p?m().0, timeout.0} | s:[]");
    let (mut s, c) = sim(&f, ReductionPolicy::Reliable, FailureScenario::default());
    assert!(s.enabled_steps(&c).is_empty());
    let (mut s, c) = sim(&f, ReductionPolicy::Unrestricted, FailureScenario::default());
    assert_eq!(rules(&s.enabled_steps(&c)), ["R-⊙"]);
}

#[test]
fn ping_with_q_crashed_ends_with_ko() {
    let f = load("ping");
    for seed in 0..25 {
        let (mut s, c) = sim(&f, ReductionPolicy::Reliable, scenario("crash_q"));
        let t = s.run(&c, seed, 200);
        assert!(t.quiescent && t.inaction && !t.stuck, "{}", t.terminal);
        let last = t.events.last().unwrap();
        assert_eq!((last.rule, last.detail.as_str()), (Rule::Branch, "s[r] received (p,r)!ko()"));
        assert!(t.events.iter().any(|e| e.detail == "s[p]!r.ko()"));
        assert!(t.monitors.is_empty());
    }
}

#[test]
fn crashed_role_keeps_running_when_not_frozen() {
    let f = load("ping");
    let sc = FailureScenario {
        freeze_crashed: false,
        ..scenario("crash_q")
    };
    let (mut s, c) = sim(&f, ReductionPolicy::Reliable, sc);
    let t = s.run(&c, 3, 200);
    assert!(t.events.iter().any(|e| e.detail.starts_with("s[q] received")));
    assert!(t.events.iter().any(|e| e.rule == Rule::Drop && e.detail.contains("(q,p)!pong()")));
    assert!(t.events.iter().any(|e| e.detail == "s[r] received (p,r)!ko()"));
    assert!(t.inaction);
}

#[test]
fn failure_free_ping_ends_with_ok_and_empty_buffer() {
    let f = load("ping");
    for seed in 0..25 {
        let (mut s, c) = sim(&f, ReductionPolicy::Reliable, scenario("failure_free"));
        let t = s.run(&c, seed, 200);
        assert!(t.inaction && !t.stuck);
        assert_eq!(t.terminal().buffered(), 0);
        assert_eq!(t.events.last().unwrap().detail, "s[r] received (p,r)!ok()");
        assert_eq!(t.events.len(), 6);
    }
}

#[test]
fn zero_steps_is_the_initial_configuration() {
    let (mut s, c) = sim(&load("ping"), ReductionPolicy::Reliable, FailureScenario::default());
    let t = s.run(&c, 0, 0);
    assert!(t.events.is_empty());
    assert_eq!(t.states, vec![c]);
    assert!(!t.quiescent && !t.stuck);
}

#[test]
fn deadlock_is_stuck() {
    let (mut s, c) = sim(&load("deadlock"), ReductionPolicy::Reliable, FailureScenario::default());
    let t = s.run(&c, 0, 10);
    assert!(t.events.is_empty() && t.quiescent && t.stuck);
    let e = s.exhaustive_small_step_oracle(&c, 5);
    assert_eq!(e.terminals.len(), 1);
    assert!(e.terminals.values().all(|c| !s.is_inaction(c)));
}

#[test]
fn traces_are_reproducible() {
    let sc = FailureScenario {
        drop: [("p->q".to_string(), 0.5), ("q->p".to_string(), 0.5)].into(),
        delay_bias: 0.3,
        ..FailureScenario::default()
    };
    let f = load("ping");
    let run = |seed| {
        let (mut s, c) = sim(&f, ReductionPolicy::Reliable, sc.clone());
        s.run(&c, seed, 100).to_jsonl()
    };
    assert_eq!(run(11), run(11));
    let distinct: std::collections::BTreeSet<String> = (0..20).map(run).collect();
    assert!(distinct.len() > 1);
}

#[test]
fn jsonl_lines_parse() {
    let (mut s, c) = sim(&load("dns"), ReductionPolicy::Reliable, FailureScenario::default());
    let t = s.run(&c, 5, 100);
    let lines: Vec<serde_json::Value> = t.to_jsonl().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), t.events.len() + 1);
    assert_eq!(lines[0]["step"], 1);
    assert_eq!(lines[0]["rule"], "R-⊕");
    assert_eq!(lines[0]["digest"].as_str().unwrap().len(), 64);
    assert_eq!(lines.last().unwrap()["inaction"], true);
}

#[test]
fn oracle_depth_zero_is_the_start() {
    let (mut s, c) = sim(&load("ping"), ReductionPolicy::Reliable, FailureScenario::default());
    let e = s.exhaustive_small_step_oracle(&c, 0);
    assert_eq!(e.terminals.len(), 1);
    assert_eq!(e.terminals.values().next().unwrap(), &c);
}

#[test]
fn failure_free_ping_always_terminates() {
    let (mut s, c) = sim(&load("ping"), ReductionPolicy::Reliable, scenario("failure_free"));
    let plain = s.exhaustive_small_step_oracle(&c, 30).visited;
    for depth in [10, 30] {
        let e = s.exhaustive_small_step_oracle(&c, depth);
        assert!(!e.terminals.is_empty());
        assert_eq!(e.frontier, 0);
        assert!(e.terminals.values().all(|t| s.is_inaction(t)));
    }
    // Failures only add paths; every end is still `≡ 0`.
    let lossy = FailureScenario {
        drop: [("p->q".to_string(), 0.5), ("q->p".to_string(), 0.5)].into(),
        delay_bias: 0.5,
        ..FailureScenario::default()
    };
    let (mut s, c) = sim(&load("ping"), ReductionPolicy::Reliable, lossy);
    let e = s.exhaustive_small_step_oracle(&c, 30);
    assert_eq!(e.frontier, 0);
    assert!(e.visited > plain);
    assert!(e.terminals.values().all(|t| s.is_inaction(t)));
}

#[test]
fn sampled_runs_are_members_of_the_expansion() {
    let lossy = FailureScenario {
        drop: [("p->q".to_string(), 0.4), ("q->p".to_string(), 0.4)].into(),
        delay_bias: 0.3,
        ..FailureScenario::default()
    };
    let (mut s, c) = sim(&load("ping"), ReductionPolicy::Reliable, lossy);
    let e = s.exhaustive_small_step_oracle(&c, 30);
    for seed in 0..50 {
        let t = s.run(&c, seed, 100);
        assert!(s.replays(&t.states));
        assert!(e.terminals.contains_key(&t.terminal().key(s.mode())));
    }
}

#[test]
fn monitors_flag_the_two_hand_built_branches() {
    // Ill-typed on purpose: q waits on unreliable p without a timeout.
    let f = inline("", "new s : {q: p?m().end} in s[q] & {p?m().0} | s:[]");
    let (mut s, c) = sim(&f, ReductionPolicy::Reliable, FailureScenario::default());
    let v = monitor_corollaries(&s.run(&c, 0, 5), &f.reliability);
    assert_eq!(v.iter().map(|v| v.kind).collect::<Vec<_>>(), [MonitorKind::Cor1Violation]);

    let f = inline(
        "p: {q}, q: {p}",
        "new s : {p: q!m().end, q: &{p?m().end, timeout.end}} in s[p]!q.m().0 | s[q] & {p?m().0, timeout.0} | s:[]",
    );
    let (mut s, c) = sim(&f, ReductionPolicy::Reliable, FailureScenario::default());
    let t = s.run(&c, 0, 5);
    assert_eq!(t.monitors.iter().map(|v| v.kind).collect::<Vec<_>>(), [MonitorKind::Cor2Violation]);
    assert_eq!(t.monitors[0].endpoint, "s[q]");
}

#[test]
fn scenario_roles_are_validated() {
    let f = load("ping");
    let sc = FailureScenario::from_json(r#"{"crash":[{"role":"z","at":0}]}"#).unwrap();
    assert_eq!(sc.validate(&f.roles), Err(ScenarioError::UnknownRole("z".into())));
}

#[test]
fn tcp_reorder_takes_the_oldest_entry_per_sender() {
    let f = inline(
        "",
        "new s : {p: <q!a() . q!b()>, q: &{p?b().&{p?a().end, timeout.end}, p?a().&{p?b().end, timeout.end}, timeout.end}} in \
         s[q] & {p?b().s[q] & {p?a().0, timeout.0}, p?a().s[q] & {p?b().0, timeout.0}, timeout.0} | s:[(p,q)!a(), (p,q)!b()]",
    );
    let tcp = FailureScenario {
        reorder: CongruenceMode::TcpFifo,
        ..FailureScenario::default()
    };
    let (mut s, c) = sim(&f, ReductionPolicy::Reliable, tcp);
    let got: Vec<String> = s.enabled_steps(&c).into_iter().map(|s| s.detail).collect();
    assert_eq!(got, ["s[q] received (p,q)!a()"]);
    let (mut s, c) = sim(&f, ReductionPolicy::Reliable, FailureScenario::default());
    assert_eq!(s.enabled_steps(&c).len(), 2);
}

#[test]
fn full_reliability_never_loses_or_times_out() {
    for name in ["ping", "dns", "leader"] {
        let f = load(name);
        let rf = Reliability::full(&f.roles);
        let pairs: Vec<(Role, Role)> =
            f.roles.iter().flat_map(|p| f.roles.iter().map(move |q| (p.clone(), q.clone()))).collect();
        let sc = FailureScenario {
            drop: pairs.iter().map(|(p, q)| (format!("{p}->{q}"), 0.5)).collect(),
            delay_bias: 0.5,
            ..FailureScenario::default()
        };
        let mut s = Simulator::new(&f.type_defs, &f.proc_defs, rf.clone(), ReductionPolicy::Reliable, sc).unwrap();
        let c = s.initial(&f.system).unwrap();
        for seed in 0..20 {
            let t = s.run(&c, seed, 150);
            assert!(t.events.iter().all(|e| e.rule != Rule::Drop && e.rule != Rule::Timeout), "{name}");
        }
    }
}
