#[path = "../../context-lts/tests/support/gen.rs"]
mod gen;

use magpi_core::CongruenceMode;
use magpi_lts::{ExploreLimits, Model};
use magpi_verify::*;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn lim() -> ExploreLimits {
    ExploreLimits {
        max_states: 400,
        ..ExploreLimits::default()
    }
}

fn fixture(name: &str) -> Model {
    let path = format!("{}/../../fixtures/{name}.magpi", env!("CARGO_MANIFEST_DIR"));
    let f = magpi_parser::parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    Model::from_system(&f.type_defs, &f.system, f.reliability).unwrap()
}

/// φTCP ⟹ φs under FIFO congruence; `None` when φTCP does not hold.
/// Total reordering can surface a later mismatched message, so it is excluded.
fn containment(m: &Model, limits: &ExploreLimits) -> Option<Result<(), String>> {
    let rf = m.fully_reliable();
    if !check_tcp_safety(&rf, limits).holds() {
        return None;
    }
    let v = check_safety(&rf, &ExploreLimits { mode: CongruenceMode::TcpFifo, ..*limits });
    Some(if v.violated() { Err(format!("{v:?}")) } else { Ok(()) })
}

#[test]
fn tcp_safe_fixtures_are_safe() {
    for name in ["ping", "dns", "deadlock", "leader"] {
        if let Some(r) = containment(&fixture(name), &ExploreLimits::default()) {
            assert_eq!(r, Ok(()), "{name}");
        }
    }
}

#[test]
fn tcp_safe_generated_contexts_are_safe() {
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]),
    );
    let strategy = gen::reliable_case(3, false);
    let (mut holding, mut tries) = (0, 0);
    while holding < 500 {
        tries += 1;
        assert!(tries < 20_000, "only {holding} TCP-safe contexts in {tries} draws");
        let c = strategy.new_tree(&mut runner).unwrap().current();
        match containment(&c.model(), &lim()) {
            Some(Ok(())) => holding += 1,
            Some(Err(e)) => panic!("counterexample {c:?}: {e}"),
            None => {}
        }
    }
}

const ALL: [Property; 5] = [
    Property::Safety,
    Property::Deadlock,
    Property::Terminating,
    Property::Live,
    Property::Never,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bound_is_monotone(c in gen::case(3)) {
        let m = c.model();
        let verdicts: Vec<Verdict> = (1..=4).map(|k| check_bound_k(&m, k, &lim())).collect();
        for w in verdicts.windows(2) {
            if w[0].holds() {
                prop_assert!(w[1].holds());
            }
        }
        let (v, k) = check_bounded(&m, 4, &lim());
        if let Some(k) = k {
            prop_assert!(v.holds());
            prop_assert!(verdicts[k - 1].holds());
            prop_assert!(k == 1 || verdicts[k - 2].violated());
        }
    }

    #[test]
    fn witnesses_replay(c in gen::case(3)) {
        let m = c.model();
        let limits = lim();
        let out = m.explore(&limits);
        let checks = [
            safety(&m, &out, limits.mode),
            deadlock_free(&out),
            terminating(&out),
            live(&m, &out),
            never_terminating(&out),
            check_bound_k(&m, 2, &limits),
        ];
        for v in checks {
            if let Some(w) = v.witness() {
                let end = replay(&m, &limits, w);
                prop_assert!(end.is_some(), "{:?} does not replay", v);
                let end = end.unwrap();
                match v.reason() {
                    Some(r @ ("SP1" | "SP2" | "SPCom")) => {
                        prop_assert_eq!(safety_violation(&m, &end, limits.mode), Some(r));
                    }
                    Some("Deadlock") => {
                        prop_assert!(m.transitions(&end, &limits).is_empty());
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn verdicts_are_consistent(c in gen::case(3)) {
        let m = c.model();
        let r = verify_suite(&m, &ALL, &SuiteOptions { limits: lim(), timing: false });
        let p = |n: &str| r.properties[n].clone();
        if p("terminating").holds() {
            prop_assert!(p("deadlock").holds());
            prop_assert!(!p("never").holds());
        }
        if p("never").holds() {
            prop_assert!(p("terminating").violated());
        }
    }

    #[test]
    fn suite_matches_individual_checks(c in gen::case(3)) {
        let m = c.model();
        let limits = lim();
        let r = verify_suite(&m, &ALL, &SuiteOptions { limits, timing: false });
        prop_assert_eq!(&r.properties["safety"], &check_safety(&m, &limits));
        prop_assert_eq!(&r.properties["deadlock"], &check_deadlock_free(&m, &limits));
        prop_assert_eq!(&r.properties["terminating"], &check_terminating(&m, &limits));
        prop_assert_eq!(&r.properties["live"], &check_live(&m, &limits));
    }
}
