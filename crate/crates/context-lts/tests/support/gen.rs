//! Random three-party contexts on one session `s`.

#![allow(dead_code)]

use std::collections::BTreeMap;

use magpi_core::{ArmExpr, BasicKind, Ident, PayloadTypeExpr, Reliability, Role, SbTypeExpr, SessionTypeExpr, Span, TypeDefs};
use magpi_lts::Model;
use proptest::prelude::*;

pub const ROLES: [&str; 3] = ["p", "q", "r"];

#[derive(Clone, Debug)]
pub struct GenCase {
    pub bindings: BTreeMap<Role, SbTypeExpr>,
    pub reliability: Reliability,
}

impl GenCase {
    pub fn model(&self) -> Model {
        let s = Ident::new("s");
        Model::from_bindings(&TypeDefs::new(), [(&s, &self.bindings)], self.reliability.clone())
            .expect("generated types are guarded")
    }
}

fn payload() -> BoxedStrategy<PayloadTypeExpr> {
    prop_oneof![
        Just(PayloadTypeExpr::unit()),
        Just(PayloadTypeExpr::Basic(BasicKind::Int)),
        Just(PayloadTypeExpr::Basic(BasicKind::Bool)),
    ]
    .boxed()
}

fn arms(me: &'static str, cont: BoxedStrategy<SessionTypeExpr>) -> BoxedStrategy<Vec<ArmExpr>> {
    let others: Vec<&'static str> = ROLES.iter().copied().filter(|r| *r != me).collect();
    let arm = (prop::sample::select(others), prop::sample::select(vec!["a", "b"]), payload(), cont).prop_map(
        |(role, label, payload, cont)| ArmExpr {
            role: role.into(),
            label: label.into(),
            payload,
            cont,
            span: Span::DUMMY,
        },
    );
    prop::collection::vec(arm, 1..=2)
        .prop_map(|mut v| {
            let mut seen = std::collections::BTreeSet::new();
            v.retain(|a| seen.insert((a.role.clone(), a.label.clone())));
            v
        })
        .boxed()
}

fn prefix(me: &'static str, depth: u32, var: bool, timeouts: bool) -> BoxedStrategy<SessionTypeExpr> {
    let child = tree(me, depth - 1, var, timeouts);
    let timeout = if timeouts {
        prop::option::of(child.clone()).boxed()
    } else {
        Just(None).boxed()
    };
    prop_oneof![
        arms(me, child.clone()).prop_map(|arms| SessionTypeExpr::Select { arms, span: Span::DUMMY }),
        (arms(me, child), timeout).prop_map(|(arms, t)| SessionTypeExpr::Branch {
            arms,
            timeout: t.map(Box::new),
            span: Span::DUMMY,
        }),
    ]
    .boxed()
}

fn tree(me: &'static str, depth: u32, var: bool, timeouts: bool) -> BoxedStrategy<SessionTypeExpr> {
    let leaf = if var {
        prop_oneof![
            Just(SessionTypeExpr::End),
            Just(SessionTypeExpr::Var("t".into(), Span::DUMMY)),
        ]
        .boxed()
    } else {
        Just(SessionTypeExpr::End).boxed()
    };
    if depth == 0 {
        return leaf;
    }
    prop_oneof![1 => leaf, 3 => prefix(me, depth, var, timeouts)].boxed()
}

pub fn session_type(me: &'static str, depth: u32, timeouts: bool) -> BoxedStrategy<SessionTypeExpr> {
    prop_oneof![
        tree(me, depth, false, timeouts),
        prefix(me, depth, true, timeouts).prop_map(|body| SessionTypeExpr::Rec {
            var: "t".into(),
            body: Box::new(body),
            span: Span::DUMMY,
        }),
    ]
    .boxed()
}

pub fn reliability() -> BoxedStrategy<Reliability> {
    prop::collection::vec(any::<bool>(), 6)
        .prop_map(|bits| {
            let mut r = Reliability::new();
            let mut i = 0;
            for p in ROLES {
                let mut set = Vec::new();
                for q in ROLES.iter().filter(|q| **q != p) {
                    if bits[i] {
                        set.push(Role::new(q));
                    }
                    i += 1;
                }
                r.set(p.into(), set);
            }
            r
        })
        .boxed()
}

pub fn case(depth: u32) -> BoxedStrategy<GenCase> {
    case_with(depth, true)
}

pub fn case_with(depth: u32, timeouts: bool) -> BoxedStrategy<GenCase> {
    (
        session_type("p", depth, timeouts),
        session_type("q", depth, timeouts),
        session_type("r", depth, timeouts),
        reliability(),
    )
        .prop_map(|(p, q, r, reliability)| GenCase {
            bindings: [("p", p), ("q", q), ("r", r)]
                .into_iter()
                .map(|(role, t)| (Role::new(role), SbTypeExpr::session(t)))
                .collect(),
            reliability,
        })
        .boxed()
}

/// Same as [`case_with`] under `R_F`.
pub fn reliable_case(depth: u32, timeouts: bool) -> BoxedStrategy<GenCase> {
    case_with(depth, timeouts)
        .prop_map(|mut c| {
            let roles: Vec<Role> = ROLES.iter().map(|r| Role::new(r)).collect();
            c.reliability = Reliability::full(&roles);
            c
        })
        .boxed()
}
