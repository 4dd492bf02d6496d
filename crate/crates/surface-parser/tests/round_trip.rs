use std::collections::BTreeMap;

use magpi_core::*;
use magpi_parser::*;
use proptest::prelude::*;

fn role() -> BoxedStrategy<Role> {
    prop::sample::select(vec!["p", "q", "DNS", "w1"]).prop_map(Role::from).boxed()
}

fn label() -> BoxedStrategy<Label> {
    prop::sample::select(vec!["m", "ok", "404", "timeout_x"]).prop_map(Label::from).boxed()
}

fn ident() -> BoxedStrategy<Ident> {
    prop::sample::select(vec!["x", "y1", "s", "t'"]).prop_map(Ident::from).boxed()
}

fn basic_value() -> BoxedStrategy<BasicValue> {
    prop_oneof![
        Just(BasicValue::Unit),
        any::<i64>().prop_map(BasicValue::Int),
        any::<bool>().prop_map(BasicValue::Bool),
        any::<f64>().prop_filter("finite", |r| r.is_finite()).prop_map(BasicValue::Real),
        "[a-z \"\\\\\n\t]{0,5}".prop_map(BasicValue::Str),
    ]
    .boxed()
}

fn value() -> BoxedStrategy<Value> {
    prop_oneof![
        basic_value().prop_map(Value::Basic),
        (ident(), role()).prop_map(|(s, r)| Value::Endpoint(Endpoint::new(s, r))),
        ident().prop_map(Value::Var),
    ]
    .boxed()
}

fn channel() -> BoxedStrategy<Value> {
    prop_oneof![
        (ident(), role()).prop_map(|(s, r)| Value::Endpoint(Endpoint::new(s, r))),
        ident().prop_map(Value::Var),
    ]
    .boxed()
}

fn raw_session() -> BoxedStrategy<SessionTypeExpr> {
    let leaf = prop_oneof![
        Just(SessionTypeExpr::End),
        prop::sample::select(vec!["t", "u", "Sp"]).prop_map(|x| SessionTypeExpr::Var(x.into(), Span::DUMMY)),
    ];
    leaf.prop_recursive(5, 24, 3, |inner| {
        let payload = prop_oneof![
            3 => prop::sample::select(vec![
                BasicKind::Unit,
                BasicKind::Int,
                BasicKind::Bool,
                BasicKind::Real,
                BasicKind::String
            ])
            .prop_map(PayloadTypeExpr::Basic),
            1 => inner.clone().prop_map(PayloadTypeExpr::Session),
        ];
        let arm = (role(), label(), payload, inner.clone()).prop_map(|(role, label, payload, cont)| ArmExpr {
            role,
            label,
            payload,
            cont,
            span: Span::DUMMY,
        });
        prop_oneof![
            (prop::collection::vec(arm.clone(), 1..4), prop::option::of(inner.clone())).prop_map(|(arms, t)| {
                SessionTypeExpr::Branch {
                    arms,
                    timeout: t.map(Box::new),
                    span: Span::DUMMY,
                }
            }),
            prop::collection::vec(arm, 1..4).prop_map(|arms| SessionTypeExpr::Select { arms, span: Span::DUMMY }),
            (prop::sample::select(vec!["t", "u"]), inner).prop_map(|(v, body)| SessionTypeExpr::Rec {
                var: v.into(),
                body: Box::new(body),
                span: Span::DUMMY,
            }),
        ]
    })
    .boxed()
}

/// Names bound by an enclosing `rec` are variables, all others references.
fn resolve(t: SessionTypeExpr, scope: &mut Vec<Ident>) -> SessionTypeExpr {
    let arm = |a: ArmExpr, scope: &mut Vec<Ident>| ArmExpr {
        payload: match a.payload {
            PayloadTypeExpr::Session(s) => PayloadTypeExpr::Session(resolve(s, scope)),
            b => b,
        },
        cont: resolve(a.cont, scope),
        ..a
    };
    match t {
        SessionTypeExpr::Var(x, s) | SessionTypeExpr::Named(x, s) => {
            if scope.contains(&x) {
                SessionTypeExpr::Var(x, s)
            } else {
                SessionTypeExpr::Named(x, s)
            }
        }
        SessionTypeExpr::End => SessionTypeExpr::End,
        SessionTypeExpr::Branch { arms, timeout, span } => SessionTypeExpr::Branch {
            arms: arms.into_iter().map(|a| arm(a, scope)).collect(),
            timeout: timeout.map(|t| Box::new(resolve(*t, scope))),
            span,
        },
        SessionTypeExpr::Select { arms, span } => SessionTypeExpr::Select {
            arms: arms.into_iter().map(|a| arm(a, scope)).collect(),
            span,
        },
        SessionTypeExpr::Rec { var, body, span } => {
            scope.push(var.clone());
            let body = resolve(*body, scope);
            scope.pop();
            SessionTypeExpr::Rec {
                var,
                body: Box::new(body),
                span,
            }
        }
    }
}

fn session() -> BoxedStrategy<SessionTypeExpr> {
    raw_session().prop_map(|t| resolve(t, &mut Vec::new())).boxed()
}

fn payload_type() -> BoxedStrategy<PayloadTypeExpr> {
    prop_oneof![
        Just(PayloadTypeExpr::Basic(BasicKind::Int)),
        Just(PayloadTypeExpr::Basic(BasicKind::Unit)),
        session().prop_map(PayloadTypeExpr::Session),
    ]
    .boxed()
}

fn sb_type() -> BoxedStrategy<SbTypeExpr> {
    let entry = (role(), label(), payload_type()).prop_map(|(to, label, payload)| BufEntryExpr { to, label, payload });
    prop_oneof![
        session().prop_map(SbTypeExpr::session),
        (prop::collection::vec(entry, 0..3), prop::option::of(session()))
            .prop_map(|(b, s)| SbTypeExpr { buffer: Some(b), session: s }),
    ]
    .boxed()
}

fn process() -> BoxedStrategy<Process> {
    let message = (role(), role(), label(), value()).prop_map(|(from, to, label, payload)| Message {
        from,
        to,
        label,
        payload,
    });
    let leaf = prop_oneof![
        Just(Process::Inaction),
        (ident(), prop::collection::vec(value(), 0..3)).prop_map(|(name, args)| Process::Call {
            name,
            args,
            span: Span::DUMMY
        }),
        (ident(), prop::collection::vec(message, 0..3)).prop_map(|(session, queue)| Process::Buffer {
            session,
            queue,
            span: Span::DUMMY
        }),
    ];
    leaf.prop_recursive(5, 32, 3, |inner| {
        let arm = (
            role(),
            label(),
            prop::option::of((ident(), prop::option::of(payload_type()))),
            inner.clone(),
        )
            .prop_map(|(from, label, b, cont)| BranchArm {
                from,
                label,
                binder: b.as_ref().map(|(x, _)| x.clone()),
                binder_ty: b.and_then(|(_, t)| t),
                cont,
                span: Span::DUMMY,
            });
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Process::par(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Process::Choice(Box::new(a), Box::new(b))),
            (channel(), role(), label(), value(), inner.clone()).prop_map(|(channel, to, label, payload, cont)| {
                Process::Select {
                    channel,
                    to,
                    label,
                    payload,
                    cont: Box::new(cont),
                    span: Span::DUMMY,
                }
            }),
            (channel(), prop::collection::vec(arm, 1..3), prop::option::of(inner.clone())).prop_map(
                |(channel, arms, t)| Process::Branch {
                    channel,
                    arms,
                    timeout: t.map(Box::new),
                    span: Span::DUMMY,
                }
            ),
            (ident(), prop::collection::btree_map(role(), sb_type(), 0..3), inner.clone()).prop_map(
                |(session, binding, body): (Ident, BTreeMap<Role, SbTypeExpr>, Process)| Process::Restriction {
                    session,
                    binding,
                    body: Box::new(body),
                    span: Span::DUMMY,
                }
            ),
            (
                ident(),
                prop::collection::vec((ident(), payload_type()), 0..3),
                inner.clone(),
                inner
            )
                .prop_map(|(name, params, body, rest)| Process::Def {
                    decl: Box::new(ProcDecl {
                        name,
                        params,
                        body,
                        span: Span::DUMMY
                    }),
                    body: Box::new(rest),
                }),
        ]
    })
    .boxed()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn session_types_round_trip(t in session()) {
        prop_assert_eq!(&parse_session_type(&pretty_session_type(&t)).unwrap(), &t);
        prop_assert_eq!(&parse_session_type(&t.to_string()).unwrap(), &t);
    }

    #[test]
    fn sb_types_round_trip(t in sb_type()) {
        prop_assert_eq!(&parse_sb_type(&pretty_sb_type(&t)).unwrap(), &t);
        prop_assert_eq!(&parse_sb_type(&t.to_string()).unwrap(), &t);
    }

    #[test]
    fn processes_round_trip(p in process()) {
        let text = pretty_process(&p);
        let back = parse_process(&text).map_err(|d| TestCaseError::fail(format!("{d}\n{text}")))?;
        prop_assert_eq!(&back, &p, "{}", text);
        let line = p.to_string();
        let back = parse_process(&line).map_err(|d| TestCaseError::fail(format!("{d}\n{line}")))?;
        prop_assert_eq!(&back, &p, "{}", line);
    }
}
