//! Printing then parsing gives back the same tree.

use dsess::statics::{alpha_eq_static, alpha_eq_stype, alpha_eq_type};
use dsess::syntax::*;
use proptest::prelude::*;

fn role() -> impl Strategy<Value = Static> {
    (0i64..3).prop_map(Static::Int)
}

fn roles() -> impl Strategy<Value = Static> {
    prop_oneof![
        proptest::collection::btree_set(0i64..3, 0..3).prop_map(|s| Static::Set(s.into_iter().collect())),
        Just(Static::Full),
    ]
}

fn int_static() -> impl Strategy<Value = Static> {
    let leaf = prop_oneof![
        (0i64..20).prop_map(Static::Int),
        prop_oneof![Just("n"), Just("m")].prop_map(Static::var),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        (prop_oneof![Just(Op::Add), Just(Op::Sub), Just(Op::Mul)], inner.clone(), inner)
            .prop_map(|(op, a, b)| Static::bin(op, a, b))
    })
}

fn set_static() -> impl Strategy<Value = Static> {
    let leaf = prop_oneof![roles(), Just(Static::var("rs"))];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (
                prop_oneof![Just(Op::Union), Just(Op::Inter), Just(Op::Minus), Just(Op::DUnion)],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Static::bin(op, a, b)),
            inner.prop_map(|a| Static::op(Op::Comp, vec![a])),
        ]
    })
}

fn prop_static() -> impl Strategy<Value = Static> {
    let atom = prop_oneof![
        any::<bool>().prop_map(Static::Bool),
        (prop_oneof![Just(Op::Lt), Just(Op::Le), Just(Op::Eq), Just(Op::Neq)], int_static(), int_static())
            .prop_map(|(op, a, b)| Static::bin(op, a, b)),
        (int_static(), set_static()).prop_map(|(a, s)| Static::bin(Op::In, a, s)),
        (set_static(), set_static()).prop_map(|(a, b)| Static::bin(Op::Subset, a, b)),
    ];
    atom.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just(Op::And), Just(Op::Or), Just(Op::Implies)], inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Static::bin(op, a, b)),
            inner.prop_map(Static::not),
        ]
    })
}

fn base_type() -> impl Strategy<Value = LinType> {
    prop_oneof![
        Just(LinType::Unit),
        Just(LinType::int(None)),
        Just(LinType::boolean(None)),
        Just(LinType::string()),
        (0i64..9).prop_map(|n| LinType::int(Some(Static::Int(n)))),
    ]
}

fn stype() -> impl Strategy<Value = SessionType> {
    let leaf = role().prop_map(SessionType::End);
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (role(), base_type(), inner.clone()).prop_map(|(r, t, k)| SessionType::bmsg(r, t, k)),
            (0i64..3, 1i64..3, base_type(), inner.clone()).prop_map(|(s, d, t, k)| SessionType::pmsg(
                Static::Int(s),
                Static::Int((s + d) % 3),
                t,
                k
            )),
            (role(), inner.clone(), inner.clone()).prop_map(|(r, a, b)| SessionType::Branch {
                role: r,
                left: Box::new(a),
                right: Box::new(b),
            }),
            (role(), inner.clone()).prop_map(|(r, k)| SessionType::Quan {
                role: r.clone(),
                binder: Static::Lam(
                    "x".into(),
                    Sort::Int,
                    Box::new(Static::stype(SessionType::bmsg(r, LinType::int(Some(Static::var("x"))), k))),
                ),
            }),
            (role(), base_type()).prop_map(|(r, t)| SessionType::Fix(Static::Lam(
                "y".into(),
                Sort::SType,
                Box::new(Static::stype(SessionType::bmsg(r, t, SessionType::Embed(Static::var("y"))))),
            ))),
            inner.prop_map(|k| SessionType::within(vec![0, 1, 2], k)),
        ]
    })
}

fn lintype() -> impl Strategy<Value = LinType> {
    let leaf = prop_oneof![base_type(), (roles(), stype()).prop_map(|(rs, s)| LinType::chan(rs, s))];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), any::<bool>()).prop_map(|(a, b, l)| LinType::pair(a, b, l)),
            (inner.clone(), inner.clone(), any::<bool>()).prop_map(|(a, b, l)| LinType::fun(a, b, l)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LinType::sum(a, b)),
            (prop_static(), inner.clone()).prop_map(|(p, t)| LinType::Guard(p, Box::new(t))),
            (prop_static(), inner.clone()).prop_map(|(p, t)| LinType::Assert(p, Box::new(t))),
            inner.clone().prop_map(|t| LinType::Forall("a".into(), Sort::Int, Box::new(t))),
            inner.prop_map(|t| LinType::Exists("a".into(), Sort::Set, Box::new(t))),
        ]
    })
}

fn name() -> impl Strategy<Value = String> {
    prop_oneof![Just("x"), Just("y"), Just("go"), Just("k2")].prop_map(String::from)
}

fn term() -> impl Strategy<Value = DynTerm> {
    let leaf = prop_oneof![
        name().prop_map(DynTerm::Var),
        Just(DynTerm::Unit),
        (0i64..100).prop_map(|v| DynTerm::Lit(Lit::Int(v))),
        any::<bool>().prop_map(|b| DynTerm::Lit(Lit::Bool(b))),
        "[a-z \\\\\"]{0,6}".prop_map(|s| DynTerm::Lit(Lit::Str(s))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let b = |t: DynTerm| Box::new(t);
        prop_oneof![
            (name(), proptest::option::of(lintype()), inner.clone())
                .prop_map(|(x, ann, body)| DynTerm::lam(&x, ann, body)),
            (name(), name(), base_type(), base_type(), inner.clone()).prop_map(move |(f, x, d, c, body)| {
                DynTerm::Fix {
                    name: f,
                    param: x,
                    dom: d,
                    cod: c,
                    body: b(body),
                }
            }),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| DynTerm::app(f, a)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| DynTerm::pair(l, r)),
            inner.clone().prop_map(move |e| DynTerm::Fst(b(e))),
            inner.clone().prop_map(move |e| DynTerm::Snd(b(e))),
            (name(), name(), inner.clone(), inner.clone()).prop_map(|(l, r, e, k)| DynTerm::let_pair(&l, &r, e, k)),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(move |(c, t, f)| DynTerm::If(b(c), b(t), b(f))),
            (any::<bool>(), inner.clone()).prop_map(move |(right, e)| DynTerm::Inj { right, body: b(e) }),
            (inner.clone(), name(), inner.clone(), name(), inner.clone()).prop_map(move |(s, x, l, y, r)| {
                DynTerm::Case {
                    scrut: b(s),
                    left: (x, b(l)),
                    right: (y, b(r)),
                }
            }),
            inner.clone().prop_map(move |e| DynTerm::GuardIntro(b(e))),
            inner.clone().prop_map(move |e| DynTerm::GuardElim(b(e))),
            inner.clone().prop_map(move |e| DynTerm::AssertIntro(b(e))),
            (name(), inner.clone(), inner.clone()).prop_map(move |(x, e, k)| DynTerm::LetAssert {
                var: x,
                bound: b(e),
                body: b(k),
            }),
            inner.clone().prop_map(move |e| DynTerm::ForallIntro {
                var: Some(("a".into(), Sort::Int)),
                body: b(e),
            }),
            (inner.clone(), proptest::option::of(int_static())).prop_map(move |(e, w)| DynTerm::ForallElim {
                body: b(e),
                arg: w.map(|w| dsess::statics::normalize_static(&w, None)).filter(|w| matches!(w, Static::Int(_))),
            }),
            (inner.clone(), 0i64..9).prop_map(move |(e, w)| DynTerm::ExistsIntro {
                body: b(e),
                witness: Some(Static::Int(w)),
                ann: Some(LinType::Exists("a".into(), Sort::Int, Box::new(LinType::int(Some(Static::var("a")))))),
            }),
            (name(), inner.clone(), inner.clone()).prop_map(move |(x, e, k)| DynTerm::LetExists {
                svar: Some("n".into()),
                var: x,
                bound: b(e),
                body: b(k),
            }),
            (inner.clone(), lintype()).prop_map(move |(e, t)| DynTerm::Ascribe(b(e), t)),
            (
                prop_oneof![Just(PrimOp::Add), Just(PrimOp::Lt), Just(PrimOp::Eq)],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, c)| DynTerm::Prim(op, vec![a, c])),
            (prop_oneof![Just(ApiName::Close), Just(ApiName::Recurse), Just(ApiName::Choose)], inner.clone())
                .prop_map(|(api, a)| DynTerm::api(api, vec![a])),
            (inner.clone(), inner).prop_map(|(a, c)| DynTerm::ApiCall {
                api: ApiName::BSend,
                statics: vec![Static::Set(vec![0]), Static::Int(0), Static::ty(LinType::int(None)), Static::stype(SessionType::End(Static::Int(0)))],
                args: vec![a, c],
                runtime_guard: None,
            }),
        ]
    })
}

fn strip(e: &DynTerm) -> DynTerm {
    dsess::runtime::strip_spans(e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn statics_round_trip(s in prop_oneof![prop_static(), int_static(), set_static()]) {
        let text = s.to_string();
        let back = parse_static(&text).map_err(|e| TestCaseError::fail(format!("{}: {}", text, e)))?;
        prop_assert!(alpha_eq_static(&s, &back), "{} reparsed as {}", text, back);
    }

    #[test]
    fn stypes_round_trip(st in stype()) {
        let text = st.to_string();
        let back = parse_stype(&text).map_err(|e| TestCaseError::fail(format!("{}: {}", text, e)))?;
        prop_assert!(alpha_eq_stype(&st, &back), "{} reparsed as {}", text, back);
    }

    #[test]
    fn types_round_trip(t in lintype()) {
        let text = t.to_string();
        let back = parse_type(&text).map_err(|e| TestCaseError::fail(format!("{}: {}", text, e)))?;
        prop_assert!(alpha_eq_type(&t, &back), "{} reparsed as {}", text, back);
    }

    #[test]
    fn terms_round_trip(e in term()) {
        let text = e.to_string();
        let back = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{}: {}", text, err)))?;
        prop_assert_eq!(strip(&back), e.clone(), "{}", text);
        prop_assert!(!back.contains_endpoint());
    }
}
