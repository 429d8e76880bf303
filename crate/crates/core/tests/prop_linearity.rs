//! Linear usage of endpoint variables, checked against a usage-counting
//! oracle on random terms.

use std::collections::{BTreeMap, BTreeSet};

use dsess::statics::SortCtx;
use dsess::syntax::*;
use dsess::typing::{typecheck_expr, TypeCtx};
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Clone, Debug)]
enum T {
    Close(usize),
    Unit,
    Let(Box<T>, Box<T>),
    If(Box<T>, Box<T>),
}

fn term() -> impl Strategy<Value = T> {
    prop_oneof![(0usize..3).prop_map(T::Close), Just(T::Unit)].prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| T::Let(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| T::If(Box::new(a), Box::new(b))),
        ]
    })
}

fn render(t: &T, fresh: &mut usize) -> String {
    match t {
        T::Close(v) => format!("close({})", VARS[*v]),
        T::Unit => "()".into(),
        T::Let(a, b) => {
            *fresh += 1;
            let u = format!("u{}", fresh);
            format!("(let {} = {} in {})", u, render(a, fresh), render(b, fresh))
        }
        T::If(a, b) => format!("(if true then {} else {})", render(a, fresh), render(b, fresh)),
    }
}

/// Variables consumed, or `None` if some variable is used twice on a path
/// or the branches of a conditional disagree.
fn oracle(t: &T) -> Option<BTreeSet<usize>> {
    match t {
        T::Close(v) => Some(BTreeSet::from([*v])),
        T::Unit => Some(BTreeSet::new()),
        T::Let(a, b) => {
            let (a, b) = (oracle(a)?, oracle(b)?);
            a.is_disjoint(&b).then(|| a.union(&b).copied().collect())
        }
        T::If(a, b) => {
            let (a, b) = (oracle(a)?, oracle(b)?);
            (a == b).then_some(a)
        }
    }
}

fn context() -> TypeCtx {
    let ty = parse_type("chan({0}, within({0, 1}, end(0)))").expect("type parses");
    TypeCtx {
        nonlinear: BTreeMap::new(),
        linear: VARS.iter().map(|v| (v.to_string(), ty.clone())).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn checker_counts_uses_like_the_oracle(t in term()) {
        let src = render(&t, &mut 0);
        let e = parse_expr(&src).expect("generated term parses");
        let got = typecheck_expr(&SortCtx::new(), &[], &context(), &BTreeMap::new(), &e);
        match (oracle(&t), got) {
            (Some(used), Ok((ty, consumed))) => {
                prop_assert_eq!(ty, LinType::Unit);
                let names: BTreeSet<String> = used.iter().map(|v| VARS[*v].to_string()).collect();
                prop_assert_eq!(consumed, names, "{}", src);
            }
            (None, Err(_)) => {}
            (expected, got) => prop_assert!(false, "{}: oracle {:?}, checker {:?}", src, expected, got),
        }
    }
}
