//! Random in-fragment entailments and a brute-force evaluator for them.

use std::collections::BTreeMap;

use dsess::solver::{entails, Assumptions, Verdict};
use dsess::syntax::*;
use proptest::prelude::*;

pub const SET_VARS: [&str; 3] = ["s1", "s2", "s3"];
pub const INT_VARS: [&str; 2] = ["n", "m"];
/// Integer variables are confined to `-INT_BOUND..=INT_BOUND` by hypothesis.
pub const INT_BOUND: i64 = 3;

/// Which variables a problem may mention, chosen to keep both the solver's
/// and the oracle's enumeration small.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub universe: usize,
    pub sets: usize,
    pub ints: usize,
}

pub fn shape() -> impl Strategy<Value = Shape> {
    (1usize..=3, prop_oneof![Just((3, 0)), Just((0, 2)), Just((1, 1)), Just((2, 1))])
        .prop_map(|(universe, (sets, ints))| Shape { universe, sets, ints })
}

fn set_lit(u: usize) -> impl Strategy<Value = Static> {
    (0u8..(1 << u)).prop_map(|mask| Static::Set((0..8).filter(|i| mask & (1 << i) != 0).collect()))
}

pub fn set_term(sh: Shape) -> BoxedStrategy<Static> {
    let leaf = if sh.sets == 0 {
        prop_oneof![set_lit(sh.universe), Just(Static::Full)].boxed()
    } else {
        prop_oneof![
            set_lit(sh.universe),
            Just(Static::Full),
            prop::sample::select(SET_VARS[..sh.sets].to_vec()).prop_map(Static::var),
        ]
        .boxed()
    };
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just(Op::Union), Just(Op::Inter), Just(Op::Minus)], inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Static::bin(op, a, b)),
            inner.prop_map(|a| Static::op(Op::Comp, vec![a])),
        ]
    })
    .boxed()
}

/// Set relations and difference constraints.
pub fn atom(sh: Shape) -> BoxedStrategy<Static> {
    let u = sh.universe as i64;
    let sets = prop_oneof![
        (0..u, set_term(sh)).prop_map(|(r, s)| Static::bin(Op::In, Static::Int(r), s)),
        (set_term(sh), set_term(sh)).prop_map(|(a, b)| Static::bin(Op::Subset, a, b)),
        (set_term(sh), set_term(sh)).prop_map(|(a, b)| Static::bin(Op::Eq, a, b)),
        (set_term(sh), set_term(sh), set_term(sh))
            .prop_map(|(a, b, c)| Static::bin(Op::Eq, Static::bin(Op::DUnion, a, b), c)),
    ];
    if sh.ints == 0 {
        return sets.boxed();
    }
    let var = prop::sample::select(INT_VARS[..sh.ints].to_vec()).prop_map(Static::var);
    let k = -INT_BOUND..=INT_BOUND;
    let ints = prop_oneof![
        (
            prop_oneof![Just(Op::Le), Just(Op::Lt), Just(Op::Eq), Just(Op::Neq), Just(Op::Ge)],
            var.clone(),
            k.clone()
        )
            .prop_map(|(op, x, c)| Static::bin(op, x, Static::Int(c))),
        (var.clone(), var, k).prop_map(|(x, y, c)| Static::bin(Op::Le, Static::bin(Op::Sub, x, y), Static::Int(c))),
    ];
    prop_oneof![sets, ints].boxed()
}

pub fn prop_term(sh: Shape) -> BoxedStrategy<Static> {
    atom(sh)
        .prop_recursive(2, 6, 2, |inner| {
            prop_oneof![
                (prop_oneof![Just(Op::And), Just(Op::Or), Just(Op::Implies)], inner.clone(), inner.clone())
                    .prop_map(|(op, a, b)| Static::bin(op, a, b)),
                inner.prop_map(Static::not),
            ]
        })
        .boxed()
}

/// A shape, 0 to 2 hypotheses and a goal.
pub fn problem() -> impl Strategy<Value = (Shape, Vec<Static>, Static)> {
    shape().prop_flat_map(|sh| (Just(sh), proptest::collection::vec(prop_term(sh), 0..3), prop_term(sh)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum V {
    I(i64),
    B(bool),
    S(u8),
    /// An overlapping disjoint union.
    Bad,
}

/// Values of s1, s2, s3 (bitmasks) and n, m.
#[derive(Clone, Copy, Debug, Default)]
pub struct World {
    pub sets: [u8; 3],
    pub ints: [i64; 2],
}

struct Env {
    universe: u8,
    world: World,
}

impl Env {
    fn var(&self, x: &str) -> V {
        if let Some(i) = SET_VARS.iter().position(|v| *v == x) {
            return V::S(self.world.sets[i]);
        }
        let i = INT_VARS.iter().position(|v| *v == x).expect("known variable");
        V::I(self.world.ints[i])
    }

    fn ev(&self, s: &Static) -> V {
        use V::*;
        match s {
            Static::Int(i) => I(*i),
            Static::Bool(b) => B(*b),
            Static::Set(v) => S(v.iter().fold(0, |m, r| m | (1 << r))),
            Static::Full => S(self.universe),
            Static::Var(x) => self.var(x),
            Static::Op(op, a) => {
                let x = self.ev(&a[0]);
                let y = a.get(1).map(|t| self.ev(t));
                match (op, x, y) {
                    (Op::Comp, S(p), _) => S(self.universe & !p),
                    (Op::Not, B(p), _) => B(!p),
                    (Op::Union, S(p), Some(S(q))) => S(p | q),
                    (Op::Inter, S(p), Some(S(q))) => S(p & q),
                    (Op::Minus, S(p), Some(S(q))) => S(p & !q),
                    (Op::DUnion, S(p), Some(S(q))) if p & q != 0 => Bad,
                    (Op::DUnion, S(p), Some(S(q))) => S(p | q),
                    (Op::In, I(r), Some(S(p))) => B(p & (1 << r) != 0),
                    (Op::Subset, S(p), Some(S(q))) => B(p & !q == 0),
                    (Op::Eq, Bad, _) | (Op::Eq, _, Some(Bad)) => B(false),
                    (Op::Eq, p, Some(q)) => B(p == q),
                    (Op::Neq, p, Some(q)) => B(p != q),
                    (Op::Le, I(p), Some(I(q))) => B(p <= q),
                    (Op::Lt, I(p), Some(I(q))) => B(p < q),
                    (Op::Ge, I(p), Some(I(q))) => B(p >= q),
                    (Op::Sub, I(p), Some(I(q))) => I(p - q),
                    (Op::And, B(p), Some(B(q))) => B(p && q),
                    (Op::Or, B(p), Some(B(q))) => B(p || q),
                    (Op::Implies, B(p), Some(B(q))) => B(!p || q),
                    other => panic!("oracle cannot evaluate {:?}", other),
                }
            }
            other => panic!("oracle cannot evaluate {}", other),
        }
    }
}

pub fn truth(universe: usize, world: World, s: &Static) -> bool {
    let env = Env {
        universe: ((1u32 << universe) - 1) as u8,
        world,
    };
    env.ev(s) == V::B(true)
}

fn worlds(sh: Shape) -> impl Iterator<Item = World> {
    let per_set = 1u32 << sh.universe;
    let set_count = per_set.pow(sh.sets as u32);
    let width = (2 * INT_BOUND + 1) as u32;
    let int_count = width.pow(sh.ints as u32);
    (0..set_count).flat_map(move |si| {
        (0..int_count).map(move |ii| {
            let mut w = World::default();
            let mut k = si;
            for s in w.sets.iter_mut().take(sh.sets) {
                *s = (k % per_set) as u8;
                k /= per_set;
            }
            let mut k = ii;
            for n in w.ints.iter_mut().take(sh.ints) {
                *n = (k % width) as i64 - INT_BOUND;
                k /= width;
            }
            w
        })
    })
}

pub fn bounds(sh: Shape) -> Vec<Static> {
    INT_VARS[..sh.ints]
        .iter()
        .flat_map(|x| {
            [
                Static::bin(Op::Ge, Static::var(x), Static::Int(-INT_BOUND)),
                Static::bin(Op::Le, Static::var(x), Static::Int(INT_BOUND)),
            ]
        })
        .collect()
}

/// The solver's view of the problem; bounds on the integers included.
pub fn assumptions(sh: Shape, hyps: &[Static]) -> Assumptions {
    let universe: Vec<i64> = (0..sh.universe as i64).collect();
    let mut a = Assumptions::new().with_universe(&universe);
    for s in &SET_VARS[..sh.sets] {
        a = a.set_var(s, &universe);
    }
    for n in &INT_VARS[..sh.ints] {
        a = a.int_var(n);
    }
    for p in bounds(sh).into_iter().chain(hyps.iter().cloned()) {
        a = a.prop(p);
    }
    a
}

/// A world satisfying every hypothesis and refuting the goal, if one exists.
/// The integer bounds are implicit in the enumeration.
pub fn counterexample(sh: Shape, hyps: &[Static], goal: &Static) -> Option<World> {
    worlds(sh).find(|w| hyps.iter().all(|h| truth(sh.universe, *w, h)) && !truth(sh.universe, *w, goal))
}

fn world_of(cex: &BTreeMap<Name, Static>) -> World {
    let mut w = World::default();
    for (k, v) in cex {
        if let Some(i) = SET_VARS.iter().position(|s| s == k) {
            let Static::Set(rs) = v else { panic!("set variable bound to {}", v) };
            w.sets[i] = rs.iter().fold(0, |m, r| m | (1 << r));
        } else if let Some(i) = INT_VARS.iter().position(|s| s == k) {
            let Static::Int(n) = v else { panic!("int variable bound to {}", v) };
            w.ints[i] = *n;
        }
    }
    w
}

/// Compares the solver with the oracle; `Err` describes a disagreement.
pub fn agree(sh: Shape, hyps: &[Static], goal: &Static) -> Result<(), String> {
    let verdict = entails(&assumptions(sh, hyps), goal);
    let expected = counterexample(sh, hyps, goal);
    let all: Vec<Static> = bounds(sh).into_iter().chain(hyps.iter().cloned()).collect();
    match (&verdict, expected) {
        (Verdict::Valid, None) => Ok(()),
        (Verdict::Invalid(cex), Some(_)) => {
            let w = world_of(cex);
            if !all.iter().all(|h| truth(sh.universe, w, h)) {
                return Err(format!("counterexample {:?} breaks a hypothesis", cex));
            }
            if truth(sh.universe, w, goal) {
                return Err(format!("counterexample {:?} satisfies the goal", cex));
            }
            Ok(())
        }
        _ => Err(format!(
            "solver said {:?} but the oracle found {:?} for {:?} |- {}",
            verdict, expected, hyps, goal
        )),
    }
}
