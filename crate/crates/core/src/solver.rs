//! Entailment of guard propositions over finite role sets, booleans and
//! integers.
//!
//! Set, role and boolean variables range over finite domains and are
//! enumerated. Integer variables are enumerated over a window `[-B, B]`
//! whose size is a small-model bound for difference constraints: a
//! satisfiable system of atoms `x - y ⋈ c`, `x ⋈ c` (with `|c| ≤ M`) over
//! `n` variables has a solution with every `|x| ≤ n (M + 1)`. A search that
//! finds no counterexample is therefore conclusive only when every integer
//! atom is a difference constraint; otherwise the answer is `Unknown`.
//! A counterexample found by the search is always genuine.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::statics::{free_vars, normalize_static};
use crate::syntax::ast::*;

pub const DEFAULT_BUDGET: u64 = 1 << 16;

pub type Assignment = BTreeMap<Name, Static>;

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Valid,
    Invalid(Assignment),
    Unknown(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("valid"),
            Verdict::Invalid(a) => {
                let items: Vec<String> = a.iter().map(|(k, v)| format!("{} = {}", k, v)).collect();
                write!(f, "invalid (counterexample: {})", if items.is_empty() { "none needed".to_string() } else { items.join(", ") })
            }
            Verdict::Unknown(r) => write!(f, "unknown ({})", r),
        }
    }
}

/// Hypotheses of an entailment together with the declared variables.
#[derive(Clone, Debug)]
pub struct Assumptions {
    pub props: Vec<Static>,
    /// Set variables and the universe each ranges over (as subsets).
    pub set_vars: BTreeMap<Name, Vec<i64>>,
    /// Integer variables known to denote roles of a universe.
    pub role_vars: BTreeMap<Name, Vec<i64>>,
    pub int_vars: BTreeSet<Name>,
    pub bool_vars: BTreeSet<Name>,
    /// Meaning of `full` and `comp`, when known.
    pub universe: Option<Vec<i64>>,
    /// Maximum number of assignments to enumerate.
    pub budget: u64,
}

impl Default for Assumptions {
    fn default() -> Self {
        Assumptions {
            props: vec![],
            set_vars: BTreeMap::new(),
            role_vars: BTreeMap::new(),
            int_vars: BTreeSet::new(),
            bool_vars: BTreeSet::new(),
            universe: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Assumptions {
    pub fn new() -> Assumptions {
        Assumptions::default()
    }

    pub fn with_universe(mut self, u: &[i64]) -> Self {
        self.universe = Some(normalize_roles(u.iter().copied()));
        self
    }

    pub fn set_var(mut self, name: &str, universe: &[i64]) -> Self {
        self.set_vars.insert(name.into(), normalize_roles(universe.iter().copied()));
        self
    }

    pub fn role_var(mut self, name: &str, universe: &[i64]) -> Self {
        self.role_vars.insert(name.into(), normalize_roles(universe.iter().copied()));
        self
    }

    pub fn int_var(mut self, name: &str) -> Self {
        self.int_vars.insert(name.into());
        self
    }

    pub fn bool_var(mut self, name: &str) -> Self {
        self.bool_vars.insert(name.into());
        self
    }

    pub fn prop(mut self, p: Static) -> Self {
        self.props.push(p);
        self
    }

    pub fn budget(mut self, b: u64) -> Self {
        self.budget = b;
        self
    }
}

// ----- evaluation -----

#[derive(Clone, Debug, PartialEq)]
enum Val {
    Int(i64),
    Bool(bool),
    Set(Vec<i64>),
    /// Division by zero or an overlapping disjoint union.
    Undef,
}

impl Val {
    fn to_static(&self) -> Static {
        match self {
            Val::Int(v) => Static::Int(*v),
            Val::Bool(b) => Static::Bool(*b),
            Val::Set(s) => Static::Set(s.clone()),
            Val::Undef => Static::Bool(false),
        }
    }
}

struct Eval<'a> {
    env: &'a BTreeMap<Name, Val>,
    universe: Option<&'a [i64]>,
}

#[derive(Debug)]
struct OutOfFragment(String);

impl Eval<'_> {
    fn eval(&self, s: &Static) -> Result<Val, OutOfFragment> {
        Ok(match s {
            Static::Var(n) => self
                .env
                .get(n)
                .cloned()
                .ok_or_else(|| OutOfFragment(format!("undeclared variable `{}`", n)))?,
            Static::Int(v) => Val::Int(*v),
            Static::Bool(b) => Val::Bool(*b),
            Static::Set(v) => Val::Set(v.clone()),
            Static::Full => Val::Set(self.full()?),
            Static::Op(op, args) => self.op(*op, args)?,
            other => return Err(OutOfFragment(format!("cannot evaluate `{}`", other))),
        })
    }

    fn full(&self) -> Result<Vec<i64>, OutOfFragment> {
        self.universe
            .map(|u| u.to_vec())
            .ok_or_else(|| OutOfFragment("`full` used without a universe".into()))
    }

    fn op(&self, op: Op, args: &[Static]) -> Result<Val, OutOfFragment> {
        if op == Op::Ite {
            return match self.eval(&args[0])? {
                Val::Bool(true) => self.eval(&args[1]),
                Val::Bool(false) => self.eval(&args[2]),
                _ => Ok(Val::Undef),
            };
        }
        let vals: Vec<Val> = args.iter().map(|a| self.eval(a)).collect::<Result<_, _>>()?;
        if vals.contains(&Val::Undef) {
            // relations on undefined values are false; their negations true
            return Ok(match op {
                Op::Neq | Op::NotIn => Val::Bool(true),
                o if o.is_relation() => Val::Bool(false),
                Op::And | Op::Or | Op::Not | Op::Implies => Val::Bool(false),
                _ => Val::Undef,
            });
        }
        let int = |i: usize| match &vals[i] {
            Val::Int(v) => Ok(*v),
            _ => Err(OutOfFragment("expected an integer".into())),
        };
        let boolean = |i: usize| match &vals[i] {
            Val::Bool(v) => Ok(*v),
            _ => Err(OutOfFragment("expected a boolean".into())),
        };
        let set = |i: usize| match &vals[i] {
            Val::Set(v) => Ok(v.clone()),
            _ => Err(OutOfFragment("expected a set".into())),
        };
        Ok(match op {
            Op::Union => Val::Set(normalize_roles(set(0)?.into_iter().chain(set(1)?))),
            Op::DUnion => {
                let (a, b) = (set(0)?, set(1)?);
                if a.iter().any(|x| b.contains(x)) {
                    Val::Undef
                } else {
                    Val::Set(normalize_roles(a.into_iter().chain(b)))
                }
            }
            Op::Inter => {
                let b = set(1)?;
                Val::Set(set(0)?.into_iter().filter(|x| b.contains(x)).collect())
            }
            Op::Minus => {
                let b = set(1)?;
                Val::Set(set(0)?.into_iter().filter(|x| !b.contains(x)).collect())
            }
            Op::Comp => {
                let a = set(0)?;
                Val::Set(self.full()?.into_iter().filter(|x| !a.contains(x)).collect())
            }
            Op::In => Val::Bool(set(1)?.contains(&int(0)?)),
            Op::NotIn => Val::Bool(!set(1)?.contains(&int(0)?)),
            Op::Subset => {
                let b = set(1)?;
                Val::Bool(set(0)?.iter().all(|x| b.contains(x)))
            }
            Op::Eq => Val::Bool(vals[0] == vals[1]),
            Op::Neq => Val::Bool(vals[0] != vals[1]),
            Op::Lt => Val::Bool(int(0)? < int(1)?),
            Op::Le => Val::Bool(int(0)? <= int(1)?),
            Op::Gt => Val::Bool(int(0)? > int(1)?),
            Op::Ge => Val::Bool(int(0)? >= int(1)?),
            Op::Add | Op::Sub | Op::Mul | Op::Div => {
                let (a, b) = (int(0)?, int(1)?);
                let r = match op {
                    Op::Add => a.checked_add(b),
                    Op::Sub => a.checked_sub(b),
                    Op::Mul => a.checked_mul(b),
                    _ => a.checked_div_euclid(b),
                };
                r.map(Val::Int).unwrap_or(Val::Undef)
            }
            Op::Neg => int(0)?.checked_neg().map(Val::Int).unwrap_or(Val::Undef),
            Op::And => Val::Bool(boolean(0)? && boolean(1)?),
            Op::Or => Val::Bool(boolean(0)? || boolean(1)?),
            Op::Implies => Val::Bool(!boolean(0)? || boolean(1)?),
            Op::Not => Val::Bool(!boolean(0)?),
            Op::Ite => unreachable!(),
        })
    }

    fn truth(&self, s: &Static) -> Result<bool, OutOfFragment> {
        match self.eval(s)? {
            Val::Bool(b) => Ok(b),
            Val::Undef => Ok(false),
            _ => Err(OutOfFragment(format!("`{}` is not a proposition", s))),
        }
    }
}

// ----- fragment analysis -----

/// Linear form `Σ coeff·var + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
struct Linear {
    coeffs: BTreeMap<Name, i64>,
    constant: i64,
}

impl Linear {
    fn scale(mut self, k: i64) -> Option<Linear> {
        for c in self.coeffs.values_mut() {
            *c = c.checked_mul(k)?;
        }
        self.constant = self.constant.checked_mul(k)?;
        self.coeffs.retain(|_, c| *c != 0);
        Some(self)
    }

    fn add(mut self, other: Linear) -> Option<Linear> {
        for (v, c) in other.coeffs {
            let e = self.coeffs.entry(v).or_insert(0);
            *e = e.checked_add(c)?;
        }
        self.coeffs.retain(|_, c| *c != 0);
        self.constant = self.constant.checked_add(other.constant)?;
        Some(self)
    }
}

#[derive(Default)]
struct Fragment {
    /// All integer atoms are difference constraints.
    difference: bool,
    nonlinear: Option<String>,
    max_const: i64,
}

struct Analyzer<'a> {
    int_vars: &'a BTreeSet<Name>,
    frag: Fragment,
}

impl Analyzer<'_> {
    fn note_const(&mut self, c: i64) {
        self.frag.max_const = self.frag.max_const.max(c.saturating_abs());
    }

    /// Linear form of an integer term, or `None` when it is not linear.
    fn linear(&mut self, s: &Static) -> Option<Linear> {
        match s {
            Static::Int(v) => {
                self.note_const(*v);
                Some(Linear {
                    coeffs: BTreeMap::new(),
                    constant: *v,
                })
            }
            Static::Var(n) => {
                let mut coeffs = BTreeMap::new();
                coeffs.insert(n.clone(), 1);
                Some(Linear { coeffs, constant: 0 })
            }
            Static::Op(Op::Add, a) => {
                let l = self.linear(&a[0])?;
                let r = self.linear(&a[1])?;
                l.add(r)
            }
            Static::Op(Op::Sub, a) => {
                let l = self.linear(&a[0])?;
                let r = self.linear(&a[1])?.scale(-1)?;
                l.add(r)
            }
            Static::Op(Op::Neg, a) => self.linear(&a[0])?.scale(-1),
            Static::Op(Op::Mul, a) => {
                let l = self.linear(&a[0])?;
                let r = self.linear(&a[1])?;
                if l.coeffs.is_empty() {
                    r.scale(l.constant)
                } else if r.coeffs.is_empty() {
                    l.scale(r.constant)
                } else {
                    None
                }
            }
            Static::Op(Op::Div, a) => {
                // evaluated exactly, but an atom containing it is never a difference constraint
                self.linear(&a[0])?;
                if !self.linear(&a[1])?.coeffs.is_empty() {
                    return None;
                }
                self.frag.difference = false;
                Some(Linear::default())
            }
            Static::Op(Op::Ite, a) => {
                self.walk_prop(&a[0]);
                let l = self.linear(&a[1])?;
                let r = self.linear(&a[2])?;
                self.frag.difference = false;
                l.add(r)
            }
            _ => None,
        }
    }

    fn is_int_term(&self, s: &Static) -> bool {
        match s {
            Static::Int(_) => true,
            Static::Var(n) => self.int_vars.contains(n),
            Static::Op(op, _) => matches!(op, Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Neg),
            _ => false,
        }
    }

    fn int_atom(&mut self, l: &Static, r: &Static) {
        let lin = self.linear(l).and_then(|a| {
            let b = self.linear(r)?.scale(-1)?;
            a.add(b)
        });
        match lin {
            None => {
                self.frag.nonlinear = Some(format!("non-linear arithmetic in `{} ? {}`", l, r));
            }
            Some(lin) => {
                self.note_const(lin.constant);
                let int_coeffs: Vec<i64> = lin
                    .coeffs
                    .iter()
                    .filter(|(v, _)| self.int_vars.contains(*v))
                    .map(|(_, c)| *c)
                    .collect();
                let ok = match int_coeffs.as_slice() {
                    [] => true,
                    [c] => c.abs() == 1,
                    [a, b] => (*a == 1 && *b == -1) || (*a == -1 && *b == 1),
                    _ => false,
                };
                if !ok {
                    self.frag.difference = false;
                }
            }
        }
    }

    fn walk_prop(&mut self, s: &Static) {
        match s {
            Static::Op(op, args) if op.is_relation() => {
                if matches!(op, Op::Eq | Op::Neq | Op::Lt | Op::Le | Op::Gt | Op::Ge)
                    && (self.is_int_term(&args[0]) || self.is_int_term(&args[1]))
                {
                    self.int_atom(&args[0], &args[1]);
                } else {
                    for a in args {
                        self.walk_term(a);
                    }
                }
            }
            Static::Op(_, args) => args.iter().for_each(|a| self.walk_prop(a)),
            other => self.walk_term(other),
        }
    }

    fn walk_term(&mut self, s: &Static) {
        match s {
            Static::Int(v) => self.note_const(*v),
            Static::Set(v) => v.iter().for_each(|c| self.note_const(*c)),
            Static::Var(n) if self.int_vars.contains(n) => {
                // an integer variable compared against a set: bounded by the constants
            }
            Static::Op(Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Neg, _) => {
                if self.linear(s).is_none() {
                    self.frag.nonlinear = Some(format!("non-linear arithmetic in `{}`", s));
                } else {
                    self.frag.difference = false;
                }
            }
            Static::Op(_, args) => args.iter().for_each(|a| self.walk_prop(a)),
            _ => {}
        }
    }
}

// ----- search -----

enum Domain {
    Values(Vec<Val>),
}

fn subsets(universe: &[i64]) -> Vec<Val> {
    let n = universe.len();
    (0u64..(1u64 << n))
        .map(|mask| Val::Set((0..n).filter(|i| mask >> i & 1 == 1).map(|i| universe[i]).collect()))
        .collect()
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    All,
    SetsOnly,
    IntsOnly,
}

/// Decides `props ⊨ goal`.
pub fn entails(a: &Assumptions, goal: &Static) -> Verdict {
    search(a, goal, Mode::All)
}

/// Enumeration over set, role and boolean variables only.
pub fn solve_fragment_setvars(a: &Assumptions, goal: &Static) -> Verdict {
    search(a, goal, Mode::SetsOnly)
}

/// Linear integer reasoning (no set variables).
pub fn solve_fragment_ints(a: &Assumptions, goal: &Static) -> Verdict {
    search(a, goal, Mode::IntsOnly)
}

/// Number of assignments `entails` would enumerate, if within the fragment.
pub fn assignment_count(a: &Assumptions, goal: &Static) -> Option<u128> {
    prepare(a, goal, Mode::All).ok().map(|p| p.count)
}

struct Prepared {
    props: Vec<Static>,
    goal: Static,
    vars: Vec<(Name, Domain)>,
    count: u128,
    conclusive: bool,
}

fn prepare(a: &Assumptions, goal: &Static, mode: Mode) -> Result<Prepared, Verdict> {
    let u = a.universe.as_deref();
    let props: Vec<Static> = a.props.iter().map(|p| normalize_static(p, u)).collect();
    let goal = normalize_static(goal, u);

    let mut used = BTreeSet::new();
    for p in props.iter().chain(std::iter::once(&goal)) {
        used.extend(free_vars(p));
    }
    for v in &used {
        let declared = a.set_vars.contains_key(v)
            || a.role_vars.contains_key(v)
            || a.int_vars.contains(v)
            || a.bool_vars.contains(v);
        if !declared {
            return Err(Verdict::Unknown(format!("undeclared variable `{}`", v)));
        }
    }
    let used_sets = used.iter().any(|v| a.set_vars.contains_key(v));
    let used_ints: BTreeSet<Name> = used.iter().filter(|v| a.int_vars.contains(*v)).cloned().collect();
    match mode {
        Mode::SetsOnly if !used_ints.is_empty() => {
            return Err(Verdict::Unknown("integer variables outside the set fragment".into()))
        }
        Mode::IntsOnly if used_sets => {
            return Err(Verdict::Unknown("set variables outside the integer fragment".into()))
        }
        _ => {}
    }

    let mut an = Analyzer {
        int_vars: &used_ints,
        frag: Fragment {
            difference: true,
            ..Fragment::default()
        },
    };
    for p in props.iter().chain(std::iter::once(&goal)) {
        an.walk_prop(p);
    }
    for u in a.set_vars.values().chain(a.role_vars.values()).chain(a.universe.iter()) {
        u.iter().for_each(|c| an.note_const(*c));
    }
    if let Some(reason) = an.frag.nonlinear {
        return Err(Verdict::Unknown(reason));
    }
    let n = used_ints.len() as i64;
    let bound = (n + 1).saturating_mul(an.frag.max_const.saturating_add(1));

    let mut vars = vec![];
    let mut count: u128 = 1;
    for v in &used {
        let dom = if let Some(u) = a.set_vars.get(v) {
            if u.len() > 40 {
                return Err(Verdict::Unknown(format!("universe of `{}` too large", v)));
            }
            subsets(u)
        } else if let Some(u) = a.role_vars.get(v) {
            u.iter().map(|r| Val::Int(*r)).collect()
        } else if a.bool_vars.contains(v) {
            vec![Val::Bool(false), Val::Bool(true)]
        } else {
            if bound > 1 << 20 {
                return Err(Verdict::Unknown(format!("integer window for `{}` too large", v)));
            }
            // search near zero first so counterexamples are small
            let mut vals = vec![Val::Int(0)];
            for k in 1..=bound {
                vals.push(Val::Int(k));
                vals.push(Val::Int(-k));
            }
            vals
        };
        count = count.saturating_mul(dom.len() as u128);
        vars.push((v.clone(), Domain::Values(dom)));
    }
    if count > a.budget as u128 {
        return Err(Verdict::Unknown(format!(
            "{} assignments exceed the enumeration budget of {}",
            count, a.budget
        )));
    }
    Ok(Prepared {
        props,
        goal,
        vars,
        count,
        conclusive: an.frag.difference || used_ints.is_empty(),
    })
}

fn search(a: &Assumptions, goal: &Static, mode: Mode) -> Verdict {
    let p = match prepare(a, goal, mode) {
        Ok(p) => p,
        Err(v) => return v,
    };
    let mut env: BTreeMap<Name, Val> = BTreeMap::new();
    let mut idx = vec![0usize; p.vars.len()];
    let universe = a.universe.as_deref();
    loop {
        for (i, (name, Domain::Values(vals))) in p.vars.iter().enumerate() {
            env.insert(name.clone(), vals[idx[i]].clone());
        }
        let ev = Eval { env: &env, universe };
        let holds = |s: &Static| ev.truth(s);
        let hyps = p.props.iter().try_fold(true, |acc, s| Ok::<bool, OutOfFragment>(acc && holds(s)?));
        match hyps {
            Err(e) => return Verdict::Unknown(e.0),
            Ok(true) => match holds(&p.goal) {
                Err(e) => return Verdict::Unknown(e.0),
                Ok(false) => {
                    return Verdict::Invalid(env.iter().map(|(k, v)| (k.clone(), v.to_static())).collect())
                }
                Ok(true) => {}
            },
            Ok(false) => {}
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == idx.len() {
                return if p.conclusive {
                    Verdict::Valid
                } else {
                    Verdict::Unknown("no counterexample in the search window, but the integer atoms are not difference constraints".into())
                };
            }
            let Domain::Values(vals) = &p.vars[k].1;
            idx[k] += 1;
            if idx[k] < vals.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Evaluates a proposition under a complete assignment; `None` when the
/// proposition cannot be evaluated.
pub fn holds_under(p: &Static, assignment: &Assignment, universe: Option<&[i64]>) -> Option<bool> {
    let env: BTreeMap<Name, Val> = assignment
        .iter()
        .map(|(k, v)| {
            let val = match v {
                Static::Int(i) => Val::Int(*i),
                Static::Bool(b) => Val::Bool(*b),
                Static::Set(s) => Val::Set(s.clone()),
                _ => Val::Undef,
            };
            (k.clone(), val)
        })
        .collect();
    Eval { env: &env, universe }.truth(p).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_static;

    fn s(src: &str) -> Static {
        parse_static(src).unwrap()
    }

    #[test]
    fn assumption_is_goal() {
        let a = Assumptions::new().int_var("n").prop(s("n != 0"));
        assert_eq!(entails(&a, &s("n != 0")), Verdict::Valid);
    }

    #[test]
    fn fork_guard_from_assumption() {
        let a = Assumptions::new()
            .with_universe(&[0, 1])
            .set_var("rs1", &[0, 1])
            .set_var("rs2", &[0, 1])
            .prop(s("dunion(rs1, rs2) = full"));
        assert_eq!(entails(&a, &s("dunion(rs1, rs2) = full")), Verdict::Valid);
    }

    #[test]
    fn ground_goal_is_invalid_with_empty_assignment() {
        let a = Assumptions::new().with_universe(&[0, 1, 2]);
        assert_eq!(entails(&a, &s("0 in {1, 2}")), Verdict::Invalid(Assignment::new()));
    }

    #[test]
    fn role_variable_reasoning() {
        let a = Assumptions::new().int_var("r").prop(s("r in {0, 1}")).prop(s("r != 0"));
        assert_eq!(entails(&a, &s("r = 1")), Verdict::Valid);
    }

    #[test]
    fn integer_fragment_examples() {
        let a = Assumptions::new().int_var("n").prop(s("n >= 1"));
        assert_eq!(solve_fragment_ints(&a, &s("n != 0")), Verdict::Valid);
        let a = Assumptions::new().int_var("n");
        match solve_fragment_ints(&a, &s("n != 0")) {
            Verdict::Invalid(m) => assert_eq!(m["n"], Static::Int(0)),
            v => panic!("unexpected {:?}", v),
        }
        let a = Assumptions::new().int_var("m").int_var("n").prop(s("m = n")).prop(s("n = 3"));
        assert_eq!(solve_fragment_ints(&a, &s("m = 3")), Verdict::Valid);
    }

    #[test]
    fn set_fragment_examples() {
        let a = Assumptions::new().set_var("a", &[0, 1]).set_var("b", &[0, 1]);
        assert_eq!(assignment_count(&a, &s("a = b")), Some(16));
        let u = Assumptions::new().with_universe(&[0, 1, 2]);
        assert_eq!(solve_fragment_setvars(&u, &s("union({0, 1}, {1, 2}) = full")), Verdict::Valid);
        assert!(matches!(solve_fragment_setvars(&u, &s("inter({0}, {0}) = {}")), Verdict::Invalid(_)));
    }

    #[test]
    fn nonlinear_is_unknown() {
        let a = Assumptions::new().int_var("x").int_var("y");
        assert!(matches!(entails(&a, &s("x * y >= 0")), Verdict::Unknown(_)));
    }

    #[test]
    fn non_difference_without_counterexample_is_unknown() {
        let a = Assumptions::new().int_var("x").int_var("y").prop(s("x + y = 1"));
        assert!(matches!(entails(&a, &s("x + y != 2")), Verdict::Unknown(_)));
        // but a counterexample is still reported
        assert!(matches!(entails(&a, &s("x = 0")), Verdict::Invalid(_)));
    }

    #[test]
    fn budget_is_enforced() {
        let a = Assumptions::new().set_var("a", &[0, 1, 2, 3, 4, 5, 6, 7, 8]).set_var("b", &[0, 1, 2, 3, 4, 5, 6, 7, 8]).budget(100);
        assert!(matches!(entails(&a, &s("a = b")), Verdict::Unknown(_)));
    }
}
