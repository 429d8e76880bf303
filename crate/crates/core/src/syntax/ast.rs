//! Abstract syntax shared by the statics, the type language and the dynamics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub type Name = String;

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Int,
    Bool,
    Set,
    SType,
    Type,
    VType,
    Arrow(Box<Sort>, Box<Sort>),
}

impl Sort {
    pub fn arrow(dom: Sort, cod: Sort) -> Sort {
        Sort::Arrow(Box::new(dom), Box::new(cod))
    }

    /// `type` is accepted wherever `vtype` is expected.
    pub fn fits(&self, expected: &Sort) -> bool {
        match (self, expected) {
            (Sort::Type, Sort::VType) => true,
            (Sort::Arrow(a1, b1), Sort::Arrow(a2, b2)) => a1 == a2 && b1.fits(b2),
            _ => self == expected,
        }
    }
}

/// Primitive static operators. Set operators that mention the full set
/// (`Comp`) are resolved against the universe in scope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Union,
    DUnion,
    Inter,
    Minus,
    Comp,
    In,
    NotIn,
    Eq,
    Neq,
    Subset,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    And,
    Or,
    Not,
    Implies,
    Ite,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Comp | Op::Neg | Op::Not => 1,
            Op::Ite => 3,
            _ => 2,
        }
    }

    pub fn is_relation(self) -> bool {
        matches!(
            self,
            Op::In | Op::NotIn | Op::Eq | Op::Neq | Op::Subset | Op::Lt | Op::Le | Op::Gt | Op::Ge
        )
    }
}

/// Static terms. Session types and types are static terms of sort
/// `stype` and `type`/`vtype`; they are embedded through `SType`/`Type`.
#[derive(Clone, Debug, PartialEq)]
pub enum Static {
    Var(Name),
    Int(i64),
    Bool(bool),
    /// Sorted, duplicate-free role set literal.
    Set(Vec<i64>),
    /// The full role set of the ambient universe.
    Full,
    Op(Op, Vec<Static>),
    Lam(Name, Sort, Box<Static>),
    App(Box<Static>, Box<Static>),
    SType(Box<SessionType>),
    Type(Box<LinType>),
}

impl Static {
    pub fn set<I: IntoIterator<Item = i64>>(roles: I) -> Static {
        Static::Set(normalize_roles(roles))
    }

    pub fn op(op: Op, args: Vec<Static>) -> Static {
        Static::Op(op, args)
    }

    pub fn bin(op: Op, a: Static, b: Static) -> Static {
        Static::Op(op, vec![a, b])
    }

    pub fn var(name: &str) -> Static {
        Static::Var(name.to_string())
    }

    pub fn app(f: Static, a: Static) -> Static {
        Static::App(Box::new(f), Box::new(a))
    }

    pub fn and(props: Vec<Static>) -> Static {
        let mut it = props.into_iter();
        match it.next() {
            None => Static::Bool(true),
            Some(first) => it.fold(first, |acc, p| Static::bin(Op::And, acc, p)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Static) -> Static {
        Static::Op(Op::Not, vec![p])
    }

    /// Wraps a session type, unwrapping `Embed` so the embedding stays canonical.
    pub fn stype(s: SessionType) -> Static {
        match s {
            SessionType::Embed(inner) => inner,
            other => Static::SType(Box::new(other)),
        }
    }

    pub fn ty(t: LinType) -> Static {
        match t {
            LinType::Var(n) => Static::Var(n),
            other => Static::Type(Box::new(other)),
        }
    }

    pub fn is_ground_value(&self) -> bool {
        matches!(self, Static::Int(_) | Static::Bool(_) | Static::Set(_))
    }
}

pub fn normalize_roles<I: IntoIterator<Item = i64>>(roles: I) -> Vec<i64> {
    let mut v: Vec<i64> = roles.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Global protocols.
#[derive(Clone, Debug, PartialEq)]
pub enum SessionType {
    End(Static),
    /// Broadcast of a nonlinear value by `sender`.
    BMsg {
        sender: Static,
        payload: Box<LinType>,
        cont: Box<SessionType>,
    },
    /// Point-to-point (possibly linear) message.
    PMsg {
        sender: Static,
        receiver: Static,
        payload: Box<LinType>,
        cont: Box<SessionType>,
    },
    /// `binder` is a static lambda `fn a: sort => stype`.
    Quan { role: Static, binder: Static },
    Branch {
        role: Static,
        left: Box<SessionType>,
        right: Box<SessionType>,
    },
    /// `binder` is a static lambda `fn y: stype => stype`.
    Fix(Static),
    /// Fixes the full role set for the enclosed protocol.
    Within(Vec<i64>, Box<SessionType>),
    /// Any other static term of sort `stype`: variables, applications, `ite`.
    Embed(Static),
}

impl SessionType {
    pub fn embed(s: Static) -> SessionType {
        match s {
            Static::SType(inner) => *inner,
            other => SessionType::Embed(other),
        }
    }

    pub fn end(role: Static) -> SessionType {
        SessionType::End(role)
    }

    pub fn bmsg(sender: Static, payload: LinType, cont: SessionType) -> SessionType {
        SessionType::BMsg {
            sender,
            payload: Box::new(payload),
            cont: Box::new(cont),
        }
    }

    pub fn pmsg(sender: Static, receiver: Static, payload: LinType, cont: SessionType) -> SessionType {
        SessionType::PMsg {
            sender,
            receiver,
            payload: Box::new(payload),
            cont: Box::new(cont),
        }
    }

    pub fn within(universe: Vec<i64>, body: SessionType) -> SessionType {
        SessionType::Within(normalize_roles(universe), Box::new(body))
    }

    /// Strips enclosing `Within` wrappers, returning the innermost universe seen.
    pub fn strip_within(&self) -> (Option<&Vec<i64>>, &SessionType) {
        let mut universe = None;
        let mut cur = self;
        while let SessionType::Within(u, body) = cur {
            universe = Some(u);
            cur = body;
        }
        (universe, cur)
    }
}

/// Types, linear and nonlinear.
#[derive(Clone, Debug, PartialEq)]
pub enum LinType {
    Var(Name),
    Unit,
    /// `int`, `int(n)`, `bool`, `bool(b)`, `string`.
    Base(Name, Vec<Static>),
    Chan(Static, Box<SessionType>),
    Pair(Box<LinType>, Box<LinType>, bool),
    Fun(Box<LinType>, Box<LinType>, bool),
    Sum(Box<LinType>, Box<LinType>),
    Guard(Static, Box<LinType>),
    Assert(Static, Box<LinType>),
    Forall(Name, Sort, Box<LinType>),
    Exists(Name, Sort, Box<LinType>),
}

impl LinType {
    pub fn base(name: &str, indices: Vec<Static>) -> LinType {
        LinType::Base(name.to_string(), indices)
    }

    pub fn int(idx: Option<Static>) -> LinType {
        LinType::Base("int".into(), idx.into_iter().collect())
    }

    pub fn boolean(idx: Option<Static>) -> LinType {
        LinType::Base("bool".into(), idx.into_iter().collect())
    }

    pub fn string() -> LinType {
        LinType::Base("string".into(), vec![])
    }

    pub fn chan(roles: Static, proto: SessionType) -> LinType {
        LinType::Chan(roles, Box::new(proto))
    }

    pub fn pair(l: LinType, r: LinType, linear: bool) -> LinType {
        LinType::Pair(Box::new(l), Box::new(r), linear)
    }

    pub fn fun(d: LinType, c: LinType, linear: bool) -> LinType {
        LinType::Fun(Box::new(d), Box::new(c), linear)
    }

    pub fn sum(l: LinType, r: LinType) -> LinType {
        LinType::Sum(Box::new(l), Box::new(r))
    }

    /// Whether values of this type must be used exactly once. Type variables
    /// are treated as linear since they may be instantiated with `vtype`s.
    pub fn is_linear(&self) -> bool {
        match self {
            LinType::Var(_) => true,
            LinType::Unit | LinType::Base(..) => false,
            LinType::Chan(..) => true,
            LinType::Pair(l, r, lin) => *lin || l.is_linear() || r.is_linear(),
            LinType::Fun(_, _, lin) => *lin,
            LinType::Sum(l, r) => l.is_linear() || r.is_linear(),
            LinType::Guard(_, t) | LinType::Assert(_, t) => t.is_linear(),
            LinType::Forall(_, _, t) | LinType::Exists(_, _, t) => t.is_linear(),
        }
    }

    /// Like [`is_linear`](Self::is_linear) but treats the given type
    /// variables as nonlinear (those quantified at sort `type`).
    pub fn is_linear_with(&self, nonlinear_vars: &dyn Fn(&str) -> bool) -> bool {
        match self {
            LinType::Var(n) => !nonlinear_vars(n),
            LinType::Unit | LinType::Base(..) => false,
            LinType::Chan(..) => true,
            LinType::Pair(l, r, lin) => {
                *lin || l.is_linear_with(nonlinear_vars) || r.is_linear_with(nonlinear_vars)
            }
            LinType::Fun(_, _, lin) => *lin,
            LinType::Sum(l, r) => l.is_linear_with(nonlinear_vars) || r.is_linear_with(nonlinear_vars),
            LinType::Guard(_, t) | LinType::Assert(_, t) => t.is_linear_with(nonlinear_vars),
            LinType::Forall(_, _, t) | LinType::Exists(_, _, t) => t.is_linear_with(nonlinear_vars),
        }
    }

    pub fn contains_chan(&self) -> bool {
        match self {
            LinType::Chan(..) => true,
            LinType::Var(_) | LinType::Unit | LinType::Base(..) => false,
            LinType::Pair(l, r, _) | LinType::Sum(l, r) => l.contains_chan() || r.contains_chan(),
            // a function value does not hold a channel even if its domain mentions one
            LinType::Fun(..) => false,
            LinType::Guard(_, t) | LinType::Assert(_, t) => t.contains_chan(),
            LinType::Forall(_, _, t) | LinType::Exists(_, _, t) => t.contains_chan(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelId(pub u64);

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// A runtime endpoint `c^rs`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub channel: ChannelId,
    pub roles: Vec<i64>,
}

impl Endpoint {
    pub fn new(channel: ChannelId, roles: Vec<i64>) -> Endpoint {
        Endpoint {
            channel,
            roles: normalize_roles(roles),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let roles: Vec<String> = self.roles.iter().map(|r| r.to_string()).collect();
        write!(f, "{}^{{{}}}", self.channel, roles.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Lit {
    Int(i64),
    Bool(bool),
    Str(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ApiName {
    Fork,
    Cut,
    Elim,
    Split,
    BSend,
    BRecv,
    Send,
    Recv,
    Skip,
    Close,
    Wait,
    Unify,
    Exify,
    Offer,
    Choose,
    Recurse,
}

impl ApiName {
    pub const ALL: [ApiName; 16] = [
        ApiName::Fork,
        ApiName::Cut,
        ApiName::Elim,
        ApiName::Split,
        ApiName::BSend,
        ApiName::BRecv,
        ApiName::Send,
        ApiName::Recv,
        ApiName::Skip,
        ApiName::Close,
        ApiName::Wait,
        ApiName::Unify,
        ApiName::Exify,
        ApiName::Offer,
        ApiName::Choose,
        ApiName::Recurse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ApiName::Fork => "fork",
            ApiName::Cut => "cut",
            ApiName::Elim => "elim",
            ApiName::Split => "split",
            ApiName::BSend => "bsend",
            ApiName::BRecv => "brecv",
            ApiName::Send => "send",
            ApiName::Recv => "recv",
            ApiName::Skip => "skip",
            ApiName::Close => "close",
            ApiName::Wait => "wait",
            ApiName::Unify => "unify",
            ApiName::Exify => "exify",
            ApiName::Offer => "offer",
            ApiName::Choose => "choose",
            ApiName::Recurse => "recurse",
        }
    }

    pub fn from_name(s: &str) -> Option<ApiName> {
        ApiName::ALL.iter().copied().find(|a| a.as_str() == s)
    }

    /// Calls that only retype an endpoint.
    pub fn is_proof_function(self) -> bool {
        matches!(
            self,
            ApiName::Skip | ApiName::Unify | ApiName::Exify | ApiName::Recurse
        )
    }
}

impl fmt::Display for ApiName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Non-session constant functions on base values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Neq,
    Lt,
    Le,
    Not,
}

impl PrimOp {
    pub const ALL: [PrimOp; 9] = [
        PrimOp::Add,
        PrimOp::Sub,
        PrimOp::Mul,
        PrimOp::Div,
        PrimOp::Eq,
        PrimOp::Neq,
        PrimOp::Lt,
        PrimOp::Le,
        PrimOp::Not,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PrimOp::Add => "add",
            PrimOp::Sub => "sub",
            PrimOp::Mul => "mul",
            PrimOp::Div => "div",
            PrimOp::Eq => "eq",
            PrimOp::Neq => "neq",
            PrimOp::Lt => "lt",
            PrimOp::Le => "le",
            PrimOp::Not => "not",
        }
    }

    pub fn from_name(s: &str) -> Option<PrimOp> {
        PrimOp::ALL.iter().copied().find(|p| p.as_str() == s)
    }

    pub fn arity(self) -> usize {
        if self == PrimOp::Not {
            1
        } else {
            2
        }
    }
}

/// Dynamic terms.
#[derive(Clone, Debug, PartialEq)]
pub enum DynTerm {
    Var(Name),
    Unit,
    Lit(Lit),
    Endpoint(Endpoint),
    Lam {
        param: Name,
        ann: Option<LinType>,
        body: Box<DynTerm>,
    },
    /// Named recursive function `fix name(param: dom): cod => body`.
    Fix {
        name: Name,
        param: Name,
        dom: LinType,
        cod: LinType,
        body: Box<DynTerm>,
    },
    App(Box<DynTerm>, Box<DynTerm>),
    Pair(Box<DynTerm>, Box<DynTerm>),
    Fst(Box<DynTerm>),
    Snd(Box<DynTerm>),
    LetPair {
        left: Name,
        right: Name,
        bound: Box<DynTerm>,
        body: Box<DynTerm>,
    },
    If(Box<DynTerm>, Box<DynTerm>, Box<DynTerm>),
    Inj {
        right: bool,
        body: Box<DynTerm>,
    },
    Case {
        scrut: Box<DynTerm>,
        left: (Name, Box<DynTerm>),
        right: (Name, Box<DynTerm>),
    },
    GuardIntro(Box<DynTerm>),
    GuardElim(Box<DynTerm>),
    AssertIntro(Box<DynTerm>),
    LetAssert {
        var: Name,
        bound: Box<DynTerm>,
        body: Box<DynTerm>,
    },
    ForallIntro {
        var: Option<(Name, Sort)>,
        body: Box<DynTerm>,
    },
    ForallElim {
        body: Box<DynTerm>,
        arg: Option<Static>,
    },
    ExistsIntro {
        body: Box<DynTerm>,
        witness: Option<Static>,
        ann: Option<LinType>,
    },
    LetExists {
        svar: Option<Name>,
        var: Name,
        bound: Box<DynTerm>,
        body: Box<DynTerm>,
    },
    Ascribe(Box<DynTerm>, LinType),
    ApiCall {
        api: ApiName,
        statics: Vec<Static>,
        args: Vec<DynTerm>,
        /// Guard deferred to run time when the solver could not decide it.
        runtime_guard: Option<Static>,
    },
    Prim(PrimOp, Vec<DynTerm>),
    /// Source position marker; transparent to every analysis.
    At(Span, Box<DynTerm>),
}

impl DynTerm {
    pub fn var(n: &str) -> DynTerm {
        DynTerm::Var(n.to_string())
    }

    pub fn lam(param: &str, ann: Option<LinType>, body: DynTerm) -> DynTerm {
        DynTerm::Lam {
            param: param.to_string(),
            ann,
            body: Box::new(body),
        }
    }

    pub fn app(f: DynTerm, a: DynTerm) -> DynTerm {
        DynTerm::App(Box::new(f), Box::new(a))
    }

    pub fn pair(l: DynTerm, r: DynTerm) -> DynTerm {
        DynTerm::Pair(Box::new(l), Box::new(r))
    }

    pub fn api(api: ApiName, args: Vec<DynTerm>) -> DynTerm {
        DynTerm::ApiCall {
            api,
            statics: vec![],
            args,
            runtime_guard: None,
        }
    }

    /// `let x = bound in body`, encoded as an application.
    pub fn let_in(x: &str, bound: DynTerm, body: DynTerm) -> DynTerm {
        DynTerm::app(DynTerm::lam(x, None, body), bound)
    }

    pub fn let_pair(l: &str, r: &str, bound: DynTerm, body: DynTerm) -> DynTerm {
        DynTerm::LetPair {
            left: l.into(),
            right: r.into(),
            bound: Box::new(bound),
            body: Box::new(body),
        }
    }

    pub fn strip_at(&self) -> &DynTerm {
        let mut cur = self;
        while let DynTerm::At(_, inner) = cur {
            cur = inner;
        }
        cur
    }

    pub fn is_value(&self) -> bool {
        match self {
            DynTerm::Var(_)
            | DynTerm::Unit
            | DynTerm::Lit(_)
            | DynTerm::Endpoint(_)
            | DynTerm::Lam { .. }
            | DynTerm::Fix { .. } => true,
            DynTerm::Pair(l, r) => l.is_value() && r.is_value(),
            DynTerm::Inj { body, .. }
            | DynTerm::GuardIntro(body)
            | DynTerm::AssertIntro(body)
            | DynTerm::ForallIntro { body, .. }
            | DynTerm::ExistsIntro { body, .. } => body.is_value(),
            DynTerm::At(_, inner) | DynTerm::Ascribe(inner, _) => inner.is_value(),
            _ => false,
        }
    }

    pub fn contains_endpoint(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| {
            if matches!(t, DynTerm::Endpoint(_)) {
                found = true;
            }
        });
        found
    }

    /// Pre-order traversal over every subterm.
    pub fn visit(&self, f: &mut dyn FnMut(&DynTerm)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }

    pub fn children(&self) -> Vec<&DynTerm> {
        match self {
            DynTerm::Var(_) | DynTerm::Unit | DynTerm::Lit(_) | DynTerm::Endpoint(_) => vec![],
            DynTerm::Lam { body, .. } | DynTerm::Fix { body, .. } => vec![body],
            DynTerm::App(a, b) | DynTerm::Pair(a, b) => vec![a, b],
            DynTerm::Fst(a) | DynTerm::Snd(a) => vec![a],
            DynTerm::LetPair { bound, body, .. }
            | DynTerm::LetAssert { bound, body, .. }
            | DynTerm::LetExists { bound, body, .. } => vec![bound, body],
            DynTerm::If(a, b, c) => vec![a, b, c],
            DynTerm::Inj { body, .. } => vec![body],
            DynTerm::Case { scrut, left, right } => vec![scrut, &left.1, &right.1],
            DynTerm::GuardIntro(a)
            | DynTerm::GuardElim(a)
            | DynTerm::AssertIntro(a)
            | DynTerm::Ascribe(a, _)
            | DynTerm::At(_, a) => vec![a],
            DynTerm::ForallIntro { body, .. }
            | DynTerm::ForallElim { body, .. }
            | DynTerm::ExistsIntro { body, .. } => vec![body],
            DynTerm::ApiCall { args, .. } | DynTerm::Prim(_, args) => args.iter().collect(),
        }
    }
}

/// A protocol declaration: optional static parameters, the universe and the body.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolDecl {
    pub name: Name,
    pub params: Vec<(Name, Sort)>,
    pub roles: Vec<(Name, i64)>,
    pub universe: Vec<i64>,
    pub def: SessionType,
    pub span: Span,
}

impl ProtocolDecl {
    /// The declaration as a closed static term (a lambda when parameterized).
    pub fn as_static(&self) -> Static {
        let mut body = Static::stype(SessionType::within(self.universe.clone(), self.def.clone()));
        for (p, s) in self.params.iter().rev() {
            body = Static::Lam(p.clone(), s.clone(), Box::new(body));
        }
        body
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermDef {
    pub name: Name,
    pub ann: Option<LinType>,
    pub body: DynTerm,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub protocols: BTreeMap<Name, ProtocolDecl>,
    /// In declaration order; later definitions may refer to earlier ones.
    pub defs: Vec<TermDef>,
    pub main: DynTerm,
    /// Role aliases from every protocol declaration.
    pub aliases: BTreeMap<Name, i64>,
}

impl Program {
    pub fn def(&self, name: &str) -> Option<&TermDef> {
        self.defs.iter().find(|d| d.name == name)
    }

    /// Union of every declared universe; the default range of set variables.
    pub fn ambient_universe(&self) -> Vec<i64> {
        normalize_roles(self.protocols.values().flat_map(|p| p.universe.iter().copied()))
    }
}
