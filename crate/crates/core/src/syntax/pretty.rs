//! Pretty-printing back to parseable surface syntax.

use std::fmt::{self, Display, Write};

use super::ast::*;

fn roles_literal(v: &[i64]) -> String {
    let items: Vec<String> = v.iter().map(|r| r.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

impl Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("int"),
            Sort::Bool => f.write_str("bool"),
            Sort::Set => f.write_str("set"),
            Sort::SType => f.write_str("stype"),
            Sort::Type => f.write_str("type"),
            Sort::VType => f.write_str("vtype"),
            Sort::Arrow(a, b) => {
                if matches!(**a, Sort::Arrow(..)) {
                    write!(f, "({}) -> {}", a, b)
                } else {
                    write!(f, "{} -> {}", a, b)
                }
            }
        }
    }
}

// Precedence levels for statics: 0 or/implies, 1 and, 2 not, 3 relations,
// 4 additive, 5 multiplicative, 6 unary and atoms.
fn binop_info(op: Op) -> Option<(&'static str, u8)> {
    Some(match op {
        Op::Or => ("||", 0),
        Op::Implies => ("==>", 0),
        Op::And => ("&&", 1),
        Op::Eq => ("=", 3),
        Op::Neq => ("!=", 3),
        Op::Lt => ("<", 3),
        Op::Le => ("<=", 3),
        Op::Gt => (">", 3),
        Op::Ge => (">=", 3),
        Op::In => ("in", 3),
        Op::NotIn => ("notin", 3),
        Op::Subset => ("subset", 3),
        Op::Add => ("+", 4),
        Op::Sub => ("-", 4),
        Op::Mul => ("*", 5),
        Op::Div => ("/", 5),
        _ => return None,
    })
}

fn fn_name(op: Op) -> &'static str {
    match op {
        Op::Union => "union",
        Op::DUnion => "dunion",
        Op::Inter => "inter",
        Op::Minus => "minus",
        Op::Comp => "comp",
        Op::Ite => "ite",
        _ => unreachable!("not a function-style operator"),
    }
}

fn static_prec(s: &Static) -> u8 {
    match s {
        Static::Op(Op::Not, _) => 2,
        Static::Op(op, _) => binop_info(*op).map(|i| i.1).unwrap_or(6),
        Static::Lam(..) => 0,
        _ => 6,
    }
}

pub fn static_to_string(s: &Static) -> String {
    let mut out = String::new();
    write_static(&mut out, s, 0);
    out
}

fn write_static(out: &mut String, s: &Static, min: u8) {
    let prec = static_prec(s);
    let parens = prec < min || (matches!(s, Static::Lam(..)) && min > 0);
    if parens {
        out.push('(');
    }
    match s {
        Static::Var(n) => out.push_str(n),
        Static::Int(v) => write!(out, "{}", v).unwrap(),
        Static::Bool(b) => write!(out, "{}", b).unwrap(),
        Static::Set(v) => out.push_str(&roles_literal(v)),
        Static::Full => out.push_str("full"),
        Static::Op(Op::Not, args) => {
            out.push('!');
            write_static(out, &args[0], 2);
        }
        Static::Op(Op::Neg, args) => {
            out.push_str("-(");
            write_static(out, &args[0], 0);
            out.push(')');
        }
        Static::Op(op, args) => match binop_info(*op) {
            Some((sym, p)) => {
                // relations are non-associative; the rest associate to the left
                let (lmin, rmin) = if p == 3 { (4, 4) } else { (p, p + 1) };
                write_static(out, &args[0], lmin);
                write!(out, " {} ", sym).unwrap();
                write_static(out, &args[1], rmin);
            }
            None => {
                out.push_str(fn_name(*op));
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_static(out, a, 0);
                }
                out.push(')');
            }
        },
        Static::Lam(a, sort, body) => {
            write!(out, "fn {}: {} => ", a, sort).unwrap();
            write_static(out, body, 0);
        }
        Static::App(fun, arg) => {
            write_static(out, fun, 6);
            out.push('(');
            write_static(out, arg, 0);
            out.push(')');
        }
        Static::SType(st) => write_stype(out, st),
        Static::Type(t) => {
            out.push_str("type(");
            write_type(out, t, 0);
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn stype_to_string(s: &SessionType) -> String {
    let mut out = String::new();
    write_stype(&mut out, s);
    out
}

fn write_stype(out: &mut String, s: &SessionType) {
    match s {
        SessionType::End(r) => {
            out.push_str("end(");
            write_static(out, r, 0);
            out.push(')');
        }
        SessionType::BMsg { sender, payload, cont } => {
            out.push_str("msg(");
            write_static(out, sender, 0);
            out.push_str(", ");
            write_type(out, payload, 0);
            out.push_str(") :: ");
            write_cont(out, cont);
        }
        SessionType::PMsg {
            sender,
            receiver,
            payload,
            cont,
        } => {
            out.push_str("msg(");
            write_static(out, sender, 0);
            out.push_str(" -> ");
            write_static(out, receiver, 0);
            out.push_str(", ");
            write_type(out, payload, 0);
            out.push_str(") :: ");
            write_cont(out, cont);
        }
        SessionType::Quan { role, binder } => {
            out.push_str("quan(");
            write_static(out, role, 0);
            out.push_str(", ");
            write_static(out, binder, 0);
            out.push(')');
        }
        SessionType::Branch { role, left, right } => {
            out.push_str("branch(");
            write_static(out, role, 0);
            out.push_str(", ");
            write_stype(out, left);
            out.push_str(", ");
            write_stype(out, right);
            out.push(')');
        }
        SessionType::Fix(binder) => {
            out.push_str("fix(");
            write_static(out, binder, 0);
            out.push(')');
        }
        SessionType::Within(u, body) => {
            write!(out, "within({}, ", roles_literal(u)).unwrap();
            write_stype(out, body);
            out.push(')');
        }
        SessionType::Embed(st) => write_static(out, st, 0),
    }
}

fn write_cont(out: &mut String, cont: &SessionType) {
    match cont {
        SessionType::Embed(st) => write_static(out, st, 6),
        other => write_stype(out, other),
    }
}

pub fn type_to_string(t: &LinType) -> String {
    let mut out = String::new();
    write_type(&mut out, t, 0);
    out
}

// Type precedence: 0 arrows, 1 sums, 2 products, 3 atoms.
fn type_prec(t: &LinType) -> u8 {
    match t {
        LinType::Fun(..) | LinType::Forall(..) | LinType::Exists(..) => 0,
        LinType::Sum(..) => 1,
        LinType::Pair(..) => 2,
        _ => 3,
    }
}

fn write_type(out: &mut String, t: &LinType, min: u8) {
    let parens = type_prec(t) < min;
    if parens {
        out.push('(');
    }
    match t {
        LinType::Var(n) => out.push_str(n),
        LinType::Unit => out.push_str("unit"),
        LinType::Base(n, idx) => {
            out.push_str(n);
            if !idx.is_empty() {
                out.push('(');
                for (i, s) in idx.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_static(out, s, 0);
                }
                out.push(')');
            }
        }
        LinType::Chan(rs, st) => {
            out.push_str("chan(");
            write_static(out, rs, 0);
            out.push_str(", ");
            write_stype(out, st);
            out.push(')');
        }
        LinType::Pair(l, r, lin) => {
            write_type(out, l, 2);
            out.push_str(if *lin { " ** " } else { " * " });
            write_type(out, r, 3);
        }
        LinType::Fun(d, c, lin) => {
            write_type(out, d, 1);
            out.push_str(if *lin { " -o " } else { " -> " });
            write_type(out, c, 0);
        }
        LinType::Sum(l, r) => {
            write_type(out, l, 1);
            out.push_str(" + ");
            write_type(out, r, 2);
        }
        LinType::Guard(p, inner) | LinType::Assert(p, inner) => {
            out.push_str(if matches!(t, LinType::Guard(..)) { "guard(" } else { "assert(" });
            write_static(out, p, 0);
            out.push_str(", ");
            write_type(out, inner, 0);
            out.push(')');
        }
        LinType::Forall(a, s, body) | LinType::Exists(a, s, body) => {
            let kw = if matches!(t, LinType::Forall(..)) { "forall" } else { "exists" };
            write!(out, "{} {}: {}. ", kw, a, s).unwrap();
            write_type(out, body, 0);
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn term_to_string(t: &DynTerm) -> String {
    let mut out = String::new();
    write_term(&mut out, t, 0);
    out
}

fn write_string_lit(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        if ch == '"' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('"');
}

// Term precedence: 0 binders and `if` (extend as far right as possible),
// 1 applications and atoms.
fn term_prec(t: &DynTerm) -> u8 {
    match t.strip_at() {
        DynTerm::Lam { .. }
        | DynTerm::Fix { .. }
        | DynTerm::If(..)
        | DynTerm::Case { .. }
        | DynTerm::LetPair { .. }
        | DynTerm::LetAssert { .. }
        | DynTerm::LetExists { .. } => 0,
        DynTerm::App(f, _) if matches!(f.strip_at(), DynTerm::Lam { .. }) => 0,
        _ => 1,
    }
}

fn write_args(out: &mut String, args: &[DynTerm]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_term(out, a, 0);
    }
    out.push(')');
}

fn write_wrapped(out: &mut String, head: &str, body: &DynTerm) {
    out.push_str(head);
    out.push('(');
    write_term(out, body, 0);
    out.push(')');
}

fn write_term(out: &mut String, t: &DynTerm, min: u8) {
    let parens = term_prec(t) < min;
    if parens {
        out.push('(');
    }
    match t {
        DynTerm::At(_, inner) => write_term(out, inner, 0),
        DynTerm::Var(n) => out.push_str(n),
        DynTerm::Unit => out.push_str("()"),
        DynTerm::Lit(Lit::Int(v)) => write!(out, "{}", v).unwrap(),
        DynTerm::Lit(Lit::Bool(b)) => write!(out, "{}", b).unwrap(),
        DynTerm::Lit(Lit::Str(s)) => write_string_lit(out, s),
        DynTerm::Endpoint(ep) => write!(out, "{}", ep).unwrap(),
        DynTerm::Lam { param, ann, body } => {
            match ann {
                Some(ty) => write!(out, "lam ({}: {}) => ", param, type_to_string(ty)).unwrap(),
                None => write!(out, "lam {} => ", param).unwrap(),
            }
            write_term(out, body, 0);
        }
        DynTerm::Fix {
            name,
            param,
            dom,
            cod,
            body,
        } => {
            write!(
                out,
                "fix {}({}: {}): {} => ",
                name,
                param,
                type_to_string(dom),
                type_to_string(cod)
            )
            .unwrap();
            write_term(out, body, 0);
        }
        DynTerm::App(f, arg) => match f.strip_at() {
            DynTerm::Lam { param, ann, body } => {
                write!(out, "let {}", param).unwrap();
                if let Some(ty) = ann {
                    write!(out, ": {}", type_to_string(ty)).unwrap();
                }
                out.push_str(" = ");
                write_term(out, arg, 0);
                out.push_str(" in ");
                write_term(out, body, 0);
            }
            _ => {
                write_term(out, f, 1);
                out.push('(');
                write_term(out, arg, 0);
                out.push(')');
            }
        },
        DynTerm::Pair(l, r) => {
            out.push('(');
            write_term(out, l, 0);
            out.push_str(", ");
            write_term(out, r, 0);
            out.push(')');
        }
        DynTerm::Fst(e) => write_wrapped(out, "fst", e),
        DynTerm::Snd(e) => write_wrapped(out, "snd", e),
        DynTerm::LetPair {
            left,
            right,
            bound,
            body,
        } => {
            write!(out, "let ({}, {}) = ", left, right).unwrap();
            write_term(out, bound, 0);
            out.push_str(" in ");
            write_term(out, body, 0);
        }
        DynTerm::If(c, a, b) => {
            out.push_str("if ");
            write_term(out, c, 0);
            out.push_str(" then ");
            write_term(out, a, 0);
            out.push_str(" else ");
            write_term(out, b, 0);
        }
        DynTerm::Inj { right, body } => write_wrapped(out, if *right { "inr" } else { "inl" }, body),
        DynTerm::Case { scrut, left, right } => {
            out.push_str("case ");
            write_term(out, scrut, 0);
            write!(out, " of inl {} => ", left.0).unwrap();
            write_term(out, &left.1, 1);
            write!(out, " | inr {} => ", right.0).unwrap();
            write_term(out, &right.1, 0);
        }
        DynTerm::GuardIntro(e) => write_wrapped(out, "guard+", e),
        DynTerm::GuardElim(e) => write_wrapped(out, "guard-", e),
        DynTerm::AssertIntro(e) => write_wrapped(out, "assert+", e),
        DynTerm::LetAssert { var, bound, body } => {
            write!(out, "let assert({}) = ", var).unwrap();
            write_term(out, bound, 0);
            out.push_str(" in ");
            write_term(out, body, 0);
        }
        DynTerm::ForallIntro { var, body } => {
            out.push_str("forall+");
            if let Some((a, s)) = var {
                write!(out, "[{}: {}]", a, s).unwrap();
            }
            write_wrapped(out, "", body);
        }
        DynTerm::ForallElim { body, arg } => {
            out.push_str("forall-");
            if let Some(s) = arg {
                write!(out, "{{{}}}", static_to_string(s)).unwrap();
            }
            write_wrapped(out, "", body);
        }
        DynTerm::ExistsIntro { body, witness, ann } => {
            out.push_str("exists+");
            if let Some(s) = witness {
                write!(out, "{{{}}}", static_to_string(s)).unwrap();
            }
            if let Some(ty) = ann {
                write!(out, "[{}]", type_to_string(ty)).unwrap();
            }
            write_wrapped(out, "", body);
        }
        DynTerm::LetExists {
            svar,
            var,
            bound,
            body,
        } => {
            out.push_str("let exists");
            if let Some(a) = svar {
                write!(out, "[{}]", a).unwrap();
            }
            write!(out, "({}) = ", var).unwrap();
            write_term(out, bound, 0);
            out.push_str(" in ");
            write_term(out, body, 0);
        }
        DynTerm::Ascribe(e, ty) => {
            out.push('(');
            write_term(out, e, 0);
            write!(out, " : {})", type_to_string(ty)).unwrap();
        }
        DynTerm::ApiCall { api, statics, args, .. } => {
            out.push_str(api.as_str());
            if !statics.is_empty() {
                let items: Vec<String> = statics.iter().map(static_to_string).collect();
                write!(out, "{{{}}}", items.join(", ")).unwrap();
            }
            write_args(out, args);
        }
        DynTerm::Prim(op, args) => {
            out.push_str(op.as_str());
            write_args(out, args);
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    let mut protos: Vec<&ProtocolDecl> = p.protocols.values().collect();
    protos.sort_by_key(|d| (d.span.line, d.span.col));
    for d in protos {
        write!(out, "protocol {}", d.name).unwrap();
        if !d.params.is_empty() {
            let ps: Vec<String> = d.params.iter().map(|(n, s)| format!("{}: {}", n, s)).collect();
            write!(out, "({})", ps.join(", ")).unwrap();
        }
        if !d.roles.is_empty() {
            let rs: Vec<String> = d.roles.iter().map(|(n, v)| format!("{}={}", n, v)).collect();
            write!(out, " roles {}", rs.join(", ")).unwrap();
        }
        writeln!(out, " universe {} =\n  {};", roles_literal(&d.universe), stype_to_string(&d.def)).unwrap();
    }
    for d in &p.defs {
        write!(out, "def {}", d.name).unwrap();
        if let Some(ty) = &d.ann {
            write!(out, ": {}", type_to_string(ty)).unwrap();
        }
        writeln!(out, " =\n  {};", term_to_string(&d.body)).unwrap();
    }
    writeln!(out, "main = {};", term_to_string(&p.main)).unwrap();
    out
}

impl Display for Static {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&static_to_string(self))
    }
}

impl Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&stype_to_string(self))
    }
}

impl Display for LinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&type_to_string(self))
    }
}

impl Display for DynTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&term_to_string(self))
    }
}
