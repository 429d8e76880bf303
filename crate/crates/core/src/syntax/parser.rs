//! Recursive-descent parser for the surface language.
//!
//! Names are resolved while parsing: role aliases become integers, protocol
//! names are expanded to their (instantiated) definitions, and every variable
//! must be bound by an enclosing binder or an earlier definition.

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::ParseError;
use crate::statics::subst::subst_static;

const DYN_KEYWORDS: &[&str] = &[
    "let", "in", "lam", "fix", "if", "then", "else", "case", "of", "inl", "inr", "fst", "snd", "true",
    "false", "guard", "assert", "forall", "exists", "def", "main", "protocol",
];

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    aliases: BTreeMap<Name, i64>,
    protocols: BTreeMap<Name, ProtocolDecl>,
    static_scope: Vec<Name>,
    dyn_scope: Vec<Name>,
    check_scope: bool,
}

impl Parser {
    pub fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            aliases: BTreeMap::new(),
            protocols: BTreeMap::new(),
            static_scope: vec![],
            dyn_scope: vec![],
            check_scope: true,
        })
    }

    /// A parser that accepts free variables (used for standalone fragments).
    pub fn lenient(src: &str) -> Result<Parser, ParseError> {
        let mut p = Parser::new(src)?;
        p.check_scope = false;
        Ok(p)
    }

    pub fn with_static_vars(mut self, vars: &[&str]) -> Parser {
        self.static_scope.extend(vars.iter().map(|v| v.to_string()));
        self
    }

    pub fn with_program_context(mut self, prog: &Program) -> Parser {
        self.aliases = prog.aliases.clone();
        self.protocols = prog.protocols.clone();
        self.dyn_scope.extend(prog.defs.iter().map(|d| d.name.clone()));
        self
    }

    // ----- token plumbing -----

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::at(
            self.span(),
            format!("{} (at token `{}`)", msg.into(), self.peek().describe()),
        ))
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{}`", s))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.error(format!("expected `{}`", s))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !DYN_KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => self.error("expected identifier"),
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error("unexpected trailing input")
        }
    }

    fn unbound<T>(&self, span: Span, name: &str) -> Result<T, ParseError> {
        Err(ParseError::UnboundName {
            span,
            name: name.to_string(),
        })
    }

    fn with_static<T>(
        &mut self,
        names: &[Name],
        f: impl FnOnce(&mut Self) -> Result<T, ParseError>,
    ) -> Result<T, ParseError> {
        let n = self.static_scope.len();
        self.static_scope.extend(names.iter().cloned());
        let r = f(self);
        self.static_scope.truncate(n);
        r
    }

    fn with_dyn<T>(
        &mut self,
        names: &[Name],
        f: impl FnOnce(&mut Self) -> Result<T, ParseError>,
    ) -> Result<T, ParseError> {
        let n = self.dyn_scope.len();
        self.dyn_scope.extend(names.iter().cloned());
        let r = f(self);
        self.dyn_scope.truncate(n);
        r
    }

    // ----- program -----

    pub fn program(mut self) -> Result<Program, ParseError> {
        let mut defs: Vec<TermDef> = vec![];
        let mut main = None;
        while *self.peek() != Tok::Eof {
            if self.is_kw("protocol") {
                let decl = self.protocol_decl()?;
                self.protocols.insert(decl.name.clone(), decl);
            } else if self.is_kw("def") {
                let span = self.span();
                self.advance();
                let name = self.ident()?;
                if defs.iter().any(|d| d.name == name) {
                    return Err(ParseError::at(span, format!("duplicate definition `{}`", name)));
                }
                let ann = if self.eat_sym(":") { Some(self.ty()?) } else { None };
                self.expect_sym("=")?;
                let body = self.expr()?;
                self.expect_sym(";")?;
                self.dyn_scope.push(name.clone());
                defs.push(TermDef { name, ann, body, span });
            } else if self.is_kw("main") {
                let span = self.span();
                self.advance();
                if main.is_some() {
                    return Err(ParseError::at(span, "duplicate `main`"));
                }
                self.expect_sym("=")?;
                let body = self.expr()?;
                self.expect_sym(";")?;
                main = Some(body);
            } else {
                return self.error("expected `protocol`, `def` or `main`");
            }
        }
        Ok(Program {
            protocols: self.protocols,
            defs,
            main: main.unwrap_or(DynTerm::Unit),
            aliases: self.aliases,
        })
    }

    fn protocol_decl(&mut self) -> Result<ProtocolDecl, ParseError> {
        let span = self.span();
        self.expect_kw("protocol")?;
        let name = self.ident()?;
        if self.protocols.contains_key(&name) {
            return Err(ParseError::at(span, format!("duplicate protocol `{}`", name)));
        }
        let mut params = vec![];
        if self.eat_sym("(") {
            loop {
                let p = self.ident()?;
                self.expect_sym(":")?;
                let s = self.sort()?;
                params.push((p, s));
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
        }
        let mut roles = vec![];
        if self.eat_kw("roles") {
            loop {
                let rspan = self.span();
                let alias = self.ident()?;
                self.expect_sym("=")?;
                let value = self.int_lit()?;
                if let Some(prev) = self.aliases.get(&alias) {
                    if *prev != value {
                        return Err(ParseError::at(
                            rspan,
                            format!("role alias `{}` already bound to {}", alias, prev),
                        ));
                    }
                }
                self.aliases.insert(alias.clone(), value);
                roles.push((alias, value));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_kw("universe")?;
        let universe = match self.role_set_literal()? {
            Static::Set(v) => v,
            _ => unreachable!(),
        };
        self.expect_sym("=")?;
        let names: Vec<Name> = params.iter().map(|p| p.0.clone()).collect();
        let def_static = self.with_static(&names, |p| p.static_expr())?;
        self.expect_sym(";")?;
        Ok(ProtocolDecl {
            name,
            params,
            roles,
            universe,
            def: SessionType::embed(def_static),
            span,
        })
    }

    fn int_lit(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(if neg { -v } else { v })
            }
            _ => self.error("expected integer"),
        }
    }

    fn role_set_literal(&mut self) -> Result<Static, ParseError> {
        self.expect_sym("{")?;
        let mut roles = vec![];
        if !self.is_sym("}") {
            loop {
                match self.peek().clone() {
                    Tok::Ident(a) => {
                        let span = self.span();
                        self.advance();
                        match self.aliases.get(&a) {
                            Some(v) => roles.push(*v),
                            None => {
                                return Err(ParseError::at(
                                    span,
                                    format!("role set literal needs constant roles, found `{}`", a),
                                ))
                            }
                        }
                    }
                    _ => roles.push(self.int_lit()?),
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("}")?;
        Ok(Static::set(roles))
    }

    // ----- sorts -----

    pub fn sort(&mut self) -> Result<Sort, ParseError> {
        let dom = self.sort_atom()?;
        if self.eat_sym("->") {
            Ok(Sort::arrow(dom, self.sort()?))
        } else {
            Ok(dom)
        }
    }

    fn sort_atom(&mut self) -> Result<Sort, ParseError> {
        if self.eat_sym("(") {
            let s = self.sort()?;
            self.expect_sym(")")?;
            return Ok(s);
        }
        let s = match self.peek() {
            Tok::Ident(s) => match s.as_str() {
                "int" => Sort::Int,
                "bool" => Sort::Bool,
                "set" => Sort::Set,
                "stype" => Sort::SType,
                "type" => Sort::Type,
                "vtype" => Sort::VType,
                _ => return self.error("expected sort"),
            },
            _ => return self.error("expected sort"),
        };
        self.advance();
        Ok(s)
    }

    // ----- statics -----

    pub fn static_expr(&mut self) -> Result<Static, ParseError> {
        self.static_or()
    }

    fn static_or(&mut self) -> Result<Static, ParseError> {
        let mut lhs = self.static_and()?;
        loop {
            if self.eat_sym("||") {
                lhs = Static::bin(Op::Or, lhs, self.static_and()?);
            } else if self.eat_sym("==>") {
                lhs = Static::bin(Op::Implies, lhs, self.static_and()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn static_and(&mut self) -> Result<Static, ParseError> {
        let mut lhs = self.static_not()?;
        while self.eat_sym("&&") {
            lhs = Static::bin(Op::And, lhs, self.static_not()?);
        }
        Ok(lhs)
    }

    fn static_not(&mut self) -> Result<Static, ParseError> {
        if self.eat_sym("!") {
            return Ok(Static::not(self.static_not()?));
        }
        self.static_rel()
    }

    fn static_rel(&mut self) -> Result<Static, ParseError> {
        let lhs = self.static_add()?;
        let op = match self.peek() {
            Tok::Sym("=") => Op::Eq,
            Tok::Sym("!=") => Op::Neq,
            Tok::Sym("<") => Op::Lt,
            Tok::Sym("<=") => Op::Le,
            Tok::Sym(">") => Op::Gt,
            Tok::Sym(">=") => Op::Ge,
            Tok::Ident(s) if s == "in" => Op::In,
            Tok::Ident(s) if s == "notin" => Op::NotIn,
            Tok::Ident(s) if s == "subset" => Op::Subset,
            _ => return Ok(lhs),
        };
        self.advance();
        Ok(Static::bin(op, lhs, self.static_add()?))
    }

    fn static_add(&mut self) -> Result<Static, ParseError> {
        let mut lhs = self.static_mul()?;
        loop {
            if self.eat_sym("+") {
                lhs = Static::bin(Op::Add, lhs, self.static_mul()?);
            } else if self.is_sym("-") && !matches!(self.peek_at(1), Tok::Sym("o")) {
                self.advance();
                lhs = Static::bin(Op::Sub, lhs, self.static_mul()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn static_mul(&mut self) -> Result<Static, ParseError> {
        let mut lhs = self.static_unary()?;
        loop {
            if self.eat_sym("*") {
                lhs = Static::bin(Op::Mul, lhs, self.static_unary()?);
            } else if self.eat_sym("/") {
                lhs = Static::bin(Op::Div, lhs, self.static_unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn static_unary(&mut self) -> Result<Static, ParseError> {
        if self.eat_sym("-") {
            if let Tok::Int(v) = self.peek().clone() {
                self.advance();
                return self.static_postfix(Static::Int(-v));
            }
            return Ok(Static::op(Op::Neg, vec![self.static_unary()?]));
        }
        let atom = self.static_atom()?;
        self.static_postfix(atom)
    }

    fn static_postfix(&mut self, mut head: Static) -> Result<Static, ParseError> {
        while self.is_sym("(") {
            self.advance();
            loop {
                let arg = self.static_expr()?;
                head = Static::app(head, arg);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
        }
        Ok(head)
    }

    fn static_args(&mut self, n: usize) -> Result<Vec<Static>, ParseError> {
        self.expect_sym("(")?;
        let mut out = vec![];
        for i in 0..n {
            if i > 0 {
                self.expect_sym(",")?;
            }
            out.push(self.static_expr()?);
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn static_atom(&mut self) -> Result<Static, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Static::Int(v))
            }
            Tok::Sym("(") => {
                self.advance();
                let s = self.static_expr()?;
                self.expect_sym(")")?;
                Ok(s)
            }
            Tok::Sym("{") => self.role_set_literal(),
            Tok::Ident(name) => {
                let simple = |op: Op| Some(op);
                let setop = match name.as_str() {
                    "union" => simple(Op::Union),
                    "dunion" => simple(Op::DUnion),
                    "inter" => simple(Op::Inter),
                    "minus" => simple(Op::Minus),
                    "comp" => simple(Op::Comp),
                    "ite" => simple(Op::Ite),
                    _ => None,
                };
                if let Some(op) = setop {
                    if matches!(self.peek_at(1), Tok::Sym("(")) && !self.static_scope.contains(&name) {
                        self.advance();
                        let args = self.static_args(op.arity())?;
                        return Ok(Static::Op(op, args));
                    }
                }
                match name.as_str() {
                    "true" => {
                        self.advance();
                        Ok(Static::Bool(true))
                    }
                    "false" => {
                        self.advance();
                        Ok(Static::Bool(false))
                    }
                    "full" => {
                        self.advance();
                        Ok(Static::Full)
                    }
                    "fn" => {
                        self.advance();
                        let a = self.ident()?;
                        self.expect_sym(":")?;
                        let sort = self.sort()?;
                        self.expect_sym("=>")?;
                        let body = self.with_static(std::slice::from_ref(&a), |p| p.static_expr())?;
                        Ok(Static::Lam(a, sort, Box::new(body)))
                    }
                    "type" if matches!(self.peek_at(1), Tok::Sym("(")) => {
                        self.advance();
                        self.expect_sym("(")?;
                        let t = self.ty()?;
                        self.expect_sym(")")?;
                        Ok(Static::ty(t))
                    }
                    "end" | "msg" | "quan" | "branch" | "fix" | "within"
                        if matches!(self.peek_at(1), Tok::Sym("(")) =>
                    {
                        Ok(Static::stype(self.stype_constructor()?))
                    }
                    _ => {
                        self.advance();
                        if self.static_scope.contains(&name) {
                            Ok(Static::Var(name))
                        } else if let Some(v) = self.aliases.get(&name) {
                            Ok(Static::Int(*v))
                        } else if let Some(decl) = self.protocols.get(&name).cloned() {
                            self.instantiate_protocol(&decl, span)
                        } else if !self.check_scope {
                            Ok(Static::Var(name))
                        } else {
                            self.unbound(span, &name)
                        }
                    }
                }
            }
            _ => self.error("expected static term"),
        }
    }

    fn instantiate_protocol(&mut self, decl: &ProtocolDecl, span: Span) -> Result<Static, ParseError> {
        let body = Static::stype(SessionType::within(decl.universe.clone(), decl.def.clone()));
        if decl.params.is_empty() {
            return Ok(body);
        }
        self.expect_sym("(")?;
        let mut map = BTreeMap::new();
        for (i, (p, sort)) in decl.params.iter().enumerate() {
            if i > 0 {
                self.expect_sym(",")?;
            }
            let arg = match sort {
                Sort::Type | Sort::VType => Static::ty(self.ty()?),
                _ => self.static_expr()?,
            };
            map.insert(p.clone(), arg);
        }
        if !self.eat_sym(")") {
            return Err(ParseError::at(
                span,
                format!("protocol `{}` takes {} argument(s)", decl.name, decl.params.len()),
            ));
        }
        Ok(subst_static(&body, &map))
    }

    fn stype_constructor(&mut self) -> Result<SessionType, ParseError> {
        let kw = self.ident_any()?;
        match kw.as_str() {
            "end" => {
                let a = self.static_args(1)?;
                Ok(SessionType::End(a.into_iter().next().unwrap()))
            }
            "msg" => {
                self.expect_sym("(")?;
                let r1 = self.static_expr()?;
                let r2 = if self.eat_sym("->") { Some(self.static_expr()?) } else { None };
                self.expect_sym(",")?;
                let payload = self.ty()?;
                self.expect_sym(")")?;
                self.expect_sym("::")?;
                let cont = SessionType::embed(self.static_unary()?);
                Ok(match r2 {
                    None => SessionType::bmsg(r1, payload, cont),
                    Some(r2) => SessionType::pmsg(r1, r2, payload, cont),
                })
            }
            "quan" => {
                let a = self.static_args(2)?;
                let mut it = a.into_iter();
                Ok(SessionType::Quan {
                    role: it.next().unwrap(),
                    binder: it.next().unwrap(),
                })
            }
            "branch" => {
                let a = self.static_args(3)?;
                let mut it = a.into_iter();
                Ok(SessionType::Branch {
                    role: it.next().unwrap(),
                    left: Box::new(SessionType::embed(it.next().unwrap())),
                    right: Box::new(SessionType::embed(it.next().unwrap())),
                })
            }
            "fix" => {
                let a = self.static_args(1)?;
                Ok(SessionType::Fix(a.into_iter().next().unwrap()))
            }
            "within" => {
                self.expect_sym("(")?;
                let u = match self.role_set_literal()? {
                    Static::Set(v) => v,
                    _ => unreachable!(),
                };
                self.expect_sym(",")?;
                let body = SessionType::embed(self.static_expr()?);
                self.expect_sym(")")?;
                Ok(SessionType::within(u, body))
            }
            _ => unreachable!(),
        }
    }

    fn ident_any(&mut self) -> Result<Name, ParseError> {
        match self.advance() {
            Tok::Ident(s) => Ok(s),
            _ => self.error("expected identifier"),
        }
    }

    pub fn stype(&mut self) -> Result<SessionType, ParseError> {
        Ok(SessionType::embed(self.static_expr()?))
    }

    // ----- types -----

    pub fn ty(&mut self) -> Result<LinType, ParseError> {
        let dom = self.ty_sum()?;
        if self.eat_sym("->") {
            Ok(LinType::fun(dom, self.ty()?, false))
        } else if self.eat_sym("-o") {
            Ok(LinType::fun(dom, self.ty()?, true))
        } else {
            Ok(dom)
        }
    }

    fn ty_sum(&mut self) -> Result<LinType, ParseError> {
        let mut lhs = self.ty_prod()?;
        while self.eat_sym("+") {
            lhs = LinType::sum(lhs, self.ty_prod()?);
        }
        Ok(lhs)
    }

    fn ty_prod(&mut self) -> Result<LinType, ParseError> {
        let mut lhs = self.ty_atom()?;
        loop {
            if self.eat_sym("**") {
                lhs = LinType::pair(lhs, self.ty_atom()?, true);
            } else if self.eat_sym("*") {
                lhs = LinType::pair(lhs, self.ty_atom()?, false);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn ty_atom(&mut self) -> Result<LinType, ParseError> {
        let span = self.span();
        if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        let name = match self.peek().clone() {
            Tok::Ident(n) => n,
            _ => return self.error("expected type"),
        };
        self.advance();
        match name.as_str() {
            "unit" => Ok(LinType::Unit),
            "int" | "bool" | "string" => {
                let mut idx = vec![];
                if name != "string" && self.eat_sym("(") {
                    loop {
                        idx.push(self.static_expr()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym(")")?;
                }
                Ok(LinType::Base(name, idx))
            }
            "chan" => {
                self.expect_sym("(")?;
                let rs = self.static_expr()?;
                self.expect_sym(",")?;
                let s = self.stype()?;
                self.expect_sym(")")?;
                Ok(LinType::chan(rs, s))
            }
            "guard" | "assert" => {
                self.expect_sym("(")?;
                let p = self.static_expr()?;
                self.expect_sym(",")?;
                let t = self.ty()?;
                self.expect_sym(")")?;
                Ok(if name == "guard" {
                    LinType::Guard(p, Box::new(t))
                } else {
                    LinType::Assert(p, Box::new(t))
                })
            }
            "forall" | "exists" => {
                let a = self.ident()?;
                self.expect_sym(":")?;
                let sort = self.sort()?;
                self.expect_sym(".")?;
                let body = self.with_static(std::slice::from_ref(&a), |p| p.ty())?;
                Ok(if name == "forall" {
                    LinType::Forall(a, sort, Box::new(body))
                } else {
                    LinType::Exists(a, sort, Box::new(body))
                })
            }
            _ => {
                if self.static_scope.contains(&name) || !self.check_scope {
                    Ok(LinType::Var(name))
                } else {
                    self.unbound(span, &name)
                }
            }
        }
    }

    // ----- dynamics -----

    pub fn expr(&mut self) -> Result<DynTerm, ParseError> {
        let span = self.span();
        if self.is_kw("let") {
            return self.let_expr();
        }
        if self.eat_kw("lam") {
            let (x, ann) = if self.eat_sym("(") {
                let x = self.ident()?;
                let ann = if self.eat_sym(":") { Some(self.ty()?) } else { None };
                self.expect_sym(")")?;
                (x, ann)
            } else {
                (self.ident()?, None)
            };
            self.expect_sym("=>")?;
            let body = self.with_dyn(std::slice::from_ref(&x), |p| p.expr())?;
            return Ok(DynTerm::At(
                span,
                Box::new(DynTerm::Lam {
                    param: x,
                    ann,
                    body: Box::new(body),
                }),
            ));
        }
        if self.eat_kw("fix") {
            let g = self.ident()?;
            self.expect_sym("(")?;
            let x = self.ident()?;
            self.expect_sym(":")?;
            let dom = self.ty()?;
            self.expect_sym(")")?;
            self.expect_sym(":")?;
            let cod = self.ty()?;
            self.expect_sym("=>")?;
            let body = self.with_dyn(&[g.clone(), x.clone()], |p| p.expr())?;
            return Ok(DynTerm::Fix {
                name: g,
                param: x,
                dom,
                cod,
                body: Box::new(body),
            });
        }
        if self.eat_kw("if") {
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(DynTerm::At(
                span,
                Box::new(DynTerm::If(Box::new(c), Box::new(t), Box::new(e))),
            ));
        }
        if self.eat_kw("case") {
            let scrut = self.expr()?;
            self.expect_kw("of")?;
            self.expect_kw("inl")?;
            let x = self.ident()?;
            self.expect_sym("=>")?;
            let l = self.with_dyn(std::slice::from_ref(&x), |p| p.expr())?;
            self.expect_sym("|")?;
            self.expect_kw("inr")?;
            let y = self.ident()?;
            self.expect_sym("=>")?;
            let r = self.with_dyn(std::slice::from_ref(&y), |p| p.expr())?;
            return Ok(DynTerm::At(
                span,
                Box::new(DynTerm::Case {
                    scrut: Box::new(scrut),
                    left: (x, Box::new(l)),
                    right: (y, Box::new(r)),
                }),
            ));
        }
        let first = self.app_expr()?;
        if self.eat_sym(";") {
            // a trailing `;` ends a definition; only continue when an expression follows
            if self.starts_expr() {
                let rest = self.expr()?;
                return Ok(DynTerm::Snd(Box::new(DynTerm::pair(first, rest))));
            }
            self.pos -= 1;
        }
        Ok(first)
    }

    fn starts_expr(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Str(_) => true,
            Tok::Sym(s) => *s == "(" || *s == "-",
            Tok::Ident(s) => !matches!(s.as_str(), "def" | "main" | "protocol" | "in" | "then" | "else" | "of"),
            Tok::Eof => false,
        }
    }

    fn let_expr(&mut self) -> Result<DynTerm, ParseError> {
        let span = self.span();
        self.expect_kw("let")?;
        if self.eat_sym("(") {
            let x = self.ident()?;
            self.expect_sym(",")?;
            let y = self.ident()?;
            self.expect_sym(")")?;
            self.expect_sym("=")?;
            let bound = self.expr()?;
            self.expect_kw("in")?;
            let body = self.with_dyn(&[x.clone(), y.clone()], |p| p.expr())?;
            return Ok(DynTerm::At(
                span,
                Box::new(DynTerm::LetPair {
                    left: x,
                    right: y,
                    bound: Box::new(bound),
                    body: Box::new(body),
                }),
            ));
        }
        if self.eat_kw("exists") {
            let svar = if self.eat_sym("[") {
                let a = self.ident()?;
                self.expect_sym("]")?;
                Some(a)
            } else {
                None
            };
            self.expect_sym("(")?;
            let x = self.ident()?;
            self.expect_sym(")")?;
            self.expect_sym("=")?;
            let bound = self.expr()?;
            self.expect_kw("in")?;
            let snames: Vec<Name> = svar.iter().cloned().collect();
            let body = self.with_static(&snames, |p| p.with_dyn(std::slice::from_ref(&x), |p| p.expr()))?;
            return Ok(DynTerm::At(
                span,
                Box::new(DynTerm::LetExists {
                    svar,
                    var: x,
                    bound: Box::new(bound),
                    body: Box::new(body),
                }),
            ));
        }
        if self.eat_kw("assert") {
            self.expect_sym("(")?;
            let x = self.ident()?;
            self.expect_sym(")")?;
            self.expect_sym("=")?;
            let bound = self.expr()?;
            self.expect_kw("in")?;
            let body = self.with_dyn(std::slice::from_ref(&x), |p| p.expr())?;
            return Ok(DynTerm::LetAssert {
                var: x,
                bound: Box::new(bound),
                body: Box::new(body),
            });
        }
        let x = self.ident()?;
        let ann = if self.eat_sym(":") { Some(self.ty()?) } else { None };
        self.expect_sym("=")?;
        let bound = self.expr()?;
        self.expect_kw("in")?;
        let body = self.with_dyn(std::slice::from_ref(&x), |p| p.expr())?;
        Ok(DynTerm::At(
            span,
            Box::new(DynTerm::app(
                DynTerm::Lam {
                    param: x,
                    ann,
                    body: Box::new(body),
                },
                bound,
            )),
        ))
    }

    fn app_expr(&mut self) -> Result<DynTerm, ParseError> {
        let mut head = self.atom_expr()?;
        while self.is_sym("(") {
            let span = self.span();
            let arg = self.call_args()?;
            head = DynTerm::At(span, Box::new(DynTerm::app(head, arg)));
        }
        Ok(head)
    }

    /// `(a)`, `(a, b, c)` (a right-nested tuple) or `()`.
    fn call_args(&mut self) -> Result<DynTerm, ParseError> {
        let args = self.arg_list()?;
        Ok(tuple(args))
    }

    fn arg_list(&mut self) -> Result<Vec<DynTerm>, ParseError> {
        self.expect_sym("(")?;
        let mut args = vec![];
        if !self.is_sym(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn one_arg(&mut self) -> Result<DynTerm, ParseError> {
        self.expect_sym("(")?;
        let e = self.expr()?;
        self.expect_sym(")")?;
        Ok(e)
    }

    fn static_arg_list(&mut self) -> Result<Vec<Static>, ParseError> {
        let mut out = vec![];
        if self.eat_sym("{") {
            if !self.is_sym("}") {
                loop {
                    out.push(self.static_expr()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
        }
        Ok(out)
    }

    fn atom_expr(&mut self) -> Result<DynTerm, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(DynTerm::Lit(Lit::Int(v)))
            }
            Tok::Sym("-") => {
                self.advance();
                match self.advance() {
                    Tok::Int(v) => Ok(DynTerm::Lit(Lit::Int(-v))),
                    _ => Err(ParseError::at(span, "expected integer after `-`")),
                }
            }
            Tok::Str(s) => {
                self.advance();
                Ok(DynTerm::Lit(Lit::Str(s)))
            }
            Tok::Sym("(") => {
                self.advance();
                if self.eat_sym(")") {
                    return Ok(DynTerm::Unit);
                }
                let first = self.expr()?;
                if self.eat_sym(":") {
                    let t = self.ty()?;
                    self.expect_sym(")")?;
                    return Ok(DynTerm::Ascribe(Box::new(first), t));
                }
                let mut items = vec![first];
                while self.eat_sym(",") {
                    items.push(self.expr()?);
                }
                self.expect_sym(")")?;
                Ok(tuple(items))
            }
            Tok::Ident(name) => self.ident_expr(name, span),
            _ => self.error("expected expression"),
        }
    }

    fn ident_expr(&mut self, name: Name, span: Span) -> Result<DynTerm, ParseError> {
        match name.as_str() {
            "true" | "false" => {
                self.advance();
                return Ok(DynTerm::Lit(Lit::Bool(name == "true")));
            }
            "fst" | "snd" | "inl" | "inr" => {
                self.advance();
                let e = self.one_arg()?;
                return Ok(match name.as_str() {
                    "fst" => DynTerm::Fst(Box::new(e)),
                    "snd" => DynTerm::Snd(Box::new(e)),
                    "inl" => DynTerm::Inj {
                        right: false,
                        body: Box::new(e),
                    },
                    _ => DynTerm::Inj {
                        right: true,
                        body: Box::new(e),
                    },
                });
            }
            "guard" | "assert" | "forall" | "exists" => {
                self.advance();
                return self.proof_form(&name);
            }
            _ => {}
        }
        if let Some(api) = ApiName::from_name(&name) {
            if !self.dyn_scope.contains(&name) {
                self.advance();
                let statics = self.static_arg_list()?;
                let args = self.arg_list()?;
                let want = api_arity(api);
                if args.len() != want {
                    return Err(ParseError::at(
                        span,
                        format!("`{}` takes {} argument(s), got {}", api, want, args.len()),
                    ));
                }
                return Ok(DynTerm::At(
                    span,
                    Box::new(DynTerm::ApiCall {
                        api,
                        statics,
                        args,
                        runtime_guard: None,
                    }),
                ));
            }
        }
        if let Some(prim) = PrimOp::from_name(&name) {
            if !self.dyn_scope.contains(&name) {
                self.advance();
                let args = self.arg_list()?;
                if args.len() != prim.arity() {
                    return Err(ParseError::at(
                        span,
                        format!("`{}` takes {} argument(s)", prim.as_str(), prim.arity()),
                    ));
                }
                return Ok(DynTerm::Prim(prim, args));
            }
        }
        if DYN_KEYWORDS.contains(&name.as_str()) {
            return self.error("unexpected keyword");
        }
        self.advance();
        if self.check_scope && !self.dyn_scope.contains(&name) {
            return self.unbound(span, &name);
        }
        Ok(DynTerm::At(span, Box::new(DynTerm::Var(name))))
    }

    fn proof_form(&mut self, kw: &str) -> Result<DynTerm, ParseError> {
        let intro = if self.eat_sym("+") {
            true
        } else if self.eat_sym("-") {
            false
        } else {
            return self.error(format!("expected `{}+` or `{}-`", kw, kw));
        };
        match (kw, intro) {
            ("guard", true) => Ok(DynTerm::GuardIntro(Box::new(self.one_arg()?))),
            ("guard", false) => Ok(DynTerm::GuardElim(Box::new(self.one_arg()?))),
            ("assert", true) => Ok(DynTerm::AssertIntro(Box::new(self.one_arg()?))),
            ("forall", true) => {
                let var = if self.eat_sym("[") {
                    let a = self.ident()?;
                    self.expect_sym(":")?;
                    let s = self.sort()?;
                    self.expect_sym("]")?;
                    Some((a, s))
                } else {
                    None
                };
                let names: Vec<Name> = var.iter().map(|v| v.0.clone()).collect();
                let body = self.with_static(&names, |p| p.one_arg())?;
                Ok(DynTerm::ForallIntro {
                    var,
                    body: Box::new(body),
                })
            }
            ("forall", false) => {
                let arg = self.static_arg_list()?.into_iter().next();
                Ok(DynTerm::ForallElim {
                    body: Box::new(self.one_arg()?),
                    arg,
                })
            }
            ("exists", true) => {
                let witness = self.static_arg_list()?.into_iter().next();
                let ann = if self.eat_sym("[") {
                    let t = self.ty()?;
                    self.expect_sym("]")?;
                    Some(t)
                } else {
                    None
                };
                Ok(DynTerm::ExistsIntro {
                    body: Box::new(self.one_arg()?),
                    witness,
                    ann,
                })
            }
            _ => self.error(format!("`{}-` is not an expression form", kw)),
        }
    }
}

pub fn api_arity(api: ApiName) -> usize {
    match api {
        ApiName::Cut | ApiName::Split | ApiName::BSend | ApiName::Send | ApiName::Offer => 2,
        _ => 1,
    }
}

fn tuple(mut items: Vec<DynTerm>) -> DynTerm {
    match items.len() {
        0 => DynTerm::Unit,
        1 => items.pop().unwrap(),
        _ => {
            let last = items.pop().unwrap();
            items.into_iter().rev().fold(last, |acc, x| DynTerm::pair(x, acc))
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser::new(text)?.program()
}

/// Parses a closed-over static term, allowing free variables.
pub fn parse_static(text: &str) -> Result<Static, ParseError> {
    let mut p = Parser::lenient(text)?;
    let s = p.static_expr()?;
    p.expect_eof()?;
    Ok(s)
}

pub fn parse_stype(text: &str) -> Result<SessionType, ParseError> {
    let mut p = Parser::lenient(text)?;
    let s = p.stype()?;
    p.expect_eof()?;
    Ok(s)
}

pub fn parse_type(text: &str) -> Result<LinType, ParseError> {
    let mut p = Parser::lenient(text)?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_expr(text: &str) -> Result<DynTerm, ParseError> {
    let mut p = Parser::lenient(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_sort(text: &str) -> Result<Sort, ParseError> {
    let mut p = Parser::lenient(text)?;
    let s = p.sort()?;
    p.expect_eof()?;
    Ok(s)
}

/// Parses a type in the scope of a program (aliases and protocol names).
pub fn parse_type_in(prog: &Program, text: &str) -> Result<LinType, ParseError> {
    let mut p = Parser::lenient(text)?.with_program_context(prog);
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}
