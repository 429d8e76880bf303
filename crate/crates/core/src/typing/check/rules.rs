use super::*;
use crate::typing::rel::Matcher;

fn type_mismatch(message: impl Into<String>) -> Diagnostic {
    err("type-mismatch", message)
}

fn needs_annotation(what: &str) -> Diagnostic {
    err("annotation-required", format!("cannot infer the type of {}; add an annotation", what))
}

fn base_index(t: &LinType, base: &str) -> TResult<Option<Static>> {
    match t {
        LinType::Base(n, idx) if n == base => Ok(idx.first().cloned()),
        other => Err(type_mismatch(format!("expected `{}`, found `{}`", base, other))),
    }
}

impl Checker {
    pub(super) fn lam(
        &mut self,
        param: &str,
        ann: Option<&LinType>,
        body: &DynTerm,
        want: Option<&LinType>,
    ) -> TResult<(LinType, DynTerm)> {
        if let Some(a) = ann {
            self.check_type_wf(a)?;
        }
        let before = self.usage();
        let depth = self.entries.len();
        let ep0 = self.endpoints.len();
        let (pty, elab_ann, expected) = match want {
            Some(LinType::Fun(d, c, k)) => {
                if let Some(a) = ann {
                    self.env.subtype(d, a)?;
                }
                let pty = ann.cloned().unwrap_or_else(|| (**d).clone());
                (pty.clone(), Some(pty), Some(((**c).clone(), *k)))
            }
            Some(other) => return Err(type_mismatch(format!("a function cannot have type `{}`", other))),
            None => match ann {
                Some(a) => (a.clone(), Some(a.clone()), None),
                None => {
                    let v = self.fresh_name("t");
                    self.env.sorts.push_outer(&v, Sort::VType);
                    (LinType::Var(v), None, None)
                }
            },
        };
        self.bind(param, pty.clone());
        let (cod, bx) = match &expected {
            Some((c, _)) => (c.clone(), self.check(body, c)?),
            None => self.infer(body)?,
        };
        self.unbind(param)?;
        let captured = self.captured_since(&before, depth);
        let holds_endpoints = self.endpoints.len() > ep0;
        let linear = match expected {
            Some((_, k)) => {
                if !k && (!captured.is_empty() || holds_endpoints) {
                    return Err(capture_error(&captured));
                }
                k
            }
            None => ann.is_none() || !captured.is_empty() || holds_endpoints,
        };
        let x = DynTerm::Lam {
            param: param.to_string(),
            ann: elab_ann,
            body: Box::new(bx),
        };
        Ok((LinType::fun(pty, cod, linear), x))
    }

    pub(super) fn fix(
        &mut self,
        name: &str,
        param: &str,
        dom: &LinType,
        cod: &LinType,
        body: &DynTerm,
    ) -> TResult<(LinType, DynTerm)> {
        self.check_type_wf(dom)?;
        self.check_type_wf(cod)?;
        let fun = LinType::fun(dom.clone(), cod.clone(), false);
        let before = self.usage();
        let depth = self.entries.len();
        let ep0 = self.endpoints.len();
        self.bind(name, fun.clone());
        self.bind(param, dom.clone());
        let bx = self.check(body, cod)?;
        self.unbind(param)?;
        self.unbind(name)?;
        let captured = self.captured_since(&before, depth);
        if !captured.is_empty() || self.endpoints.len() > ep0 {
            return Err(capture_error(&captured));
        }
        let x = DynTerm::Fix {
            name: name.to_string(),
            param: param.to_string(),
            dom: dom.clone(),
            cod: cod.clone(),
            body: Box::new(bx),
        };
        Ok((fun, x))
    }

    pub(super) fn app(&mut self, f: &DynTerm, a: &DynTerm, want: Option<&LinType>) -> TResult<(LinType, DynTerm)> {
        if let DynTerm::Lam { param, ann, body } = f.strip_at() {
            // `let param = a in body`
            let (bt, ax) = match ann {
                Some(t) => {
                    self.check_type_wf(t)?;
                    (t.clone(), self.check(a, t)?)
                }
                None => self.infer(a)?,
            };
            self.bind(param, bt);
            let (rt, bx) = self.go(body, want)?;
            self.unbind(param)?;
            let lam = DynTerm::Lam {
                param: param.clone(),
                ann: ann.clone(),
                body: Box::new(bx),
            };
            return Ok((rt, DynTerm::app(lam, ax)));
        }
        let (ft, fx) = self.infer(f)?;
        match ft {
            LinType::Fun(d, c, _) => {
                let ax = self.check(a, &d)?;
                self.finish((*c, DynTerm::app(fx, ax)), want)
            }
            other => Err(type_mismatch(format!("`{}` is not a function", other))),
        }
    }

    pub(super) fn if_(
        &mut self,
        c: &DynTerm,
        t: &DynTerm,
        f: &DynTerm,
        want: Option<&LinType>,
    ) -> TResult<(LinType, DynTerm)> {
        let (ct, cx) = self.infer(c)?;
        let prop = base_index(&ct, "bool")?;
        let neg = prop.clone().map(Static::not);
        let ((tt, tx), (ft, fx)) = self.branches(
            |s| s.with_prop(prop, |s| s.go(t, want)),
            |s| s.with_prop(neg, |s| s.go(f, want)),
        )?;
        let ty = match want {
            Some(w) => w.clone(),
            None => self.join(&tt, &ft)?,
        };
        Ok((ty, DynTerm::If(Box::new(cx), Box::new(tx), Box::new(fx))))
    }

    pub(super) fn case(
        &mut self,
        scrut: &DynTerm,
        left: &(Name, Box<DynTerm>),
        right: &(Name, Box<DynTerm>),
        want: Option<&LinType>,
    ) -> TResult<(LinType, DynTerm)> {
        let (st, sx) = self.infer(scrut)?;
        let (lt, rt) = match st {
            LinType::Sum(l, r) => (*l, *r),
            other => return Err(type_mismatch(format!("expected a sum, found `{}`", other))),
        };
        let arm = |s: &mut Self, x: &str, ty: LinType, body: &DynTerm| -> TResult<(LinType, DynTerm)> {
            s.bind(x, ty);
            let r = s.go(body, want)?;
            s.unbind(x)?;
            Ok(r)
        };
        let ((t1, x1), (t2, x2)) = self.branches(
            |s| arm(s, &left.0, lt, &left.1),
            |s| arm(s, &right.0, rt, &right.1),
        )?;
        let ty = match want {
            Some(w) => w.clone(),
            None => self.join(&t1, &t2)?,
        };
        let x = DynTerm::Case {
            scrut: Box::new(sx),
            left: (left.0.clone(), Box::new(x1)),
            right: (right.0.clone(), Box::new(x2)),
        };
        Ok((ty, x))
    }

    pub(super) fn pair(&mut self, l: &DynTerm, r: &DynTerm, want: Option<&LinType>) -> TResult<(LinType, DynTerm)> {
        if let Some(LinType::Pair(a, b, _)) = want {
            let lx = self.check(l, a)?;
            let rx = self.check(r, b)?;
            return Ok((want.unwrap().clone(), DynTerm::pair(lx, rx)));
        }
        let (lt, lx) = self.infer(l)?;
        let (rt, rx) = self.infer(r)?;
        self.finish((LinType::pair(lt, rt, false), DynTerm::pair(lx, rx)), want)
    }

    pub(super) fn inj(&mut self, right: bool, body: &DynTerm, want: Option<&LinType>) -> TResult<(LinType, DynTerm)> {
        match want {
            Some(LinType::Sum(a, b)) => {
                let bx = self.check(body, if right { b } else { a })?;
                let x = DynTerm::Inj {
                    right,
                    body: Box::new(bx),
                };
                Ok((want.unwrap().clone(), x))
            }
            Some(other) => Err(type_mismatch(format!("an injection cannot have type `{}`", other))),
            None => Err(needs_annotation("an injection")),
        }
    }

    pub(super) fn let_pair(
        &mut self,
        left: &str,
        right: &str,
        bound: &DynTerm,
        body: &DynTerm,
        want: Option<&LinType>,
    ) -> TResult<(LinType, DynTerm)> {
        let (bt, bx) = self.infer(bound)?;
        let (lt, rt) = match bt {
            LinType::Pair(l, r, _) => (*l, *r),
            other => return Err(type_mismatch(format!("expected a pair, found `{}`", other))),
        };
        self.bind(left, lt);
        self.bind(right, rt);
        let (ty, x) = self.go(body, want)?;
        self.unbind(right)?;
        self.unbind(left)?;
        Ok((ty, DynTerm::let_pair(left, right, bx, x)))
    }

    pub(super) fn guard_intro(&mut self, v: &DynTerm, want: Option<&LinType>) -> TResult<(LinType, DynTerm)> {
        match want {
            Some(LinType::Guard(p, t)) => {
                let x = self.with_prop(Some(p.clone()), |s| s.check(v, t))?;
                Ok((want.unwrap().clone(), DynTerm::GuardIntro(Box::new(x))))
            }
            _ => Err(needs_annotation("a guarded value")),
        }
    }

    pub(super) fn assert_intro(&mut self, v: &DynTerm, want: Option<&LinType>) -> TResult<(LinType, DynTerm)> {
        match want {
            Some(LinType::Assert(p, t)) => {
                self.prove_or_fail(p, None, "the assertion")?;
                let x = self.check(v, t)?;
                Ok((want.unwrap().clone(), DynTerm::AssertIntro(Box::new(x))))
            }
            _ => Err(needs_annotation("an asserted value")),
        }
    }

    pub(super) fn let_assert(
        &mut self,
        var: &str,
        bound: &DynTerm,
        body: &DynTerm,
        want: Option<&LinType>,
    ) -> TResult<(LinType, DynTerm)> {
        let (bt, bx) = self.infer(bound)?;
        let (p, t) = match bt {
            LinType::Assert(p, t) => (p, *t),
            other => return Err(type_mismatch(format!("expected an asserted value, found `{}`", other))),
        };
        let (ty, x) = self.with_prop(Some(p), |s| {
            s.bind(var, t);
            let r = s.go(body, want)?;
            s.unbind(var)?;
            Ok(r)
        })?;
        let x = DynTerm::LetAssert {
            var: var.to_string(),
            bound: Box::new(bx),
            body: Box::new(x),
        };
        Ok((ty, x))
    }

    pub(super) fn forall_intro(
        &mut self,
        var: Option<&(Name, Sort)>,
        body: &DynTerm,
        want: Option<&LinType>,
    ) -> TResult<(LinType, DynTerm)> {
        if !body.strip_at().is_value() {
            return Err(type_mismatch("the body of `forall+` must be a value"));
        }
        match want {
            Some(LinType::Forall(a, s, t)) => {
                let z = match var {
                    Some((b, s2)) => {
                        if s2 != s {
                            return Err(err(
                                "sort-mismatch",
                                format!("`forall+` binds sort {} but {} is expected", s2, s),
                            ));
                        }
                        b.clone()
                    }
                    None => self.static_binder_name(a, &free_vars_type(t)),
                };
                let inner = subst_type(t, &single(a, Static::Var(z.clone())));
                let bx = self.with_svar(&z, s.clone(), |c| c.check(body, &inner))?;
                let x = DynTerm::ForallIntro {
                    var: Some((z, s.clone())),
                    body: Box::new(bx),
                };
                Ok((want.unwrap().clone(), x))
            }
            _ => match var {
                Some((b, s)) => {
                    let (t, bx) = self.with_svar(b, s.clone(), |c| c.infer(body))?;
                    let ty = LinType::Forall(b.clone(), s.clone(), Box::new(t));
                    let x = DynTerm::ForallIntro {
                        var: Some((b.clone(), s.clone())),
                        body: Box::new(bx),
                    };
                    self.finish((ty, x), want)
                }
                None => Err(needs_annotation("a `forall+` without a binder")),
            },
        }
    }

    fn check_static_sort(&mut self, w: &Static, s: &Sort) -> TResult<()> {
        let got = sort_of(&mut self.env.sorts, w)?;
        if got.fits(s) {
            Ok(())
        } else {
            Err(err(
                "sort-mismatch",
                format!("static argument `{}` has sort {} but {} is expected", w, got, s),
            ))
        }
    }

    /// Finds `a` such that `pat[a := ?]` matches `actual`.
    fn infer_witness(&mut self, a: &str, pat: &LinType, actual: &LinType) -> TResult<Option<Static>> {
        let meta = format!("?{}", a);
        let pat = subst_type(pat, &single(a, Static::Var(meta.clone())));
        let mut m = Matcher::new(&mut self.env);
        m.match_type(&pat, actual, None)?;
        Ok(m.st.vals.get(&meta).cloned())
    }

    pub(super) fn forall_elim(
        &mut self,
        body: &DynTerm,
        arg: Option<&Static>,
        want: Option<&LinType>,
    ) -> TResult<(LinType, DynTerm)> {
        self.under_forall_elim = true;
        let (bt, bx) = self.go(body, None)?;
        self.under_forall_elim = false;
        let (a, s, t) = match bt {
            LinType::Forall(a, s, t) => (a, s, *t),
            other => {
                return Err(type_mismatch(format!(
                    "`forall-` needs a universally quantified value, found `{}`",
                    other
                )))
            }
        };
        let w = match arg {
            Some(w) => {
                self.check_static_sort(w, &s)?;
                normalize_static(w, None)
            }
            None => {
                let want = want.ok_or_else(|| needs_annotation("the witness of `forall-`"))?;
                let w = self.infer_witness(&a, &t, want)?;
                w.ok_or_else(|| needs_annotation("the witness of `forall-`"))?
            }
        };
        let result = normalize_type(&subst_type(&t, &single(&a, w.clone())), None);
        let x = DynTerm::ForallElim {
            body: Box::new(bx),
            arg: Some(w),
        };
        self.finish((result, x), want)
    }

    pub(super) fn exists_intro(
        &mut self,
        body: &DynTerm,
        witness: Option<&Static>,
        ann: Option<&LinType>,
        want: Option<&LinType>,
    ) -> TResult<(LinType, DynTerm)> {
        let target = match (ann, want) {
            (Some(t), _) => {
                self.check_type_wf(t)?;
                t.clone()
            }
            (None, Some(w)) => w.clone(),
            (None, None) => return Err(needs_annotation("an `exists+` package")),
        };
        let (a, s, t) = match &target {
            LinType::Exists(a, s, t) => (a.clone(), s.clone(), (**t).clone()),
            other => return Err(type_mismatch(format!("`exists+` cannot have type `{}`", other))),
        };
        let (w, bx) = match witness {
            Some(w) => {
                self.check_static_sort(w, &s)?;
                let w = normalize_static(w, None);
                let inner = normalize_type(&subst_type(&t, &single(&a, w.clone())), None);
                (w, self.check(body, &inner)?)
            }
            None => {
                let (bt, bx) = self.infer(body)?;
                let w = self
                    .infer_witness(&a, &t, &bt)?
                    .ok_or_else(|| needs_annotation("the witness of `exists+`"))?;
                let inner = normalize_type(&subst_type(&t, &single(&a, w.clone())), None);
                self.env.subtype(&bt, &inner)?;
                (w, bx)
            }
        };
        let x = DynTerm::ExistsIntro {
            body: Box::new(bx),
            witness: Some(w),
            ann: Some(target.clone()),
        };
        self.finish((target, x), want)
    }

    pub(super) fn let_exists(
        &mut self,
        svar: Option<&Name>,
        var: &str,
        bound: &DynTerm,
        body: &DynTerm,
        want: Option<&LinType>,
    ) -> TResult<(LinType, DynTerm)> {
        let (bt, bx) = self.infer(bound)?;
        let (a, s, t) = match bt {
            LinType::Exists(a, s, t) => (a, s, *t),
            other => {
                return Err(type_mismatch(format!(
                    "`let exists` needs an existential package, found `{}`",
                    other
                )))
            }
        };
        let z = match svar {
            Some(z) => z.clone(),
            None => {
                let avoid = want.map(free_vars_type).unwrap_or_default();
                self.static_binder_name(&a, &avoid)
            }
        };
        let inner = subst_type(&t, &single(&a, Static::Var(z.clone())));
        let (ty, x) = self.with_svar(&z, s, |c| {
            c.bind(var, inner);
            let r = c.go(body, want)?;
            c.unbind(var)?;
            Ok(r)
        })?;
        if want.is_none() && free_vars_type(&ty).contains(&z) {
            return Err(type_mismatch(format!(
                "the existential witness `{}` escapes in the type `{}`",
                z, ty
            )));
        }
        let x = DynTerm::LetExists {
            svar: Some(z),
            var: var.to_string(),
            bound: Box::new(bx),
            body: Box::new(x),
        };
        Ok((ty, x))
    }

    pub(super) fn prim(&mut self, op: PrimOp, args: &[DynTerm]) -> TResult<(LinType, DynTerm)> {
        let mut tys = vec![];
        let mut xs = vec![];
        for a in args {
            let (t, x) = self.infer(a)?;
            tys.push(t);
            xs.push(x);
        }
        let idx2 = |base: &str| -> TResult<(Option<Static>, Option<Static>)> {
            Ok((base_index(&tys[0], base)?, base_index(&tys[1], base)?))
        };
        let both = |a: Option<Static>, b: Option<Static>, o: Op| match (a, b) {
            (Some(a), Some(b)) => Some(normalize_static(&Static::bin(o, a, b), None)),
            _ => None,
        };
        let ty = match op {
            PrimOp::Add | PrimOp::Sub | PrimOp::Mul => {
                let (a, b) = idx2("int")?;
                let o = match op {
                    PrimOp::Add => Op::Add,
                    PrimOp::Sub => Op::Sub,
                    _ => Op::Mul,
                };
                LinType::int(both(a, b, o))
            }
            PrimOp::Div => {
                let (a, b) = idx2("int")?;
                let divisor = b.clone().ok_or_else(|| {
                    err("guard-unprovable", "the divisor must have a static index proving it is non-zero")
                })?;
                let goal = Static::bin(Op::Neq, divisor, Static::Int(0));
                self.prove_or_fail(&goal, None, "that the divisor is non-zero,")?;
                LinType::int(both(a, b, Op::Div))
            }
            PrimOp::Eq | PrimOp::Neq | PrimOp::Lt | PrimOp::Le => {
                let (a, b) = idx2("int")?;
                let o = match op {
                    PrimOp::Eq => Op::Eq,
                    PrimOp::Neq => Op::Neq,
                    PrimOp::Lt => Op::Lt,
                    _ => Op::Le,
                };
                LinType::boolean(both(a, b, o))
            }
            PrimOp::Not => {
                let b = base_index(&tys[0], "bool")?;
                LinType::boolean(b.map(|b| normalize_static(&Static::not(b), None)))
            }
        };
        Ok((ty, DynTerm::Prim(op, xs)))
    }
}

fn capture_error(captured: &[Name]) -> Diagnostic {
    if captured.is_empty() {
        err(
            "nonlinear-capture-of-linear",
            "a nonlinear function cannot hold an endpoint",
        )
    } else {
        err(
            "nonlinear-capture-of-linear",
            format!(
                "a nonlinear function captures the linear variable `{}`",
                captured.join("`, `")
            ),
        )
    }
}
