use super::*;
use crate::typing::api::{api_signature, api_signature_at_sort};
use crate::typing::rel::{is_meta, MatchState, Matcher, META_PREFIX};

fn is_unannotated_lam(e: &DynTerm) -> bool {
    matches!(e.strip_at(), DynTerm::Lam { ann: None, .. })
}

fn has_meta_type(t: &LinType) -> bool {
    free_vars_type(t).iter().any(|n| is_meta(n))
}

fn meta(name: &str) -> Name {
    format!("{}{}", META_PREFIX, name)
}

impl Checker {
    /// Sort quantified by the `quan` at the head of an endpoint's protocol.
    fn quan_sort(&mut self, t: &LinType) -> TResult<Sort> {
        let st = match t {
            LinType::Chan(_, st) => st,
            other => {
                return Err(err(
                    "type-mismatch",
                    format!("expected an endpoint, found `{}`", other),
                ))
            }
        };
        let (_, head) = self.env.resolve_head(st, None)?;
        let binder = match head {
            SessionType::Quan { binder, .. } => binder,
            other => {
                return Err(err(
                    "protocol-head-mismatch",
                    format!("the protocol is at `{}`, not at a quantifier", other),
                ))
            }
        };
        let sort = match &binder {
            Static::Lam(_, s, _) => s.clone(),
            other => match sort_of(&mut self.env.sorts, other)? {
                Sort::Arrow(dom, _) => *dom,
                s => return Err(err("sort-mismatch", format!("quantifier body has sort {}", s))),
            },
        };
        if matches!(sort, Sort::Arrow(..)) {
            return Err(err(
                "sort-mismatch",
                "quantification over function sorts cannot be instantiated",
            ));
        }
        Ok(sort)
    }

    pub(super) fn api_call(
        &mut self,
        api: ApiName,
        statics: &[Static],
        args: &[DynTerm],
        want: Option<&LinType>,
        under_forall_elim: bool,
    ) -> TResult<(LinType, DynTerm)> {
        if api == ApiName::Unify && !under_forall_elim {
            return Err(err(
                "quan-witness-required",
                "the result of `unify` must be instantiated right away with `forall-`",
            ));
        }
        let mut done: Vec<Option<(LinType, DynTerm)>> = vec![None; args.len()];
        for (i, a) in args.iter().enumerate() {
            if !is_unannotated_lam(a) {
                done[i] = Some(self.infer(a)?);
            }
        }

        let scheme = match api {
            ApiName::Unify | ApiName::Exify => {
                let t = done[0].as_ref().map(|d| d.0.clone()).unwrap_or(LinType::Unit);
                let sort = self.quan_sort(&t)?;
                api_signature_at_sort(api, &sort)
            }
            _ => api_signature(api),
        };
        let metas: StaticMap = scheme
            .quantified
            .iter()
            .map(|(n, _)| (n.clone(), Static::Var(meta(n))))
            .collect();
        let pats: Vec<LinType> = scheme.args.iter().map(|t| subst_type(t, &metas)).collect();
        let result_pat = subst_type(&scheme.result, &metas);
        let guard_pat = subst_static(&scheme.guard, &metas);

        let mut state = MatchState {
            defer_undecided: self.opts.assert_runtime,
            ..MatchState::default()
        };
        if !statics.is_empty() {
            if statics.len() != scheme.quantified.len() {
                return Err(err(
                    "sort-mismatch",
                    format!(
                        "`{}` takes {} static argument(s), got {}",
                        api,
                        scheme.quantified.len(),
                        statics.len()
                    ),
                ));
            }
            for ((n, _), s) in scheme.quantified.iter().zip(statics) {
                state.vals.insert(meta(n), s.clone());
            }
        }

        // arguments whose types are known
        let mut m = Matcher::resume(&mut self.env, state);
        for (pat, d) in pats.iter().zip(&done) {
            if let Some((t, _)) = d {
                m.match_type(pat, t, None)?;
            }
        }
        m.solve_deferred();
        let unresolved = |m: &Matcher| {
            scheme.quantified.iter().any(|(n, _)| !m.st.vals.contains_key(&meta(n)))
        };
        // the expected result type
        if unresolved(&m) {
            if let Some(w) = want {
                let saved = m.st.clone();
                if m.match_type(&result_pat, w, None).is_err() {
                    m.st = saved;
                }
            }
        }
        // the guard, when it is a disjoint-union equation
        if unresolved(&m) {
            if let Static::Op(Op::Eq, eq) = &guard_pat {
                if let Static::Op(Op::DUnion, parts) = &eq[0] {
                    let u = m.st.universe.clone();
                    let target = normalize_static(&eq[1], u.as_deref());
                    m.st.deferred.push((parts[0].clone(), parts[1].clone(), target));
                }
            }
            m.solve_deferred();
        }
        let state = m.st;

        // lambda arguments, checked against the instantiated pattern
        let mut state = state;
        for (i, a) in args.iter().enumerate() {
            if done[i].is_some() {
                continue;
            }
            let pat = subst_type(&pats[i], &state.vals);
            if has_meta_type(&pat) {
                return Err(err(
                    "annotation-required",
                    format!("cannot infer the type of argument {} of `{}`; annotate it", i + 1, api),
                ));
            }
            let pat = match &state.universe {
                Some(u) => attach_universe(&pat, u),
                None => pat,
            };
            let x = self.check(a, &pat)?;
            done[i] = Some((pat, x));
            // the lambda's type may fix further metavariables
            let mut m = Matcher::resume(&mut self.env, state);
            m.solve_deferred();
            state = m.st;
        }

        let mut values = vec![];
        for (n, s) in &scheme.quantified {
            let v = state.vals.get(&meta(n)).cloned().ok_or_else(|| {
                err(
                    "annotation-required",
                    format!(
                        "cannot infer the static argument `{}` of `{}`; pass it as `{}{{...}}`",
                        n, api, api
                    ),
                )
            })?;
            let got = sort_of(&mut self.env.sorts, &v)?;
            if !got.fits(s) {
                return Err(err(
                    "sort-mismatch",
                    format!("static argument `{}` of `{}` has sort {} but {} is expected", v, api, got, s),
                ));
            }
            values.push(v);
        }
        let universe = state.universe.clone().or_else(|| {
            values.iter().find_map(|v| match v {
                Static::SType(st) => universe_of(st).map(|u| u.to_vec()),
                _ => None,
            })
        });
        let u = universe.as_deref();
        let inst: StaticMap = scheme
            .quantified
            .iter()
            .map(|(n, _)| n.clone())
            .zip(values.iter().cloned())
            .collect();

        let mut goals = vec![subst_static(&scheme.guard, &inst)];
        goals.extend(state.obligations.iter().map(|o| subst_static(o, &state.vals)));
        let guard = normalize_static(&Static::and(goals), u);
        let verdict = self.env.prove(&guard, u);
        let runtime_guard = match &verdict {
            crate::solver::Verdict::Valid => None,
            crate::solver::Verdict::Unknown(_) if self.opts.assert_runtime => Some(guard.clone()),
            _ => {
                return Err(err(
                    "guard-unprovable",
                    format!("the guard of `{}` does not hold: `{}`", api, guard),
                )
                .with_guard(&guard, &verdict))
            }
        };

        let mut result = normalize_type(&subst_type(&scheme.result, &inst), u);
        if let Some(u) = u {
            result = attach_universe(&result, u);
        }
        // protocols handed to the interpreter carry their universe
        let values = values
            .into_iter()
            .zip(&scheme.quantified)
            .map(|(v, (_, sort))| {
                let st = SessionType::embed(v.clone());
                match u {
                    Some(u) if *sort == Sort::SType && universe_of(&st).is_none() => {
                        Static::stype(SessionType::within(u.to_vec(), st))
                    }
                    _ => v,
                }
            })
            .collect();
        let x = DynTerm::ApiCall {
            api,
            statics: values,
            args: done.into_iter().map(|d| d.expect("every argument checked").1).collect(),
            runtime_guard,
        };
        Ok((result, x))
    }
}
