//! The dc-type table of the session API.

use crate::syntax::ast::*;
use crate::syntax::{parse_static, parse_type};

/// A guarded, quantified type scheme of an API constant.
#[derive(Clone, Debug, PartialEq)]
pub struct DcType {
    pub quantified: Vec<(Name, Sort)>,
    pub guard: Static,
    pub args: Vec<LinType>,
    pub result: LinType,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("unknown API `{0}`")]
pub struct UnknownApi(pub String);

fn scheme(quantified: &[(&str, Sort)], guard: &str, args: &[&str], result: &str) -> DcType {
    DcType {
        quantified: quantified.iter().map(|(n, s)| (n.to_string(), s.clone())).collect(),
        guard: parse_static(guard).expect("API guard parses"),
        args: args.iter().map(|a| parse_type(a).expect("API argument type parses")).collect(),
        result: parse_type(result).expect("API result type parses"),
    }
}

/// Looks an API up by its surface name.
pub fn api_signature_by_name(name: &str) -> Result<DcType, UnknownApi> {
    ApiName::from_name(name)
        .map(api_signature)
        .ok_or_else(|| UnknownApi(name.to_string()))
}

/// The scheme of `api`. `unify` and `exify` are shown quantifying over an
/// `int`-sorted binder; see [`api_signature_at_sort`].
pub fn api_signature(api: ApiName) -> DcType {
    api_signature_at_sort(api, &Sort::Int)
}

/// The scheme of `api`, with the quantifier sort of `unify`/`exify` set to
/// `sigma`.
pub fn api_signature_at_sort(api: ApiName, sigma: &Sort) -> DcType {
    use Sort::{Bool, Int, SType, Set, Type, VType};
    let rs = ("rs", Set);
    let p = ("p", SType);
    match api {
        ApiName::Fork => scheme(
            &[("rs1", Set), ("rs2", Set), p],
            "dunion(rs1, rs2) = full",
            &["chan(rs1, p) -o unit"],
            "chan(rs2, p)",
        ),
        ApiName::Cut => scheme(
            &[("rs1", Set), ("rs2", Set), p],
            "union(rs1, rs2) = full",
            &["chan(rs1, p)", "chan(rs2, p)"],
            "chan(inter(rs1, rs2), p)",
        ),
        ApiName::Elim => scheme(&[p], "true", &["chan({}, p)"], "unit"),
        ApiName::Split => scheme(
            &[("rs1", Set), ("rs2", Set), p],
            "inter(rs1, rs2) = {}",
            &["chan(dunion(rs1, rs2), p)", "chan(rs1, p) -o unit"],
            "chan(rs2, p)",
        ),
        ApiName::BSend => scheme(
            &[rs, ("r", Int), ("t", Type), p],
            "r in rs",
            &["chan(rs, msg(r, t) :: p)", "t"],
            "chan(rs, p)",
        ),
        ApiName::BRecv => scheme(
            &[rs, ("r", Int), ("t", Type), p],
            "r notin rs",
            &["chan(rs, msg(r, t) :: p)"],
            "chan(rs, p) * t",
        ),
        ApiName::Send => scheme(
            &[rs, ("r1", Int), ("r2", Int), ("t", VType), p],
            "r1 in rs && r2 notin rs",
            &["chan(rs, msg(r1 -> r2, t) :: p)", "t"],
            "chan(rs, p)",
        ),
        ApiName::Recv => scheme(
            &[rs, ("r1", Int), ("r2", Int), ("t", VType), p],
            "r1 notin rs && r2 in rs",
            &["chan(rs, msg(r1 -> r2, t) :: p)"],
            "chan(rs, p) * t",
        ),
        ApiName::Skip => scheme(
            &[rs, ("r1", Int), ("r2", Int), ("t", VType), p],
            "r1 in rs && r2 in rs || r1 notin rs && r2 notin rs",
            &["chan(rs, msg(r1 -> r2, t) :: p)"],
            "chan(rs, p)",
        ),
        ApiName::Close => scheme(&[rs, ("r", Int)], "r in rs", &["chan(rs, end(r))"], "unit"),
        ApiName::Wait => scheme(&[rs, ("r", Int)], "r notin rs", &["chan(rs, end(r))"], "unit"),
        ApiName::Unify | ApiName::Exify => {
            let q = if api == ApiName::Unify { "forall" } else { "exists" };
            let guard = if api == ApiName::Unify { "r in rs" } else { "r notin rs" };
            let mut d = scheme(
                &[rs, ("r", Int), ("f", Sort::arrow(sigma.clone(), SType))],
                guard,
                &["chan(rs, quan(r, f))"],
                &format!("{} a: int. chan(rs, f(a))", q),
            );
            d.result = match d.result {
                LinType::Forall(a, _, b) => LinType::Forall(a, sigma.clone(), b),
                LinType::Exists(a, _, b) => LinType::Exists(a, sigma.clone(), b),
                other => other,
            };
            d
        }
        ApiName::Offer => scheme(
            &[rs, ("r", Int), ("p1", SType), ("p2", SType), ("b", Bool)],
            "r in rs",
            &["chan(rs, branch(r, p1, p2))", "bool(b)"],
            "chan(rs, ite(b, p1, p2))",
        ),
        ApiName::Choose => scheme(
            &[rs, ("r", Int), ("p1", SType), ("p2", SType)],
            "r notin rs",
            &["chan(rs, branch(r, p1, p2))"],
            "chan(rs, p1) + chan(rs, p2)",
        ),
        ApiName::Recurse => scheme(
            &[rs, ("f", Sort::arrow(SType, SType))],
            "true",
            &["chan(rs, fix(f))"],
            "chan(rs, f(fix(f)))",
        ),
    }
}
