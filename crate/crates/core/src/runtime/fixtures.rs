//! Pools built directly, bypassing the checker.

use std::collections::BTreeMap;

use super::Pool;
use crate::syntax::ast::*;
use crate::syntax::parse_stype;

/// Two threads, two channels, each thread holding one endpoint of both and
/// receiving before it sends. No step is ever enabled.
pub fn crossed_deadlock() -> Pool {
    let proto = parse_stype("within({0, 1}, msg(0 -> 1, int) :: end(0))").expect("fixture protocol parses");
    let c = ChannelId(0);
    let d = ChannelId(1);
    let ep = |ch: ChannelId, r: i64| DynTerm::Endpoint(Endpoint::new(ch, vec![r]));
    let statics = |r: i64| -> Vec<Static> {
        vec![
            Static::Set(vec![r]),
            Static::Int(0),
            Static::Int(1),
            Static::ty(LinType::int(None)),
            Static::stype(parse_stype("end(0)").expect("parses")),
        ]
    };
    let call = |api: ApiName, r: i64, args: Vec<DynTerm>| DynTerm::ApiCall {
        api,
        statics: statics(r),
        args,
        runtime_guard: None,
    };
    let end = |api: ApiName, e: DynTerm| DynTerm::ApiCall {
        api,
        statics: vec![],
        args: vec![e],
        runtime_guard: None,
    };
    // receive on `first` (role 1), send on `second` (role 0), then finish both
    let thread = |first: ChannelId, second: ChannelId| {
        DynTerm::let_pair(
            "a",
            "x",
            call(ApiName::Recv, 1, vec![ep(first, 1)]),
            DynTerm::let_in(
                "b",
                call(ApiName::Send, 0, vec![ep(second, 0), DynTerm::var("x")]),
                DynTerm::pair(end(ApiName::Wait, DynTerm::var("a")), end(ApiName::Close, DynTerm::var("b"))),
            ),
        )
    };
    let t0 = DynTerm::Snd(Box::new(thread(d, c)));
    let t1 = DynTerm::Snd(Box::new(DynTerm::pair(thread(c, d), DynTerm::Unit)));
    let sig = BTreeMap::from([(c, proto.clone()), (d, proto)]);
    Pool::from_threads(BTreeMap::from([(0, t0), (1, t1)]), sig)
}
