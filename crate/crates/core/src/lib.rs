//! Type checking, pool interpretation and deadlock-freeness analysis for
//! multiparty dependent session types.

pub mod statics;
pub mod syntax;
pub mod solver;
pub mod typing;
pub mod runtime;
pub mod dfcheck;
