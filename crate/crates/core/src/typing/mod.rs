//! The typing judgment, the API scheme table and pool typing.

pub mod api;
pub mod check;
pub mod diag;
pub mod program;
pub mod rel;

pub use api::{api_signature, api_signature_at_sort, api_signature_by_name, DcType, UnknownApi};
pub use diag::{Diagnostic, TResult};
pub use rel::TyEnv;
pub use check::{attach_universe, CheckOptions, Checker, Signature};
pub use program::{check_program, check_source, check_protocols, type_equal, typecheck_expr, typecheck_pool, CheckedProgram, TypeCtx};
