//! Typed strategy language with row-polymorphic variants and records.

pub mod elaborate;
pub mod eval;
pub mod infer;
pub mod kinds;
pub mod pipeline;
pub mod subst;
pub mod syntax;
