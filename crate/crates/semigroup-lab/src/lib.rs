//! A laboratory for two-variable semigroup identities: prove consequence
//! identities by explicit substitution chains, refute consequence by
//! certified counting invariants, and enumerate finite free models with
//! full group analysis.

pub mod corpus;
pub mod invariant;
pub mod model;
pub mod rewrite;
pub mod search;
pub mod word;

#[cfg(doc)]
pub mod guide;
#[cfg(doctest)]
mod guide;
