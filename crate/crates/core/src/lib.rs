//! Multivalued VC machinery for combinatorial auctions.
//!
//! The crate measures k-shattering and the k-dimension of finite function
//! classes, bounds class size through the generalized Sauer–Shelah lemma,
//! and applies the same notions to banks of (duplicate) allocations. On top
//! of that it runs maximal-in-range mechanisms with Clarke payments, the
//! greedy value-query algorithm for k-local bidders, and small executable
//! reductions from packing and disjointness problems. Every quantity is exact.

pub mod allocations;
pub mod banks;
pub mod bundle;
pub mod error;
pub mod fixtures;
pub mod mechanisms;
mod lp;
mod matching;
pub mod rational;
pub mod reductions;
pub mod shattering;
pub mod valuations;
mod welfare;

pub use bundle::Bundle;
pub use error::{Budget, Error, Result};
pub use rational::Rational;
