//! Engine for finite discrete structural causal models and the causal
//! abstractions that relate them.
//!
//! The crate models worlds at two levels of description: a low-level model
//! over fine-grained variables and a high-level model over coarse ones, tied
//! together by an alignment that clusters low variables and maps their joint
//! values onto high values. On top of that sit exact and approximate
//! consistency checks, ambiguity and aggregation reports, audit-study
//! quantities over resume projections, and contrasts between competing
//! alignments of the same low model.
//!
//! All probability is exact rational arithmetic; every reported number is a
//! reduced fraction, and "equal" always means decidable equality.

pub mod abstraction;
pub mod audit;
pub mod distribution;
pub mod dsl;
pub mod norms;
pub mod quotient;
pub mod random;
pub mod rational;
pub mod scm;

mod util;

#[cfg(test)]
pub(crate) mod test_fixtures;

pub use distribution::Distribution;
pub use rational::Rational;
pub use scm::{Assignment, Intervention, Scm};
