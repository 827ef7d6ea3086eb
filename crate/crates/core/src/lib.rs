//! Exact computations around a p-adic family of Picard modular forms at an inert prime.
//!
//! - [`padic`]: the unramified quadratic extension `O` of `Z_p` with Frobenius.
//! - [`weightspace`]: characters of `O^x x O^1`.
//! - [`induction`]: truncated models of locally analytic inductions with `delta` and the BGG map.
//! - [`spectral`]: characteristic series, Newton polygons and slope decompositions.
//! - [`hecke`]: normalizations at `p`, refinements and Hodge-Tate dictionaries.
//! - [`admissibility`]: weak admissibility and the reducibility elimination predicates.
//! - [`gkcoh`]: the differential operators of `p^+` and `p^-` on polynomial models.

pub mod admissibility;
pub mod gkcoh;
pub mod hecke;
pub mod induction;
pub mod matrix;
pub mod padic;
pub mod spectral;
pub mod weightspace;
