//! Exact noncommutative operator algebra for boundary heat-flow invariants,
//! together with the combinatorial identity suites and independent spectral
//! oracles that confirm them.
//!
//! The crate is organized around a small number of exact-arithmetic layers:
//!
//! - [`coeffring`]: the scalar ring of rational combinations of powers of
//!   `sqrt(pi)`, plus the half-integer Gamma helpers used by every recursion.
//! - [`ncalgebra`]: the free graded algebra on the two generators `N`
//!   (degree 1) and the Laplacian (degree 2), with the bar/tilde splitting
//!   and the weight homomorphism.
//! - [`schemes`]: the recursion engine producing the heat-content operators
//!   `D_k` and the auxiliary families `R/S`, `Z`, `alpha`, `P/Q`.
//! - [`combinatorics`]: integer tables `T/U`, Hankel determinants, orthogonal
//!   polynomials, quotient-difference data, Newton identities and the
//!   shape-operator trace recursion.
//! - [`radialgeom`]: truncated jets in the boundary-distance variable and the
//!   radial action of the operators on model geometries, giving the boundary
//!   invariants `B_k`.
//! - [`spectral`]: eigenfunction-series evaluation of heat content and heat
//!   flow for closed-form models, with asymptotic-coefficient extraction.
//! - [`cli`]: the deterministic verification front end.

pub mod cli;
pub mod coeffring;
pub mod combinatorics;
pub mod ncalgebra;
pub mod poly;
pub mod radialgeom;
pub mod report;
pub mod schemes;
pub mod spectral;
