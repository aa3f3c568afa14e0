//! Numerical laboratory for Weierstrass m-triples.
//!
//! A Weierstrass m-triple `(Σ, f dz, g)` carries the conformal metric
//! `ds² = (1+|g|²)^m |f|² |dz|²`. This crate evaluates that metric and its
//! Gaussian curvature, measures geodesic distance to the boundary on meshed
//! planar domains, checks curvature estimates and omitted-value properties of
//! `g`, probes normality of families of meromorphic functions, and
//! synthesizes the four surface classes whose Gauss-type maps give rise to
//! m-triples: minimal surfaces in R³, maxfaces in L³, improper affine fronts
//! in R³ and flat fronts in H³.
//!
//! The `parallel` feature (on by default) evaluates per-node and per-sample
//! work on the rayon thread pool; without it every loop runs sequentially and
//! produces identical results.

pub mod error;
pub mod estimates;
pub mod expr;
pub mod geodesy;
pub mod mtriple;
pub mod par;
pub mod poly;
pub mod quad;
pub mod surfaces;

pub use error::Error;
pub use expr::{ExtComplex, MeroExpr, MobiusMap};
pub use geodesy::MeshedDomain;
pub use mtriple::{DomainSpec, MTriple, Region};

pub use num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
