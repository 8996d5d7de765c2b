//! Coxeter diagrams, Cartan matrices, labeled truncation polytopes and their
//! deformation spaces.
//!
//! The crate is organized around five layers:
//!
//! - [`diagram`]: Coxeter matrices, the diagram DSL, connected components,
//!   graph shapes and diagram isomorphism.
//! - [`cartan`]: Cartan matrices, Perron-Frobenius typing, cyclic products and
//!   construction of Cartan matrices with prescribed normalized cyclic
//!   products.
//! - [`polytope`]: labeled truncation polytopes as block trees of labeled
//!   simplices, with truncation, gluing, splitting and prismatic circuits.
//! - [`deform`]: geometrizability, deformation-space dimension and component
//!   counts, and the enumeration of convex-projectivizable truncation
//!   polytopes in dimensions 6..9.
//! - [`realize`]: numerical realization of Coxeter polytopes with verification
//!   of Vinberg's conditions.
//!
//! Built-in catalogs of diagrams (spherical/affine families, Lannér and
//! 2-Lannér tables, exceptional prisms) live in [`tables`].

pub mod cartan;
pub mod classify;
pub mod deform;
pub mod diagram;
pub mod polytope;
pub mod realize;
pub mod tables;

/// Numeric tolerance policy.
///
/// All equality tests on eigenvalues, cyclic products and Cartan entries use a
/// relative tolerance against the matrix max-norm. The default of `1e-9` can
/// be overridden through the `COXPOLY_TOL` environment variable.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn from_env() -> Self {
        match std::env::var("COXPOLY_TOL") {
            Ok(s) => match s.parse::<f64>() {
                Ok(v) if v > 0.0 && v < 1.0 => Tolerance { rel: v },
                _ => Tolerance::default(),
            },
            Err(_) => Tolerance::default(),
        }
    }

    /// Absolute threshold for a matrix whose entries have magnitude up to `scale`.
    pub fn abs(&self, scale: f64) -> f64 {
        self.rel * scale.max(1.0)
    }
}
