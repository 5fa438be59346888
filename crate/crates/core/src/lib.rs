//! Numerical laboratory for Petz-type recovery maps.
//!
//! The crate realizes, at finite matrix dimension, the objects that appear in
//! recovery-map corrections to the data processing inequality: Kosaki-weighted
//! Schatten norms, the interpolation densities `β_θ`, relative entropies
//! (Umegaki, α-z Rényi, measured), p-fidelities, rotated/universal Petz
//! recovery maps and the analytic interpolant `G(z)`. The [`suite`] module
//! turns every inequality and identity into a checker that reports a signed
//! margin on seeded random ensembles.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`linalg`] | Hermitian eigensystems, complex matrix powers, Schatten norms |
//! | [`quadrature`] | `β_θ` densities and weighted quadrature over ℝ |
//! | [`states`] | density matrices, Kraus channels, Stinespring isometries, ensembles |
//! | [`entropy`] | weighted norms, relative entropies, p-fidelity, measured entropy |
//! | [`recovery`] | Petz / rotated / universal / nonlinear recovery, interpolant `G(z)` |
//! | [`suite`] | inequality checkers, gap reports, suite runner |

pub mod entropy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod recovery;
pub mod states;
pub mod suite;

pub use error::{Error, Result};

/// Library version echoed into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
