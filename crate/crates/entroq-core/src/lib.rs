//! Classical numerics for variational estimation of quantum relative
//! entropies.
//!
//! The crate provides, in rough dependency order:
//!
//! - [`linalg`]: complex dense matrices, Hermitian eigendecomposition,
//!   matrix functions, tensor products, partial trace, Sylvester solver;
//! - [`states`]: density matrices, random state generation, support tests;
//! - [`quad`]: Gauss-Radau-Jacobi quadrature rules on [0, 1] and the scalar
//!   approximants for `log x` and `x^(1-alpha)`;
//! - [`divergence`]: exact spectral oracles for f-divergences, relative
//!   entropy and Petz Renyi divergence, plus the closed-form variational
//!   optimum and error bounds;
//! - [`circuits`]: parameterized circuits, ansatz families, compilation to
//!   unitaries and parameter-shift gradients;
//! - [`sampling`]: the three probability families read out from states and
//!   circuits, exactly or with finite shots;
//! - [`vqa`]: the variational estimators built from the above;
//! - [`channel`] and [`experiments`]: Pauli channels, coherent information,
//!   the barren-plateau study and the superadditivity scan.
//!
//! All values are immutable after construction and safe to share across
//! threads; randomness is always drawn from explicitly seeded generators.

pub mod channel;
pub mod circuits;
pub mod divergence;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod quad;
pub mod sampling;
pub mod states;
pub mod vqa;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use states::DensityMatrix;
