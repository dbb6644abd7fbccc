//! Constrained sparse regression solvers for linear spectral unmixing.
//!
//! Two alternating-direction solvers share one iteration skeleton:
//! [`sunsal`] handles constrained least squares (CLS) and constrained
//! sparse regression (CSR), [`csunsal`] handles constrained basis pursuit
//! (CBP) and its denoising variant (CBPDN). [`oracles`] holds independent
//! slow reference solvers, [`datagen`] the synthetic-experiment generator,
//! and [`bench`] the RSNR/timing harness behind the `unmix bench` command.
//!
//! Core math is generic over the scalar type; `f64` aliases are exported
//! at the crate root.

pub mod bench;
pub mod cli;
pub mod csunsal;
pub mod datagen;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod prox;
pub mod scalar;
pub mod sunsal;

pub use error::{Error, Result};
pub use model::{ProblemKind, ReturnIterate, SolveResult, SolverConfig, SpectralLibrary};
pub use scalar::Real;

/// Default-precision aliases.
pub type Matrix = linalg::DenseMatrix<f64>;
pub type Vector = linalg::DenseVector<f64>;
pub type Factorization = linalg::SpdFactorization<f64>;

/// Single-precision aliases.
pub type Matrix32 = linalg::DenseMatrix<f32>;
pub type Vector32 = linalg::DenseVector<f32>;
pub type Factorization32 = linalg::SpdFactorization<f32>;
