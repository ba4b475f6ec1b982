//! Continuous functions of unitary operators built from Fejér (Cesàro)
//! averages of the operator trigonometric moments `<U^k x, y>`, together with
//! an exact finite-dimensional spectral oracle to check them against.
//!
//! Modules, bottom-up:
//!
//! - [`linalg`]: complex vectors, dense matrices, the [`UnitaryOperator`] abstraction.
//! - [`fejer`]: Fejér weights and kernel, circle grids, Fourier coefficients, Fejér means.
//! - [`funcexpr`]: the circle-function expression language and builtins.
//! - [`moments`]: power orbits, moment tables, `T_N(t) v`.
//! - [`calculus`]: the functional `F^N_{x,y}(f)`, `(sigma_N f)(U) v`, densities, residuals.
//! - [`oracle`]: constructed spectra, Jacobi-based recovery, exact `f(U)`.
//! - [`io`]: Matrix Market, vector CSV, deterministic JSON/CSV formatting.

pub mod calculus;
pub mod error;
pub mod fejer;
pub mod funcexpr;
pub mod io;
pub mod linalg;
pub mod moments;
pub mod oracle;

pub use error::{Error, Result};
pub use funcexpr::CircleFunction;
pub use linalg::{inner, ComplexVec, DenseMatrix, PowerSign, SpectralForm, UnitaryOperator, C64};
