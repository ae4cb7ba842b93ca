//! Exotic quantum holonomy of the periodically kicked spin-1/2.
//!
//! The Floquet operator `U(λ)` of the kicked spin is 2π-periodic in the kick
//! strength `λ`, so a real sweep `λ: 0 → 2π` is a closed loop. Along that
//! loop the two Floquet eigenvalues and eigenvectors trade places. Extending
//! `λ` into the complex plane exposes the reason: a pair of exceptional
//! points `λ± = α ± iβ` whose square-root branch cut the real loop winds
//! around.
//!
//! Modules, bottom-up:
//!
//! - [`linalg`]: 2×2 complex matrices, closed-form eigen-decomposition and
//!   projector exponentials.
//! - [`model`]: the Floquet operator, analytic spectrum, mixing angle,
//!   eigenframes and exceptional-point locations.
//! - [`holonomy`]: gauge connection, winding integral and holonomy matrix.
//! - [`riemann`]: polar sheet sampling, branch-cut detection, EP refinement
//!   and eigenvalue continuation.
//! - [`adiabatic`]: stroboscopic evolution under a slow sweep of `λ`.

pub mod adiabatic;
pub mod error;
pub mod holonomy;
pub mod linalg;
pub mod model;
pub mod riemann;

pub use error::{Error, Result};
pub use linalg::{CMat2, CVec2, C64};
pub use model::{ComplexParam, EpPair, ModelParams, SpectralData};
