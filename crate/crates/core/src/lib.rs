//! Kernels, solution operators and weighted norms for the parabolic equation
//!
//! ```text
//! ∂ₜu − aⁱʲ(t)∂ᵢⱼu + u = f,   t ∈ ℝ, x ∈ ℝⁿ
//! ```
//!
//! with merely measurable, symmetric, uniformly elliptic coefficients `a(t)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`coeffs`]: coefficient fields `t ↦ a(t)` and their time averages
//!   `A_{t,τ} = ∫_{t−τ}^t a(r) dr` together with `B_{t,τ} = A_{t,τ}⁻¹`.
//! - [`kernel`]: the anisotropic Gaussian kernel `p(t,τ,x)`, its closed-form
//!   derivatives, Fourier symbol, mass and semigroup identities.
//! - [`corrections`]: the multiplication terms `I_ij(a)(t)` and `J(a)(t)` that
//!   appear next to the principal-value integrals for `∂ᵢⱼu` and `∂ₜu`.
//! - [`operators`]: grid solvers for the full-space and Cauchy problems,
//!   truncated singular integrals, residuals and Calderón–Zygmund checks.
//! - [`analysis`]: parabolic balls, maximal functions, Muckenhoupt constants,
//!   mixed norms, Hölder seminorms, sharp maximal functions.
//!
//! Supporting modules: [`grid`] (sampled fields and their binary layout),
//! [`spectral`] (FFT multipliers), [`quadrature`] and [`linalg`].

pub mod analysis;
pub mod coeffs;
pub mod corrections;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod spectral;

pub use coeffs::{AveragedPair, CoefficientField, FieldKind, FieldSpec};
pub use error::{Error, Result};
pub use grid::{Axis, GridSpec, Lattice, SampledField, Smoothness, SpatialField};

/// Crate version, recorded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
