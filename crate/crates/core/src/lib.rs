//! Numerical toolkit for the focusing Ablowitz–Ladik lattice
//!
//! ```text
//! i dq_n/dt = q_{n+1} - 2 q_n + q_{n-1} + |q_n|^2 (q_{n+1} + q_{n-1})
//! ```
//!
//! The crate covers direct time integration ([`lattice`]), the direct
//! scattering transform ([`scattering`]), reflectionless Riemann–Hilbert
//! problems ([`soliton`]), a Beals–Coifman solver on concentric circles
//! ([`rhsolver`]), the scalar function `T` ([`tfun`]) and long-time
//! asymptotic formulas ([`asympt`]), together with a scenario harness
//! ([`harness`]).
//!
//! Conventions used throughout:
//!
//! * `phi(λ, n, t) = -i t (λ + 1/λ - 2) + n ln λ`.
//! * The Riemann–Hilbert matrix `M` jumps across the unit circle as
//!   `M_out = M_in V` with `V = [[1+|r|², conj(r) e^φ], [r e^{-φ}, 1]]`.
//! * `q_n(t) = M_12(0; n+1, t)`.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asympt;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod linalg;
pub mod phase;
pub mod quad;
pub mod rhsolver;
pub mod scattering;
pub mod series;
pub mod soliton;
pub mod specfun;
pub mod spectrum;
pub mod tfun;

pub use error::{Error, Result};
pub use lattice::{LatticeState, Trajectory};
pub use linalg::Mat2;
pub use phase::{Region, RegionData};
pub use scattering::{CircleGrid, SpectralData};
pub use spectrum::{DiscreteSpectrum, Pole};

/// Double precision complex number.
pub type C64 = num_complex::Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
