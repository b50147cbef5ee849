//! Numerical realization of the prequantum groupoid over `C^n` for the
//! harmonic oscillator.
//!
//! The crate is organised bottom-up:
//!
//! - [`phase_space`]: the flat symplectic space `X = C^n`, its symmetric
//!   primitive and Gauss-Hermite grids for integrals against the Liouville
//!   volume.
//! - [`groupoid`]: arrows `(z, t mod h, z')`, composition, inversion, the
//!   prequantum 1-form and the lifted rotation.
//! - [`algebra`]: half-density kernels as finite Fock matrices, convolved
//!   either by matrix product or by literal quadrature of the kernel integral.
//! - [`polarization`]: holomorphic half-form states, the shifted spectrum,
//!   ground state, time evolution and the `(-1)^n` phase.
//! - [`character`]: the fixed-point character, its q-series and the direct
//!   spectral trace.
//! - [`check`]: the seeded invariant suite behind `halfform check`.

pub mod algebra;
pub mod character;
pub mod check;
pub mod cli;
mod error;
pub mod groupoid;
pub mod multi_index;
pub mod phase_space;
pub mod polarization;
mod serde_complex;

pub use error::{Error, Result};
pub use multi_index::MultiIndex;
pub use phase_space::{ComplexPoint, PhaseSpaceConfig, QuadratureGrid, TangentVector};
