//! Numerical laboratory for radial solutions of the 3D energy-critical wave
//! equation `u_tt - Δu = F(x, t, u)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`field_core`]: radial grids, sampled states, quadrature and energies.
//! * [`linear_radiation`]: radiation profiles and the explicit free propagator.
//! * [`spacetime_norms`]: `L⁵_t L¹⁰_x` norms over exterior, annular and channel regions.
//! * [`nonlinear_evolve`]: leapfrog evolution in `w = r·u` form, whole-space and exterior.
//! * [`scatter_analysis`]: nonlinear profiles, scattering verdicts, characteristic numbers.
//! * [`family_construct`]: fixed-point constructions of asymptotically equivalent solutions.
//! * [`nonradiative_ode`]: the static non-radiative family `u^α`.
//! * [`io`]: CSV and JSON interchange formats.

// `!(x > 0.0)` is deliberate: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod family_construct;
pub mod field_core;
pub mod io;
pub mod linear_radiation;
pub mod nonlinear_evolve;
pub mod nonlinearity;
pub mod nonradiative_ode;
pub mod scatter_analysis;
pub mod spacetime_norms;

mod ode;

pub use error::{LabError, Result};
pub use field_core::{RadialGrid, RadialState, Trajectory};
pub use linear_radiation::RadiationProfile;
pub use nonlinearity::Nonlinearity;
