//! Single-photon transport through chains of dipole-coupled atomic dimers on
//! chiral and bidirectional one-dimensional waveguides.
//!
//! * [`model`]: chain geometry, coupling rates and the dipole-dipole `J`.
//! * [`chiral`]: unidirectional waveguides, closed forms and analytic
//!   disorder averages.
//! * [`bidirectional`]: two-way waveguides, dense reference solver and
//!   transfer-matrix cascade.
//! * [`disorder`]: Gaussian disorder, Monte Carlo ensembles and localization
//!   fits.
//! * [`experiments`]: JSON-configured sweeps behind the `dimerchain` binary.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bidirectional;
pub mod chiral;
pub mod disorder;
pub mod error;
pub mod experiments;
pub mod model;
pub mod quadrature;
pub mod scattering;

pub use error::{Error, Result};
pub use model::{build_periodic_chain, dipole_coupling, phase_between, ChainGeometry, Coupling, CouplingParams, Waveguide};
pub use scattering::{Ladders, ScatteringResult};
