//! Transport through dimer chains on a symmetric two-way waveguide.
//!
//! Two independent routes are provided: [`solve_dense`] assembles the coupled
//! jump conditions of every atom into one linear system, and
//! [`chain_transmission_fast`] cascades per-dimer 2×2 transfer matrices. The
//! dense route is the reference for the fast one.

mod dense;
mod transfer;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChainGeometry, CouplingParams};
use crate::scattering::ScatteringResult;

pub use dense::{solve_dense, CONDITION_LIMIT};
pub use transfer::{
    chain_transmission_fast, dimer_transfer_matrix, prefix_log_transmission, TransferMatrix2x2,
    RESCALE_THRESHOLD,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Closed-form `(t, r)` of one dimer on a symmetric waveguide.
pub fn single_dimer_tr(
    delta: f64,
    loss: f64,
    gamma: f64,
    j: f64,
    theta: f64,
) -> Result<(Complex64, Complex64)> {
    let e = Complex64::from_polar(1.0, theta);
    let e2 = e * e;
    let e3 = e2 * e;
    let lossy = Complex64::new(loss, -2.0 * delta);
    let wide = Complex64::new(loss + 2.0 * gamma, -2.0 * delta);
    let den = 4.0 * I * e * j * gamma + 4.0 * e2 * gamma * gamma - wide * wide
        - 4.0 * j * (j - I * gamma * e);
    if den.norm() < 4.0 * crate::chiral::SINGULARITY_EPS {
        return Err(Error::Singular {
            delta,
            magnitude: den.norm() / 4.0,
        });
    }
    let t_num = -4.0 * I * e * j * gamma + 4.0 * I * e3 * j * gamma - e2 * (4.0 * j * j + lossy * lossy);
    let r_num = 2.0
        * gamma
        * (-4.0 * I * e * j + loss + 2.0 * gamma
            - e2 * Complex64::new(2.0 * gamma - loss, 2.0 * delta)
            - 2.0 * I * delta);
    Ok((t_num / den, r_num / den))
}

/// Which bidirectional route to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Dense,
    #[default]
    Fast,
}

pub fn chain_transmission(
    geometry: &ChainGeometry,
    params: &CouplingParams,
    delta: f64,
    solver: Solver,
) -> Result<ScatteringResult> {
    match solver {
        Solver::Dense => solve_dense(geometry, params, delta),
        Solver::Fast => chain_transmission_fast(geometry, params, delta),
    }
}

fn require_symmetric(params: &CouplingParams) -> Result<()> {
    params.validate()?;
    if !params.is_symmetric() {
        return Err(Error::InvalidParams(format!(
            "symmetric waveguide required, got gamma_right = {} and gamma_left = {}",
            params.gamma_right, params.gamma_left
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn resonant_lossless_atoms_mirror() {
        for theta in [0.1, 0.314, 1.0, 2.5] {
            let (t, r) = single_dimer_tr(0.0, 0.0, 11.103, 0.0, theta).unwrap();
            assert!(t.norm() < 1e-15);
            assert_relative_eq!(r.norm(), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn uncoupled_limit_matches_waveguide_mediated_form() {
        let (loss, gamma, theta) = (6.86, 11.103, 0.314);
        for delta in [-30.0, -3.0, 0.0, 7.5, 40.0] {
            let (t, r) = single_dimer_tr(delta, loss, gamma, 0.0, theta).unwrap();
            let e2 = Complex64::from_polar(1.0, 2.0 * theta);
            let lossy = Complex64::new(loss, -2.0 * delta);
            let wide = Complex64::new(loss + 2.0 * gamma, -2.0 * delta);
            let den = 4.0 * e2 * gamma * gamma - wide * wide;
            let t0 = -e2 * lossy * lossy / den;
            let r0 = 2.0 * gamma * (loss + 2.0 * gamma - e2 * Complex64::new(2.0 * gamma - loss, 2.0 * delta) - 2.0 * I * delta) / den;
            assert_relative_eq!((t - t0).norm(), 0.0, epsilon = 1e-14);
            assert_relative_eq!((r - r0).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn lossless_dimer_conserves_flux() {
        for delta in [-80.0, -49.5, -10.0, 0.3, 22.0, 49.5] {
            let (t, r) = single_dimer_tr(delta, 0.0, 11.103, 46.2, 0.314).unwrap();
            assert_relative_eq!(t.norm_sqr() + r.norm_sqr(), 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn lossless_transmission_zeros_follow_the_peak_law() {
        let (gamma, j, theta) = (11.103f64, 46.2f64, 0.314f64);
        let law = (2.0 * gamma * j * theta.sin() + j * j).sqrt();
        assert!((law - 49.51).abs() < 0.005);
        for delta in [law, -law] {
            let (t, r) = single_dimer_tr(delta, 0.0, gamma, j, theta).unwrap();
            assert!(t.norm_sqr() < 1e-24);
            assert_relative_eq!(r.norm_sqr(), 1.0, max_relative = 1e-12);
        }
    }
}
