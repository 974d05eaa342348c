//! Transfer-matrix cascade for symmetric waveguides.
//!
//! Amplitudes are pairs `(a, b)` of right- and left-going waves referenced to
//! a point on the waveguide. A dimer seen from its midpoint is mirror
//! symmetric and reciprocal, so it is fixed by one transmission `t_c` and one
//! reflection `r_c`. With `d = Δ + iγ/2`, `u = d + iΓ`, `φ = e^{iθ}` and
//! `w = −J + iΓφ` (the waveguide-dressed exchange):
//!
//! ```text
//! t_c = 1 − iΓ (2u − w(φ + 1/φ)) / (u² − w²)
//! r_c =   −iΓ (u(φ + 1/φ) − 2w)  / (u² − w²)
//! ```
//!
//! and the midpoint transfer matrix is
//! `[[(t_c² − r_c²)/t_c, r_c/t_c], [−r_c/t_c, 1/t_c]]`, with unit determinant.
//! Moving the reference to the first atom and propagating to the start of the
//! next dimer gives [`dimer_transfer_matrix`].

use num_complex::Complex64;
use serde::Serialize;

use crate::chiral::SINGULARITY_EPS;
use crate::error::{Error, Result};
use crate::model::{ChainGeometry, CouplingParams};
use crate::scattering::ScatteringResult;

use super::{require_symmetric, I};

/// Entry magnitude above which a running product is renormalised.
pub const RESCALE_THRESHOLD: f64 = 1e150;

/// Maps `(a, b)` on the left of a section to `(a, b)` on its right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferMatrix2x2 {
    pub m: [[Complex64; 2]; 2],
}

impl TransferMatrix2x2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
        }
    }

    /// Free propagation over a phase `psi`.
    pub fn propagation(psi: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [
                [Complex64::from_polar(1.0, psi), zero],
                [zero, Complex64::from_polar(1.0, -psi)],
            ],
        }
    }

    /// `self · rhs`: `rhs` acts first.
    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self { m }
    }

    pub fn determinant(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            m: self.m.map(|row| row.map(|z| z * s)),
        }
    }
}

/// Midpoint `(t_c, r_c)` of one dimer.
fn centre_amplitudes(delta: f64, loss: f64, gamma: f64, j: f64, theta: f64) -> Result<(Complex64, Complex64)> {
    let u = Complex64::new(delta, 0.5 * loss + gamma);
    let phi = Complex64::from_polar(1.0, theta);
    let w = -j + I * gamma * phi;
    let den = u * u - w * w;
    if den.norm() < SINGULARITY_EPS {
        return Err(Error::Singular {
            delta,
            magnitude: den.norm(),
        });
    }
    let sum = phi + phi.conj();
    let t = 1.0 - I * gamma * (2.0 * u - w * sum) / den;
    let r = -I * gamma * (u * sum - 2.0 * w) / den;
    Ok((t, r))
}

/// `t_c` times the first-atom-referenced transfer matrix; finite even where
/// the dimer is a perfect mirror (`t_c = 0`).
fn dimer_matrix_times_t(theta_length: f64, t: Complex64, r: Complex64) -> TransferMatrix2x2 {
    let phi = Complex64::from_polar(1.0, theta_length);
    TransferMatrix2x2 {
        m: [[t * t - r * r, r / phi], [-r * phi, Complex64::new(1.0, 0.0)]],
    }
}

/// Transfer matrix across one dimer of length phase `theta_length` followed by
/// a gap of phase `theta_gap`, referenced at the dimer's first atom on the
/// left and at the next dimer's first atom on the right.
pub fn dimer_transfer_matrix(
    theta_length: f64,
    theta_gap: f64,
    params: &CouplingParams,
    j: f64,
    delta: f64,
) -> Result<TransferMatrix2x2> {
    require_symmetric(params)?;
    let (t, r) = centre_amplitudes(delta, params.loss, params.gamma_right, j, theta_length)?;
    if t.norm() < f64::MIN_POSITIVE {
        return Err(Error::Singular { delta, magnitude: t.norm() });
    }
    let inner = dimer_matrix_times_t(theta_length, t, r);
    let inv_t = 1.0 / t;
    let scaled = TransferMatrix2x2 {
        m: inner.m.map(|row| row.map(|z| z * inv_t)),
    };
    Ok(TransferMatrix2x2::propagation(theta_length + theta_gap).mul(&scaled))
}

/// Running product of per-dimer matrices with the `1/t_c` factors and any
/// renormalisations kept aside as `ln|·|` plus a unit phase.
struct Cascade {
    product: TransferMatrix2x2,
    /// `ln |∏ t_c|` minus the logs of all renormalisations.
    ln_prefactor: f64,
    phase: Complex64,
}

impl Cascade {
    fn new() -> Self {
        Self {
            product: TransferMatrix2x2::identity(),
            ln_prefactor: 0.0,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    fn push(&mut self, theta_length: f64, theta_gap: f64, t: Complex64, r: Complex64) {
        let step = TransferMatrix2x2::propagation(theta_length + theta_gap).mul(&dimer_matrix_times_t(theta_length, t, r));
        self.product = step.mul(&self.product);
        let n = t.norm();
        self.ln_prefactor += n.ln();
        if n > 0.0 {
            self.phase *= t / n;
        }
        let peak = self.product.max_abs();
        if peak > RESCALE_THRESHOLD || (peak < 1.0 / RESCALE_THRESHOLD && peak > 0.0) {
            self.product = self.product.scaled(1.0 / peak);
            self.ln_prefactor -= peak.ln();
        }
    }

    /// `ln T` of the cascade so far.
    fn ln_transmission(&self) -> f64 {
        2.0 * (self.ln_prefactor - self.product.m[1][1].norm().ln())
    }

    /// `(t, r)` at the last reference point, and `ln T`.
    fn amplitudes(&self) -> (Complex64, Complex64, f64) {
        let m22 = self.product.m[1][1];
        let r = -self.product.m[1][0] / m22;
        let ln_t = self.ln_transmission();
        let t = Complex64::from_polar(1.0, -m22.arg()) * self.phase * (0.5 * ln_t).exp();
        (t, r, ln_t)
    }
}

/// Transmission and reflection of a chain on a symmetric waveguide by an
/// `O(N)` cascade of dimer transfer matrices.
///
/// Uses the same phase convention as [`super::solve_dense`]; no ladders are
/// produced. `ln_transmission` stays finite far below the `f64` range of `T`.
pub fn chain_transmission_fast(
    geometry: &ChainGeometry,
    params: &CouplingParams,
    delta: f64,
) -> Result<ScatteringResult> {
    require_symmetric(params)?;
    let couplings = params.couplings(geometry)?;
    let k = params.wavenumber();
    let lengths = geometry.dimer_lengths();
    let separations = geometry.dimer_separations();
    let mut cascade = Cascade::new();
    for (n, (&length, &j)) in lengths.iter().zip(&couplings).enumerate() {
        let gap = separations.get(n).copied().unwrap_or(0.0);
        let theta = k * length;
        let (t, r) = centre_amplitudes(delta, params.loss, params.gamma_right, j, theta)?;
        cascade.push(theta, k * gap, t, r);
    }
    let (t_frame, r, ln_t) = cascade.amplitudes();
    let t = t_frame * Complex64::from_polar(1.0, k * geometry.span());
    Ok(ScatteringResult {
        delta,
        t,
        r,
        transmission: ln_t.exp(),
        reflection: r.norm_sqr(),
        ln_transmission: ln_t,
        ladders: None,
    })
}

/// `ln T` of the first `n` dimers for every `n` in `checkpoints` (ascending),
/// from a single pass over the chain.
pub fn prefix_log_transmission(
    geometry: &ChainGeometry,
    params: &CouplingParams,
    couplings: &[f64],
    delta: f64,
    checkpoints: &[usize],
) -> Result<Vec<f64>> {
    require_symmetric(params)?;
    let k = params.wavenumber();
    let lengths = geometry.dimer_lengths();
    let separations = geometry.dimer_separations();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut cascade = Cascade::new();
    let mut next = checkpoints.iter().peekable();
    for (n, &length) in lengths.iter().enumerate() {
        // The trailing gap only rephases the left-going row, so |M22| and
        // hence T are unaffected by it.
        let gap = separations.get(n).copied().unwrap_or(0.0);
        let theta = k * length;
        let (t, r) = centre_amplitudes(delta, params.loss, params.gamma_right, couplings[n], theta)?;
        cascade.push(theta, k * gap, t, r);
        while next.peek().is_some_and(|&&c| c == n + 1) {
            out.push(cascade.ln_transmission());
            next.next();
        }
    }
    if out.len() != checkpoints.len() {
        return Err(Error::InvalidGeometry(format!(
            "checkpoints {checkpoints:?} must be ascending and within 1..={}",
            lengths.len()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bidirectional::{single_dimer_tr, solve_dense};
    use crate::model::{build_periodic_chain, Coupling};
    use approx::assert_relative_eq;

    fn params(loss: f64, j: f64) -> CouplingParams {
        CouplingParams::bidirectional(11.103, loss, 655.0, Coupling::Fixed(j)).unwrap()
    }

    #[test]
    fn unit_determinant() {
        let m = dimer_transfer_matrix(0.314, 0.942, &params(6.86, 46.2), 46.2, 12.0).unwrap();
        assert_relative_eq!((m.determinant() - 1.0).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn decoupled_dimer_is_pure_propagation() {
        let p = CouplingParams::bidirectional(0.0, 6.86, 655.0, Coupling::Fixed(46.2)).unwrap();
        let m = dimer_transfer_matrix(0.314, 0.942, &p, 46.2, 3.0).unwrap();
        let prop = TransferMatrix2x2::propagation(0.314 + 0.942);
        for (a, b) in m.m.iter().flatten().zip(prop.m.iter().flatten()) {
            assert_relative_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_dimer_matches_closed_form() {
        let g = build_periodic_chain(1, 32.75, 98.25).unwrap();
        for (loss, j) in [(0.0, 46.2), (6.86, 46.02), (2.0, 0.0)] {
            let p = params(loss, j);
            for delta in [-80.0, -49.0, -10.0, 0.0, 15.0, 52.0] {
                let fast = chain_transmission_fast(&g, &p, delta).unwrap();
                let (t, r) = single_dimer_tr(delta, loss, 11.103, j, p.wavenumber() * 32.75).unwrap();
                assert_relative_eq!((fast.t - t).norm(), 0.0, epsilon = 1e-12);
                assert_relative_eq!((fast.r - r).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn matches_dense_on_a_short_chain() {
        let g = ChainGeometry::from_lengths(5.0, &[30.0, 32.75, 41.0, 25.0], &[90.0, 120.0, 70.0]).unwrap();
        let p = params(1.5, 0.0).with_coupling(Coupling::Formula { prefactor: 1.5 });
        for delta in [-60.0, -20.0, 0.0, 8.0, 33.0] {
            let fast = chain_transmission_fast(&g, &p, delta).unwrap();
            let dense = solve_dense(&g, &p, delta).unwrap();
            assert_relative_eq!(fast.transmission, dense.transmission, max_relative = 1e-10);
            assert_relative_eq!(fast.reflection, dense.reflection, max_relative = 1e-10);
            assert_relative_eq!((fast.t - dense.t).norm(), 0.0, epsilon = 1e-10);
            assert_relative_eq!((fast.r - dense.r).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn perfect_mirror_dimer_gives_zero_transmission() {
        let (gamma, j, theta) = (11.103f64, 46.2f64, 0.314f64);
        let delta = (2.0 * gamma * j * theta.sin() + j * j).sqrt();
        let lambda = 655.0;
        let length = theta * lambda / (2.0 * std::f64::consts::PI);
        let g = build_periodic_chain(3, length, 3.0 * length).unwrap();
        let res = chain_transmission_fast(&g, &params(0.0, j), delta).unwrap();
        assert!(res.transmission < 1e-20);
        assert_relative_eq!(res.reflection, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn deep_gaps_stay_finite() {
        // Inside the stop band near the single-dimer reflection peak the
        // unnormalised product grows far past the rescaling threshold.
        let p = params(0.0, 46.2);
        let short = chain_transmission_fast(&build_periodic_chain(1000, 32.75, 98.25).unwrap(), &p, 49.0).unwrap();
        let long = chain_transmission_fast(&build_periodic_chain(2000, 32.75, 98.25).unwrap(), &p, 49.0).unwrap();
        assert!(long.ln_transmission < -700.0, "ln T = {}", long.ln_transmission);
        assert!(long.ln_transmission.is_finite() && long.transmission >= 0.0);
        let per_dimer = (long.ln_transmission - short.ln_transmission) / 1000.0;
        assert_relative_eq!(per_dimer, short.ln_transmission / 1000.0, max_relative = 1e-3);
        assert_relative_eq!(long.reflection, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn prefixes_match_truncated_chains() {
        let g = build_periodic_chain(12, 32.75, 98.25).unwrap();
        let p = params(6.86, 46.2);
        let couplings = p.couplings(&g).unwrap();
        let checkpoints = [1, 4, 4, 12];
        let prefix = prefix_log_transmission(&g, &p, &couplings, 15.0, &checkpoints).unwrap();
        for (&n, &ln_t) in checkpoints.iter().zip(&prefix) {
            let full = chain_transmission_fast(&g.truncated(n).unwrap(), &p, 15.0).unwrap();
            assert_relative_eq!(ln_t, full.ln_transmission, max_relative = 1e-12);
        }
        assert!(prefix_log_transmission(&g, &p, &couplings, 15.0, &[13]).is_err());
    }

    #[test]
    fn rejects_asymmetric_params() {
        let p = CouplingParams::chiral(11.103, 0.0, 655.0, Coupling::Fixed(1.0)).unwrap();
        let g = build_periodic_chain(1, 32.75, 98.25).unwrap();
        assert!(matches!(chain_transmission_fast(&g, &p, 0.0), Err(Error::InvalidParams(_))));
    }
}
