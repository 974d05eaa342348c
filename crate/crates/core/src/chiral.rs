//! Transport through dimer chains on a unidirectional (right-going) waveguide.
//!
//! Without a backward mode nothing is reflected, so every dimer multiplies the
//! incident amplitude by its own transmission factor. That factor depends on
//! the dimer's own length and coupling only, which is why the spacing between
//! dimers never enters `|t|`.

use num_complex::Complex64;
use serde::Serialize;

use crate::disorder::{DisorderModel, DisorderTarget};
use crate::error::{Error, Result};
use crate::model::{ChainGeometry, Coupling, CouplingParams};
use crate::quadrature::{truncated_gaussian_expectation, QuadratureMethod, QuadratureOptions};
use crate::scattering::{Ladders, ScatteringResult};

/// Smallest admissible block determinant, in squared rate units.
pub const SINGULARITY_EPS: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Transmission amplitude of a single two-level atom.
///
/// `(γ − Γ − 2iΔ) / (γ + Γ − 2iΔ)`. The fully decoupled resonant case
/// (`γ = Γ = Δ = 0`) is 0/0; it is returned as 1 and logged.
pub fn single_atom_t(delta: f64, loss: f64, gamma: f64) -> Complex64 {
    let den = Complex64::new(loss + gamma, -2.0 * delta);
    if den == Complex64::new(0.0, 0.0) {
        log::warn!("single_atom_t: uncoupled atom at resonance (0/0); returning 1");
        return Complex64::new(1.0, 0.0);
    }
    Complex64::new(loss - gamma, -2.0 * delta) / den
}

/// Closed-form transmission amplitude of one dimer with coupling `j` and
/// length phase `theta`.
pub fn single_dimer_t(delta: f64, loss: f64, gamma: f64, j: f64, theta: f64) -> Result<Complex64> {
    let e = Complex64::from_polar(1.0, theta);
    let e2 = e * e;
    let minus = Complex64::new(loss - gamma, -2.0 * delta);
    let plus = Complex64::new(loss + gamma, -2.0 * delta);
    let num = 4.0 * I * e * j * gamma + 4.0 * e2 * j * j + e2 * minus * minus;
    let den = -4.0 * I * e * j * gamma + 4.0 * j * j + plus * plus;
    if den.norm() < 4.0 * SINGULARITY_EPS {
        return Err(Error::Singular {
            delta,
            magnitude: den.norm() / 4.0,
        });
    }
    Ok(num / den)
}

/// Transmission of one dimer of length `length_nm`, with both the propagation
/// phase `kL` and the coupling `J(L)` following the length.
pub fn tau_random_length(
    delta: f64,
    loss: f64,
    gamma: f64,
    length_nm: f64,
    lambda_nm: f64,
    coupling: &Coupling,
) -> Result<Complex64> {
    let j = coupling.at_length(length_nm, lambda_nm)?;
    let ekl = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * length_nm / lambda_nm);
    let minus = Complex64::new(loss - gamma, -2.0 * delta);
    let plus = Complex64::new(loss + gamma, -2.0 * delta);
    let num = 4.0 * I * ekl * j * gamma + ekl * ekl * (4.0 * j * j + minus * minus);
    let den = plus * plus + 4.0 * j * (j - I * gamma * ekl);
    if den.norm() < 4.0 * SINGULARITY_EPS {
        return Err(Error::Singular {
            delta,
            magnitude: den.norm() / 4.0,
        });
    }
    Ok(num / den)
}

/// Solves the two coupled jump conditions of one dimer for the amplitudes
/// behind its first and second atom, given a unit amplitude in front of it.
///
/// Unknowns are the atomic source terms `b1`, `b2` (field jumps across each
/// atom); the coupled pair is
///
/// ```text
/// (d + iΓ/2) b1 − J e^{iθ} b2        = Γ
/// (iΓ − J e^{−iθ}) b1 + (d + iΓ/2) b2 = Γ
/// ```
///
/// with `d = Δ + iγ/2`. Returns `(t_mid, t_out)` in the plane-wave gauge.
fn dimer_block(delta: f64, loss: f64, gamma: f64, j: f64, theta: f64) -> Result<(Complex64, Complex64)> {
    let diag = Complex64::new(delta, 0.5 * (loss + gamma));
    let e = Complex64::from_polar(1.0, theta);
    let a12 = -j * e;
    let a21 = I * gamma - j * e.conj();
    let det = diag * diag - a12 * a21;
    if det.norm() < SINGULARITY_EPS {
        return Err(Error::Singular {
            delta,
            magnitude: det.norm(),
        });
    }
    let b1 = gamma * (diag - a12) / det;
    let b2 = gamma * (diag - a21) / det;
    let t_mid = 1.0 - I * b1;
    Ok((t_mid, t_mid - I * b2))
}

/// Amplitude ladder `t_0 … t_2N` of a chiral chain, `t_0 = 1`.
///
/// Entries carry the phase `exp(2ik(x_j − x_1))` relative to the plane-wave
/// coefficient, so that for one dimer `t[2]` equals [`single_dimer_t`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiralAmplitudes {
    pub t: Vec<Complex64>,
}

impl ChiralAmplitudes {
    pub fn transmission(&self) -> f64 {
        self.t.last().map_or(1.0, |t| t.norm_sqr())
    }
}

fn require_chiral(params: &CouplingParams) -> Result<()> {
    params.validate()?;
    if !params.is_chiral() {
        return Err(Error::InvalidParams(format!(
            "chiral solver needs gamma_left = 0, got {}",
            params.gamma_left
        )));
    }
    Ok(())
}

/// Full amplitude ladder of a chiral chain.
pub fn chain_amplitudes(
    geometry: &ChainGeometry,
    params: &CouplingParams,
    delta: f64,
) -> Result<ChiralAmplitudes> {
    require_chiral(params)?;
    let k = params.wavenumber();
    let gamma = params.gamma_right;
    let x0 = geometry.dimer_start(0);
    let mut t = Vec::with_capacity(2 * geometry.dimer_count() + 1);
    t.push(Complex64::new(1.0, 0.0));
    let mut incoming = Complex64::new(1.0, 0.0);
    for dimer in 0..geometry.dimer_count() {
        let length = geometry.dimer_length(dimer);
        let j = params.coupling.at_length(length, params.lambda_nm)?;
        let (mid, out) = dimer_block(delta, params.loss, gamma, j, k * length)?;
        let start = geometry.dimer_start(dimer);
        let gauge_first = Complex64::from_polar(1.0, 2.0 * k * (start - x0));
        let gauge_second = Complex64::from_polar(1.0, 2.0 * k * (start + length - x0));
        t.push(incoming * mid * gauge_first);
        incoming *= out;
        t.push(incoming * gauge_second);
    }
    Ok(ChiralAmplitudes { t })
}

/// Transmission of a chiral chain at detuning `delta`. `R = 0` always.
pub fn chain_transmission(
    geometry: &ChainGeometry,
    params: &CouplingParams,
    delta: f64,
) -> Result<ScatteringResult> {
    require_chiral(params)?;
    let k = params.wavenumber();
    let mut plane_wave = Complex64::new(1.0, 0.0);
    let mut ln_t = 0.0;
    for dimer in 0..geometry.dimer_count() {
        let length = geometry.dimer_length(dimer);
        let j = params.coupling.at_length(length, params.lambda_nm)?;
        let (_, tau) = dimer_block(delta, params.loss, params.gamma_right, j, k * length)?;
        plane_wave *= tau;
        ln_t += tau.norm_sqr().ln();
    }
    let ladder = chain_amplitudes(geometry, params, delta)?;
    let t = *ladder.t.last().expect("ladder is never empty");
    let n_amp = ladder.t.len();
    Ok(ScatteringResult {
        delta,
        t,
        r: Complex64::new(0.0, 0.0),
        transmission: plane_wave.norm_sqr(),
        reflection: 0.0,
        ln_transmission: ln_t,
        ladders: Some(Ladders {
            t: ladder.t,
            r: vec![Complex64::new(0.0, 0.0); n_amp - 1],
        }),
    })
}

/// `ln |τ_k|²` of every dimer, in chain order.
pub(crate) fn dimer_log_transmissions(
    geometry: &ChainGeometry,
    params: &CouplingParams,
    couplings: &[f64],
    delta: f64,
) -> Result<Vec<f64>> {
    let k = params.wavenumber();
    (0..geometry.dimer_count())
        .map(|d| {
            let length = geometry.dimer_length(d);
            let (_, tau) = dimer_block(delta, params.loss, params.gamma_right, couplings[d], k * length)?;
            Ok(tau.norm_sqr().ln())
        })
        .collect()
}

/// Disorder-averaged chiral transport for `n` dimers with independent
/// Gaussian dimer lengths, from one-dimer averages:
/// `⟨T⟩ = ⟨|τ|²⟩ⁿ`, `⟨ln T⟩ = n⟨ln|τ|²⟩`, `ξ = −1/⟨ln|τ|²⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticStats {
    pub mean_abs_tau_sq: f64,
    pub mean_ln_abs_tau_sq: f64,
    pub mean_t: f64,
    pub mean_ln_t: f64,
    /// Localization length in dimers; `+∞` when `⟨ln|τ|²⟩ = 0`.
    pub xi: f64,
    pub method: QuadratureMethod,
    pub excluded_mass: f64,
    pub converged: bool,
}

/// Quadrature evaluation of the chiral disorder averages.
///
/// `base_length_nm` is the unperturbed dimer length; it is the mean of the
/// distribution unless the model overrides it. For separation disorder the
/// chain is immune and the periodic single-dimer values are returned.
pub fn analytic_disorder_stats(
    params: &CouplingParams,
    disorder: &DisorderModel,
    base_length_nm: f64,
    delta: f64,
    n: usize,
    options: &QuadratureOptions,
) -> Result<AnalyticStats> {
    require_chiral(params)?;
    disorder.validate()?;
    let lambda = params.lambda_nm;
    let mean = disorder.mean_nm(lambda, base_length_nm);
    let (sigma, coupling) = match disorder.target {
        DisorderTarget::DimerLength => {
            let coupling = if disorder.couple_j_to_length {
                params.coupling.anchored_at(mean)
            } else {
                Coupling::Fixed(params.coupling.at_length(mean, lambda)?)
            };
            (disorder.sigma_nm(lambda), coupling)
        }
        DisorderTarget::DimerSeparation => (0.0, Coupling::Fixed(params.coupling.at_length(base_length_nm, lambda)?)),
    };
    let centre = if disorder.target == DisorderTarget::DimerLength { mean } else { base_length_nm };

    let failure = std::cell::RefCell::new(None);
    let expectation = truncated_gaussian_expectation(centre, sigma, 0.0, options, |length| {
        match tau_random_length(delta, params.loss, params.gamma_right, length, lambda, &coupling) {
            Ok(tau) => {
                let p = tau.norm_sqr();
                [p, p.ln()]
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                [f64::NAN, f64::NAN]
            }
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let [mean_abs_tau_sq, mean_ln_abs_tau_sq] = expectation.values;
    let xi = if mean_ln_abs_tau_sq < 0.0 {
        -1.0 / mean_ln_abs_tau_sq
    } else {
        f64::INFINITY
    };
    Ok(AnalyticStats {
        mean_abs_tau_sq,
        mean_ln_abs_tau_sq,
        mean_t: mean_abs_tau_sq.powi(n as i32),
        mean_ln_t: n as f64 * mean_ln_abs_tau_sq,
        xi,
        method: expectation.method,
        excluded_mass: expectation.excluded_mass,
        converged: expectation.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderUnits;
    use crate::model::build_periodic_chain;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const LOSS: f64 = 6.86;
    const GAMMA: f64 = 11.103;

    fn params(j: f64) -> CouplingParams {
        CouplingParams::chiral(GAMMA, LOSS, 655.0, Coupling::Fixed(j)).unwrap()
    }

    #[test]
    fn single_atom_values() {
        assert_eq!(single_atom_t(0.0, GAMMA, GAMMA).norm(), 0.0);
        assert_relative_eq!(single_atom_t(3.7, 0.0, GAMMA).norm(), 1.0, max_relative = 1e-15);
        let t = single_atom_t(15.0, LOSS, GAMMA);
        assert_relative_eq!(t.re, 0.673_757_772_858_706_5, max_relative = 1e-14);
        assert_relative_eq!(t.im, -0.544_857_029_128_698_2, max_relative = 1e-14);
        assert_relative_eq!(t.norm_sqr(), 0.750_818_718_678_475_4, max_relative = 1e-14);
        assert_eq!(single_atom_t(0.0, 0.0, 0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn single_dimer_reference_value() {
        let t = single_dimer_t(15.0, LOSS, GAMMA, 46.02, 0.314).unwrap();
        assert_relative_eq!(t.re, 0.314_503_072_445_962_5, max_relative = 1e-13);
        assert_relative_eq!(t.im, 0.886_678_914_035_333_5, max_relative = 1e-13);
        assert_relative_eq!(t.norm_sqr(), 0.885_111_679_172_828_7, max_relative = 1e-13);
    }

    #[test]
    fn critical_cascade_extinguishes() {
        assert!(single_dimer_t(0.0, GAMMA, GAMMA, 0.0, 0.0).unwrap().norm() < 1e-15);
    }

    #[test]
    fn one_dimer_chain_matches_closed_form() {
        let g = build_periodic_chain(1, 32.75, 98.25).unwrap();
        for &delta in &[-60.0, -15.0, 0.0, 2.5, 15.0, 48.0] {
            let r = chain_transmission(&g, &params(46.02), delta).unwrap();
            let closed = single_dimer_t(delta, LOSS, GAMMA, 46.02, params(0.0).wavenumber() * 32.75).unwrap();
            assert_relative_eq!(r.t.re, closed.re, epsilon = 1e-13);
            assert_relative_eq!(r.t.im, closed.im, epsilon = 1e-13);
            assert_relative_eq!(r.transmission, closed.norm_sqr(), max_relative = 1e-12);
            assert_eq!(r.reflection, 0.0);
        }
    }

    #[test]
    fn ladder_starts_at_one_and_is_passive() {
        let g = build_periodic_chain(4, 32.75, 98.25).unwrap();
        let a = chain_amplitudes(&g, &params(46.02), 12.0).unwrap();
        assert_eq!(a.t.len(), 9);
        assert_eq!(a.t[0], Complex64::new(1.0, 0.0));
        assert!(a.t.iter().all(|t| t.norm() <= 1.0 + 1e-14));
        let r = chain_transmission(&g, &params(46.02), 12.0).unwrap();
        assert_relative_eq!(a.transmission(), r.transmission, max_relative = 1e-12);
    }

    #[test]
    fn three_dimer_chain_factorizes() {
        let g = ChainGeometry::from_lengths(0.0, &[30.0, 32.75, 36.0], &[90.0, 110.0]).unwrap();
        let p = params(46.02).with_coupling(Coupling::Formula { prefactor: 1.5 });
        let k = p.wavenumber();
        let expected: f64 = g
            .dimer_lengths()
            .iter()
            .map(|&l| {
                let j = p.coupling.at_length(l, 655.0).unwrap();
                single_dimer_t(4.0, LOSS, GAMMA, j, k * l).unwrap().norm_sqr()
            })
            .product();
        let r = chain_transmission(&g, &p, 4.0).unwrap();
        assert_relative_eq!(r.transmission, expected, max_relative = 1e-12);
        assert_relative_eq!(r.ln_transmission, expected.ln(), max_relative = 1e-12);
    }

    #[test]
    fn rejects_bidirectional_params() {
        let p = CouplingParams::bidirectional(GAMMA, LOSS, 655.0, Coupling::Fixed(1.0)).unwrap();
        let g = build_periodic_chain(1, 32.75, 98.25).unwrap();
        assert!(matches!(chain_transmission(&g, &p, 0.0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn singular_block_is_reported() {
        // γ = Γ = 0 and Δ = ±J makes the block determinant vanish.
        let p = CouplingParams::chiral(0.0, 0.0, 655.0, Coupling::Fixed(5.0)).unwrap();
        let g = build_periodic_chain(1, 32.75, 98.25).unwrap();
        assert!(matches!(chain_transmission(&g, &p, 5.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn tau_matches_recomputed_dimer() {
        let coupling = Coupling::Anchored { j: 46.02, length_nm: 32.75 };
        let length = 32.75 * 1.25;
        let tau = tau_random_length(15.0, LOSS, GAMMA, length, 655.0, &coupling).unwrap();
        let j = coupling.at_length(length, 655.0).unwrap();
        let theta = 2.0 * std::f64::consts::PI * length / 655.0;
        let t = single_dimer_t(15.0, LOSS, GAMMA, j, theta).unwrap();
        assert_relative_eq!(tau.norm_sqr(), t.norm_sqr(), max_relative = 1e-12);

        let mean = tau_random_length(15.0, LOSS, GAMMA, 32.75, 655.0, &coupling).unwrap();
        let at_mean = single_dimer_t(15.0, LOSS, GAMMA, 46.02, 2.0 * std::f64::consts::PI * 32.75 / 655.0).unwrap();
        assert_relative_eq!((mean - at_mean).norm(), 0.0, epsilon = 1e-13);
        let lossless = tau_random_length(7.0, 0.0, GAMMA, 21.0, 655.0, &coupling).unwrap();
        assert_relative_eq!(lossless.norm(), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn analytic_stats_collapse_without_disorder() {
        let model = DisorderModel::dimer_length(0.0, DisorderUnits::LengthNm);
        let s = analytic_disorder_stats(&params(46.02), &model, 32.75, 15.0, 7, &Default::default()).unwrap();
        let t = single_dimer_t(15.0, LOSS, GAMMA, 46.02, params(0.0).wavenumber() * 32.75).unwrap().norm_sqr();
        assert_relative_eq!(s.mean_t, t.powi(7), max_relative = 1e-12);
        assert_relative_eq!(s.mean_ln_t, 7.0 * t.ln(), max_relative = 1e-12);
    }

    #[test]
    fn phase_only_disorder_leaves_xi_unchanged_without_coupling() {
        let mut xs = Vec::new();
        for sigma in [0.0, 0.02, 0.05, 0.0785] {
            let mut model = DisorderModel::dimer_length(sigma, DisorderUnits::PhaseRadians);
            model.couple_j_to_length = false;
            let s = analytic_disorder_stats(&params(0.0), &model, 32.75, 15.0, 10, &Default::default()).unwrap();
            xs.push(s.xi);
        }
        for x in &xs {
            assert_relative_eq!(*x, xs[0], max_relative = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn cascade_identity(delta in -100.0f64..100.0, loss in 0.0f64..30.0, gamma in 0.0f64..30.0, theta in 0.0f64..6.3) {
            let t = single_dimer_t(delta, loss, gamma, 0.0, theta).unwrap();
            let ta = single_atom_t(delta, loss, gamma);
            let cascade = Complex64::from_polar(1.0, 2.0 * theta) * ta * ta;
            prop_assert!((t - cascade).norm() <= 1e-14);
        }

        #[test]
        fn lossless_chain_is_transparent(
            lengths in proptest::collection::vec(5.0f64..60.0, 1..12),
            delta in -100.0f64..100.0,
            gamma in 0.1f64..30.0,
            j in 0.0f64..60.0,
        ) {
            let n = lengths.len();
            let g = ChainGeometry::from_lengths(0.0, &lengths, &vec![98.25; n - 1]).unwrap();
            let p = CouplingParams::chiral(gamma, 0.0, 655.0, Coupling::Fixed(j)).unwrap();
            let r = chain_transmission(&g, &p, delta).unwrap();
            prop_assert!((r.transmission - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn separations_do_not_matter(seps in proptest::collection::vec(1.0f64..500.0, 5), delta in -80.0f64..80.0) {
            let lengths = [30.0, 32.75, 35.0, 28.0, 40.0, 33.0];
            let reference = ChainGeometry::from_lengths(0.0, &lengths, &[98.25; 5]).unwrap();
            let moved = ChainGeometry::from_lengths(17.0, &lengths, &seps).unwrap();
            let p = params(46.02).with_coupling(Coupling::Formula { prefactor: 1.5 });
            let a = chain_transmission(&reference, &p, delta).unwrap();
            let b = chain_transmission(&moved, &p, delta).unwrap();
            prop_assert_eq!(a.transmission, b.transmission);
            prop_assert_eq!(a.ln_transmission, b.ln_transmission);
        }
    }
}
