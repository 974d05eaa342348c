//! Gaussian geometric disorder, Monte Carlo ensembles of `ln T`, and
//! localization-length fits.
//!
//! Every random draw comes from a generator keyed by
//! `(seed, realization, dimer)`, so a realization can be regenerated in
//! isolation and the ensemble does not depend on how realizations are spread
//! over threads. Reductions run sequentially in realization order with
//! compensated summation.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bidirectional::prefix_log_transmission;
use crate::chiral::dimer_log_transmissions;
use crate::error::{Error, Result};
use crate::model::{ChainGeometry, Coupling, CouplingParams, Waveguide};

/// Redraws allowed for a single non-positive sample.
pub const MAX_REDRAWS: u32 = 100;

/// `ln T` recorded for a realization whose transmission is exactly zero.
pub const LN_T_FLOOR: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderTarget {
    DimerLength,
    DimerSeparation,
}

/// Units of `mean` and `sigma` in a [`DisorderModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderUnits {
    LengthNm,
    /// Propagation phase `2πx/λ`.
    PhaseRadians,
}

impl DisorderUnits {
    fn to_nm(self, value: f64, lambda_nm: f64) -> f64 {
        match self {
            DisorderUnits::LengthNm => value,
            DisorderUnits::PhaseRadians => value * lambda_nm / (2.0 * PI),
        }
    }
}

/// Independent Gaussian perturbation of one geometric quantity per dimer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderModel {
    pub target: DisorderTarget,
    /// Distribution mean; `None` centres each draw on the base geometry.
    #[serde(default)]
    pub mean: Option<f64>,
    pub sigma: f64,
    pub units: DisorderUnits,
    /// For length disorder: recompute `J` from every sampled length.
    /// Otherwise `J` keeps its value at the mean length.
    #[serde(default = "default_true")]
    pub couple_j_to_length: bool,
}

fn default_true() -> bool {
    true
}

impl DisorderModel {
    pub fn dimer_length(sigma: f64, units: DisorderUnits) -> Self {
        Self {
            target: DisorderTarget::DimerLength,
            mean: None,
            sigma,
            units,
            couple_j_to_length: true,
        }
    }

    pub fn dimer_separation(sigma: f64, units: DisorderUnits) -> Self {
        Self {
            target: DisorderTarget::DimerSeparation,
            mean: None,
            sigma,
            units,
            couple_j_to_length: false,
        }
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = Some(mean);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParams(format!(
                "disorder sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        if let Some(m) = self.mean {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::InvalidParams(format!("disorder mean must be positive, got {m}")));
            }
        }
        Ok(())
    }

    pub fn sigma_nm(&self, lambda_nm: f64) -> f64 {
        self.units.to_nm(self.sigma, lambda_nm)
    }

    /// Mean in nanometres; `base_nm` when no mean is set.
    pub fn mean_nm(&self, lambda_nm: f64, base_nm: f64) -> f64 {
        self.mean.map_or(base_nm, |m| self.units.to_nm(m, lambda_nm))
    }

    /// Coupling rule applied to sampled chains built on `base`.
    ///
    /// Length disorder with `couple_j_to_length` ties a fixed `J` to the mean
    /// length of the first dimer; without coupling `J` is frozen at that
    /// length. Separation disorder leaves lengths, hence `J`, untouched.
    pub fn effective_coupling(&self, params: &CouplingParams, base: &ChainGeometry) -> Result<Coupling> {
        let lambda = params.lambda_nm;
        match self.target {
            DisorderTarget::DimerLength => {
                let mean = self.mean_nm(lambda, base.dimer_length(0));
                if self.couple_j_to_length {
                    Ok(params.coupling.anchored_at(mean))
                } else {
                    Ok(Coupling::Fixed(params.coupling.at_length(mean, lambda)?))
                }
            }
            DisorderTarget::DimerSeparation => Ok(params.coupling),
        }
    }
}

/// A sampled chain together with the number of rejected draws it needed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledChain {
    pub geometry: ChainGeometry,
    pub redraws: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one `(seed, realization, dimer)` triple.
fn stream(seed: u64, realization: u64, dimer: usize) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ realization) ^ dimer as u64);
    ChaCha8Rng::seed_from_u64(key)
}

/// Positive Gaussian draw, rejecting non-positive samples.
fn positive_draw(
    mean: f64,
    sigma: f64,
    seed: u64,
    realization: u64,
    dimer: usize,
    redraws: &mut u64,
) -> Result<f64> {
    let mut rng = stream(seed, realization, dimer);
    for attempt in 0..=MAX_REDRAWS {
        let z: f64 = rng.sample(StandardNormal);
        let v = mean + sigma * z;
        if v > 0.0 {
            *redraws += attempt as u64;
            return Ok(v);
        }
    }
    Err(Error::DisorderTooStrong {
        realization,
        dimer,
        limit: MAX_REDRAWS,
    })
}

/// Realization `realization` of `model` applied to `base`.
///
/// Only the targeted quantity changes; the first atom stays in place. For
/// separation disorder, draw `k` is the gap after dimer `k`.
pub fn sample_chain(
    model: &DisorderModel,
    base: &ChainGeometry,
    realization: u64,
    seed: u64,
    lambda_nm: f64,
) -> Result<SampledChain> {
    model.validate()?;
    if model.sigma == 0.0 {
        return Ok(SampledChain {
            geometry: base.clone(),
            redraws: 0,
        });
    }
    let sigma = model.sigma_nm(lambda_nm);
    let mut redraws = 0;
    let origin = base.dimer_start(0);
    let geometry = match model.target {
        DisorderTarget::DimerLength => {
            let lengths = base
                .dimer_lengths()
                .iter()
                .enumerate()
                .map(|(k, &l)| positive_draw(model.mean_nm(lambda_nm, l), sigma, seed, realization, k, &mut redraws))
                .collect::<Result<Vec<_>>>()?;
            ChainGeometry::from_lengths(origin, &lengths, &base.dimer_separations())?
        }
        DisorderTarget::DimerSeparation => {
            let gaps = base
                .dimer_separations()
                .iter()
                .enumerate()
                .map(|(k, &s)| positive_draw(model.mean_nm(lambda_nm, s), sigma, seed, realization, k, &mut redraws))
                .collect::<Result<Vec<_>>>()?;
            ChainGeometry::from_lengths(origin, base.dimer_lengths(), &gaps)?
        }
    };
    Ok(SampledChain { geometry, redraws })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Everything that defines one Monte Carlo ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub model: DisorderModel,
    pub params: CouplingParams,
    pub waveguide: Waveguide,
    /// Unperturbed chain; needs at least `max(n_values)` dimers.
    pub base: ChainGeometry,
    /// Strictly increasing dimer counts.
    pub n_values: Vec<usize>,
    pub realizations: u64,
    pub seed: u64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub n_values: Vec<usize>,
    pub mean_ln_t: Vec<f64>,
    /// Sample standard deviation over `√realizations`.
    pub stderr_ln_t: Vec<f64>,
    pub mean_t: Vec<f64>,
    pub realizations: u64,
    pub seed: u64,
    /// Realizations with exactly zero transmission, recorded at [`LN_T_FLOOR`].
    pub floored: u64,
    /// Rejected non-positive draws over the whole ensemble.
    pub redraws: u64,
    /// Monte Carlo standard error of the `ln T`-vs-`n` slope, from the
    /// spread of per-realization slopes.
    pub slope_mc_stderr: f64,
}

impl EnsembleSpec {
    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.params.validate()?;
        match self.waveguide {
            Waveguide::Chiral if !self.params.is_chiral() => {
                return Err(Error::InvalidParams("chiral ensemble needs gamma_left = 0".into()))
            }
            Waveguide::Bidirectional if !self.params.is_symmetric() => {
                return Err(Error::InvalidParams(
                    "bidirectional ensemble needs gamma_left = gamma_right".into(),
                ))
            }
            _ => {}
        }
        if self.realizations == 0 {
            return Err(Error::InvalidParams("at least one realization is required".into()));
        }
        if self.n_values.is_empty()
            || self.n_values[0] == 0
            || self.n_values.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParams(format!(
                "n values must be positive and strictly increasing, got {:?}",
                self.n_values
            )));
        }
        let needed = *self.n_values.last().expect("checked non-empty");
        if needed > self.base.dimer_count() {
            return Err(Error::InvalidGeometry(format!(
                "base chain has {} dimers but n = {needed} was requested",
                self.base.dimer_count()
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::Domain(format!("detuning must be finite, got {}", self.delta)));
        }
        Ok(())
    }

    /// `ln T` at every `n` for one realization, plus its redraw count and
    /// whether any value was floored.
    pub fn realization_ln_t(&self, realization: u64) -> Result<(Vec<f64>, u64, bool)> {
        let needed = *self.n_values.last().expect("validated");
        let base = self.base.truncated(needed)?;
        let sampled = sample_chain(&self.model, &base, realization, self.seed, self.params.lambda_nm)?;
        let params = self
            .params
            .with_coupling(self.model.effective_coupling(&self.params, &base)?);
        let couplings = params.couplings(&sampled.geometry)?;
        let mut ln_t = match self.waveguide {
            Waveguide::Chiral => {
                let per_dimer = dimer_log_transmissions(&sampled.geometry, &params, &couplings, self.delta)?;
                let mut acc = CompensatedSum::default();
                let mut out = Vec::with_capacity(self.n_values.len());
                let mut next = self.n_values.iter().peekable();
                for (k, v) in per_dimer.iter().enumerate() {
                    acc.add(*v);
                    if next.peek().is_some_and(|&&n| n == k + 1) {
                        out.push(acc.value());
                        next.next();
                    }
                }
                out
            }
            Waveguide::Bidirectional => {
                prefix_log_transmission(&sampled.geometry, &params, &couplings, self.delta, &self.n_values)?
            }
        };
        let mut floored = false;
        for v in &mut ln_t {
            if v.is_nan() {
                return Err(Error::Domain(format!(
                    "ln T is undefined for realization {realization} at delta = {}",
                    self.delta
                )));
            }
            if *v == f64::NEG_INFINITY {
                *v = LN_T_FLOOR;
                floored = true;
            }
        }
        Ok((ln_t, sampled.redraws, floored))
    }
}

/// Least-squares slope of `y` against `x`.
fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Averages `ln T` over the ensemble, in parallel on the current rayon pool.
///
/// Results are identical for any number of worker threads.
pub fn ensemble_ln_t(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    spec.validate()?;
    let samples: Vec<(Vec<f64>, u64, bool)> = (0..spec.realizations)
        .into_par_iter()
        .map(|r| spec.realization_ln_t(r))
        .collect::<Result<_>>()?;

    let m = spec.n_values.len();
    let count = spec.realizations as f64;
    // Means are accumulated as offsets from the first realization, so an
    // ensemble of identical values reproduces that value exactly.
    let pivot = samples[0].0.clone();
    let mut offsets = vec![CompensatedSum::default(); m];
    let mut sum_t = vec![CompensatedSum::default(); m];
    let mut redraws = 0;
    let mut floored = 0;
    for (ln_t, r, f) in &samples {
        for i in 0..m {
            offsets[i].add(ln_t[i] - pivot[i]);
            sum_t[i].add(ln_t[i].exp());
        }
        redraws += r;
        floored += u64::from(*f);
    }
    let mean_ln_t: Vec<f64> = offsets
        .iter()
        .zip(&pivot)
        .map(|(s, p)| p + s.value() / count)
        .collect();
    let mean_t = sum_t.iter().map(|s| s.value() / count).collect();

    let mut squares = vec![CompensatedSum::default(); m];
    for (ln_t, _, _) in &samples {
        for i in 0..m {
            let d = ln_t[i] - mean_ln_t[i];
            squares[i].add(d * d);
        }
    }
    let stderr_ln_t = squares
        .iter()
        .map(|s| {
            if spec.realizations > 1 {
                (s.value() / (count - 1.0)).sqrt() / count.sqrt()
            } else {
                0.0
            }
        })
        .collect();

    let slope_mc_stderr = if m >= 2 && spec.realizations > 1 {
        let x: Vec<f64> = spec.n_values.iter().map(|&n| n as f64).collect();
        let slopes: Vec<f64> = samples.iter().map(|(y, _, _)| ols_slope(&x, y)).collect();
        let mut mean = CompensatedSum::default();
        slopes.iter().for_each(|s| mean.add(*s));
        let mean = mean.value() / count;
        let mut var = CompensatedSum::default();
        slopes.iter().for_each(|s| var.add((s - mean) * (s - mean)));
        (var.value() / (count - 1.0)).sqrt() / count.sqrt()
    } else {
        0.0
    };

    if redraws > 0 {
        log::warn!("{redraws} non-positive disorder draws were rejected and redrawn");
    }
    if floored > 0 {
        log::warn!("{floored} realizations had T = 0; ln T recorded as {LN_T_FLOOR}");
    }
    Ok(EnsembleResult {
        n_values: spec.n_values.clone(),
        mean_ln_t,
        stderr_ln_t,
        mean_t,
        realizations: spec.realizations,
        seed: spec.seed,
        floored,
        redraws,
        slope_mc_stderr,
    })
}

/// Straight-line fit of `⟨ln T⟩` against `n`, with `ξ = −1/slope`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationEstimate {
    /// Localization length in dimers; `+∞` when the slope is not negative.
    pub xi: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Combined residual and Monte Carlo standard error of the slope.
    pub slope_stderr: f64,
    pub xi_stderr: f64,
}

impl LocalizationEstimate {
    pub fn is_localized(&self) -> bool {
        self.xi.is_finite()
    }
}

/// Fits `ln T = intercept + slope · n` by ordinary least squares.
pub fn fit_localization(n: &[f64], mean_ln_t: &[f64], slope_mc_stderr: f64) -> Result<LocalizationEstimate> {
    let mut distinct = n.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if n.len() != mean_ln_t.len() || distinct.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "localization fit needs at least 3 distinct n values, got {}",
            distinct.len()
        )));
    }
    let m = n.len() as f64;
    let mx = n.iter().sum::<f64>() / m;
    let my = mean_ln_t.iter().sum::<f64>() / m;
    let sxx: f64 = n.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = n.iter().zip(mean_ln_t).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = mean_ln_t.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = n
        .iter()
        .zip(mean_ln_t)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    let fit_stderr = if n.len() > 2 { (ss_res / (m - 2.0) / sxx).sqrt() } else { 0.0 };
    let slope_stderr = fit_stderr.hypot(slope_mc_stderr);
    let (xi, xi_stderr) = if slope < 0.0 {
        (-1.0 / slope, slope_stderr / (slope * slope))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(LocalizationEstimate {
        xi,
        slope,
        intercept,
        r_squared,
        slope_stderr,
        xi_stderr,
    })
}

pub fn estimate_localization(ensemble: &EnsembleResult) -> Result<LocalizationEstimate> {
    let n: Vec<f64> = ensemble.n_values.iter().map(|&n| n as f64).collect();
    fit_localization(&n, &ensemble.mean_ln_t, ensemble.slope_mc_stderr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_periodic_chain;
    use approx::assert_relative_eq;

    fn chiral_spec(model: DisorderModel, realizations: u64) -> EnsembleSpec {
        EnsembleSpec {
            model,
            params: CouplingParams::chiral(11.103, 6.86, 655.0, Coupling::Fixed(46.02)).unwrap(),
            waveguide: Waveguide::Chiral,
            base: build_periodic_chain(100, 32.75, 98.25).unwrap(),
            n_values: (1..=10).map(|k| 10 * k).collect(),
            realizations,
            seed: 7,
            delta: 15.0,
        }
    }

    #[test]
    fn zero_sigma_returns_base() {
        let base = build_periodic_chain(5, 32.75, 98.25).unwrap();
        let s = sample_chain(&DisorderModel::dimer_length(0.0, DisorderUnits::LengthNm), &base, 3, 9, 655.0).unwrap();
        assert_eq!(s.geometry, base);
        assert_eq!(s.redraws, 0);
    }

    #[test]
    fn sampling_is_reproducible_and_targeted() {
        let base = build_periodic_chain(20, 32.75, 98.25).unwrap();
        let sep = DisorderModel::dimer_separation(0.2, DisorderUnits::PhaseRadians);
        let a = sample_chain(&sep, &base, 11, 42, 655.0).unwrap();
        let b = sample_chain(&sep, &base, 11, 42, 655.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.geometry.dimer_lengths(), base.dimer_lengths());
        assert_ne!(a.geometry.dimer_separations(), base.dimer_separations());

        let len = DisorderModel::dimer_length(2.0, DisorderUnits::LengthNm);
        let c = sample_chain(&len, &base, 11, 42, 655.0).unwrap();
        for (x, y) in c.geometry.dimer_separations().iter().zip(base.dimer_separations()) {
            assert_relative_eq!(*x, y, max_relative = 1e-12);
        }
        assert_ne!(c.geometry.dimer_lengths(), base.dimer_lengths());
        assert_ne!(sample_chain(&len, &base, 12, 42, 655.0).unwrap(), c);
    }

    #[test]
    fn realizations_are_independent_of_chain_length() {
        let long = build_periodic_chain(30, 32.75, 98.25).unwrap();
        let short = long.truncated(10).unwrap();
        let m = DisorderModel::dimer_length(3.0, DisorderUnits::LengthNm);
        let a = sample_chain(&m, &long, 4, 1, 655.0).unwrap();
        let b = sample_chain(&m, &short, 4, 1, 655.0).unwrap();
        assert_eq!(&a.geometry.dimer_lengths()[..10], b.geometry.dimer_lengths());
    }

    #[test]
    fn overwhelming_disorder_is_rejected() {
        let base = build_periodic_chain(3, 32.75, 98.25).unwrap();
        let m = DisorderModel::dimer_length(1.0, DisorderUnits::LengthNm).with_mean(-1.0);
        assert!(matches!(sample_chain(&m, &base, 0, 0, 655.0), Err(Error::InvalidParams(_))));
        let mut redraws = 0;
        let err = positive_draw(-50.0, 1.0, 0, 3, 2, &mut redraws).unwrap_err();
        assert_eq!(err, Error::DisorderTooStrong { realization: 3, dimer: 2, limit: MAX_REDRAWS });
        // A mean near zero rejects about half of all draws and reports them.
        let mut total = 0;
        for r in 0..200 {
            assert!(positive_draw(1e-9, 1.0, 5, r, 0, &mut total).unwrap() > 0.0);
        }
        assert!(total > 100);
    }

    #[test]
    fn synthetic_line_fit() {
        let n: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect();
        let y: Vec<f64> = n.iter().map(|x| -0.1 * x).collect();
        let fit = fit_localization(&n, &y, 0.0).unwrap();
        assert_relative_eq!(fit.xi, 10.0, max_relative = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0);
        assert!(fit.intercept.abs() < 1e-12);
        assert!(fit_localization(&[1.0, 1.0, 2.0], &[0.0, 0.0, 0.0], 0.0).is_err());
        let flat = fit_localization(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0], 0.0).unwrap();
        assert!(!flat.is_localized());
    }

    #[test]
    fn separation_disorder_leaves_chiral_ensemble_periodic() {
        let spec = chiral_spec(DisorderModel::dimer_separation(0.2, DisorderUnits::PhaseRadians), 50);
        let res = ensemble_ln_t(&spec).unwrap();
        let mut periodic = spec.clone();
        periodic.model.sigma = 0.0;
        periodic.realizations = 1;
        let reference = ensemble_ln_t(&periodic).unwrap();
        assert_eq!(res.mean_ln_t, reference.mean_ln_t);
        assert!(res.stderr_ln_t.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let spec = chiral_spec(DisorderModel::dimer_length(0.2, DisorderUnits::PhaseRadians), 400);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ensemble_ln_t(&spec).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(2));
        assert_eq!(one, run(8));
    }

    #[test]
    fn bidirectional_clean_lossless_chain_matches_periodic() {
        let params = CouplingParams::bidirectional(11.103, 0.0, 655.0, Coupling::Fixed(0.0)).unwrap();
        let base = build_periodic_chain(30, 32.75, 98.25).unwrap();
        let spec = EnsembleSpec {
            model: DisorderModel::dimer_separation(0.0, DisorderUnits::PhaseRadians),
            params,
            waveguide: Waveguide::Bidirectional,
            base: base.clone(),
            n_values: vec![10, 20, 30],
            realizations: 3,
            seed: 1,
            delta: 4.0,
        };
        let res = ensemble_ln_t(&spec).unwrap();
        for (&n, &m) in res.n_values.iter().zip(&res.mean_ln_t) {
            let direct =
                crate::bidirectional::chain_transmission_fast(&base.truncated(n).unwrap(), &params, 4.0).unwrap();
            assert_eq!(m, direct.ln_transmission);
        }
    }

    #[test]
    fn mismatched_waveguide_is_rejected() {
        let mut spec = chiral_spec(DisorderModel::dimer_length(0.1, DisorderUnits::PhaseRadians), 2);
        spec.waveguide = Waveguide::Bidirectional;
        assert!(matches!(ensemble_ln_t(&spec), Err(Error::InvalidParams(_))));
        let mut spec = chiral_spec(DisorderModel::dimer_length(0.1, DisorderUnits::PhaseRadians), 2);
        spec.n_values = vec![10, 200];
        assert!(ensemble_ln_t(&spec).is_err());
    }
}
