//! Expectations of smooth functions of a Gaussian variable, optionally
//! truncated below (`x > lower`), as needed for disorder averages over dimer
//! lengths.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Half-width of the Gauss-Legendre integration window, in standard deviations.
const WINDOW_SIGMAS: f64 = 12.0;
const LEGENDRE_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureOptions {
    /// Gauss-Hermite node count for the untruncated path.
    pub hermite_nodes: usize,
    /// Gauss-Legendre panel count for the truncated path.
    pub legendre_panels: usize,
    /// Relative agreement required between a rule and its doubled refinement.
    pub tolerance: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            hermite_nodes: 64,
            legendre_panels: 64,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    /// The variable is deterministic (`sigma = 0`).
    PointMass,
    GaussHermite,
    TruncatedGaussLegendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation<const K: usize> {
    pub values: [f64; K],
    pub method: QuadratureMethod,
    /// Gaussian probability mass at or below the truncation point.
    pub excluded_mass: f64,
    /// Largest relative change between the rule and its doubled refinement.
    pub refinement_change: f64,
    pub converged: bool,
}

fn hermite_rule<const K: usize>(
    nodes: usize,
    mean: f64,
    sigma: f64,
    f: &impl Fn(f64) -> [f64; K],
) -> [f64; K] {
    let rule = GaussHermite::new(NonZeroUsize::new(nodes).expect("node count is non-zero"));
    let mut acc = [0.0; K];
    for &(x, w) in rule.as_node_weight_pairs() {
        let v = f(mean + std::f64::consts::SQRT_2 * sigma * x);
        for (a, v) in acc.iter_mut().zip(v) {
            *a += w * v;
        }
    }
    acc.map(|a| a / std::f64::consts::PI.sqrt())
}

fn legendre_rule<const K: usize>(
    panels: usize,
    lo: f64,
    hi: f64,
    mean: f64,
    sigma: f64,
    f: &impl Fn(f64) -> [f64; K],
) -> [f64; K] {
    let rule = GaussLegendre::new(NonZeroUsize::new(LEGENDRE_ORDER).expect("order is non-zero"));
    let width = (hi - lo) / panels as f64;
    let mut acc = [0.0; K];
    let mut mass = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let mid = a + 0.5 * width;
        for &(x, w) in rule.as_node_weight_pairs() {
            let t = mid + 0.5 * width * x;
            let z = (t - mean) / sigma;
            let weight = 0.5 * width * w * (-0.5 * z * z).exp();
            mass += weight;
            for (acc, v) in acc.iter_mut().zip(f(t)) {
                *acc += weight * v;
            }
        }
    }
    acc.map(|a| a / mass)
}

fn max_relative_change<const K: usize>(a: &[f64; K], b: &[f64; K]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// `E[f(X)]` for `X ~ N(mean, sigma²)` conditioned on `X > lower`.
///
/// Plain Gauss-Hermite is used whenever every node lies above `lower`;
/// otherwise the truncated density is integrated with composite
/// Gauss-Legendre and renormalised. Either rule is re-run at double
/// resolution and the answer reports whether the two agree to
/// `options.tolerance`.
pub fn truncated_gaussian_expectation<const K: usize>(
    mean: f64,
    sigma: f64,
    lower: f64,
    options: &QuadratureOptions,
    f: impl Fn(f64) -> [f64; K],
) -> Expectation<K> {
    if sigma == 0.0 {
        return Expectation {
            values: f(mean),
            method: QuadratureMethod::PointMass,
            excluded_mass: 0.0,
            refinement_change: 0.0,
            converged: true,
        };
    }
    let excluded_mass = Normal::new(mean, sigma)
        .map(|n| n.cdf(lower))
        .unwrap_or(0.0);

    let hermite = GaussHermite::new(
        NonZeroUsize::new(2 * options.hermite_nodes.max(1)).expect("node count is non-zero"),
    );
    let deepest = hermite
        .as_node_weight_pairs()
        .iter()
        .map(|p| p.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let hermite_fits = mean - std::f64::consts::SQRT_2 * sigma * deepest > lower;

    let (coarse, fine, method) = if hermite_fits {
        (
            hermite_rule(options.hermite_nodes, mean, sigma, &f),
            hermite_rule(2 * options.hermite_nodes, mean, sigma, &f),
            QuadratureMethod::GaussHermite,
        )
    } else {
        let lo = lower.max(mean - WINDOW_SIGMAS * sigma);
        let hi = mean + WINDOW_SIGMAS * sigma;
        (
            legendre_rule(options.legendre_panels, lo, hi, mean, sigma, &f),
            legendre_rule(2 * options.legendre_panels, lo, hi, mean, sigma, &f),
            QuadratureMethod::TruncatedGaussLegendre,
        )
    };
    let refinement_change = max_relative_change(&coarse, &fine);
    let converged = refinement_change <= options.tolerance;
    if !converged {
        log::warn!(
            "gaussian quadrature did not settle: relative change {refinement_change:e} on refinement"
        );
    }
    if excluded_mass > 0.0 && method == QuadratureMethod::TruncatedGaussLegendre {
        log::warn!("truncating gaussian below {lower}: excluded mass {excluded_mass:e}");
    }
    Expectation {
        values: fine,
        method,
        excluded_mass,
        refinement_change,
        converged,
    }
}
