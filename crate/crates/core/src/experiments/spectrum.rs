//! Transmission and reflection against detuning (or chain length).

use rayon::prelude::*;

use crate::bidirectional;
use crate::chiral;
use crate::disorder::sample_chain;
use crate::error::Result;
use crate::model::{build_periodic_chain, ChainGeometry, CouplingParams, Waveguide};
use crate::scattering::ScatteringResult;

use super::config::{ExperimentConfig, ResolvedSeries, SweepQuantity};
use super::output::{format_float, RunTables, Table};
use super::plot::{Curve, Figure};
use super::ExperimentError;

/// Columns of the spectrum CSV. For disordered chains `T`, `R` and `ln_T`
/// are ensemble means and `stderr_ln_T` is the standard error of `ln_T`.
pub const SPECTRUM_HEADER: [&str; 8] = [
    "series",
    "delta_Gamma0",
    "n_dimers",
    "T",
    "R",
    "ln_T",
    "stderr_ln_T",
    "status",
];

pub(crate) fn solve(
    waveguide: Waveguide,
    geometry: &ChainGeometry,
    params: &CouplingParams,
    delta: f64,
    solver: bidirectional::Solver,
) -> Result<ScatteringResult> {
    match waveguide {
        Waveguide::Chiral => chiral::chain_transmission(geometry, params, delta),
        Waveguide::Bidirectional => bidirectional::chain_transmission(geometry, params, delta, solver),
    }
}

/// `(T, R, ln T, stderr ln T)` at one point.
type Point = (f64, f64, f64, f64);

/// Mean of `values`, accumulated as offsets from the first entry so that
/// identical inputs reproduce their value exactly.
fn pivoted_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(pivot) = it.next() else { return f64::NAN };
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + (v - pivot), c + 1));
    pivot + sum / count as f64
}

fn evaluate(config: &ExperimentConfig, series: &ResolvedSeries, geometry: &ChainGeometry, delta: f64) -> Result<Point> {
    let Some(d) = config.disorder.as_ref().filter(|_| !series.periodic) else {
        let r = solve(series.waveguide, geometry, &series.params, delta, config.solver)?;
        return Ok((r.transmission, r.reflection, r.ln_transmission, 0.0));
    };
    let model = d.model();
    let params = series
        .params
        .with_coupling(model.effective_coupling(&series.params, geometry)?);
    let samples: Vec<(f64, f64, f64)> = (0..d.realizations)
        .into_par_iter()
        .map(|k| {
            let chain = sample_chain(&model, geometry, k, d.seed, params.lambda_nm)?;
            let r = solve(series.waveguide, &chain.geometry, &params, delta, config.solver)?;
            Ok((r.transmission, r.reflection, r.ln_transmission))
        })
        .collect::<Result<_>>()?;
    let t = pivoted_mean(samples.iter().map(|s| s.0));
    let r = pivoted_mean(samples.iter().map(|s| s.1));
    let ln_t = pivoted_mean(samples.iter().map(|s| s.2));
    let m = samples.len() as f64;
    let stderr = if samples.len() > 1 {
        let var = samples.iter().map(|s| (s.2 - ln_t).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        0.0
    };
    Ok((t, r, ln_t, stderr))
}

pub fn run_spectrum(config: &ExperimentConfig) -> std::result::Result<RunTables, ExperimentError> {
    let quantity = config.sweep.as_ref().map_or(SweepQuantity::Delta, |s| s.quantity);
    let grid = match &config.sweep {
        Some(s) => s.grid()?,
        None => super::config::linspace(
            super::DEFAULT_DELTA_GRID.0,
            super::DEFAULT_DELTA_GRID.1,
            super::DEFAULT_DELTA_GRID.2,
        ),
    };
    let fixed_delta = match quantity {
        SweepQuantity::Delta => None,
        SweepQuantity::Dimers => {
            if let Some(v) = grid.iter().find(|v| !(**v >= 1.0 && v.fract() == 0.0)) {
                return Err(ExperimentError::Validation(format!("dimer count {v} is not a positive integer")));
            }
            Some(config.fixed_delta()?)
        }
        other => {
            return Err(ExperimentError::Validation(format!(
                "spectrum sweeps delta or n, not {}",
                other.column()
            )))
        }
    };
    let series = config.resolve_series()?;

    let mut table = Table::new(config.csv_name(), &SPECTRUM_HEADER);
    let mut curves = Vec::new();
    for s in &series {
        let points: Vec<(f64, usize, std::result::Result<Point, String>)> = grid
            .par_iter()
            .map(|&v| {
                let (delta, geometry) = match fixed_delta {
                    None => (v, s.geometry.clone()),
                    Some(d) => {
                        let chain = build_periodic_chain(v as usize, config.geometry.length_nm, config.geometry.separation_nm);
                        match chain {
                            Ok(g) => (d, g),
                            Err(e) => return (d, v as usize, Err(e.to_string())),
                        }
                    }
                };
                let n = geometry.dimer_count();
                (delta, n, evaluate(config, s, &geometry, delta).map_err(|e| e.to_string()))
            })
            .collect();
        let mut curve = Vec::with_capacity(points.len());
        for (delta, n, point) in points {
            let x = if fixed_delta.is_some() { n as f64 } else { delta };
            match point {
                Ok((t, r, ln_t, se)) => {
                    curve.push((x, t));
                    table.push(vec![
                        s.label.clone(),
                        format_float(delta),
                        n.to_string(),
                        format_float(t),
                        format_float(r),
                        format_float(ln_t),
                        format_float(se),
                        "ok".into(),
                    ]);
                }
                Err(message) => {
                    log::error!("series {:?}, delta = {delta}, n = {n}: {message}", s.label);
                    table.sentinel_rows += 1;
                    let nan = format_float(f64::NAN);
                    table.push(vec![
                        s.label.clone(),
                        format_float(delta),
                        n.to_string(),
                        nan.clone(),
                        nan.clone(),
                        nan.clone(),
                        nan,
                        message,
                    ]);
                }
            }
        }
        curves.push(Curve {
            label: s.label.clone(),
            points: curve,
        });
    }
    let x_label = if fixed_delta.is_some() { "dimers n" } else { "detuning Δ / Γ₀" };
    Ok(RunTables {
        tables: vec![table],
        figure: Figure {
            title: config.name.clone(),
            x_label: x_label.into(),
            y_label: "T".into(),
            curves,
        },
    })
}
