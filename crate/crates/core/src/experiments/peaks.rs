//! Location of the two dimer resonances and their splitting.
//!
//! A resonance is a local maximum of the extinction `1 − T`, i.e. a dip in
//! transmission. For a lossless dimer on a two-way waveguide these dips are
//! exact zeros of `T` at `Δ = ±√(2ΓJ sin θ + J²)`.

use rayon::prelude::*;

use crate::error::Result;
use crate::model::Coupling;

use super::config::{linspace, ExperimentConfig, PeakSearchSpec, ResolvedSeries, SweepQuantity};
use super::output::{format_float, RunTables, Table};
use super::plot::{Curve, Figure};
use super::spectrum::solve;
use super::ExperimentError;

/// Columns of the resonance CSV. `depth_*` is `1 − T` at each resonance,
/// `delta_peak_Gamma0` their separation, `D = depth_plus − depth_minus`, and
/// `peak_law_Gamma0 = 2√(2ΓJ sin θ + J²)` for comparison.
pub const PEAKS_HEADER: [&str; 15] = [
    "series",
    "sweep_value",
    "J_Gamma0",
    "gamma_Gamma0",
    "Gamma_Gamma0",
    "gamma_plus_Gamma_Gamma0",
    "delta_minus_Gamma0",
    "delta_plus_Gamma0",
    "depth_minus",
    "depth_plus",
    "delta_peak_Gamma0",
    "D",
    "peaks_found",
    "peak_law_Gamma0",
    "status",
];

/// Bracket width at which golden-section refinement stops.
pub const PEAK_TOLERANCE: f64 = 1e-6;

/// Maximizes `f` on `[a, b]` by golden-section search.
pub fn golden_section_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tolerance: f64) -> Result<(f64, f64)> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tolerance {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Up to two strongest resonances, ordered by detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct Resonances {
    /// `(Δ, 1 − T)` pairs.
    pub peaks: Vec<(f64, f64)>,
}

impl Resonances {
    pub fn separation(&self) -> Option<f64> {
        (self.peaks.len() == 2).then(|| self.peaks[1].0 - self.peaks[0].0)
    }

    pub fn depth_difference(&self) -> Option<f64> {
        (self.peaks.len() == 2).then(|| self.peaks[1].1 - self.peaks[0].1)
    }
}

/// Scans `extinction` over `window`, keeps the two largest interior local
/// maxima and refines each to [`PEAK_TOLERANCE`].
pub fn find_resonances(extinction: impl Fn(f64) -> Result<f64> + Sync, window: &PeakSearchSpec) -> Result<Resonances> {
    let grid = linspace(window.start, window.stop, window.points);
    let values: Vec<f64> = grid.par_iter().map(|&x| extinction(x)).collect::<Result<_>>()?;
    let mut maxima: Vec<usize> = (1..grid.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect();
    maxima.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    maxima.truncate(2);
    let mut peaks = maxima
        .into_iter()
        .map(|i| golden_section_max(&extinction, grid[i - 1], grid[i + 1], PEAK_TOLERANCE))
        .collect::<Result<Vec<_>>>()?;
    peaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Resonances { peaks })
}

struct PeakRow {
    coupling: f64,
    loss: f64,
    rate: f64,
    law: f64,
    found: Result<Resonances>,
}

fn analyse(config: &ExperimentConfig, series: &ResolvedSeries, quantity: Option<SweepQuantity>, value: f64) -> PeakRow {
    let mut params = series.params;
    let length = config.geometry.length_nm;
    match quantity {
        Some(SweepQuantity::Coupling) => params.coupling = Coupling::Fixed(value),
        Some(SweepQuantity::WaveguideRate) => {
            params.gamma_right = value;
            if !params.is_chiral() {
                params.gamma_left = value;
            }
        }
        Some(SweepQuantity::Loss) => params.loss = value,
        _ => {}
    }
    let coupling = params.coupling.at_length(length, params.lambda_nm).unwrap_or(f64::NAN);
    let theta = params.wavenumber() * length;
    let law_arg = 2.0 * params.gamma_right * coupling * theta.sin() + coupling * coupling;
    let law = if law_arg >= 0.0 { 2.0 * law_arg.sqrt() } else { f64::NAN };
    let found = params.validate().and_then(|_| {
        let window = config.peaks.clone().unwrap_or_default();
        find_resonances(
            |delta| solve(series.waveguide, &series.geometry, &params, delta, config.solver).map(|r| 1.0 - r.transmission),
            &window,
        )
    });
    PeakRow {
        coupling,
        loss: params.loss,
        rate: params.gamma_right,
        law,
        found,
    }
}

pub fn run_peak_analysis(config: &ExperimentConfig) -> std::result::Result<RunTables, ExperimentError> {
    let (quantity, grid) = match &config.sweep {
        None => (None, vec![f64::NAN]),
        Some(s) => match s.quantity {
            SweepQuantity::Coupling | SweepQuantity::WaveguideRate | SweepQuantity::Loss => (Some(s.quantity), s.grid()?),
            other => {
                return Err(ExperimentError::Validation(format!(
                    "peak analysis sweeps J, Gamma or gamma, not {}",
                    other.column()
                )))
            }
        },
    };
    if quantity.is_some() && grid.iter().any(|v| *v < 0.0) {
        return Err(ExperimentError::Validation("swept rates must be non-negative".into()));
    }
    let series = config.resolve_series()?;
    let mut table = Table::new(config.csv_name(), &PEAKS_HEADER);
    let mut curves = Vec::new();
    for s in &series {
        let rows: Vec<PeakRow> = grid.iter().map(|&v| analyse(config, s, quantity, v)).collect();
        let mut curve = Vec::new();
        for (&v, row) in grid.iter().zip(rows) {
            let mut cells = vec![
                s.label.clone(),
                if quantity.is_some() { format_float(v) } else { String::new() },
                format_float(row.coupling),
                format_float(row.loss),
                format_float(row.rate),
                format_float(row.loss + row.rate),
            ];
            let nan = format_float(f64::NAN);
            match row.found {
                Ok(res) => {
                    let (minus, plus) = match res.peaks.as_slice() {
                        [a, b] => (Some(*a), Some(*b)),
                        [a] => (Some(*a), None),
                        _ => (None, None),
                    };
                    let pick = |p: Option<(f64, f64)>, f: fn((f64, f64)) -> f64| p.map_or(nan.clone(), |p| format_float(f(p)));
                    cells.extend([
                        pick(minus, |p| p.0),
                        pick(plus, |p| p.0),
                        pick(minus, |p| p.1),
                        pick(plus, |p| p.1),
                        res.separation().map_or(nan.clone(), format_float),
                        res.depth_difference().map_or(nan.clone(), format_float),
                        res.peaks.len().to_string(),
                        format_float(row.law),
                        "ok".into(),
                    ]);
                    if let (Some(sep), Some(d)) = (res.separation(), res.depth_difference()) {
                        let x = match quantity {
                            Some(SweepQuantity::Coupling) => row.coupling,
                            Some(_) => row.loss + row.rate,
                            None => v,
                        };
                        curve.push((x, if quantity == Some(SweepQuantity::Coupling) { sep } else { d }));
                    }
                }
                Err(e) => {
                    log::error!("series {:?}, sweep value {v}: {e}", s.label);
                    table.sentinel_rows += 1;
                    cells.extend(std::iter::repeat_n(nan.clone(), 6));
                    cells.push("0".into());
                    cells.push(format_float(row.law));
                    cells.push(e.to_string());
                }
            }
            table.push(cells);
        }
        curves.push(Curve {
            label: s.label.clone(),
            points: curve,
        });
    }
    let (x_label, y_label) = match quantity {
        Some(SweepQuantity::Coupling) => ("J / Γ₀", "Δ_peak / Γ₀"),
        _ => ("(γ + Γ) / Γ₀", "D"),
    };
    Ok(RunTables {
        tables: vec![table],
        figure: Figure {
            title: config.name.clone(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            curves,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, y) = golden_section_max(|x| Ok(3.0 - (x - 1.234).powi(2)), 0.0, 2.0, 1e-9).unwrap();
        assert!((x - 1.234).abs() < 1e-7);
        assert!((y - 3.0).abs() < 1e-15);
    }

    #[test]
    fn finds_two_strongest_bumps() {
        let f = |x: f64| Ok((-(x + 3.0f64).powi(2)).exp() + 0.5 * (-(x - 4.0f64).powi(2)).exp() + 0.1 * (-(x - 8.0f64).powi(2)).exp());
        let window = PeakSearchSpec { start: -10.0, stop: 10.0, points: 201 };
        let r = find_resonances(f, &window).unwrap();
        assert_eq!(r.peaks.len(), 2);
        assert!((r.peaks[0].0 + 3.0).abs() < 1e-4);
        assert!((r.peaks[1].0 - 4.0).abs() < 1e-4);
        assert!(r.depth_difference().unwrap() < 0.0);
        let single = find_resonances(|x: f64| Ok(-(x * x)), &window).unwrap();
        assert_eq!(single.peaks.len(), 1);
        assert!(single.separation().is_none());
    }
}
