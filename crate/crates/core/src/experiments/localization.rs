//! Localization length from the growth of `⟨ln T⟩` with chain length.
//!
//! Each sweep point runs a disorder ensemble on a periodic base chain of
//! `max(n_values)` dimers, fits `⟨ln T⟩ = a + s·n` and reports `ξ = −1/s`.
//! Without a `disorder` block the periodic chain itself is fitted.

use crate::chiral::analytic_disorder_stats;
use crate::disorder::{estimate_localization, ensemble_ln_t, DisorderModel, DisorderUnits, EnsembleResult, EnsembleSpec, LocalizationEstimate};
use crate::error::Result;
use crate::model::{build_periodic_chain, Coupling, CouplingParams, Waveguide};
use crate::quadrature::QuadratureOptions;

use super::config::{default_n_values, ExperimentConfig, ResolvedSeries, SweepQuantity};
use super::output::{format_float, RunTables, Table};
use super::plot::{Curve, Figure};
use super::ExperimentError;

/// Columns of the localization CSV. `slope_per_dimer` is `d⟨ln T⟩/dn`; the
/// `analytic_*` columns are filled for chiral chains only.
pub const LOCALIZATION_HEADER: [&str; 14] = [
    "series",
    "sweep_value",
    "delta_Gamma0",
    "sigma",
    "J_Gamma0",
    "xi_dimers",
    "xi_stderr_dimers",
    "slope_per_dimer",
    "slope_stderr",
    "intercept",
    "r_squared",
    "analytic_xi_dimers",
    "analytic_slope_per_dimer",
    "status",
];

/// Columns of the companion `<name>_lnT.csv` with the fitted points.
pub const LN_T_HEADER: [&str; 6] = ["series", "sweep_value", "n_dimers", "mean_ln_T", "stderr_ln_T", "mean_T"];

struct Point {
    delta: f64,
    sigma: f64,
    coupling: f64,
    outcome: Result<(EnsembleResult, LocalizationEstimate, Option<f64>)>,
}

fn ensemble_setup(config: &ExperimentConfig) -> (DisorderModel, u64, u64, Vec<usize>) {
    match &config.disorder {
        Some(d) => (d.model(), d.realizations, d.seed, d.n_values.clone()),
        None => (
            DisorderModel {
                couple_j_to_length: false,
                ..DisorderModel::dimer_length(0.0, DisorderUnits::LengthNm)
            },
            1,
            0,
            default_n_values(),
        ),
    }
}

fn compute(
    config: &ExperimentConfig,
    series: &ResolvedSeries,
    quantity: Option<SweepQuantity>,
    value: f64,
) -> Point {
    let (mut model, mut realizations, seed, n_values) = ensemble_setup(config);
    if series.periodic {
        model.sigma = 0.0;
        realizations = 1;
    }
    let mut params: CouplingParams = series.params;
    let mut delta = config.delta.unwrap_or(f64::NAN);
    let length = config.geometry.length_nm;
    let mut prepare = || -> Result<()> {
        match quantity {
            Some(SweepQuantity::Delta) => delta = value,
            Some(SweepQuantity::Sigma) if !series.periodic => model.sigma = value,
            Some(SweepQuantity::Coupling) => params.coupling = Coupling::Fixed(value),
            Some(SweepQuantity::CouplingLength) => {
                params.coupling = Coupling::Fixed(params.coupling.at_length(value, params.lambda_nm)?)
            }
            _ => {}
        }
        Ok(())
    };
    let prepared = prepare();
    let coupling = params.coupling.at_length(length, params.lambda_nm).unwrap_or(f64::NAN);
    let sigma = model.sigma;
    let outcome = prepared.and_then(|_| {
        let max_n = *n_values.iter().max().expect("validated non-empty");
        let base = build_periodic_chain(max_n, length, config.geometry.separation_nm)?;
        let spec = EnsembleSpec {
            model,
            params,
            waveguide: series.waveguide,
            base,
            n_values,
            realizations,
            seed,
            delta,
        };
        let ensemble = ensemble_ln_t(&spec)?;
        if ensemble.floored > 0 {
            log::warn!(
                "series {:?}: {} realizations hit the ln T floor",
                series.label,
                ensemble.floored
            );
        }
        let estimate = estimate_localization(&ensemble)?;
        let analytic = match series.waveguide {
            Waveguide::Chiral => Some(
                analytic_disorder_stats(&params, &model, length, delta, 1, &QuadratureOptions::default())?
                    .mean_ln_abs_tau_sq,
            ),
            Waveguide::Bidirectional => None,
        };
        Ok((ensemble, estimate, analytic))
    });
    Point {
        delta,
        sigma,
        coupling,
        outcome,
    }
}

fn ln_t_name(config: &ExperimentConfig) -> String {
    let csv = config.csv_name();
    match csv.strip_suffix(".csv") {
        Some(stem) => format!("{stem}_lnT.csv"),
        None => format!("{csv}_lnT.csv"),
    }
}

pub fn run_localization(config: &ExperimentConfig) -> std::result::Result<RunTables, ExperimentError> {
    let (quantity, grid) = match &config.sweep {
        None => (None, vec![f64::NAN]),
        Some(s) => match s.quantity {
            SweepQuantity::Delta | SweepQuantity::Sigma | SweepQuantity::Coupling | SweepQuantity::CouplingLength => {
                (Some(s.quantity), s.grid()?)
            }
            other => {
                return Err(ExperimentError::Validation(format!(
                    "localization sweeps delta, sigma, J or j_length, not {}",
                    other.column()
                )))
            }
        },
    };
    if quantity != Some(SweepQuantity::Delta) {
        config.fixed_delta()?;
    }
    match quantity {
        Some(SweepQuantity::Sigma) => {
            let Some(d) = &config.disorder else {
                return Err(ExperimentError::Validation("a sigma sweep needs a disorder block".into()));
            };
            for &v in &grid {
                DisorderModel { sigma: v, ..d.model() }
                    .validate()
                    .map_err(ExperimentError::from_validation)?;
            }
        }
        Some(SweepQuantity::CouplingLength) if grid.iter().any(|v| !(*v > 0.0)) => {
            return Err(ExperimentError::Validation("j_length values must be positive".into()));
        }
        Some(SweepQuantity::Delta) if grid.iter().any(|v| !v.is_finite()) => {
            return Err(ExperimentError::Validation("delta values must be finite".into()));
        }
        _ => {}
    }
    let (_, _, _, n_values) = ensemble_setup(config);
    if n_values.is_empty() || n_values.contains(&0) || n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::Validation(
            "n_values must be strictly increasing positive dimer counts".into(),
        ));
    }
    if n_values.len() < 3 {
        return Err(ExperimentError::Validation("n_values needs at least 3 entries for a fit".into()));
    }

    let series = config.resolve_series()?;
    let mut table = Table::new(config.csv_name(), &LOCALIZATION_HEADER);
    let mut ln_table = Table::new(ln_t_name(config), &LN_T_HEADER);
    let mut curves = Vec::new();
    let nan = format_float(f64::NAN);
    for s in &series {
        let mut curve = Vec::new();
        for &v in &grid {
            let point = compute(config, s, quantity, v);
            let sweep_cell = if quantity.is_some() { format_float(v) } else { String::new() };
            let mut cells = vec![
                s.label.clone(),
                sweep_cell.clone(),
                format_float(point.delta),
                format_float(point.sigma),
                format_float(point.coupling),
            ];
            match point.outcome {
                Ok((ensemble, fit, analytic)) => {
                    let analytic_xi = analytic.map(|a| if a < 0.0 { -1.0 / a } else { f64::INFINITY });
                    cells.extend([
                        format_float(fit.xi),
                        format_float(fit.xi_stderr),
                        format_float(fit.slope),
                        format_float(fit.slope_stderr),
                        format_float(fit.intercept),
                        format_float(fit.r_squared),
                        analytic_xi.map_or(String::new(), format_float),
                        analytic.map_or(String::new(), format_float),
                        "ok".into(),
                    ]);
                    for (i, &n) in ensemble.n_values.iter().enumerate() {
                        ln_table.push(vec![
                            s.label.clone(),
                            sweep_cell.clone(),
                            n.to_string(),
                            format_float(ensemble.mean_ln_t[i]),
                            format_float(ensemble.stderr_ln_t[i]),
                            format_float(ensemble.mean_t[i]),
                        ]);
                        if quantity.is_none() {
                            curve.push((n as f64, ensemble.mean_ln_t[i]));
                        }
                    }
                    if quantity.is_some() {
                        curve.push((v, fit.xi));
                    }
                }
                Err(e) => {
                    log::error!("series {:?}, sweep value {v}: {e}", s.label);
                    table.sentinel_rows += 1;
                    cells.extend(std::iter::repeat_n(nan.clone(), 6));
                    cells.extend([String::new(), String::new(), e.to_string()]);
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
        None => ("dimers n".to_string(), "⟨ln T⟩".to_string()),
        Some(q) => (q.column().to_string(), "ξ (dimers)".to_string()),
    };
    Ok(RunTables {
        tables: vec![table, ln_table],
        figure: Figure {
            title: config.name.clone(),
            x_label,
            y_label,
            curves,
        },
    })
}
