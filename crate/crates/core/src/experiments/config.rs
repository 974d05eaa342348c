//! JSON experiment configuration (schema version 1).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bidirectional::Solver;
use crate::disorder::{DisorderModel, DisorderTarget, DisorderUnits};
use crate::model::{build_periodic_chain, ChainGeometry, Coupling, CouplingParams, Waveguide};

use super::ExperimentError;

pub const SCHEMA_VERSION: u32 = 1;

/// Default detuning grid: 801 points over [−100, 100].
pub const DEFAULT_DELTA_GRID: (f64, f64, usize) = (-100.0, 100.0, 801);

/// Default dimer counts for localization fits.
pub fn default_n_values() -> Vec<usize> {
    (1..=10).map(|k| 10 * k).collect()
}

fn default_lambda() -> f64 {
    655.0
}

/// `J` as a number, or a rule: `{"formula": {"prefactor": p}}`,
/// `{"anchored": {"j": j, "length_nm": l}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingSpec {
    Value(f64),
    Rule(Coupling),
}

impl CouplingSpec {
    pub fn coupling(self) -> Coupling {
        match self {
            CouplingSpec::Value(j) => Coupling::Fixed(j),
            CouplingSpec::Rule(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    /// Number of dimers.
    pub dimers: usize,
    pub length_nm: f64,
    pub separation_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    /// Loss rate into non-guided modes.
    pub gamma: f64,
    /// Decay rate into each guided mode.
    #[serde(rename = "Gamma")]
    pub waveguide_rate: f64,
    #[serde(rename = "J")]
    pub coupling: CouplingSpec,
    #[serde(default = "default_lambda")]
    pub lambda_qd_nm: f64,
}

/// Per-curve overrides of the base parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, rename = "Gamma", skip_serializing_if = "Option::is_none")]
    pub waveguide_rate: Option<f64>,
    #[serde(default, rename = "J", skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveguide: Option<Waveguide>,
    /// Ignore the disorder block for this curve (periodic reference).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub periodic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepQuantity {
    /// Detuning Δ.
    #[serde(rename = "delta")]
    Delta,
    /// Number of dimers.
    #[serde(rename = "n")]
    Dimers,
    /// Disorder strength, in the disorder block's units.
    #[serde(rename = "sigma")]
    Sigma,
    /// Fixed intra-dimer coupling.
    #[serde(rename = "J")]
    Coupling,
    /// Coupling taken from the `J` rule at this dimer length (nm); the
    /// geometry itself is unchanged.
    #[serde(rename = "j_length")]
    CouplingLength,
    /// Waveguide decay rate.
    #[serde(rename = "Gamma")]
    WaveguideRate,
    /// Loss rate.
    #[serde(rename = "gamma")]
    Loss,
}

impl SweepQuantity {
    pub fn column(self) -> &'static str {
        match self {
            SweepQuantity::Delta => "delta_Gamma0",
            SweepQuantity::Dimers => "n_dimers",
            SweepQuantity::Sigma => "sigma",
            SweepQuantity::Coupling => "J_Gamma0",
            SweepQuantity::CouplingLength => "j_length_nm",
            SweepQuantity::WaveguideRate => "Gamma_Gamma0",
            SweepQuantity::Loss => "gamma_Gamma0",
        }
    }
}

/// Grid of sweep values: either `values`, or `start`/`stop`/`points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub quantity: SweepQuantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>, ExperimentError> {
        let invalid = |m: String| Err(ExperimentError::Validation(m));
        let values = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => linspace(a, b, n),
            (None, None, None, None) if self.quantity == SweepQuantity::Delta => {
                let (a, b, n) = DEFAULT_DELTA_GRID;
                linspace(a, b, n)
            }
            _ => {
                return invalid(format!(
                    "sweep over {:?} needs either `values` or all of `start`, `stop`, `points`",
                    self.quantity
                ))
            }
        };
        if values.is_empty() {
            return invalid("sweep grid is empty".into());
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return invalid(format!("sweep value {v} is not finite"));
        }
        Ok(values)
    }
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    pub target: DisorderTarget,
    pub sigma: f64,
    pub units: DisorderUnits,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couple_j_to_length: Option<bool>,
    pub realizations: u64,
    pub seed: u64,
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
}

impl DisorderSpec {
    pub fn model(&self) -> DisorderModel {
        let couple = self
            .couple_j_to_length
            .unwrap_or(self.target == DisorderTarget::DimerLength);
        DisorderModel {
            target: self.target,
            mean: self.mean,
            sigma: self.sigma,
            units: self.units,
            couple_j_to_length: couple,
        }
    }
}

/// Detuning window scanned when locating resonances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakSearchSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for PeakSearchSpec {
    fn default() -> Self {
        Self {
            start: -150.0,
            stop: 150.0,
            points: 3001,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Main CSV file name; defaults to `<name>.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub waveguide: Waveguide,
    pub geometry: GeometrySpec,
    pub params: ParamsSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Detuning used when it is not the swept quantity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSpec>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peaks: Option<PeakSearchSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// One curve of an experiment with every parameter resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSeries {
    pub label: String,
    pub waveguide: Waveguide,
    pub params: CouplingParams,
    pub geometry: ChainGeometry,
    pub periodic: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let config: Self = serde_json::from_str(text)
            .map_err(|e| ExperimentError::Validation(format!("config: {e}")))?;
        if config.schema != SCHEMA_VERSION {
            return Err(ExperimentError::Validation(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                config.schema
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn csv_name(&self) -> String {
        self.output.csv.clone().unwrap_or_else(|| format!("{}.csv", self.name))
    }

    pub fn svg_name(&self) -> String {
        self.output.svg.clone().unwrap_or_else(|| format!("{}.svg", self.name))
    }

    pub fn manifest_name(&self) -> String {
        self.output
            .manifest
            .clone()
            .unwrap_or_else(|| format!("{}.manifest.json", self.name))
    }

    pub fn fixed_delta(&self) -> Result<f64, ExperimentError> {
        match self.delta {
            Some(d) if d.is_finite() => Ok(d),
            Some(d) => Err(ExperimentError::Validation(format!("delta must be finite, got {d}"))),
            None => Err(ExperimentError::Validation(
                "`delta` is required when the detuning is not swept".into(),
            )),
        }
    }

    /// Checks everything that does not depend on the command.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Validation(m));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return bad(format!("name {:?} must be a non-empty file-name stem", self.name));
        }
        for name in [self.csv_name(), self.svg_name(), self.manifest_name()] {
            if name.is_empty() || Path::new(&name).components().count() != 1 {
                return bad(format!("output name {name:?} must be a plain file name"));
            }
        }
        let mut labels = std::collections::HashSet::new();
        for s in &self.series {
            if !labels.insert(s.label.as_str()) {
                return bad(format!("duplicate series label {:?}", s.label));
            }
        }
        self.resolve_series()?;
        if let Some(d) = &self.disorder {
            d.model().validate().map_err(ExperimentError::from_validation)?;
            if d.realizations == 0 {
                return bad("disorder.realizations must be at least 1".into());
            }
        }
        if let Some(p) = &self.peaks {
            if !(p.start < p.stop) || p.points < 3 {
                return bad("peaks window needs start < stop and at least 3 points".into());
            }
        }
        Ok(())
    }

    /// Expands `series` (or the base parameters alone) into concrete runs.
    pub fn resolve_series(&self) -> Result<Vec<ResolvedSeries>, ExperimentError> {
        let base = SeriesSpec {
            label: self.name.clone(),
            gamma: None,
            waveguide_rate: None,
            coupling: None,
            dimers: None,
            waveguide: None,
            periodic: false,
        };
        let specs: Vec<&SeriesSpec> = if self.series.is_empty() {
            vec![&base]
        } else {
            self.series.iter().collect()
        };
        specs
            .into_iter()
            .map(|s| {
                let waveguide = s.waveguide.unwrap_or(self.waveguide);
                let params = CouplingParams::for_waveguide(
                    waveguide,
                    s.waveguide_rate.unwrap_or(self.params.waveguide_rate),
                    s.gamma.unwrap_or(self.params.gamma),
                    self.params.lambda_qd_nm,
                    s.coupling.unwrap_or(self.params.coupling).coupling(),
                )
                .map_err(ExperimentError::from_validation)?;
                let geometry = build_periodic_chain(
                    s.dimers.unwrap_or(self.geometry.dimers),
                    self.geometry.length_nm,
                    self.geometry.separation_nm,
                )
                .map_err(ExperimentError::from_validation)?;
                params.couplings(&geometry).map_err(ExperimentError::from_validation)?;
                Ok(ResolvedSeries {
                    label: s.label.clone(),
                    waveguide,
                    params,
                    geometry,
                    periodic: s.periodic,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1,
        "name": "t",
        "waveguide": "chiral",
        "geometry": {"dimers": 1, "length_nm": 32.75, "separation_nm": 98.25},
        "params": {"gamma": 6.86, "Gamma": 11.103, "J": 46.02}
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.params.lambda_qd_nm, 655.0);
        assert_eq!(c.params.coupling, CouplingSpec::Value(46.02));
        assert_eq!(c.csv_name(), "t.csv");
        c.validate().unwrap();
        let s = c.resolve_series().unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].params.is_chiral());
    }

    #[test]
    fn coupling_rules_parse() {
        let f: CouplingSpec = serde_json::from_str(r#"{"formula": {"prefactor": 1.5}}"#).unwrap();
        assert_eq!(f.coupling(), Coupling::Formula { prefactor: 1.5 });
        let a: CouplingSpec = serde_json::from_str(r#"{"anchored": {"j": 46.2, "length_nm": 32.75}}"#).unwrap();
        assert_eq!(a.coupling(), Coupling::Anchored { j: 46.2, length_nm: 32.75 });
    }

    #[test]
    fn unknown_keys_and_schema_are_rejected() {
        let extra = MINIMAL.replace("\"name\": \"t\",", "\"name\": \"t\", \"colour\": 3,");
        assert!(matches!(ExperimentConfig::from_json(&extra), Err(ExperimentError::Validation(_))));
        let v2 = MINIMAL.replace("\"schema\": 1", "\"schema\": 2");
        assert!(matches!(ExperimentConfig::from_json(&v2), Err(ExperimentError::Validation(_))));
        let nested = MINIMAL.replace("\"dimers\": 1,", "\"dimers\": 1, \"atoms\": 2,");
        assert!(ExperimentConfig::from_json(&nested).is_err());
    }

    #[test]
    fn invalid_values_fail_validation() {
        let neg = MINIMAL.replace("\"gamma\": 6.86", "\"gamma\": -1");
        assert!(ExperimentConfig::from_json(&neg).unwrap().validate().is_err());
        let zero = MINIMAL.replace("\"dimers\": 1", "\"dimers\": 0");
        assert!(ExperimentConfig::from_json(&zero).unwrap().validate().is_err());
        let path = MINIMAL.replace("\"name\": \"t\"", "\"name\": \"../t\"");
        assert!(ExperimentConfig::from_json(&path).unwrap().validate().is_err());
    }

    #[test]
    fn grids() {
        let s = SweepSpec { quantity: SweepQuantity::Delta, start: None, stop: None, points: None, values: None };
        let g = s.grid().unwrap();
        assert_eq!(g.len(), 801);
        assert_eq!((g[0], g[400], g[800]), (-100.0, 0.0, 100.0));
        let empty = SweepSpec { values: Some(vec![]), ..s.clone() };
        assert!(empty.grid().is_err());
        let partial = SweepSpec { start: Some(0.0), ..s.clone() };
        assert!(partial.grid().is_err());
        let j = SweepSpec { quantity: SweepQuantity::Coupling, ..s };
        assert!(j.grid().is_err());
    }
}
