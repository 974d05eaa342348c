//! JSON-configured experiments: detuning spectra, resonance analysis and
//! localization-length sweeps, written as CSV with an optional SVG and a run
//! manifest.
//!
//! The three entry points mirror the `dimerchain` subcommands. Configurations
//! are validated completely before anything is computed or written.

mod config;
mod localization;
mod output;
mod peaks;
mod plot;
mod spectrum;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{
    default_n_values, linspace, CouplingSpec, DisorderSpec, ExperimentConfig, GeometrySpec, OutputSpec,
    ParamsSpec, PeakSearchSpec, ResolvedSeries, SeriesSpec, SweepQuantity, SweepSpec, DEFAULT_DELTA_GRID,
    SCHEMA_VERSION,
};
pub use localization::{run_localization, LOCALIZATION_HEADER, LN_T_HEADER};
pub use output::{format_float, Table};
pub use peaks::{find_resonances, golden_section_max, run_peak_analysis, Resonances, PEAKS_HEADER};
pub use spectrum::{run_spectrum, SPECTRUM_HEADER};

/// Version string recorded in run manifests.
pub const VERSION: &str = env!("DIMERCHAIN_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Compute(#[from] crate::Error),
}

impl ExperimentError {
    pub(crate) fn from_validation(e: crate::Error) -> Self {
        ExperimentError::Validation(e.to_string())
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 1 for invalid input, 3 for I/O failures, 2 for
    /// computation failures that aborted the run.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Validation(_) => 1,
            ExperimentError::Compute(_) => 2,
            ExperimentError::Io { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Peaks,
    Localization,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub plot: bool,
    /// Replaces the configured disorder seed.
    pub seed: Option<u64>,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub rows: usize,
    /// Rows whose computation failed and were written with sentinels.
    pub sentinel_rows: usize,
    pub outputs: Vec<PathBuf>,
}

impl RunSummary {
    /// 0 when every row completed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.sentinel_rows == 0 {
            0
        } else {
            2
        }
    }
}

/// Runs `command` for `config`, writing every artifact under `options.out_dir`.
pub fn run(command: Command, config: &ExperimentConfig, options: &RunOptions) -> Result<RunSummary, ExperimentError> {
    let mut config = config.clone();
    if let (Some(seed), Some(d)) = (options.seed, config.disorder.as_mut()) {
        d.seed = seed;
    }
    config.validate()?;
    let tables = match command {
        Command::Spectrum => spectrum::run_spectrum(&config)?,
        Command::Peaks => peaks::run_peak_analysis(&config)?,
        Command::Localization => localization::run_localization(&config)?,
    };
    output::write_run(command, &config, &tables, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(ExperimentError::Validation("x".into()).exit_code(), 1);
        assert_eq!(ExperimentError::Compute(crate::Error::Domain("x".into())).exit_code(), 2);
        let io = ExperimentError::io(Path::new("/x"), std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), 3);
        assert!(io.to_string().contains("/x"));
    }
}
