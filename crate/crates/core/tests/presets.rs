use std::fs;
use std::path::PathBuf;

use dimerchain::experiments::{run, Command, ExperimentConfig, RunOptions, SweepQuantity};

fn presets() -> Vec<(String, ExperimentConfig)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("presets");
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            (stem, ExperimentConfig::load(&p).unwrap())
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn every_figure_has_a_valid_preset() {
    let all = presets();
    let names: Vec<&str> = all.iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "fig2a", "fig2b", "fig2c", "fig3a", "fig3a_inset", "fig3b", "fig4", "fig5a", "fig5b", "fig5c", "fig6a", "fig6b",
        "fig6c", "fig7a", "fig7b", "fig8a", "fig8b", "fig8c", "fig8d", "fig9a", "fig9b", "fig9c",
    ] {
        assert!(names.contains(&expected), "missing preset {expected}");
    }
    for (stem, config) in &all {
        assert_eq!(&config.name, stem);
        config.validate().unwrap_or_else(|e| panic!("{stem}: {e}"));
        assert!(!config.description.is_empty(), "{stem}");
    }
}

#[test]
fn caption_values_are_kept_literally() {
    let all = presets();
    let get = |name: &str| &all.iter().find(|(n, _)| n == name).unwrap().1;
    let fig4 = get("fig4");
    assert_eq!(fig4.params.waveguide_rate, 11.1033);
    assert_eq!(fig4.disorder.as_ref().unwrap().realizations, 100_000);
    let fig6 = get("fig6a");
    assert_eq!(fig6.series[1].coupling.unwrap().coupling().at_length(32.75, 655.0).unwrap(), 46.2);
    let fig2 = get("fig2a");
    assert_eq!(fig2.params.coupling.coupling().at_length(32.75, 655.0).unwrap(), 46.02);
    assert_eq!(get("fig8d").sweep.as_ref().unwrap().quantity, SweepQuantity::CouplingLength);
}

#[test]
fn fig2a_transmission_dips_deepest_at_resonance_without_coupling() {
    let all = presets();
    let config = &all.iter().find(|(n, _)| n == "fig2a").unwrap().1;
    let dir = tempfile::tempdir().unwrap();
    let options = RunOptions {
        out_dir: dir.path().to_path_buf(),
        ..RunOptions::default()
    };
    let summary = run(Command::Spectrum, config, &options).unwrap();
    assert_eq!(summary.exit_code(), 0);
    let mut reader = csv::Reader::from_path(dir.path().join("fig2a.csv")).unwrap();
    let rows: Vec<(String, f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect();
    let minimum = rows
        .iter()
        .filter(|r| r.0 == "J=0")
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .unwrap();
    assert_eq!(minimum.1, 0.0);
}
