use std::path::Path;
use std::process::{Command, Output};

use dmspec_cli::commands::{BandsReport, GapsReport, IdsReport, RotationReport};

fn dmspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

const BERNOULLI: &str = r#"{"type":"step","breaks":[0,0.5],"values":[5,0]}"#;

#[test]
fn free_spectrum_is_one_band() {
    let text = stdout(&dmspec(&["spectrum", "--max-period", "5"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,lo,hi");
    assert_eq!(lines.len(), 2);
    let fields: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((fields[1] + 2.0).abs() < 1e-8 && (fields[2] - 2.0).abs() < 1e-8);
}

#[test]
fn constant_potential_bands_are_shifted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"type":"trigpoly","const":1.5}"#);
    let text = stdout(&dmspec(&["bands", "--config", &cfg, "--max-period", "3", "--format", "json"]));
    let report: BandsReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.orbits.len(), 4);
    for o in &report.orbits {
        assert!((o.bands[0].lo + 0.5).abs() < 1e-8);
        assert!((o.bands.last().unwrap().hi - 3.5).abs() < 1e-8);
    }
    assert_eq!(report.spectrum.bands.len(), 1);
}

#[test]
fn csv_and_json_carry_identical_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "b.json", BERNOULLI);
    let json = stdout(&dmspec(&["gaps", "--config", &cfg, "--max-period", "6", "--format", "json"]));
    let csv = stdout(&dmspec(&["gaps", "--config", &cfg, "--max-period", "6"]));
    let report: GapsReport = serde_json::from_str(&json).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), report.gaps.len());
    assert!(!rows.is_empty());
    for (row, gap) in rows.iter().zip(&report.gaps) {
        assert_eq!(row[0].parse::<f64>().unwrap(), gap.lo);
        assert_eq!(row[1].parse::<f64>().unwrap(), gap.hi);
        assert_eq!(row[2].parse::<f64>().unwrap(), gap.length);
    }
}

#[test]
fn json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "b.json", BERNOULLI);
    let json = stdout(&dmspec(&["bands", "--config", &cfg, "--max-period", "4", "--format", "json"]));
    let report: BandsReport = serde_json::from_str(&json).unwrap();
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, json);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "i.json",
        r#"{"type":"trigpoly","cos":[1.0],"seed":4,"command":{"grid":{"points":101},"samples":16,"truncation_size":128}}"#,
    );
    let one = stdout(&dmspec(&["ids", "--config", &cfg, "--threads", "1"]));
    let four = stdout(&dmspec(&["ids", "--config", &cfg, "--threads", "4"]));
    assert_eq!(one, four);
    let other_seed = stdout(&dmspec(&["ids", "--config", &cfg, "--seed", "5"]));
    assert_ne!(one, other_seed);
}

#[test]
fn ids_output_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.json");
    let plot = dir.path().join("k.svg");
    let cfg = write_config(
        dir.path(),
        "free.json",
        r#"{"type":"trigpoly","command":{"grid":{"lo":-3,"hi":3,"points":61}}}"#,
    );
    stdout(&dmspec(&[
        "ids",
        "--config",
        &cfg,
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]));
    let report: IdsReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.table.energies.len(), 61);
    assert_eq!(report.table.k_values[0], 0.0);
    assert_eq!(report.table.k_values[60], 1.0);
    assert!((report.table.k_values[30] - 0.5).abs() < 0.02);
    let svg = std::fs::read_to_string(&plot).unwrap();
    assert!(svg.contains("<polyline") && svg.ends_with("</svg>\n"));
}

#[test]
fn band_plot_has_a_row_per_period() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("b.svg");
    let cfg = write_config(dir.path(), "b.json", BERNOULLI);
    stdout(&dmspec(&["bands", "--config", &cfg, "--max-period", "4", "--plot", plot.to_str().unwrap()]));
    let svg = std::fs::read_to_string(&plot).unwrap();
    for p in 1..=4 {
        assert!(svg.contains(&format!(">p = {p}<")));
    }
    assert!(svg.contains(">union<"));
}

#[test]
fn rotation_table() {
    let text = stdout(&dmspec(&[
        "rotation", "--energy", "-3", "--energy", "0", "--energy", "3", "--format", "json",
    ]));
    let report: RotationReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert!((report.rows[0].value.unwrap() - 1.0).abs() < 0.01);
    assert!(!report.rows[1].hyperbolic);
    assert!(report.rows[2].value.unwrap().abs() < 0.01);

    let csv = stdout(&dmspec(&["rotation", "--energy", "0"]));
    assert!(csv.lines().nth(1).unwrap().starts_with("0.0,false,,,,"));
}

#[test]
fn verify_passes_for_free_and_bernoulli() {
    let out = dmspec(&["verify", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "b.json", BERNOULLI);
    let out = dmspec(&["verify", "--config", &cfg, "--format", "json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("label 0.50"));
}

#[test]
fn verify_reports_failures_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // strong coupling still has visible gaps at period 4
    let cfg = write_config(dir.path(), "c.json", r#"{"type":"trigpoly","cos":[4.0]}"#);
    let out = dmspec(&["verify", "--config", &cfg, "--max-period", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("connected,false")));
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(dmspec(&["spectrum", "--bogus"]).status.code(), Some(2));
    assert_eq!(dmspec(&[]).status.code(), Some(2));
    assert_eq!(dmspec(&["spectrum", "--config", "/nonexistent.json"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", r#"{"type":"step","breaks":[0.7,0.2],"values":[1,2]}"#);
    assert_eq!(dmspec(&["spectrum", "--config", &bad]).status.code(), Some(2));
    assert_eq!(dmspec(&["spectrum", "--max-period", "200"]).status.code(), Some(2));
    assert_eq!(dmspec(&["ids", "--size", "4"]).status.code(), Some(2));
}
