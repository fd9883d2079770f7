use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cavex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| if x.is_empty() { f64::NAN } else { x.parse().unwrap() }).collect())
        .collect();
    (header, rows)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn zero_amplitude_gives_dark_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[pulse]\namplitude_pi = 0.0\n[phonon]\nenabled = false\n");
    let out = cavex(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("trajectory.csv"));
    assert_eq!(header, ["t_ps", "rho_ee", "photon_number", "sx", "sy", "sz", "field_re", "field_im"]);
    assert!(rows.len() > 100);
    for r in &rows {
        assert_eq!([r[1], r[2], r[3], r[4], r[6], r[7]], [0.0; 6]);
        assert_eq!(r[5], -1.0);
    }
    assert_eq!(summary(dir.path())["pi_e"], 0.0);
    assert!(!dir.path().join("trajectory.json").exists());
}

#[test]
fn csv_numbers_have_nine_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[pulse]\namplitude_pi = 5.0\n[phonon]\nenabled = false\n");
    let out = cavex(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    for field in text.lines().nth(50).unwrap().split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 9, "{field}");
    }
    assert!(dir.path().join("trajectory.json").exists());
}

#[test]
fn ideal_pi_pulse_inverts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let body = |a: f64| {
        format!(
            "[pulse]\nlaser_detuning_GHz = 0.0\namplitude_pi = {a}\n\
             [system]\ng_GHz = 0.0\nkappa_GHz = 2000.0\nexcitation_detuning_GHz = 0.0\n\
             [phonon]\nenabled = false\n"
        )
    };
    // measure the filter's area transfer, then rescale to a pi pulse on the emitter
    let cfg = write(dir.path(), "probe.toml", &body(1.0));
    assert!(cavex(&["simulate", "--config", &cfg, "--out", d]).status.success());
    let area = summary(dir.path())["pulse_area_pi"].as_f64().unwrap();
    let cfg = write(dir.path(), "pi.toml", &body(1.0 / area));
    assert!(cavex(&["simulate", "--config", &cfg, "--out", d]).status.success());
    let s = summary(dir.path());
    assert!((s["pulse_area_pi"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((s["max_rho_ee"].as_f64().unwrap() - 1.0).abs() < 1e-3, "{s}");
}

#[test]
fn summary_round_trips_through_the_config_schema() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cfg = write(dir.path(), "c.toml", "[pulse]\namplitude_pi = 8.0\n[phonon]\nenabled = false\n");
    assert!(cavex(&["simulate", "--config", &cfg, "--out", d]).status.success());
    let first = summary(dir.path());
    let config: cavex_core::config::RunConfig = serde_json::from_value(first["config"].clone()).unwrap();
    config.validate().unwrap();
    let again = write(dir.path(), "again.toml", &config.to_toml_string());
    assert!(cavex(&["simulate", "--config", &again, "--out", d]).status.success());
    let second = summary(dir.path());
    for key in ["pi_e", "beta_c", "eta_c", "pulse_area_pi", "config_hash"] {
        assert_eq!(first[key], second[key], "{key}");
    }
}

#[test]
fn seed_check_dumps_si_units() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[pulse]\namplitude_pi = 0.0\n[system]\nkappa_GHz = 25.0\n");
    let out = cavex(&["convergence", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--seed-check"]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    let kappa: f64 = err
        .lines()
        .find_map(|l| l.strip_prefix("kappa = "))
        .and_then(|v| v.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((kappa - 2.0 * std::f64::consts::PI * 25e9).abs() < 1.0);
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let bad = write(dir.path(), "bad.toml", "[pulse]\nt_p_ps = -1.0\n");
    let out = cavex(&["simulate", "--config", &bad, "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pulse.t_p_ps"));
    let unknown = write(dir.path(), "unknown.toml", "[pulse]\nwidth = 1.0\n");
    assert_eq!(cavex(&["simulate", "--config", &unknown, "--out", d]).status.code(), Some(2));
    let empty = write(
        dir.path(),
        "empty.toml",
        "reduce = \"pi_e\"\n[axis1]\npath = \"pulse.amplitude_pi\"\nvalues = []\n",
    );
    assert_eq!(cavex(&["sweep", &empty, "--out", d]).status.code(), Some(2));
    assert_eq!(cavex(&["bloch", "--mechanism", "chirped", "--out", d]).status.code(), Some(2));
}

#[test]
fn bloch_resonant_full_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = cavex(&["bloch", "--mechanism", "resonant", "--areas", "1,2", "--out", d, "--format", "csv"]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("bloch.csv"));
    assert_eq!(header, ["area_pi", "input_area_pi", "sx", "sy", "sz", "rho_ee"]);
    assert!((rows[0][5] - 1.0).abs() < 1e-3);
    assert!(rows[1][5] < 1e-3);
    assert!(dir.path().join("bloch_path_001.csv").exists());
}

#[test]
fn sweep_writes_long_map_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let spec = write(
        dir.path(),
        "s.toml",
        "reduce = \"pi_e\"\n\
         [axis1]\npath = \"pulse.laser_detuning_GHz\"\nvalues = [80.0, 90.0]\n\
         [axis2]\npath = \"pulse.amplitude_pi\"\nvalues = { start = 0.0, stop = 10.0, n = 3 }\n\
         [base.phonon]\nenabled = false\n",
    );
    let out = cavex(&["sweep", &spec, "--out", d, "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("map.csv"));
    assert_eq!(&header[..3], ["pulse.laser_detuning_GHz", "pulse.amplitude_pi", "value"]);
    assert_eq!(rows.len(), 6);
    assert_eq!((rows[0][0], rows[0][1], rows[0][2]), (80.0, 0.0, 0.0));
    assert_eq!((rows[5][0], rows[5][1]), (90.0, 10.0));
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["metadata"]["workers"], 2);
    assert_eq!(meta["shape"], serde_json::json!([2, 3]));
    assert_eq!(meta["metadata"]["spec_hash"].as_str().unwrap().len(), 64);
    let (_, maxima) = read_csv(&dir.path().join("row_maxima.csv"));
    assert_eq!(maxima.len(), 2);
}

#[test]
fn convergence_of_a_weak_drive() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cfg = write(dir.path(), "c.toml", "[pulse]\namplitude_pi = 0.5\n[solver]\nn_max = 1\n");
    let out = cavex(&["convergence", "--config", &cfg, "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("convergence.json")).unwrap()).unwrap();
    assert!(r["delta"].as_f64().unwrap() < 1e-4);

    let strong = write(dir.path(), "s.toml", "[pulse]\namplitude_pi = 30.0\n[solver]\nn_max = 1\n");
    let out = cavex(&["convergence", "--config", &strong, "--out", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_max = 1"));
}
