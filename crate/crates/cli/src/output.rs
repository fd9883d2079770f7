//! CSV and JSON writers. Numbers in CSV files use scientific notation with
//! nine significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use cavex_core::config::{OutputFormat, RunConfig};
use cavex_core::experiment::{BlochPoint, Simulation};
use cavex_core::sweep::{SweepResult, SweepSpec};
use cavex_core::units::{rad_s_to_ghz, s_to_ps};

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.8e}")
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(num).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

const TRAJECTORY_COLUMNS: [&str; 8] = ["t_ps", "rho_ee", "photon_number", "sx", "sy", "sz", "field_re", "field_im"];

pub fn write_simulation(
    dir: &Path,
    formats: &[OutputFormat],
    config: &RunConfig,
    sim: &Simulation,
) -> std::io::Result<()> {
    let tr = &sim.trajectory;
    let rows = || {
        tr.grid.times().enumerate().map(|(i, t)| {
            let e = sim.field.at_or_zero(t);
            let s = sim.bloch[i];
            vec![
                s_to_ps(t),
                tr.excited_pop[i],
                tr.photon_number[i],
                s[0],
                s[1],
                s[2],
                rad_s_to_ghz(e.re),
                rad_s_to_ghz(e.im),
            ]
        })
    };
    for f in formats {
        match f {
            OutputFormat::Csv => write_csv(&dir.join("trajectory.csv"), &TRAJECTORY_COLUMNS, rows())?,
            OutputFormat::Json => {
                let table: Vec<Vec<f64>> = rows().collect();
                write_json(
                    &dir.join("trajectory.json"),
                    &json!({ "columns": TRAJECTORY_COLUMNS, "rows": table }),
                )?
            }
        }
    }
    let m = sim.outcome.merit;
    write_json(
        &dir.join("summary.json"),
        &json!({
            "pi_e": m.pi_e,
            "beta_c": m.beta_c,
            "eta_c": m.eta_c,
            "pulse_area_pi": sim.outcome.pulse_area_pi,
            "max_rho_ee": m.max_excited_pop,
            "config_hash": config.hash(),
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
        }),
    )
}

pub fn write_bloch(dir: &Path, formats: &[OutputFormat], points: &[BlochPoint]) -> std::io::Result<()> {
    for f in formats {
        match f {
            OutputFormat::Csv => {
                write_csv(
                    &dir.join("bloch.csv"),
                    &["area_pi", "input_area_pi", "sx", "sy", "sz", "rho_ee"],
                    points.iter().map(|p| {
                        let [x, y, z] = p.endpoint;
                        vec![p.area_pi, p.input_area_pi, x, y, z, p.rho_ee]
                    }),
                )?;
                for (k, p) in points.iter().enumerate() {
                    write_csv(
                        &dir.join(format!("bloch_path_{k:03}.csv")),
                        &["t_ps", "sx", "sy", "sz"],
                        p.path.iter().map(|(t, s)| vec![s_to_ps(*t), s[0], s[1], s[2]]),
                    )?;
                }
            }
            OutputFormat::Json => write_json(&dir.join("bloch.json"), &points)?,
        }
    }
    Ok(())
}

pub fn write_sweep(dir: &Path, formats: &[OutputFormat], spec: &SweepSpec, result: &SweepResult) -> std::io::Result<()> {
    let axis2 = result.axis2.as_ref().map_or("", |a| a.path.as_str());
    for f in formats {
        match f {
            OutputFormat::Csv => {
                let mut k = 0;
                write_csv(
                    &dir.join("map.csv"),
                    &[&result.axis1.path, axis2, "value", "pi_e", "eta_c", "pulse_area_pi", "best_amplitude_pi"],
                    result.long_rows().into_iter().map(|(x, y, v)| {
                        let c = &result.cells[k];
                        k += 1;
                        vec![x, y, v, c.pi_e, c.eta_c, c.pulse_area_pi, c.best_amplitude_pi.unwrap_or(f64::NAN)]
                    }),
                )?;
                write_csv(
                    &dir.join("row_maxima.csv"),
                    &[&result.axis1.path, "max_value"],
                    result.axis1.values.iter().zip(result.row_maxima()).map(|(x, m)| vec![*x, m]),
                )?;
                let (_, n2) = result.shape;
                for (k, c) in result.cells.iter().enumerate() {
                    if let Some(s) = &c.series {
                        write_csv(
                            &dir.join(format!("cell_{}_{}.csv", k / n2, k % n2)),
                            &["t_ps", "rho_ee", "photon_number"],
                            (0..s.t_ps.len()).map(|i| vec![s.t_ps[i], s.rho_ee[i], s.photon_number[i]]),
                        )?;
                    }
                }
            }
            OutputFormat::Json => write_json(&dir.join("map.json"), result)?,
        }
    }
    write_json(
        &dir.join("metadata.json"),
        &json!({
            "metadata": result.metadata,
            "axis1": result.axis1,
            "axis2": result.axis2,
            "shape": result.shape,
            "row_maxima": result.row_maxima(),
            "spec": spec,
        }),
    )
}
