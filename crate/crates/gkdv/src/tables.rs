//! CSV tables. Floats are written with 17 significant digits so that every
//! value parses back to the same `f64`.

use std::io::Write;

use gkdv_core::ansatz::BubbleConfig;
use gkdv_core::modulation::{ShootStep, Trajectory};
use gkdv_core::pde::{conserved, Field, Peak};

use crate::error::Result;
use crate::report::RunReport;

/// `v` in scientific notation with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_header(k: usize) -> Vec<String> {
    let mut h = vec!["s".to_string()];
    for i in 1..=k {
        for name in ["tau", "mu", "y", "a", "mu_bar", "tau_bar", "y_bar", "f", "r", "e"] {
            h.push(format!("{name}_{i}"));
        }
    }
    h.push("N".into());
    h
}

pub fn write_trajectory<W: Write>(out: W, config: &BubbleConfig, trajectory: &Trajectory) -> Result<()> {
    let k = config.k();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(k))?;
    for p in &trajectory.points {
        let st = &p.state;
        let b = st.bars(config);
        let d = &p.derived;
        let mut row = vec![fmt17(st.s)];
        for i in 0..k {
            for v in [st.tau[i], st.mu[i], st.y[i], st.a[i], b.mu_bar[i], b.tau_bar[i], b.y_bar[i], d.f[i], d.r[i], d.e[i]] {
                row.push(fmt17(v));
            }
        }
        row.push(fmt17(p.norm));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_shooting<W: Write>(out: W, n_xi: usize, k: usize, history: &[ShootStep]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=n_xi).map(|i| format!("xi_{i}")));
    header.extend((1..=k).map(|i| format!("zeta_{i}")));
    header.extend(["exit_s".to_string(), "N_exit".to_string()]);
    w.write_record(&header)?;
    for step in history {
        let mut row = vec![step.iteration.to_string()];
        row.extend(step.xi.iter().chain(&step.zeta).map(|&v| fmt17(v)));
        row.push(fmt17(step.exit_s));
        row.push(fmt17(step.exit_norm));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One row per field: time, mass, energy, then height and position of each bubble.
pub fn write_diagnostics<W: Write>(out: W, fields: &[Field], peaks: &[Vec<Peak>]) -> Result<()> {
    let k = peaks.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "mass".into(), "energy".into()];
    for i in 1..=k {
        header.push(format!("height_{i}"));
        header.push(format!("position_{i}"));
    }
    w.write_record(&header)?;
    for (f, p) in fields.iter().zip(peaks) {
        let (mass, energy) = conserved(f);
        let mut row = vec![fmt17(f.t), fmt17(mass), fmt17(energy)];
        for peak in p {
            row.push(fmt17(peak.height));
            row.push(fmt17(peak.position));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Check table of a report; wall-clock times are kept out of it.
pub fn write_report<W: Write>(out: W, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "name", "target", "measured", "tolerance", "pass", "anchor"])?;
    for c in &report.checks {
        w.write_record([
            c.id.to_string(),
            c.name.clone(),
            c.target.clone(),
            fmt17(c.measured),
            fmt17(c.tolerance),
            c.pass.to_string(),
            c.anchor.clone(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
