//! CSV emitters. Numeric values are written with the shortest decimal form
//! that round-trips the underlying 64-bit value.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use hivdyn_core::{Compartment, EnsembleSummary, Histogram, Trajectory};

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,S_u,S_a,I,C,A")?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let v = x.as_array();
        writeln!(w, "{},{},{},{},{},{}", t, v[0], v[1], v[2], v[3], v[4])?;
    }
    Ok(())
}

pub fn write_ensemble_summary(path: &Path, summary: &EnsembleSummary) -> Result<()> {
    let mut w = create(path)?;
    let mut header = String::from("t");
    for c in Compartment::ALL {
        for stat in ["mean", "q05", "q25", "q50", "q75", "q95"] {
            header.push_str(&format!(",{}_{}", c.label(), stat));
        }
    }
    writeln!(w, "{header}")?;
    for (k, t) in summary.times.iter().enumerate() {
        let mut row = t.to_string();
        for s in &summary.compartments {
            for col in [&s.mean, &s.q05, &s.q25, &s.q50, &s.q75, &s.q95] {
                row.push(',');
                row.push_str(&col[k].to_string());
            }
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

pub fn write_histogram(path: &Path, hist: &Histogram) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "bin_lo,bin_hi,density")?;
    for (d, e) in hist.densities.iter().zip(hist.edges.windows(2)) {
        writeln!(w, "{},{},{}", e[0], e[1], d)?;
    }
    Ok(())
}
