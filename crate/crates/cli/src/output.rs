//! CSV files written by `run` and read by `compare`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ldv_core::grid::VelocityGrid;
use ldv_core::profile::ProfileRecord;
use ldv_core::simulation::StepDiagnostics;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn profile_path(dir: &Path, t: f64) -> PathBuf {
    dir.join(format!("profile_t{t}.csv"))
}

pub fn grid_path(dir: &Path, t: f64) -> PathBuf {
    dir.join(format!("grids_t{t}.csv"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

pub fn write_profile(path: &Path, records: &[ProfileRecord<f64>]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,rho,u,T,p")?;
    for r in records {
        writeln!(w, "{},{},{},{},{}", num(r.x), num(r.rho), num(r.u), num(r.temperature), num(r.pressure))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_profile(path: &Path) -> Result<Vec<ProfileRecord<f64>>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).with_context(|| format!("{}: no `{name}` column", path.display()))
    };
    let (ix, ir, iu, it, ip) = (col("x")?, col("rho")?, col("u")?, col("T")?, col("p")?);
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let get = |i: usize| -> Result<f64> {
            row.get(i)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .with_context(|| format!("{}: bad number on data row {}", path.display(), line + 1))
        };
        out.push(ProfileRecord { x: get(ix)?, rho: get(ir)?, u: get(iu)?, temperature: get(it)?, pressure: get(ip)? });
    }
    if out.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(out)
}

/// One row per (cell, node).
pub fn write_grids(path: &Path, centers: &[f64], grids: &[&VelocityGrid<f64>]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "cell,x,node,v")?;
    for (i, (x, g)) in centers.iter().zip(grids).enumerate() {
        for (k, v) in g.nodes().iter().enumerate() {
            writeln!(w, "{i},{},{k},{}", num(*x), num(*v))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub struct DiagnosticsWriter {
    w: BufWriter<File>,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut w = create(path)?;
        writeln!(
            w,
            "step,time,dt,mass,momentum,energy,drift_mass,drift_momentum,drift_energy,min_f,max_nodes,nodes_added,maxwellian_fallbacks,reruns"
        )?;
        Ok(Self { w })
    }

    pub fn write(&mut self, d: &StepDiagnostics<f64>) -> Result<()> {
        let r = &d.report;
        writeln!(
            self.w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            d.step,
            num(d.time),
            num(r.dt),
            num(d.totals.rho),
            num(d.totals.momentum),
            num(d.totals.energy),
            num(d.drift[0]),
            num(d.drift[1]),
            num(d.drift[2]),
            num(r.min_value),
            r.max_nodes,
            r.nodes_added,
            r.maxwellian_fallbacks,
            r.reruns
        )?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}
