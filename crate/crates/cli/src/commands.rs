use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use ldv_core::boundary::Boundary;
use ldv_core::cases::{make_case, CASE_NAMES};
use ldv_core::maxwellian::Regime;
use ldv_core::profile::compare_profiles;
use ldv_core::simulation::{Method, Simulation, StepDiagnostics};

use crate::config::RunConfig;
use crate::output::{grid_path, num, profile_path, read_profile, write_grids, write_profile, DiagnosticsWriter};

/// What a finished run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    /// Wall-clock time of the time loop only.
    pub wall_seconds: f64,
    pub final_time: f64,
    /// Largest `|drift|` per component over all steps.
    pub max_drift: [f64; 3],
    pub min_value: f64,
    pub max_nodes: usize,
    pub nodes_added: usize,
    pub maxwellian_fallbacks: usize,
    pub profiles: Vec<PathBuf>,
}

#[derive(Default)]
struct Tally {
    max_drift: [f64; 3],
    max_nodes: usize,
    nodes_added: usize,
    fallbacks: usize,
}

impl Tally {
    fn add(&mut self, d: &StepDiagnostics<f64>) {
        for (m, x) in self.max_drift.iter_mut().zip(d.drift) {
            *m = m.max(x.abs());
        }
        self.max_nodes = self.max_nodes.max(d.report.max_nodes);
        self.nodes_added += d.report.nodes_added;
        self.fallbacks += d.report.maxwellian_fallbacks;
    }
}

/// Runs `cfg` with its own worker count (all cores when unset).
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(|| run_here(cfg, out)),
        None => run_here(cfg, out),
    }
}

fn run_here(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    let (case, settings) = cfg.build()?;
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    std::fs::write(out.join("config.txt"), cfg.to_string())?;
    let method = settings.method;
    let mut sim = Simulation::new(case, settings)?;
    let mut diagnostics = DiagnosticsWriter::create(&out.join("diagnostics.csv"))?;
    let mut tally = Tally::default();
    let mut profiles = Vec::new();
    let mut wall = 0.0;
    let dump = cfg.grid_dump.unwrap_or(false) && method == Method::Ldv;

    for t in sim.case().output_times.clone() {
        let mut rows = Vec::new();
        let start = Instant::now();
        let stepped = sim.advance_to(t, |d| rows.push(d.clone()));
        wall += start.elapsed().as_secs_f64();
        for d in &rows {
            tally.add(d);
            diagnostics.write(d)?;
        }
        diagnostics.flush()?;
        if let Err(e) = stepped {
            let note = format!(
                "status = failed\nerror = {e}\nstep = {}\ntime = {}\nwall_seconds = {}\n",
                sim.steps() + 1,
                num(sim.time()),
                num(wall)
            );
            std::fs::write(out.join("summary.txt"), note)?;
            return Err(anyhow::Error::new(e).context(format!("step {} at t = {}", sim.steps() + 1, sim.time())));
        }
        let path = profile_path(out, t);
        write_profile(&path, &sim.profile())?;
        profiles.push(path);
        if dump {
            write_grids(&grid_path(out, t), &sim.case().centers(), &sim.grids())?;
        }
    }

    let summary = RunSummary {
        steps: sim.steps(),
        wall_seconds: wall,
        final_time: sim.time(),
        max_drift: tally.max_drift,
        min_value: sim.min_value(),
        max_nodes: tally.max_nodes.max(sim.grids().iter().map(|g| g.len()).max().unwrap_or(0)),
        nodes_added: tally.nodes_added,
        maxwellian_fallbacks: tally.fallbacks,
        profiles,
    };
    let mut text = String::new();
    writeln!(text, "status = ok")?;
    writeln!(text, "case = {}", sim.case().name)?;
    writeln!(text, "method = {}", method.name())?;
    writeln!(text, "steps = {}", summary.steps)?;
    writeln!(text, "final_time = {}", num(summary.final_time))?;
    writeln!(text, "wall_seconds = {}", num(summary.wall_seconds))?;
    writeln!(
        text,
        "max_drift = {}, {}, {}",
        num(summary.max_drift[0]),
        num(summary.max_drift[1]),
        num(summary.max_drift[2])
    )?;
    writeln!(text, "min_f = {}", num(summary.min_value))?;
    writeln!(text, "max_nodes = {}", summary.max_nodes)?;
    writeln!(text, "nodes_added = {}", summary.nodes_added)?;
    writeln!(text, "maxwellian_fallbacks = {}", summary.maxwellian_fallbacks)?;
    std::fs::write(out.join("summary.txt"), text)?;
    Ok(summary)
}

/// Relative errors of `a` against `b`; `pass` is false when a tolerance is
/// given and some field's L-infinity error exceeds it.
pub fn compare(a: &Path, b: &Path, linf: Option<f64>) -> Result<(String, bool)> {
    let errors = compare_profiles(&read_profile(a)?, &read_profile(b)?)?;
    let mut report = String::from("field,linf,l2\n");
    let mut pass = true;
    for (field, e) in &errors {
        writeln!(report, "{},{},{}", field.name(), num(e.linf), num(e.l2))?;
        if let Some(tol) = linf {
            pass &= e.linf <= tol;
        }
    }
    if let Some(tol) = linf {
        writeln!(report, "{} (linf <= {})", if pass { "PASS" } else { "FAIL" }, num(tol))?;
    }
    Ok((report, pass))
}

pub fn case_list() -> String {
    let mut s = String::from("name,domain,nx,final_time,regime,boundary\n");
    for name in CASE_NAMES {
        let c = make_case::<f64>(name, None).expect("built-in case");
        let regime = match c.gas.regime {
            Regime::Collisional => "bgk",
            Regime::Fluid => "fluid",
            Regime::FreeTransport => "free-transport",
        };
        let bc = match c.boundary {
            Boundary::Neumann => "neumann".to_string(),
            Boundary::Periodic => "periodic".to_string(),
            Boundary::DiffuseWalls { left_temperature, right_temperature } => {
                format!("diffuse-walls({left_temperature}/{right_temperature})")
            }
        };
        let _ = writeln!(s, "{name},[{}; {}],{},{},{regime},{bc}", c.domain.0, c.domain.1, c.nx, c.final_time());
    }
    s
}
