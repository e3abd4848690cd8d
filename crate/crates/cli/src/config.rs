//! Run configuration files.
//!
//! Plain `key = value` lines under two sections: `[run]` selects the case
//! and the scheme, `[case]` overrides case data. `#` starts a comment. Keys
//! left out take the case's defaults.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use ldv_core::boundary::Boundary;
use ldv_core::cases::{make_case, CaseSpec, DvmGridSpec};
use ldv_core::scheme_ldv::{Enlargement, TimestepPolicy, Variant};
use ldv_core::simulation::{Method, RunSettings};
use ldv_core::VelocityGridF64;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: bad value for `{key}`: {message}")]
    BadValue { line: usize, key: String, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Solver(#[from] ldv_core::SolverError),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariantName(pub Variant);

impl FromStr for VariantName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "base" => Ok(Self(Variant::Base)),
            "moment-correction" => Ok(Self(Variant::MomentCorrection)),
            "exact-integral" => Ok(Self(Variant::ExactIntegral)),
            _ => Err(format!("expected base, moment-correction or exact-integral, got `{s}`")),
        }
    }
}

impl fmt::Display for VariantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            Variant::Base => "base",
            Variant::MomentCorrection => "moment-correction",
            Variant::ExactIntegral => "exact-integral",
        })
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "ldv" => Ok(Method::Ldv),
        "dvm" => Ok(Method::Dvm),
        _ => Err(format!("expected ldv or dvm, got `{s}`")),
    }
}

fn parse_policy(s: &str) -> Result<TimestepPolicy, String> {
    match s {
        "default" => Ok(TimestepPolicy::Default),
        "strict" => Ok(TimestepPolicy::Strict),
        _ => Err(format!("expected default or strict, got `{s}`")),
    }
}

fn policy_name(p: TimestepPolicy) -> &'static str {
    match p {
        TimestepPolicy::Default => "default",
        TimestepPolicy::Strict => "strict",
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|p| parse_num::<f64>(p.trim())).collect()
}

/// Everything a run needs. `None` means "case default".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    // [run]
    pub case: String,
    pub knudsen: Option<f64>,
    pub method: Option<Method>,
    pub variant: Option<VariantName>,
    pub nodes: Option<usize>,
    pub points: Option<usize>,
    pub span: Option<f64>,
    pub enlargement: Option<bool>,
    pub enlargement_tolerance: Option<f64>,
    pub cfl: Option<f64>,
    pub timestep: Option<TimestepPolicy>,
    pub clamp: Option<bool>,
    pub maxwellian_fallback: Option<bool>,
    pub frozen_grid: Option<bool>,
    pub grid_dump: Option<bool>,
    pub workers: Option<usize>,
    // [case]
    pub nx: Option<usize>,
    pub output_times: Option<Vec<f64>>,
    pub dvm_vmin: Option<f64>,
    pub dvm_vmax: Option<f64>,
    pub dvm_nodes: Option<usize>,
    pub wall_left: Option<f64>,
    pub wall_right: Option<f64>,
}

fn fmt_f64(x: f64) -> String {
    // shortest representation that parses back to the same value
    format!("{x:?}")
}

impl RunConfig {
    pub fn new(case: &str) -> Self {
        Self { case: case.to_string(), ..Self::default() }
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        text.parse()
    }

    fn set(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::BadValue { line, key: key.to_string(), message };
        match (section, key) {
            ("run", "case") => self.case = value.to_string(),
            ("run", "knudsen") => self.knudsen = Some(parse_num(value).map_err(bad)?),
            ("run", "method") => self.method = Some(parse_method(value).map_err(bad)?),
            ("run", "variant") => self.variant = Some(value.parse().map_err(bad)?),
            ("run", "nodes") => self.nodes = Some(parse_num(value).map_err(bad)?),
            ("run", "points") => self.points = Some(parse_num(value).map_err(bad)?),
            ("run", "span") => self.span = Some(parse_num(value).map_err(bad)?),
            ("run", "enlargement") => self.enlargement = Some(parse_bool(value).map_err(bad)?),
            ("run", "enlargement_tolerance") => self.enlargement_tolerance = Some(parse_num(value).map_err(bad)?),
            ("run", "cfl") => self.cfl = Some(parse_num(value).map_err(bad)?),
            ("run", "timestep") => self.timestep = Some(parse_policy(value).map_err(bad)?),
            ("run", "clamp") => self.clamp = Some(parse_bool(value).map_err(bad)?),
            ("run", "maxwellian_fallback") => self.maxwellian_fallback = Some(parse_bool(value).map_err(bad)?),
            ("run", "frozen_grid") => self.frozen_grid = Some(parse_bool(value).map_err(bad)?),
            ("run", "grid_dump") => self.grid_dump = Some(parse_bool(value).map_err(bad)?),
            ("run", "workers") => self.workers = Some(parse_num(value).map_err(bad)?),
            ("case", "nx") => self.nx = Some(parse_num(value).map_err(bad)?),
            ("case", "output_times") => self.output_times = Some(parse_list(value).map_err(bad)?),
            ("case", "dvm_vmin") => self.dvm_vmin = Some(parse_num(value).map_err(bad)?),
            ("case", "dvm_vmax") => self.dvm_vmax = Some(parse_num(value).map_err(bad)?),
            ("case", "dvm_nodes") => self.dvm_nodes = Some(parse_num(value).map_err(bad)?),
            ("case", "wall_left") => self.wall_left = Some(parse_num(value).map_err(bad)?),
            ("case", "wall_right") => self.wall_right = Some(parse_num(value).map_err(bad)?),
            _ => return Err(ConfigError::UnknownKey { line, section: section.to_string(), key: key.to_string() }),
        }
        Ok(())
    }

    /// Case data and scheme settings with every override applied.
    pub fn build(&self) -> Result<(CaseSpec<f64>, RunSettings<f64>), ConfigError> {
        let mut case = make_case::<f64>(&self.case, self.knudsen)?;
        if let Some(nx) = self.nx {
            case.nx = nx;
        }
        if let Some(t) = &self.output_times {
            case.output_times = t.clone();
        }
        if self.wall_left.is_some() || self.wall_right.is_some() {
            match &mut case.boundary {
                Boundary::DiffuseWalls { left_temperature, right_temperature } => {
                    *left_temperature = self.wall_left.unwrap_or(*left_temperature);
                    *right_temperature = self.wall_right.unwrap_or(*right_temperature);
                }
                _ => return Err(ConfigError::Invalid(format!("case {} has no walls", self.case))),
            }
        }
        let ldv = &mut case.ldv;
        if let Some(v) = self.variant {
            ldv.variant = v.0;
        }
        if let Some(k) = self.nodes {
            ldv.nodes = k;
        }
        if let Some(q) = self.points {
            ldv.points = q;
        }
        if let Some(c) = self.span {
            ldv.span = c;
        }
        match self.enlargement {
            Some(false) => ldv.enlargement = None,
            Some(true) if ldv.enlargement.is_none() => ldv.enlargement = Some(Enlargement::default()),
            _ => {}
        }
        if let Some(tol) = self.enlargement_tolerance {
            match &mut ldv.enlargement {
                Some(e) => e.tolerance = tol,
                None => return Err(ConfigError::Invalid("enlargement_tolerance needs enlargement = true".into())),
            }
        }
        if let Some(c) = self.cfl {
            if !(0.5..=1.0).contains(&c) {
                return Err(ConfigError::Invalid(format!("cfl must be in [0.5, 1], got {c}")));
            }
            ldv.cfl = c;
        }
        if let Some(p) = self.timestep {
            ldv.timestep = p;
        }
        if let Some(c) = self.clamp {
            ldv.clamp = c;
        }
        if let Some(f) = self.maxwellian_fallback {
            ldv.maxwellian_fallback = f;
        }

        let dvm_nodes = self.dvm_nodes.or(match (self.method, case.dvm_grid) {
            // the DVM node count follows `nodes` unless given separately
            (Some(Method::Dvm), DvmGridSpec::Fixed { .. }) => self.nodes,
            _ => None,
        });
        if self.dvm_vmin.is_some() || self.dvm_vmax.is_some() || dvm_nodes.is_some() {
            let base = case.default_dvm_grid(case.ldv.span)?;
            case.dvm_grid = DvmGridSpec::Fixed {
                vmin: self.dvm_vmin.unwrap_or(base.vmin()),
                vmax: self.dvm_vmax.unwrap_or(base.vmax()),
                nodes: dvm_nodes.unwrap_or(base.len()),
            };
        }
        case.validate()?;
        let method = self.method.unwrap_or(Method::Ldv);
        let mut settings = RunSettings::for_case(&case, method)?;
        if self.frozen_grid == Some(true) {
            settings.ldv.frozen_grid = Some(settings.dvm_grid.clone());
        }
        Ok((case, settings))
    }

    pub fn dvm_grid(&self) -> Result<VelocityGridF64, ConfigError> {
        Ok(self.build()?.1.dvm_grid)
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if name != "run" && name != "case" {
                    return Err(ConfigError::Syntax { line, message: format!("unknown section [{name}]") });
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax { line, message: format!("expected `key = value`, got `{content}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = section.as_deref() else {
                return Err(ConfigError::Syntax { line, message: "key outside of a section".into() });
            };
            if !seen.insert((sec.to_string(), key.to_string())) {
                return Err(ConfigError::Syntax { line, message: format!("duplicate key `{key}`") });
            }
            cfg.set(sec, key, value, line)?;
        }
        if cfg.case.is_empty() {
            return Err(ConfigError::Missing("case"));
        }
        Ok(cfg)
    }
}

impl fmt::Display for RunConfig {
    /// Canonical form: both sections, set keys only, fixed order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut run = String::new();
        let put = |out: &mut String, key: &str, value: Option<String>| {
            if let Some(v) = value {
                let _ = writeln!(out, "{key} = {v}");
            }
        };
        put(&mut run, "case", Some(self.case.clone()));
        put(&mut run, "knudsen", self.knudsen.map(fmt_f64));
        put(&mut run, "method", self.method.map(|m| m.name().to_string()));
        put(&mut run, "variant", self.variant.map(|v| v.to_string()));
        put(&mut run, "nodes", self.nodes.map(|v| v.to_string()));
        put(&mut run, "points", self.points.map(|v| v.to_string()));
        put(&mut run, "span", self.span.map(fmt_f64));
        put(&mut run, "enlargement", self.enlargement.map(|v| v.to_string()));
        put(&mut run, "enlargement_tolerance", self.enlargement_tolerance.map(fmt_f64));
        put(&mut run, "cfl", self.cfl.map(fmt_f64));
        put(&mut run, "timestep", self.timestep.map(|p| policy_name(p).to_string()));
        put(&mut run, "clamp", self.clamp.map(|v| v.to_string()));
        put(&mut run, "maxwellian_fallback", self.maxwellian_fallback.map(|v| v.to_string()));
        put(&mut run, "frozen_grid", self.frozen_grid.map(|v| v.to_string()));
        put(&mut run, "grid_dump", self.grid_dump.map(|v| v.to_string()));
        put(&mut run, "workers", self.workers.map(|v| v.to_string()));
        let mut case = String::new();
        put(&mut case, "nx", self.nx.map(|v| v.to_string()));
        put(
            &mut case,
            "output_times",
            self.output_times.as_ref().map(|t| t.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ")),
        );
        put(&mut case, "dvm_vmin", self.dvm_vmin.map(fmt_f64));
        put(&mut case, "dvm_vmax", self.dvm_vmax.map(fmt_f64));
        put(&mut case, "dvm_nodes", self.dvm_nodes.map(|v| v.to_string()));
        put(&mut case, "wall_left", self.wall_left.map(fmt_f64));
        put(&mut case, "wall_right", self.wall_right.map(fmt_f64));
        write!(f, "[run]\n{run}")?;
        if !case.is_empty() {
            write!(f, "\n[case]\n{case}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# blast with the paper's setup\n[run]\ncase = blast\nmethod = ldv\nvariant = base\nnodes = 30\npoints = 4\n\n[case]\noutput_times = 0.008, 0.05\n";

    #[test]
    fn parses_and_round_trips() {
        let cfg: RunConfig = SAMPLE.parse().unwrap();
        assert_eq!(cfg.case, "blast");
        assert_eq!(cfg.method, Some(Method::Ldv));
        assert_eq!(cfg.output_times, Some(vec![0.008, 0.05]));
        let once = cfg.to_string();
        let again: RunConfig = once.parse().unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_string(), once);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(
            "[run]\ncase = blast\ncolour = red\n".parse::<RunConfig>(),
            Err(ConfigError::UnknownKey { line: 3, .. })
        ));
        assert!(matches!("[run]\ncase = blast\nnx = 3\n".parse::<RunConfig>(), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!("case = blast\n".parse::<RunConfig>(), Err(ConfigError::Syntax { .. })));
        assert!(matches!("[run]\ncase blast\n".parse::<RunConfig>(), Err(ConfigError::Syntax { .. })));
        assert!(matches!("[run]\nmethod = dvm\n".parse::<RunConfig>(), Err(ConfigError::Missing("case"))));
        assert!(matches!("[run]\ncase = blast\nnodes = -3\n".parse::<RunConfig>(), Err(ConfigError::BadValue { .. })));
        assert!(matches!("[run]\ncase = a\ncase = b\n".parse::<RunConfig>(), Err(ConfigError::Syntax { .. })));
    }

    #[test]
    fn overrides_reach_the_case() {
        let cfg: RunConfig = "[run]\ncase = heat-transfer\nknudsen = 1\nenlargement = false\nmethod = dvm\nnodes = 50\n[case]\nnx = 40\nwall_right = 300\n"
            .parse()
            .unwrap();
        let (case, settings) = cfg.build().unwrap();
        assert_eq!(case.nx, 40);
        assert!(
            matches!(case.boundary, Boundary::DiffuseWalls { right_temperature, .. } if right_temperature == 300.0)
        );
        assert_eq!(settings.ldv.enlargement, None);
        assert_eq!(settings.dvm_grid.len(), 50);
        assert!((settings.dvm_grid.vmax() - 1825.34).abs() < 1e-9);
        assert!(RunConfig::new("sod-free").build().is_ok());
        let bad: RunConfig = "[run]\ncase = blast\n[case]\nwall_left = 3\n".parse().unwrap();
        assert!(bad.build().is_err());
    }
}
