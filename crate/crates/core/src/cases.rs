//! Test problems: initial and boundary data, gas parameters and default
//! discretizations, plus the closed-form free-transport solution.

use statrs::function::erf::erfc;

use crate::boundary::Boundary;
use crate::error::{Result, SolverError};
use crate::grid::{build_global_grid, MomentVector, VelocityGrid};
use crate::maxwellian::{GasModel, Regime};
use crate::num::Real;
use crate::scheme_ldv::{Enlargement, LdvConfig, Variant};

pub const SOD_RAREFIED: &str = "sod-rarefied";
pub const SOD_FLUID: &str = "sod-fluid";
pub const SOD_FREE: &str = "sod-free";
pub const BLAST: &str = "blast";
pub const HEAT_TRANSFER: &str = "heat-transfer";

pub const CASE_NAMES: [&str; 5] = [SOD_RAREFIED, SOD_FLUID, SOD_FREE, BLAST, HEAT_TRANSFER];

/// Knudsen numbers with a published initial density.
pub const HEAT_KNUDSEN: [f64; 4] = [1e-2, 1.0, 10.0, 1000.0];

/// Piecewise-constant initial state on `(previous end, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub end: T,
    pub rho: T,
    pub u: T,
    pub temperature: T,
}

/// Global grid used by default for DVM runs of a case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DvmGridSpec<T> {
    /// Uniform grid on `[vmin, vmax]` with `nodes` nodes.
    Fixed { vmin: T, vmax: T, nodes: usize },
    /// Bounds and spacing sized from the initial extremes.
    FromInitialState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec<T> {
    pub name: String,
    pub domain: (T, T),
    pub nx: usize,
    pub gas: GasModel<T>,
    pub segments: Vec<Segment<T>>,
    pub boundary: Boundary<T>,
    pub knudsen: Option<T>,
    /// Sorted; the last one is the final time.
    pub output_times: Vec<T>,
    pub dvm_grid: DvmGridSpec<T>,
    pub ldv: LdvConfig<T>,
}

fn seg<T: Real>(end: f64, rho: f64, u: f64, temperature: f64) -> Segment<T> {
    Segment { end: T::lit(end), rho: T::lit(rho), u: T::lit(u), temperature: T::lit(temperature) }
}

fn fixed<T: Real>(half_width: f64, nodes: usize) -> DvmGridSpec<T> {
    DvmGridSpec::Fixed { vmin: T::lit(-half_width), vmax: T::lit(half_width), nodes }
}

/// Initial density of the heat-transfer problem for a Knudsen number.
pub fn heat_density(knudsen: f64) -> f64 {
    1.88862e-7 / knudsen
}

/// Builds a named case. `knudsen` applies to the heat-transfer problem only
/// (default `1e-2`).
pub fn make_case<T: Real>(name: &str, knudsen: Option<f64>) -> Result<CaseSpec<T>> {
    if knudsen.is_some() && name != HEAT_TRANSFER {
        return Err(SolverError::InvalidParameter(format!("case {name} takes no Knudsen number")));
    }
    let r = T::lit(208.1);
    let sod = |regime: Regime, nodes: usize| -> Result<CaseSpec<T>> {
        Ok(CaseSpec {
            name: name.to_string(),
            domain: (T::zero(), T::lit(0.6)),
            nx: 300,
            gas: GasModel::new(r, T::lit(1.08e-9), T::lit(-0.19), regime)?,
            segments: vec![seg(0.3, 1e-4, 0.0, 0.00480208), seg(0.6, 1.25e-5, 0.0, 0.00384167)],
            boundary: Boundary::Neumann,
            knudsen: None,
            output_times: vec![T::lit(7.34e-2)],
            dvm_grid: fixed(4.0, 100),
            ldv: LdvConfig::new(nodes, 4, Variant::Base),
        })
    };
    match name {
        SOD_RAREFIED => sod(Regime::Collisional, 30),
        SOD_FLUID => sod(Regime::Fluid, 10),
        SOD_FREE => Ok(CaseSpec {
            name: name.to_string(),
            domain: (-T::one(), T::one()),
            nx: 300,
            gas: GasModel::new(T::one(), T::zero(), T::zero(), Regime::FreeTransport)?,
            segments: vec![seg(0.0, 1.0, 0.0, 1.0), seg(1.0, 0.125, 0.0, 0.8)],
            boundary: Boundary::Neumann,
            knudsen: None,
            output_times: vec![T::lit(0.3)],
            dvm_grid: fixed(4.0, 30),
            ldv: LdvConfig::new(30, 4, Variant::MomentCorrection),
        }),
        BLAST => Ok(CaseSpec {
            name: name.to_string(),
            domain: (T::zero(), T::one()),
            nx: 300,
            gas: GasModel::new(r, T::lit(1.08e-9), T::lit(-0.19), Regime::Collisional)?,
            segments: vec![seg(0.1, 1.0, 0.0, 4.8), seg(0.9, 1.0, 0.0, 4.8e-5), seg(1.0, 1.0, 0.0, 0.48)],
            boundary: Boundary::Neumann,
            knudsen: None,
            output_times: vec![T::lit(0.008), T::lit(0.05)],
            dvm_grid: DvmGridSpec::FromInitialState,
            ldv: LdvConfig::new(30, 4, Variant::Base),
        }),
        HEAT_TRANSFER => {
            let kn = knudsen.unwrap_or(1e-2);
            if !(kn > 0.0 && kn.is_finite()) {
                return Err(SolverError::InvalidParameter(format!("Knudsen number must be positive, got {kn}")));
            }
            let transitional = kn <= 1e-2;
            let nodes = if transitional { 30 } else { 300 };
            let mut ldv = LdvConfig::new(nodes, 4, Variant::MomentCorrection);
            ldv.enlargement = Some(Enlargement::default());
            Ok(CaseSpec {
                name: name.to_string(),
                domain: (T::zero(), T::one()),
                nx: if transitional { 1000 } else { 300 },
                gas: GasModel::new(r, T::lit(6.15e-9), T::lit(-0.5), Regime::Collisional)?,
                segments: vec![seg(1.0, heat_density(kn), 0.0, 300.0)],
                boundary: Boundary::DiffuseWalls { left_temperature: T::lit(300.0), right_temperature: T::lit(1000.0) },
                knudsen: Some(T::lit(kn)),
                output_times: vec![T::lit(1.3e-3)],
                dvm_grid: fixed(1825.34, nodes),
                ldv,
            })
        }
        other => Err(SolverError::UnknownCase(other.to_string())),
    }
}

impl<T: Real> CaseSpec<T> {
    pub fn dx(&self) -> T {
        (self.domain.1 - self.domain.0) / T::lit(self.nx as f64)
    }

    pub fn centers(&self) -> Vec<T> {
        let dx = self.dx();
        (0..self.nx).map(|i| self.domain.0 + (T::lit(i as f64) + T::half()) * dx).collect()
    }

    pub fn final_time(&self) -> T {
        self.output_times.last().copied().unwrap_or_else(T::zero)
    }

    /// Initial segment holding `x`; a point on a breakpoint belongs to the
    /// segment on its left.
    pub fn segment_at(&self, x: T) -> &Segment<T> {
        self.segments.iter().find(|s| x <= s.end).unwrap_or_else(|| self.segments.last().expect("segments"))
    }

    pub fn initial_states(&self) -> Vec<MomentVector<T>> {
        self.centers()
            .into_iter()
            .map(|x| {
                let s = self.segment_at(x);
                MomentVector::from_primitive(s.rho, s.u, s.temperature, self.gas.r)
            })
            .collect()
    }

    /// Global grid for DVM runs with the given span factor (used only for
    /// grids sized from the initial state).
    pub fn default_dvm_grid(&self, span: T) -> Result<VelocityGrid<T>> {
        match self.dvm_grid {
            DvmGridSpec::Fixed { vmin, vmax, nodes } => VelocityGrid::uniform(vmin, vmax, nodes),
            DvmGridSpec::FromInitialState => {
                let extremes: Vec<(T, T)> = self.segments.iter().map(|s| (s.u, s.temperature)).collect();
                build_global_grid(&extremes, self.gas.r, span)
            }
        }
    }

    /// Checks the invariants of a (possibly user-modified) case.
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || !(self.domain.1 > self.domain.0) {
            return Err(SolverError::InvalidParameter("empty space domain".into()));
        }
        if self.segments.is_empty() || self.segments.windows(2).any(|w| !(w[1].end > w[0].end)) {
            return Err(SolverError::InvalidParameter("initial segments must be increasing".into()));
        }
        if self.segments.last().map(|s| s.end) != Some(self.domain.1) {
            return Err(SolverError::InvalidParameter("initial segments must end at the domain end".into()));
        }
        if self.segments.iter().any(|s| !(s.rho > T::zero() && s.temperature > T::zero())) {
            return Err(SolverError::InvalidParameter(
                "initial states must have positive density and temperature".into(),
            ));
        }
        if matches!(self.boundary, Boundary::DiffuseWalls { .. }) && self.gas.regime != Regime::Collisional {
            return Err(SolverError::InvalidParameter("diffuse walls need a finite relaxation time".into()));
        }
        if self.output_times.is_empty() || self.output_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SolverError::InvalidParameter("output times must be increasing".into()));
        }
        if !(self.output_times[0] > T::zero()) {
            return Err(SolverError::InvalidParameter("output times must be positive".into()));
        }
        Ok(())
    }
}

/// Moments of `rho M(0, T)` restricted to `v > a`: mass, momentum and energy.
fn upper_tail(rho: f64, temperature: f64, r: f64, a: f64) -> [f64; 3] {
    let s = (r * temperature).sqrt();
    let z = a / (s * std::f64::consts::SQRT_2);
    let tail = 0.5 * erfc(z);
    let g = s / (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * (a / s).powi(2)).exp();
    [rho * tail, rho * g, 0.5 * rho * (s * s * tail + a * g)]
}

fn full(rho: f64, temperature: f64, r: f64) -> [f64; 3] {
    [rho, 0.0, 0.5 * rho * r * temperature]
}

/// Exact free-transport solution of the `sod-free` problem on the whole line:
/// particles with `v > x/t` started in the left state, the others in the
/// right state.
pub fn free_transport_exact(t: f64, x: f64) -> MomentVector<f64> {
    let (left, right) = ((1.0, 1.0), (0.125, 0.8));
    let r = 1.0;
    if t <= 0.0 {
        let (rho, temp) = if x < 0.0 { left } else { right };
        return MomentVector::from_primitive(rho, 0.0, temp, r);
    }
    let a = x / t;
    let from_left = upper_tail(left.0, left.1, r, a);
    let right_total = full(right.0, right.1, r);
    let right_upper = upper_tail(right.0, right.1, r, a);
    let c: Vec<f64> = (0..3).map(|k| from_left[k] + right_total[k] - right_upper[k]).collect();
    MomentVector::new(c[0], c[1], c[2])
}
