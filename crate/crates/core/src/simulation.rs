//! Time loop shared by both schemes: step selection, output times and
//! conservation bookkeeping.

use crate::cases::CaseSpec;
use crate::error::Result;
use crate::grid::{MomentVector, VelocityGrid};
use crate::num::Real;
use crate::profile::{profile, ProfileRecord};
use crate::scheme_dvm::{dvm_step, dvm_timestep, DvmState};
use crate::scheme_ldv::{advance, init_cells, total_moments, CellState, LdvConfig, StepReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dvm,
    Ldv,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dvm => "dvm",
            Method::Ldv => "ldv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings<T> {
    pub method: Method,
    /// LDV parameters; `cfl` and `maxwellian_fallback` also apply to DVM runs.
    pub ldv: LdvConfig<T>,
    /// Global grid for DVM runs.
    pub dvm_grid: VelocityGrid<T>,
}

impl<T: Real> RunSettings<T> {
    /// The case's defaults for `method`.
    pub fn for_case(case: &CaseSpec<T>, method: Method) -> Result<Self> {
        Ok(Self { method, ldv: case.ldv.clone(), dvm_grid: case.default_dvm_grid(case.ldv.span)? })
    }
}

#[derive(Debug, Clone)]
pub enum State<T> {
    Ldv(Vec<CellState<T>>),
    Dvm(DvmState<T>),
}

/// Per-step record for the diagnostics output.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics<T> {
    pub step: usize,
    pub time: T,
    pub report: StepReport<T>,
    /// `sum_i U_i dx`.
    pub totals: MomentVector<T>,
    /// `(totals - initial - boundary inflow) / scale` per component; the
    /// momentum scale is `sqrt(2 M E)` of the initial totals.
    pub drift: [T; 3],
}

#[derive(Debug, Clone)]
pub struct Simulation<T> {
    case: CaseSpec<T>,
    settings: RunSettings<T>,
    state: State<T>,
    time: T,
    steps: usize,
    initial: MomentVector<T>,
    inflow: MomentVector<T>,
    min_value: T,
}

impl<T: Real> Simulation<T> {
    pub fn new(case: CaseSpec<T>, settings: RunSettings<T>) -> Result<Self> {
        case.validate()?;
        let states = case.initial_states();
        let fallback = settings.ldv.maxwellian_fallback;
        let state = match settings.method {
            Method::Ldv => State::Ldv(init_cells(&states, &case.gas, &settings.ldv)?),
            Method::Dvm => State::Dvm(DvmState::init(settings.dvm_grid.clone(), &states, &case.gas, fallback)?),
        };
        let mut sim = Self {
            case,
            settings,
            state,
            time: T::zero(),
            steps: 0,
            initial: MomentVector::zero(),
            inflow: MomentVector::zero(),
            min_value: T::infinity(),
        };
        sim.initial = sim.totals();
        sim.min_value = sim.values().fold(T::infinity(), T::min);
        Ok(sim)
    }

    pub fn case(&self) -> &CaseSpec<T> {
        &self.case
    }

    pub fn settings(&self) -> &RunSettings<T> {
        &self.settings
    }

    pub fn state(&self) -> &State<T> {
        &self.state
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Smallest nodal value seen so far, initial data included.
    pub fn min_value(&self) -> T {
        self.min_value
    }

    pub fn initial_totals(&self) -> MomentVector<T> {
        self.initial
    }

    fn values(&self) -> Box<dyn Iterator<Item = T> + '_> {
        match &self.state {
            State::Ldv(cells) => Box::new(cells.iter().flat_map(|c| c.values.iter().copied())),
            State::Dvm(s) => Box::new(s.values.iter().flat_map(|v| v.iter().copied())),
        }
    }

    pub fn moments(&self) -> Vec<MomentVector<T>> {
        match &self.state {
            State::Ldv(cells) => cells.iter().map(|c| c.moments).collect(),
            State::Dvm(s) => s.moments.clone(),
        }
    }

    pub fn totals(&self) -> MomentVector<T> {
        let dx = self.case.dx();
        match &self.state {
            State::Ldv(cells) => total_moments(cells, dx),
            State::Dvm(s) => s.moments.iter().fold(MomentVector::zero(), |acc, m| acc + *m * dx),
        }
    }

    pub fn profile(&self) -> Vec<ProfileRecord<T>> {
        profile(&self.case.centers(), &self.moments(), self.case.gas.r)
    }

    /// Velocity grid of every cell.
    pub fn grids(&self) -> Vec<&VelocityGrid<T>> {
        match &self.state {
            State::Ldv(cells) => cells.iter().map(|c| &c.grid).collect(),
            State::Dvm(s) => vec![&s.grid; s.len()],
        }
    }

    fn drift(&self, totals: &MomentVector<T>) -> [T; 3] {
        let d = *totals - self.initial - self.inflow;
        let scale = |s: T| if s > T::zero() { s } else { T::one() };
        let momentum_scale = (T::two() * self.initial.rho * self.initial.energy).sqrt();
        [
            d.rho / scale(self.initial.rho.abs()),
            d.momentum / scale(momentum_scale),
            d.energy / scale(self.initial.energy.abs()),
        ]
    }

    /// Advances one step of at most `dt_max`.
    pub fn step(&mut self, dt_max: T) -> Result<StepDiagnostics<T>> {
        let dx = self.case.dx();
        let (gas, bc) = (&self.case.gas, &self.case.boundary);
        let report = match &self.state {
            State::Ldv(cells) => {
                let out = advance(cells, bc, gas, &self.settings.ldv, dx, dt_max)?;
                self.state = State::Ldv(out.cells);
                out.report
            }
            State::Dvm(s) => {
                let dt = dvm_timestep(&s.grid, dx, self.settings.ldv.cfl)?.min(dt_max);
                let (next, report) = dvm_step(s, bc, gas, dt, dx, self.settings.ldv.maxwellian_fallback)?;
                self.state = State::Dvm(next);
                report
            }
        };
        self.time = self.time + report.dt;
        self.steps += 1;
        self.inflow += report.boundary_inflow * report.dt;
        self.min_value = self.min_value.min(report.min_value);
        let totals = self.totals();
        Ok(StepDiagnostics { step: self.steps, time: self.time, drift: self.drift(&totals), totals, report })
    }

    /// Steps until `target`, the last step being shortened to land on it.
    pub fn advance_to(&mut self, target: T, mut on_step: impl FnMut(&StepDiagnostics<T>)) -> Result<()> {
        let eps = T::lit(1e-12) * target.abs().max(T::min_positive_value());
        while target - self.time > eps {
            let d = self.step(target - self.time)?;
            on_step(&d);
        }
        Ok(())
    }

    /// Runs through every output time of the case, calling `on_output` at
    /// each of them.
    pub fn run(
        &mut self,
        mut on_step: impl FnMut(&StepDiagnostics<T>),
        mut on_output: impl FnMut(&Self) -> Result<()>,
    ) -> Result<()> {
        for t in self.case.output_times.clone() {
            self.advance_to(t, &mut on_step)?;
            on_output(self)?;
        }
        Ok(())
    }
}
