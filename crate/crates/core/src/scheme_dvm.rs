//! Discrete velocity method on one global grid shared by every cell.

use rayon::prelude::*;

use crate::boundary::{diffuse_wall_ghosts, Boundary};
use crate::error::{Result, SolverError};
use crate::grid::{moments, weighted_moments, MomentVector, VelocityGrid};
use crate::maxwellian::GasModel;
use crate::num::Real;
use crate::scheme_ldv::{
    apply_fluxes, interface_fluxes, maxwellian_values, relax, transport, CellState, FluxMode, HalfFlux, StepReport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct DvmState<T> {
    pub grid: VelocityGrid<T>,
    /// `values[i][k]`: cell `i`, node `k`.
    pub values: Vec<Vec<T>>,
    /// Quadrature moments of `values`, per cell.
    pub moments: Vec<MomentVector<T>>,
}

impl<T: Real> DvmState<T> {
    /// Discrete Maxwellians of `states` on `grid`.
    pub fn init(grid: VelocityGrid<T>, states: &[MomentVector<T>], gas: &GasModel<T>, fallback: bool) -> Result<Self> {
        let values = states
            .par_iter()
            .enumerate()
            .map(|(i, u)| maxwellian_values(u, &grid, gas.r, fallback).map(|(v, _)| v).map_err(|e| e.in_cell(i)))
            .collect::<Result<Vec<_>>>()?;
        let moments = values.iter().map(|v| moments(v, &grid)).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values, moments })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The state viewed as a row of cells that all carry the global grid.
    pub fn to_cells(&self) -> Vec<CellState<T>> {
        self.values
            .iter()
            .zip(&self.moments)
            .map(|(v, m)| CellState { grid: self.grid.clone(), values: v.clone(), moments: *m })
            .collect()
    }
}

fn ghost_values<T: Real>(state: &DvmState<T>, bc: &Boundary<T>, r: T) -> Result<(Vec<T>, Vec<T>)> {
    let n = state.len();
    match *bc {
        Boundary::Neumann => Ok((state.values[0].clone(), state.values[n - 1].clone())),
        Boundary::Periodic => Ok((state.values[n - 1].clone(), state.values[0].clone())),
        Boundary::DiffuseWalls { left_temperature, right_temperature } => {
            let cell = |i: usize| CellState {
                grid: state.grid.clone(),
                values: state.values[i].clone(),
                moments: state.moments[i],
            };
            let g = diffuse_wall_ghosts(
                &cell(0),
                &cell(n - 1),
                (left_temperature, right_temperature),
                (state.grid.clone(), state.grid.clone()),
                r,
                FluxMode::Quadrature,
            )?;
            Ok((g.left.values, g.right.values))
        }
    }
}

/// `cfl dx / max |v_k|`.
pub fn dvm_timestep<T: Real>(grid: &VelocityGrid<T>, dx: T, cfl: T) -> Result<T> {
    let vmax = grid.max_abs();
    if !(vmax > T::zero()) {
        return Err(SolverError::DegenerateTimestep("all velocity nodes are zero".into()));
    }
    Ok(cfl * dx / vmax)
}

/// One DVM step: upwind transport per node, moments of the transported
/// values (computed in flux form), implicit relaxation.
pub fn dvm_step<T: Real>(
    state: &DvmState<T>,
    bc: &Boundary<T>,
    gas: &GasModel<T>,
    dt: T,
    dx: T,
    fallback: bool,
) -> Result<(DvmState<T>, StepReport<T>)> {
    if state.is_empty() {
        return Err(SolverError::InvalidParameter("empty state".into()));
    }
    let n = state.len();
    let grid = &state.grid;
    let (gl, gr) = ghost_values(state, bc, gas.r)?;
    let row: Vec<&[T]> = std::iter::once(gl.as_slice())
        .chain(state.values.iter().map(Vec::as_slice))
        .chain(std::iter::once(gr.as_slice()))
        .collect();
    let halves = row
        .par_iter()
        .map(|v| {
            Ok(HalfFlux { pos: weighted_moments(v, grid, T::pos_part)?, neg: weighted_moments(v, grid, T::neg_part)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let fluxes = interface_fluxes(&halves);
    let next = apply_fluxes(&state.moments, &fluxes, dt / dx, gas.r)?;
    let lambda = dt / dx;

    let updated = (0..n)
        .into_par_iter()
        .map(|i| {
            let (l, c, r) = (row[i], row[i + 1], row[i + 2]);
            let transported: Vec<T> =
                grid.nodes().iter().enumerate().map(|(k, &v)| transport(v, lambda, l[k], c[k], r[k])).collect();
            let (values, fell_back) = relax(transported, grid, &next[i], gas, dt, fallback)?;
            let m = moments(&values, grid)?;
            Ok((values, m, fell_back))
        })
        .enumerate()
        .map(|(i, r): (usize, Result<_>)| r.map_err(|e| e.in_cell(i)))
        .collect::<Result<Vec<_>>>()?;

    let report = StepReport {
        dt,
        boundary_inflow: fluxes[0] - fluxes[n],
        min_value: updated.iter().flat_map(|u| u.0.iter().copied()).fold(T::infinity(), T::min),
        max_nodes: grid.len(),
        nodes_added: 0,
        maxwellian_fallbacks: updated.iter().filter(|u| u.2).count(),
        reruns: 0,
    };
    let mut values = Vec::with_capacity(n);
    let mut moments_out = Vec::with_capacity(n);
    for (v, m, _) in updated {
        values.push(v);
        moments_out.push(m);
    }
    Ok((DvmState { grid: grid.clone(), values, moments: moments_out }, report))
}
