//! Ghost cells for the space boundaries.

use crate::error::{Result, SolverError};
use crate::grid::{build_local_grid, moments, MomentVector, VelocityGrid};
use crate::maxwellian::{discrete_maxwellian, sample_maxwellian};
use crate::num::Real;
use crate::scheme_ldv::{half_flux, CellState, FluxMode};

/// Boundary condition at both ends of the space domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary<T> {
    /// Ghosts copy the adjacent cell (distribution, grid and moments).
    Neumann,
    /// Ghosts copy the cell at the opposite end.
    Periodic,
    /// Diffuse reflection on walls at the given temperatures: the incoming
    /// half of the ghost is a wall Maxwellian whose density balances the
    /// outgoing mass flux.
    DiffuseWalls { left_temperature: T, right_temperature: T },
}

/// Ghost states for cells `0` and `N + 1`.
#[derive(Debug, Clone)]
pub struct BoundaryGhost<T> {
    pub left: CellState<T>,
    pub right: CellState<T>,
    /// `(rho_L, rho_R)` for diffuse walls.
    pub wall_densities: Option<(T, T)>,
}

/// Local grid describing the wall Maxwellian `M(1, 0, T_wall)`.
pub fn wall_ghost_grid<T: Real>(wall_temperature: T, nodes: usize, r: T, span: T) -> Result<VelocityGrid<T>> {
    build_local_grid(&MomentVector::from_primitive(T::one(), T::zero(), wall_temperature, r), nodes, r, span)
}

/// Unit-density wall Maxwellian on `grid`; falls back to point sampling if
/// the moment-matched solve fails on that grid.
fn unit_wall_maxwellian<T: Real>(temperature: T, grid: &VelocityGrid<T>, r: T) -> Result<Vec<T>> {
    let unit = MomentVector::from_primitive(T::one(), T::zero(), temperature, r);
    discrete_maxwellian(&unit, grid, r).or_else(|_| sample_maxwellian(&unit, grid, r))
}

/// Diffuse-wall ghosts.
///
/// `rho_L = -<v- f_1> / <v+ M(1,0,T_L)>` with the numerator on the first
/// cell's grid and the denominator on the left ghost grid, and symmetrically
/// on the right. Half-fluxes use the same evaluation (`mode`) as the scheme,
/// so the discrete mass flux through each wall is zero.
pub fn diffuse_wall_ghosts<T: Real>(
    first: &CellState<T>,
    last: &CellState<T>,
    walls: (T, T),
    grids: (VelocityGrid<T>, VelocityGrid<T>),
    r: T,
    mode: FluxMode,
) -> Result<BoundaryGhost<T>> {
    let (t_left, t_right) = walls;
    if !(t_left > T::zero() && t_right > T::zero()) {
        return Err(SolverError::InvalidParameter("wall temperatures must be positive".into()));
    }
    let (left_grid, right_grid) = grids;
    let m_left = unit_wall_maxwellian(t_left, &left_grid, r)?;
    let m_right = unit_wall_maxwellian(t_right, &right_grid, r)?;

    let incoming_left = half_flux(&left_grid, &m_left, mode)?.pos.rho;
    let incoming_right = half_flux(&right_grid, &m_right, mode)?.neg.rho;
    if !(incoming_left > T::zero()) {
        return Err(SolverError::DegenerateWall { side: "left" });
    }
    if !(incoming_right < T::zero()) {
        return Err(SolverError::DegenerateWall { side: "right" });
    }
    let outgoing_left = half_flux(&first.grid, &first.values, mode)?.neg.rho;
    let outgoing_right = half_flux(&last.grid, &last.values, mode)?.pos.rho;
    let rho_left = -outgoing_left / incoming_left;
    let rho_right = -outgoing_right / incoming_right;

    let ghost = |grid: VelocityGrid<T>, unit: Vec<T>, rho: T| -> Result<CellState<T>> {
        let values: Vec<T> = unit.into_iter().map(|x| rho * x).collect();
        let moments = moments(&values, &grid)?;
        Ok(CellState { grid, values, moments })
    };
    Ok(BoundaryGhost {
        left: ghost(left_grid, m_left, rho_left)?,
        right: ghost(right_grid, m_right, rho_right)?,
        wall_densities: Some((rho_left, rho_right)),
    })
}

/// Ghosts that copy existing cells (Neumann and periodic conditions).
pub fn copy_ghosts<T: Real>(cells: &[CellState<T>], periodic: bool) -> BoundaryGhost<T> {
    let first = cells.first().expect("at least one cell").clone();
    let last = cells.last().expect("at least one cell").clone();
    let (left, right) = if periodic { (last, first) } else { (first, last) };
    BoundaryGhost { left, right, wall_densities: None }
}
