//! One-dimensional BGK solvers on local and global discrete velocity grids.
//!
//! [`scheme_ldv`] gives every space cell its own velocity grid, rebuilt each
//! step from the cell's velocity and temperature; [`scheme_dvm`] is the
//! classical method on one grid shared by all cells. Both are generic over
//! the floating-point type; the aliases below fix it to `f64` or `f32`.

// `!(a > b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary;
pub mod cases;
pub mod error;
pub mod grid;
pub mod maxwellian;
pub mod num;
pub mod profile;
pub mod reconstruct;
pub mod scheme_dvm;
pub mod scheme_ldv;
pub mod simulation;

pub use error::{Result, SolverError};
pub use num::Real;

pub type VelocityGridF64 = grid::VelocityGrid<f64>;
pub type VelocityGridF32 = grid::VelocityGrid<f32>;
pub type MomentVectorF64 = grid::MomentVector<f64>;
pub type MomentVectorF32 = grid::MomentVector<f32>;
pub type GasModelF64 = maxwellian::GasModel<f64>;
pub type GasModelF32 = maxwellian::GasModel<f32>;
pub type CellStateF64 = scheme_ldv::CellState<f64>;
pub type CellStateF32 = scheme_ldv::CellState<f32>;
pub type DvmStateF64 = scheme_dvm::DvmState<f64>;
pub type DvmStateF32 = scheme_dvm::DvmState<f32>;
pub type CaseSpecF64 = cases::CaseSpec<f64>;
pub type CaseSpecF32 = cases::CaseSpec<f32>;
pub type SimulationF64 = simulation::Simulation<f64>;
pub type SimulationF32 = simulation::Simulation<f32>;
