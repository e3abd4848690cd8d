//! Velocity grids, macroscopic moment vectors and moment quadratures.

use std::ops::{Add, AddAssign, Mul, Sub};

use crate::error::{Result, SolverError};
use crate::num::Real;

/// Span factor of the local grids: nodes cover `u ± 4 sqrt(RT)`.
pub const DEFAULT_SPAN: f64 = 4.0;

/// Conserved densities `(rho, rho u, E)` of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentVector<T> {
    pub rho: T,
    pub momentum: T,
    pub energy: T,
}

impl<T: Real> MomentVector<T> {
    pub fn new(rho: T, momentum: T, energy: T) -> Self {
        Self { rho, momentum, energy }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Builds the conserved vector from density, velocity and temperature,
    /// with `E = rho u^2 / 2 + rho R T / 2`.
    pub fn from_primitive(rho: T, u: T, temperature: T, r: T) -> Self {
        let half = T::half();
        Self::new(rho, rho * u, half * rho * u * u + half * rho * r * temperature)
    }

    pub fn velocity(&self) -> T {
        self.momentum / self.rho
    }

    /// Temperature from `E = rho u^2 / 2 + rho R T / 2`.
    pub fn temperature(&self, r: T) -> T {
        (T::two() * self.energy - self.momentum * self.momentum / self.rho) / (self.rho * r)
    }

    pub fn pressure(&self, r: T) -> T {
        self.rho * r * self.temperature(r)
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.momentum.is_finite() && self.energy.is_finite()
    }

    /// `rho > 0` and `T > 0`, all components finite.
    pub fn is_realizable(&self, r: T) -> bool {
        self.is_finite() && self.rho > T::zero() && self.temperature(r) > T::zero()
    }

    /// Returns `(u, T)`, or a negative-temperature error if the state is not
    /// realizable.
    pub fn velocity_temperature(&self, r: T) -> Result<(T, T)> {
        if !self.is_realizable(r) {
            return Err(SolverError::NegativeTemperature {
                temperature: self.temperature(r).as_f64(),
                rho: self.rho.as_f64(),
            });
        }
        Ok((self.velocity(), self.temperature(r)))
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.rho, self.momentum, self.energy]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl<T: Real> Add for MomentVector<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.rho + o.rho, self.momentum + o.momentum, self.energy + o.energy)
    }
}

impl<T: Real> AddAssign for MomentVector<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for MomentVector<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.rho - o.rho, self.momentum - o.momentum, self.energy - o.energy)
    }
}

impl<T: Real> Mul<T> for MomentVector<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.rho * s, self.momentum * s, self.energy * s)
    }
}

/// Which end of a grid to extend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Ordered velocity nodes with trapezoidal quadrature weights.
///
/// Weights carry the spacing (`dv/2` at the ends, `dv` inside for a uniform
/// grid), so a moment is a plain weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    spacing: Option<T>,
}

impl<T: Real> VelocityGrid<T> {
    /// `k` uniformly spaced nodes from `vmin` to `vmax` inclusive.
    pub fn uniform(vmin: T, vmax: T, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(SolverError::DegenerateGrid(format!("need at least 2 nodes, got {k}")));
        }
        if !(vmin.is_finite() && vmax.is_finite()) || vmin >= vmax {
            return Err(SolverError::DegenerateGrid(format!(
                "bounds [{:e}, {:e}] do not form an interval",
                vmin.as_f64(),
                vmax.as_f64()
            )));
        }
        let dv = (vmax - vmin) / T::from_usize(k - 1).unwrap();
        let mut nodes: Vec<T> = (0..k).map(|j| vmin + T::from_usize(j).unwrap() * dv).collect();
        nodes[k - 1] = vmax;
        let mut weights = vec![dv; k];
        weights[0] = dv * T::half();
        weights[k - 1] = dv * T::half();
        Ok(Self { nodes, weights, spacing: Some(dv) })
    }

    /// Arbitrary strictly increasing nodes, composite trapezoid weights.
    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(SolverError::DegenerateGrid(format!("need at least 2 nodes, got {}", nodes.len())));
        }
        if nodes.iter().any(|v| !v.is_finite()) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SolverError::DegenerateGrid("nodes must be finite and strictly increasing".into()));
        }
        let weights = trapezoid_weights(&nodes);
        Ok(Self { nodes, weights, spacing: None })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn vmin(&self) -> T {
        self.nodes[0]
    }

    pub fn vmax(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    /// Node spacing for grids built by [`VelocityGrid::uniform`] (kept
    /// through [`extend_grid`]).
    pub fn dv(&self) -> Option<T> {
        self.spacing
    }

    pub fn is_uniform(&self) -> bool {
        self.spacing.is_some()
    }

    /// Largest `|v|` over the nodes.
    pub fn max_abs(&self) -> T {
        self.vmin().abs().max(self.vmax().abs())
    }
}

fn trapezoid_weights<T: Real>(nodes: &[T]) -> Vec<T> {
    let k = nodes.len();
    let half = T::half();
    (0..k)
        .map(|j| {
            let left = if j > 0 { nodes[j] - nodes[j - 1] } else { T::zero() };
            let right = if j + 1 < k { nodes[j + 1] - nodes[j] } else { T::zero() };
            half * (left + right)
        })
        .collect()
}

fn check_len<T: Real>(values: &[T], grid: &VelocityGrid<T>) -> Result<()> {
    if values.len() != grid.len() {
        return Err(SolverError::LengthMismatch { expected: grid.len(), got: values.len() });
    }
    Ok(())
}

/// Quadrature `sum_k m(v_k) f_k w_k` with `m(v) = (1, v, v^2/2)`.
pub fn moments<T: Real>(values: &[T], grid: &VelocityGrid<T>) -> Result<MomentVector<T>> {
    weighted_moments(values, grid, |_| T::one())
}

/// Quadrature `sum_k m(v_k) g(v_k) f_k w_k` for a velocity weight `g`
/// (for instance the positive or negative part of `v`).
pub fn weighted_moments<T: Real>(values: &[T], grid: &VelocityGrid<T>, g: impl Fn(T) -> T) -> Result<MomentVector<T>> {
    check_len(values, grid)?;
    let half = T::half();
    let mut acc = MomentVector::zero();
    for ((&v, &w), &f) in grid.nodes.iter().zip(&grid.weights).zip(values) {
        let a = g(v) * f * w;
        acc.rho = acc.rho + a;
        acc.momentum = acc.momentum + v * a;
        acc.energy = acc.energy + half * v * v * a;
    }
    Ok(acc)
}

/// `(u - c sqrt(RT), u + c sqrt(RT))`.
pub fn maxwellian_support_bounds<T: Real>(u: T, temperature: T, r: T, span: T) -> Result<(T, T)> {
    if temperature < T::zero() || temperature.is_nan() {
        return Err(SolverError::NegativeTemperature { temperature: temperature.as_f64(), rho: f64::NAN });
    }
    if r <= T::zero() || span <= T::zero() {
        return Err(SolverError::InvalidParameter("gas constant and span must be positive".into()));
    }
    let half_width = span * (r * temperature).sqrt();
    Ok((u - half_width, u + half_width))
}

/// Uniform `k`-node grid covering the support of the local Maxwellian of `u`.
pub fn build_local_grid<T: Real>(u: &MomentVector<T>, k: usize, r: T, span: T) -> Result<VelocityGrid<T>> {
    let (vel, temp) = u.velocity_temperature(r)?;
    let (lo, hi) = maxwellian_support_bounds(vel, temp, r, span)?;
    VelocityGrid::uniform(lo, hi, k)
}

/// Number of nodes of the coarsest uniform grid on `[vmin, vmax]` whose step
/// does not exceed `dv_max`.
pub fn global_node_count<T: Real>(vmin: T, vmax: T, dv_max: T) -> usize {
    let cells = ((vmax - vmin) / dv_max).as_f64();
    // guard against `8.000000000000002` style round-up
    (cells * (1.0 - 1e-12)).ceil() as usize + 1
}

/// Global grid covering every state in `extremes` (pairs `(u, T)`), with a
/// step no larger than the smallest `sqrt(RT)`.
pub fn build_global_grid<T: Real>(extremes: &[(T, T)], r: T, span: T) -> Result<VelocityGrid<T>> {
    if extremes.is_empty() {
        return Err(SolverError::DegenerateGrid("no states given for the global grid".into()));
    }
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut dv_max = T::infinity();
    for &(u, temp) in extremes {
        let (a, b) = maxwellian_support_bounds(u, temp, r, span)?;
        lo = lo.min(a);
        hi = hi.max(b);
        if temp > T::zero() {
            dv_max = dv_max.min((r * temp).sqrt());
        }
    }
    if !dv_max.is_finite() {
        return Err(SolverError::DegenerateGrid("all temperatures are zero".into()));
    }
    VelocityGrid::uniform(lo, hi, global_node_count(lo, hi, dv_max))
}

/// Appends one node on `side`, at the spacing of that end of the grid.
pub fn extend_grid<T: Real>(grid: &VelocityGrid<T>, side: Side) -> VelocityGrid<T> {
    let k = grid.len();
    let mut nodes = Vec::with_capacity(k + 1);
    match side {
        Side::Left => {
            let step = grid.nodes[1] - grid.nodes[0];
            nodes.push(grid.nodes[0] - step);
            nodes.extend_from_slice(&grid.nodes);
        }
        Side::Right => {
            let step = grid.nodes[k - 1] - grid.nodes[k - 2];
            nodes.extend_from_slice(&grid.nodes);
            nodes.push(grid.nodes[k - 1] + step);
        }
    }
    let weights = trapezoid_weights(&nodes);
    VelocityGrid { nodes, weights, spacing: grid.spacing }
}
