//! Continuous Maxwellians and the moment-matched discrete Maxwellian.
//!
//! The discrete Maxwellian on a grid is `M_k = exp(alpha . m(v_k))` with
//! `alpha` chosen so that its quadrature moments equal the target moments.
//! The Newton solve runs in the frame `xi = (v - u) / sqrt(RT)`, where the
//! target is always `(1, 0, 1/2)` and the Jacobian is well scaled whatever
//! the physical velocity range.

use crate::error::{Result, SolverError};
use crate::grid::{MomentVector, VelocityGrid};
use crate::num::Real;

/// Collision regime of the BGK relaxation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Finite relaxation time `tau = C T^omega / rho`.
    Collisional,
    /// `tau = 0`: the distribution is projected onto the Maxwellian.
    Fluid,
    /// `tau = infinity`: no relaxation.
    FreeTransport,
}

/// Gas constant and relaxation-time law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel<T> {
    pub r: T,
    pub c: T,
    pub omega: T,
    pub regime: Regime,
}

impl<T: Real> GasModel<T> {
    pub fn new(r: T, c: T, omega: T, regime: Regime) -> Result<Self> {
        if !(r > T::zero()) || c < T::zero() {
            return Err(SolverError::InvalidParameter("gas model needs R > 0 and C >= 0".into()));
        }
        Ok(Self { r, c, omega, regime })
    }

    /// `tau = C T^omega / rho`.
    pub fn relaxation_time(&self, u: &MomentVector<T>) -> T {
        self.c * u.temperature(self.r).powf(self.omega) / u.rho
    }
}

/// Coefficients of `exp(a0 + a1 v + a2 v^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellianParams<T> {
    pub alpha: [T; 3],
}

impl<T: Real> MaxwellianParams<T> {
    pub fn eval(&self, v: T) -> T {
        let [a0, a1, a2] = self.alpha;
        (a0 + v * (a1 + v * a2)).exp()
    }
}

/// Stopping rules for the discrete Maxwellian Newton iteration.
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Accepted residual, measured in the normalized frame (relative to
    /// `rho`, `rho sqrt(RT)` and `rho RT`).
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 50, tolerance: 1e-10 }
    }
}

/// Result of a successful discrete Maxwellian solve.
#[derive(Debug, Clone)]
pub struct DiscreteMaxwellian<T> {
    pub values: Vec<T>,
    pub params: MaxwellianParams<T>,
    pub residual: T,
    pub iterations: usize,
}

/// `rho / sqrt(2 pi R T) exp(-(v-u)^2 / (2 R T))`.
pub fn continuous_maxwellian<T: Real>(u: &MomentVector<T>, r: T, v: T) -> Result<T> {
    let (vel, temp) = u.velocity_temperature(r)?;
    let rt = r * temp;
    let d = v - vel;
    Ok(u.rho / (T::two() * T::PI() * rt).sqrt() * (-d * d / (T::two() * rt)).exp())
}

/// The continuous Maxwellian sampled at the nodes of `grid`.
pub fn sample_maxwellian<T: Real>(u: &MomentVector<T>, grid: &VelocityGrid<T>, r: T) -> Result<Vec<T>> {
    grid.nodes().iter().map(|&v| continuous_maxwellian(u, r, v)).collect()
}

/// Moment-matched discrete Maxwellian with default Newton options.
pub fn discrete_maxwellian<T: Real>(u: &MomentVector<T>, grid: &VelocityGrid<T>, r: T) -> Result<Vec<T>> {
    solve_discrete_maxwellian(u, grid, r, &NewtonOptions::default()).map(|d| d.values)
}

struct Frame<T> {
    xi: Vec<T>,
    w: Vec<T>,
}

impl<T: Real> Frame<T> {
    /// Residual `sum m(xi) h w - (1, 0, 1/2)` and `h`.
    fn residual(&self, beta: &[T; 3], h: &mut [T]) -> [T; 3] {
        let half = T::half();
        let mut g = [-T::one(), T::zero(), -half];
        for ((&x, &w), hk) in self.xi.iter().zip(&self.w).zip(h.iter_mut()) {
            let q = half * x * x;
            *hk = (beta[0] + beta[1] * x + beta[2] * q).exp();
            let a = *hk * w;
            g[0] = g[0] + a;
            g[1] = g[1] + x * a;
            g[2] = g[2] + q * a;
        }
        g
    }

    fn jacobian(&self, h: &[T]) -> [[T; 3]; 3] {
        let half = T::half();
        let mut j = [[T::zero(); 3]; 3];
        for ((&x, &w), &hk) in self.xi.iter().zip(&self.w).zip(h) {
            let m = [T::one(), x, half * x * x];
            let a = hk * w;
            for r in 0..3 {
                for c in r..3 {
                    j[r][c] = j[r][c] + m[r] * m[c] * a;
                }
            }
        }
        for r in 0..3 {
            for c in 0..r {
                j[r][c] = j[c][r];
            }
        }
        j
    }
}

fn norm_inf<T: Real>(g: &[T; 3]) -> T {
    g.iter().fold(T::zero(), |m, x| if x.is_nan() { T::infinity() } else { m.max(x.abs()) })
}

/// Gaussian elimination with partial pivoting.
fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[piv][col].abs() > T::zero()) || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for c in col..3 {
                a[row][c] = a[row][c] - f * a[col][c];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for c in row + 1..3 {
            s = s - a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Newton solve for `alpha` such that the quadrature moments of
/// `exp(alpha . m(v))` on `grid` equal `u`.
///
/// Starts from the continuous Maxwellian, halves the step while the residual
/// does not decrease, and keeps iterating past the tolerance until the
/// residual stops improving.
pub fn solve_discrete_maxwellian<T: Real>(
    u: &MomentVector<T>,
    grid: &VelocityGrid<T>,
    r: T,
    opts: &NewtonOptions,
) -> Result<DiscreteMaxwellian<T>> {
    let (vel, temp) = u.velocity_temperature(r)?;
    let s = (r * temp).sqrt();
    let frame = Frame {
        xi: grid.nodes().iter().map(|&v| (v - vel) / s).collect(),
        w: grid.weights().iter().map(|&w| w / s).collect(),
    };
    let tol = T::lit(opts.tolerance).max(T::lit(64.0) * T::epsilon());
    let floor = T::lit(4.0) * T::epsilon();

    let mut beta = [-T::half() * (T::two() * T::PI()).ln(), T::zero(), -T::one()];
    let mut h = vec![T::zero(); frame.xi.len()];
    let mut trial_h = h.clone();
    let mut g = frame.residual(&beta, &mut h);
    let mut res = norm_inf(&g);
    let mut iterations = 0;

    while iterations < opts.max_iterations && res > floor {
        iterations += 1;
        let jac = frame.jacobian(&h);
        let Some(step) = solve3(jac, [-g[0], -g[1], -g[2]]) else { break };
        let mut lambda = T::one();
        let mut improved = false;
        for _ in 0..40 {
            let trial = [beta[0] + lambda * step[0], beta[1] + lambda * step[1], beta[2] + lambda * step[2]];
            let tg = frame.residual(&trial, &mut trial_h);
            let tres = norm_inf(&tg);
            if tres < res {
                beta = trial;
                g = tg;
                res = tres;
                std::mem::swap(&mut h, &mut trial_h);
                improved = true;
                break;
            }
            lambda = lambda * T::half();
        }
        if !improved {
            break;
        }
    }

    if !(res <= tol) {
        return Err(SolverError::NewtonFailed { iterations, residual: res.as_f64() });
    }

    // back to physical variables: M = (rho / s) h
    let scale = u.rho / s;
    let values: Vec<T> = h.iter().map(|&x| scale * x).collect();
    let half = T::half();
    let a2 = half * beta[2] / (s * s);
    let a1 = beta[1] / s - T::two() * a2 * vel;
    let a0 = scale.ln() + beta[0] - beta[1] * vel / s + a2 * vel * vel;
    Ok(DiscreteMaxwellian { values, params: MaxwellianParams { alpha: [a0, a1, a2] }, residual: res, iterations })
}

/// Normalized moment residual of `values` against `u`, in the same units as
/// [`NewtonOptions::tolerance`].
pub fn moment_residual<T: Real>(values: &[T], grid: &VelocityGrid<T>, u: &MomentVector<T>, r: T) -> Result<T> {
    let m = crate::grid::moments(values, grid)?;
    let (vel, temp) = u.velocity_temperature(r)?;
    let s = (r * temp).sqrt();
    let d = m - *u;
    // same linear change of frame as the solver
    let r0 = d.rho / u.rho;
    let r1 = (d.momentum - vel * d.rho) / (u.rho * s);
    let r2 = (d.energy - vel * d.momentum + T::half() * vel * vel * d.rho) / (u.rho * s * s);
    Ok(r0.abs().max(r1.abs()).max(r2.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_local_grid, moments};
    use proptest::prelude::*;

    #[test]
    fn continuous_values() {
        let u = MomentVector::from_primitive(1.0f64, 0.0, 1.0, 1.0);
        let m0 = continuous_maxwellian(&u, 1.0, 0.0).unwrap();
        assert!((m0 - 0.398942280401432).abs() < 1e-14);
        assert_eq!(continuous_maxwellian(&u, 1.0, 1.0).unwrap(), continuous_maxwellian(&u, 1.0, -1.0).unwrap());
        let u2 = MomentVector::from_primitive(2.0f64, 0.3, 1.5, 2.0);
        let u1 = MomentVector::from_primitive(1.0, 0.3, 1.5, 2.0);
        for v in [-2.0, 0.1, 3.0] {
            let a = continuous_maxwellian(&u2, 2.0, v).unwrap();
            let b = continuous_maxwellian(&u1, 2.0, v).unwrap();
            assert!((a - 2.0 * b).abs() <= 1e-15 * a);
        }
        let bad = MomentVector::new(1.0, 0.0, -1.0);
        assert!(matches!(continuous_maxwellian(&bad, 1.0, 0.0), Err(SolverError::NegativeTemperature { .. })));
    }

    #[test]
    fn discrete_matches_moments() {
        let u = MomentVector::from_primitive(1e-4f64, 0.0, 0.00480208, 208.1);
        let g = build_local_grid(&u, 30, 208.1, 4.0).unwrap();
        let d = solve_discrete_maxwellian(&u, &g, 208.1, &NewtonOptions::default()).unwrap();
        assert!(d.residual < 1e-13);
        let m = moments(&d.values, &g).unwrap();
        assert!(((m.rho - u.rho) / u.rho).abs() < 1e-12);
        assert!(((m.energy - u.energy) / u.energy).abs() < 1e-12);
        assert!(d.values.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn discrete_tends_to_continuous_on_fine_grid() {
        let u = MomentVector::from_primitive(1.2, -0.5, 2.0, 1.0);
        let s = 2.0f64.sqrt();
        let g = VelocityGrid::uniform(-0.5 - 8.0 * s, -0.5 + 8.0 * s, 201).unwrap();
        let d = discrete_maxwellian(&u, &g, 1.0).unwrap();
        for (&v, &x) in g.nodes().iter().zip(&d) {
            let c = continuous_maxwellian(&u, 1.0, v).unwrap();
            if c > 1e-12 {
                assert!(((x - c) / c).abs() < 1e-6, "v={v} {x} {c}");
            }
        }
    }

    #[test]
    fn symmetric_grid_has_no_drift_coefficient() {
        let u = MomentVector::new(1.0f64, 0.0, 0.5);
        let g = VelocityGrid::uniform(-3.0, 3.0, 13).unwrap();
        let d = solve_discrete_maxwellian(&u, &g, 1.0, &NewtonOptions::default()).unwrap();
        assert!(d.params.alpha[1].abs() < 1e-12);
        assert!(d.params.alpha[2] < 0.0);
        for (&v, &x) in g.nodes().iter().zip(&d.values) {
            assert!((d.params.eval(v) - x).abs() <= 1e-12 * x);
        }
    }

    #[test]
    fn coarse_grid_failure_is_reported() {
        // a distribution much wider than the grid cannot be matched
        let u = MomentVector::from_primitive(1.0, 0.0, 100.0, 1.0);
        let g = VelocityGrid::uniform(-1.0, 1.0, 5).unwrap();
        let err = solve_discrete_maxwellian(&u, &g, 1.0, &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, SolverError::NewtonFailed { .. }));
    }

    #[test]
    fn single_precision_solve() {
        let u = MomentVector::<f32>::from_primitive(1.0, 0.2, 1.0, 1.0);
        let g = build_local_grid(&u, 20, 1.0, 4.0).unwrap();
        let d = solve_discrete_maxwellian(&u, &g, 1.0, &NewtonOptions::default()).unwrap();
        assert!(d.residual < 1e-5);
    }

    #[test]
    fn relaxation_time_law() {
        let gas = GasModel::new(208.1, 1.08e-9, -0.19, Regime::Collisional).unwrap();
        let u = MomentVector::from_primitive(1e-4f64, 0.0, 0.00480208, 208.1);
        let tau = gas.relaxation_time(&u);
        assert!((tau - 1.08e-9 * 0.00480208f64.powf(-0.19) / 1e-4).abs() < 1e-18);
    }

    proptest! {
        #[test]
        fn translation_covariance(shift in -50.0f64..50.0, u in -1.0f64..1.0, t in 0.2f64..3.0) {
            let m = MomentVector::from_primitive(0.7, u, t, 1.0);
            let g = VelocityGrid::uniform(-6.0, 7.0, 40).unwrap();
            let a = discrete_maxwellian(&m, &g, 1.0).unwrap();
            let ms = MomentVector::from_primitive(0.7, u + shift, t, 1.0);
            let gs = VelocityGrid::from_nodes(g.nodes().iter().map(|v| v + shift).collect()).unwrap();
            let b = discrete_maxwellian(&ms, &gs, 1.0).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-300));
            }
        }
    }
}
