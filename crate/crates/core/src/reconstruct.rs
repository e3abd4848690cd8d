//! Piecewise-polynomial reconstruction of nodal distributions in velocity.
//!
//! Each interval `[v_j, v_{j+1}]` of the source grid carries the ENO
//! polynomial through `q` nodes. The stencil starts from the two interval
//! endpoints and grows one node at a time toward the side whose divided
//! difference is smaller in magnitude (ties go left). When either candidate
//! would fall outside the grid the stencil stops growing, so pieces next to
//! the grid ends have lower degree. Outside `[vmin, vmax]` the
//! reconstruction is zero.

use crate::error::{Result, SolverError};
use crate::grid::{MomentVector, VelocityGrid};
use crate::num::Real;

/// Largest supported stencil size.
pub const MAX_POINTS: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Piece<T> {
    start: usize,
    len: usize,
    coeffs: [T; MAX_POINTS],
}

/// Velocity weight for [`Reconstruction::integrate_moments`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentWeight {
    /// `m(v)`
    Density,
    /// `v+ m(v)`
    PositiveFlux,
    /// `v- m(v)`
    NegativeFlux,
}

/// ENO reconstruction `f̄` of nodal values on a velocity grid.
#[derive(Debug, Clone)]
pub struct Reconstruction<'a, T> {
    nodes: &'a [T],
    values: &'a [T],
    clamp: bool,
    pieces: Vec<Piece<T>>,
}

impl<'a, T: Real> Reconstruction<'a, T> {
    /// `points` is the stencil size: 2 is linear, 3 and 4 are the quadratic
    /// and cubic ENO interpolants.
    pub fn new(grid: &'a VelocityGrid<T>, values: &'a [T], points: usize) -> Result<Self> {
        Self::with_clamp(grid, values, points, false)
    }

    /// As [`Reconstruction::new`]; with `clamp` negative polynomial values
    /// are replaced by zero on evaluation.
    pub fn with_clamp(grid: &'a VelocityGrid<T>, values: &'a [T], points: usize, clamp: bool) -> Result<Self> {
        if !(2..=MAX_POINTS).contains(&points) {
            return Err(SolverError::InvalidParameter(format!(
                "interpolation stencil must have 2 to {MAX_POINTS} points, got {points}"
            )));
        }
        if values.len() != grid.len() {
            return Err(SolverError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        let nodes = grid.nodes();
        let k = nodes.len();

        // dd[l][i] = f[x_i, ..., x_{i+l}]
        let mut dd: Vec<Vec<T>> = Vec::with_capacity(points);
        dd.push(values.to_vec());
        for l in 1..points {
            let prev = &dd[l - 1];
            let row: Vec<T> =
                (0..k.saturating_sub(l)).map(|i| (prev[i + 1] - prev[i]) / (nodes[i + l] - nodes[i])).collect();
            dd.push(row);
        }

        let pieces = (0..k - 1)
            .map(|j| {
                let (mut lo, mut hi) = (j, j + 1);
                while hi - lo + 1 < points && lo > 0 && hi + 1 < k {
                    let level = hi - lo + 1;
                    let left = dd[level][lo - 1].abs();
                    let right = dd[level][lo].abs();
                    if left <= right {
                        lo -= 1;
                    } else {
                        hi += 1;
                    }
                }
                let len = hi - lo + 1;
                let mut coeffs = [T::zero(); MAX_POINTS];
                for (m, c) in coeffs.iter_mut().enumerate().take(len) {
                    *c = dd[m][lo];
                }
                Piece { start: lo, len, coeffs }
            })
            .collect();

        Ok(Self { nodes, values, clamp, pieces })
    }

    pub fn vmin(&self) -> T {
        self.nodes[0]
    }

    pub fn vmax(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index of the first node of the stencil used on interval `j`, and its
    /// length.
    pub fn stencil(&self, j: usize) -> (usize, usize) {
        let p = &self.pieces[j];
        (p.start, p.len)
    }

    fn locate(&self, v: T) -> usize {
        let count = self.nodes.partition_point(|&x| x <= v);
        count.saturating_sub(1).min(self.nodes.len() - 2)
    }

    #[inline]
    fn eval_piece(&self, j: usize, v: T) -> T {
        let p = &self.pieces[j];
        let x = &self.nodes[p.start..p.start + p.len];
        let mut acc = p.coeffs[p.len - 1];
        for m in (0..p.len - 1).rev() {
            acc = acc * (v - x[m]) + p.coeffs[m];
        }
        if self.clamp {
            acc.max(T::zero())
        } else {
            acc
        }
    }

    /// `f̄(v)`: zero outside the grid, the nodal value at a node, the ENO
    /// polynomial of the bracketing interval otherwise. Points within a few
    /// ulps of the grid width outside an end node count as that node, so a
    /// grid rebuilt from rounded moments does not lose its end values.
    pub fn eval(&self, v: T) -> T {
        let (lo, hi) = (self.vmin(), self.vmax());
        let slack = T::lit(64.0) * T::epsilon() * (hi - lo);
        let v = if v < lo && v >= lo - slack {
            lo
        } else if v > hi && v <= hi + slack {
            hi
        } else {
            v
        };
        if !(v >= lo && v <= hi) {
            return T::zero();
        }
        let j = self.locate(v);
        if v == self.nodes[j] {
            return self.values[j];
        }
        if v == self.nodes[j + 1] {
            return self.values[j + 1];
        }
        self.eval_piece(j, v)
    }

    /// Exact integral over the real line of `weight(v) f̄(v)`.
    ///
    /// Each piece times the weight is a polynomial of degree at most 6, so
    /// four-point Gauss–Legendre on every interval (split at `v = 0` for the
    /// half-range weights) is exact. With clamping enabled the result is a
    /// quadrature approximation.
    pub fn integrate_moments(&self, weight: MomentWeight) -> MomentVector<T> {
        let mut acc = MomentVector::zero();
        for j in 0..self.pieces.len() {
            let (a, b) = (self.nodes[j], self.nodes[j + 1]);
            let (lo, hi) = match weight {
                MomentWeight::Density => (a, b),
                MomentWeight::PositiveFlux => (a.max(T::zero()), b),
                MomentWeight::NegativeFlux => (a, b.min(T::zero())),
            };
            if lo >= hi {
                continue;
            }
            let polynomial_weight = weight != MomentWeight::Density;
            acc += self.gauss_legendre(j, lo, hi, polynomial_weight);
        }
        acc
    }

    /// `∫ f̄ dv`.
    pub fn integrate(&self) -> T {
        self.integrate_moments(MomentWeight::Density).rho
    }

    fn gauss_legendre(&self, j: usize, lo: T, hi: T, times_v: bool) -> MomentVector<T> {
        const X: [f64; 4] =
            [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
        const W: [f64; 4] =
            [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
        let half_len = T::half() * (hi - lo);
        let mid = T::half() * (hi + lo);
        let mut acc = MomentVector::zero();
        for (&x, &w) in X.iter().zip(&W) {
            let v = mid + half_len * T::lit(x);
            let mut a = T::lit(w) * half_len * self.eval_piece(j, v);
            if times_v {
                a = a * v;
            }
            acc.rho = acc.rho + a;
            acc.momentum = acc.momentum + v * a;
            acc.energy = acc.energy + T::half() * v * v * a;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{moments, weighted_moments};
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, k: usize) -> VelocityGrid<f64> {
        VelocityGrid::uniform(lo, hi, k).unwrap()
    }

    #[test]
    fn zero_outside_and_nodal_inside() {
        let g = grid(-1.0, 2.0, 7);
        let f: Vec<f64> = g.nodes().iter().map(|v| 1.0 + v * v).collect();
        let r = Reconstruction::new(&g, &f, 4).unwrap();
        assert_eq!(r.eval(2.0001), 0.0);
        assert_eq!(r.eval(-1.5), 0.0);
        for (&v, &x) in g.nodes().iter().zip(&f) {
            assert_eq!(r.eval(v), x);
        }
        // rounding-level overshoot of an end node
        assert_eq!(r.eval(2.0 + 4.0 * f64::EPSILON), f[6]);
        assert_eq!(r.eval(-1.0 - 4.0 * f64::EPSILON), f[0]);
    }

    #[test]
    fn rejects_bad_stencil() {
        let g = grid(0.0, 1.0, 4);
        assert!(Reconstruction::new(&g, &[0.0; 4], 5).is_err());
        assert!(Reconstruction::new(&g, &[0.0; 4], 1).is_err());
        assert!(Reconstruction::new(&g, &[0.0; 3], 2).is_err());
    }

    #[test]
    fn cubic_is_reproduced() {
        let g = grid(-3.0, 4.0, 15);
        let p = |v: f64| 0.3 - 1.1 * v + 0.25 * v * v - 0.07 * v * v * v;
        let f: Vec<f64> = g.nodes().iter().map(|&v| p(v)).collect();
        let r = Reconstruction::new(&g, &f, 4).unwrap();
        // interior intervals carry a full 4-point stencil
        let (a, b) = (g.nodes()[2], g.nodes()[12]);
        for i in 0..100 {
            let v = a + (b - a) * (i as f64 + 0.5) / 100.0;
            assert!((r.eval(v) - p(v)).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_pieces_lose_degree() {
        let g = grid(0.0, 1.0, 8);
        let f: Vec<f64> = g.nodes().iter().map(|v| v.powi(3)).collect();
        let r = Reconstruction::new(&g, &f, 4).unwrap();
        assert_eq!(r.stencil(0), (0, 2));
        assert_eq!(r.stencil(6), (6, 2));
        assert_eq!(r.stencil(3).1, 4);
    }

    #[test]
    fn eno_avoids_the_jump() {
        // step between nodes 4 and 5: the left interval stencil must not
        // reach across it
        let g = grid(0.0, 9.0, 10);
        let f = [1.0, 1.0, 1.0, 1.0, 1.0, 5.0, 5.0, 5.0, 5.0, 5.0];
        let r = Reconstruction::new(&g, &f, 4).unwrap();
        let (s, l) = r.stencil(2);
        assert!(s + l - 1 <= 4);
        assert_eq!(r.eval(2.5), 1.0);
        assert_eq!(r.eval(6.5), 5.0);
    }

    #[test]
    fn hat_function_integrals() {
        let g = grid(-1.0, 1.0, 3);
        let f = [0.0, 1.0, 0.0];
        let r = Reconstruction::new(&g, &f, 2).unwrap();
        assert!((r.integrate() - 1.0).abs() < 1e-15);
        let pos = r.integrate_moments(MomentWeight::PositiveFlux);
        let neg = r.integrate_moments(MomentWeight::NegativeFlux);
        // ∫_0^1 v (1-v) dv = 1/6
        assert!((pos.rho - 1.0 / 6.0).abs() < 1e-15);
        assert!((neg.rho + 1.0 / 6.0).abs() < 1e-15);
        let z = Reconstruction::new(&g, &[0.0; 3], 4).unwrap();
        assert_eq!(z.integrate_moments(MomentWeight::Density), MomentVector::zero());
    }

    #[test]
    fn exact_moments_approach_quadrature() {
        let err = |k: usize| {
            let g = grid(-6.0, 7.0, k);
            let f: Vec<f64> = g.nodes().iter().map(|v| (-(v - 0.5) * (v - 0.5) / 2.0).exp()).collect();
            let r = Reconstruction::new(&g, &f, 2).unwrap();
            let exact = r.integrate_moments(MomentWeight::PositiveFlux);
            let quad = weighted_moments(&f, &g, |v: f64| v.max(0.0)).unwrap();
            (exact.energy - quad.energy).abs()
        };
        // linear pieces: the difference to the trapezoid rule is O(dv^2)
        let (e1, e2) = (err(40), err(79));
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
        let g = grid(-6.0, 7.0, 200);
        let f: Vec<f64> = g.nodes().iter().map(|v| (-(v - 0.5) * (v - 0.5) / 2.0).exp()).collect();
        let r = Reconstruction::new(&g, &f, 4).unwrap();
        let a = r.integrate_moments(MomentWeight::Density);
        let b = moments(&f, &g).unwrap();
        assert!((a.rho - b.rho).abs() < 1e-6 * b.rho);
    }

    proptest! {
        #[test]
        fn linear_reconstruction_keeps_sign(vals in prop::collection::vec(0.0f64..10.0, 2..30), v in -1.0f64..2.0) {
            let g = grid(0.0, 1.0, vals.len());
            let r = Reconstruction::new(&g, &vals, 2).unwrap();
            prop_assert!(r.eval(v) >= 0.0);
        }

        #[test]
        fn constant_shift_commutes(vals in prop::collection::vec(-5.0f64..5.0, 6..20), c in -3.0f64..3.0, t in 0.0f64..1.0) {
            let g = grid(-2.0, 2.0, vals.len());
            let shifted: Vec<f64> = vals.iter().map(|x| x + c).collect();
            let a = Reconstruction::new(&g, &vals, 4).unwrap();
            let b = Reconstruction::new(&g, &shifted, 4).unwrap();
            let v = -2.0 + 4.0 * t;
            prop_assert!((b.eval(v) - a.eval(v) - c).abs() < 1e-9);
        }

        #[test]
        fn continuous_at_nodes(vals in prop::collection::vec(-5.0f64..5.0, 5..20), q in 2usize..=4, j in 1usize..4) {
            let g = grid(-2.0, 2.0, vals.len());
            let r = Reconstruction::new(&g, &vals, q).unwrap();
            let v = g.nodes()[j];
            let eps = 1e-9;
            prop_assert!((r.eval(v - eps) - vals[j]).abs() < 1e-6);
            prop_assert!((r.eval(v + eps) - vals[j]).abs() < 1e-6);
        }

        #[test]
        fn nonnegative_linear_data_is_realizable(vals in prop::collection::vec(0.0f64..10.0, 3..30)) {
            prop_assume!(vals.iter().any(|&x| x > 0.1));
            let g = grid(-3.0, 4.0, vals.len());
            let r = Reconstruction::new(&g, &vals, 2).unwrap();
            let m = r.integrate_moments(MomentWeight::Density);
            prop_assert!(m.rho > 0.0);
            prop_assert!(m.temperature(1.0) > 0.0);
        }
    }
}
