//! Macroscopic profiles and the measurements taken on them.

use crate::error::{Result, SolverError};
use crate::grid::MomentVector;
use crate::num::Real;

/// Primitive variables of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRecord<T> {
    pub x: T,
    pub rho: T,
    pub u: T,
    pub temperature: T,
    pub pressure: T,
}

impl<T: Real> ProfileRecord<T> {
    pub fn from_moments(x: T, m: &MomentVector<T>, r: T) -> Self {
        Self { x, rho: m.rho, u: m.velocity(), temperature: m.temperature(r), pressure: m.pressure(r) }
    }

    pub fn field(&self, f: Field) -> T {
        match f {
            Field::Rho => self.rho,
            Field::U => self.u,
            Field::Temperature => self.temperature,
            Field::Pressure => self.pressure,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Rho,
    U,
    Temperature,
    Pressure,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::Rho, Field::U, Field::Temperature, Field::Pressure];

    pub fn name(self) -> &'static str {
        match self {
            Field::Rho => "rho",
            Field::U => "u",
            Field::Temperature => "T",
            Field::Pressure => "p",
        }
    }
}

/// Records of a whole row of cells.
pub type Profile = Vec<ProfileRecord<f64>>;

pub fn profile<T: Real>(centers: &[T], moments: &[MomentVector<T>], r: T) -> Vec<ProfileRecord<T>> {
    centers.iter().zip(moments).map(|(&x, m)| ProfileRecord::from_moments(x, m, r)).collect()
}

/// Relative errors of one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldError {
    /// `max |a - b| / max |b|`.
    pub linf: f64,
    /// `sqrt(sum (a - b)^2 / sum b^2)`.
    pub l2: f64,
}

/// Relative errors of `a` against the reference `b` (same length).
pub fn relative_errors(a: &[f64], b: &[f64]) -> Result<FieldError> {
    if a.len() != b.len() {
        return Err(SolverError::LengthMismatch { expected: b.len(), got: a.len() });
    }
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    let ratio = |n: f64, d: f64| {
        if d > 0.0 {
            n / d
        } else if n == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    Ok(FieldError { linf: ratio(diff, scale), l2: ratio(num, den).sqrt() })
}

/// Linear interpolation of `(xs, ys)` at `x`, clamped at the ends. `xs`
/// must be increasing.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.partition_point(|&p| p <= x) {
        0 => ys[0],
        n if n == xs.len() => ys[n - 1],
        j => {
            let (x0, x1) = (xs[j - 1], xs[j]);
            ys[j - 1] + (ys[j] - ys[j - 1]) * (x - x0) / (x1 - x0)
        }
    }
}

/// Brings two profiles onto common abscissae: unchanged when they match,
/// otherwise the finer one is interpolated onto the coarser one.
pub fn align(a: &[ProfileRecord<f64>], b: &[ProfileRecord<f64>]) -> Result<(Profile, Profile)> {
    if a.is_empty() || b.is_empty() {
        return Err(SolverError::InvalidParameter("empty profile".into()));
    }
    let same = a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p.x - q.x).abs() <= 1e-12 * p.x.abs().max(1.0));
    if same {
        return Ok((a.to_vec(), b.to_vec()));
    }
    let span = |p: &[ProfileRecord<f64>]| (p[0].x, p[p.len() - 1].x);
    let ((a0, a1), (b0, b1)) = (span(a), span(b));
    let tol = 0.5 * ((a1 - a0) / a.len() as f64).max((b1 - b0) / b.len() as f64);
    if (a0 - b0).abs() > tol || (a1 - b1).abs() > tol {
        return Err(SolverError::InvalidParameter(format!("incompatible domains [{a0}, {a1}] and [{b0}, {b1}]")));
    }
    let resample = |fine: &[ProfileRecord<f64>], coarse: &[ProfileRecord<f64>]| -> Vec<ProfileRecord<f64>> {
        let xs: Vec<f64> = fine.iter().map(|p| p.x).collect();
        let col = |f: Field| -> Vec<f64> { fine.iter().map(|p| p.field(f)).collect() };
        let (rho, u, t, p) = (col(Field::Rho), col(Field::U), col(Field::Temperature), col(Field::Pressure));
        coarse
            .iter()
            .map(|c| ProfileRecord {
                x: c.x,
                rho: interpolate(&xs, &rho, c.x),
                u: interpolate(&xs, &u, c.x),
                temperature: interpolate(&xs, &t, c.x),
                pressure: interpolate(&xs, &p, c.x),
            })
            .collect()
    };
    if a.len() >= b.len() {
        Ok((resample(a, b), b.to_vec()))
    } else {
        Ok((a.to_vec(), resample(b, a)))
    }
}

/// Errors of every field of `a` against `b`.
pub fn compare_profiles(a: &[ProfileRecord<f64>], b: &[ProfileRecord<f64>]) -> Result<Vec<(Field, FieldError)>> {
    let (a, b) = align(a, b)?;
    Field::ALL
        .iter()
        .map(|&f| {
            let col = |p: &[ProfileRecord<f64>]| p.iter().map(|r| r.field(f)).collect::<Vec<_>>();
            relative_errors(&col(&a), &col(&b)).map(|e| (f, e))
        })
        .collect()
}

fn mode(gaps: &[usize]) -> Option<usize> {
    let mut counts = std::collections::BTreeMap::new();
    for &g in gaps {
        *counts.entry(g).or_insert(0usize) += 1;
    }
    // smallest gap wins ties
    counts
        .into_iter()
        .fold(None, |best: Option<(usize, usize)>, (g, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((g, c)),
        })
        .map(|(g, _)| g)
}

/// Width of the constant segments of a uniformly sampled profile: adjacent
/// cells whose difference is below `1e-9 max |values|` are merged and the
/// modal segment length (in cells, longer than one cell) times `dx` is
/// returned.
pub fn flat_segment_width(values: &[f64], dx: f64) -> Option<f64> {
    let scale = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut lengths = Vec::new();
    let mut run = 1;
    for w in values.windows(2) {
        if (w[1] - w[0]).abs() < 1e-9 * scale {
            run += 1;
        } else {
            if run > 1 {
                lengths.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        lengths.push(run);
    }
    mode(&lengths).map(|n| n as f64 * dx)
}

/// Plateau width of a profile made of smeared steps: the modal distance
/// between successive local maxima of `|v[i+1] - v[i]|` (ignoring maxima
/// below `1e-6` of the largest), times `dx`.
pub fn plateau_width(values: &[f64], dx: f64) -> Option<f64> {
    let d: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let floor = 1e-6 * d.iter().cloned().fold(0.0, f64::max);
    let peaks: Vec<usize> =
        (1..d.len().saturating_sub(1)).filter(|&i| d[i] > floor && d[i] > d[i - 1] && d[i] >= d[i + 1]).collect();
    let gaps: Vec<usize> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    mode(&gaps).map(|n| n as f64 * dx)
}
