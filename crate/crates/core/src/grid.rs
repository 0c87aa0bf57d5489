//! Spatial and temporal grids and the sampled functions living on them.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Uniform interior grid on (0, L): xᵢ = (i+1)h, h = L/(N_x+1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domain1D {
    pub length: f64,
    pub points: usize,
}

impl Domain1D {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return invalid(format!("domain length must be positive, got {length}"));
        }
        if points < 3 {
            return invalid(format!("need at least 3 interior grid points, got {points}"));
        }
        Ok(Self { length, points })
    }

    pub fn h(&self) -> f64 {
        self.length / (self.points as f64 + 1.0)
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 1.0) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Index of the node closest to x.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = (x / self.h()).round() as i64 - 1;
        k.clamp(0, self.points as i64 - 1) as usize
    }

    /// Index of the node equal to x up to rounding, if there is one.
    pub fn exact_index(&self, x: f64) -> Option<usize> {
        let i = self.nearest_index(x);
        ((self.x(i) - x).abs() <= 1e-12 * self.length).then_some(i)
    }

    /// Samples f at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::new(self.nodes().into_iter().map(f).collect())
    }
}

/// Real function sampled on the interior nodes of a [`Domain1D`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::GridMismatch {
                expected,
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Uniform time grid tⱼ = jT/M, j = 0..=M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_final: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return invalid(format!("final time must be positive, got {t_final}"));
        }
        if steps == 0 {
            return invalid("time grid needs at least one step");
        }
        Ok(Self { t_final, steps })
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, j: usize) -> f64 {
        if j == self.steps {
            self.t_final
        } else {
            j as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| self.t(j)).collect()
    }

    /// Cell midpoints (j + 1/2)Δt, j = 0..M-1.
    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.steps).map(|j| (j as f64 + 0.5) * self.dt()).collect()
    }
}

/// Values on a set of time points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::GridMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        Ok(Self { times, values })
    }

    pub fn from_fn(times: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        let values = times.iter().map(|&t| f(t)).collect();
        Self { times, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Euclidean norm scaled by √Δt on a uniform grid (discrete L²).
    pub fn l2_norm(&self) -> f64 {
        if self.times.len() < 2 {
            return self.max_abs();
        }
        let dt = self.times[1] - self.times[0];
        (dt * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs_diff(&self, other: &TimeSeries) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// First derivative at the nodes of the not-a-knot cubic spline through
/// equally spaced samples.
pub fn spline_derivative(values: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 4 {
        return invalid(format!("spline differentiation needs at least 4 samples, got {n}"));
    }
    let m = n - 1;
    let h2 = dt * dt;
    // second derivatives M_1..M_{m-1}; not-a-knot turns the first and last rows into 6 M
    let k = m - 1;
    let rhs: Vec<f64> = (1..m)
        .map(|i| 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2)
        .collect();
    let mut sub = vec![1.0; k.saturating_sub(1)];
    let mut sup = vec![1.0; k.saturating_sub(1)];
    let mut diag = vec![4.0; k];
    diag[0] = 6.0;
    diag[k - 1] = 6.0;
    if k >= 2 {
        sup[0] = 0.0;
        sub[k - 2] = 0.0;
    }
    let second = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
    let mut mm = vec![0.0; n];
    mm[1..m].copy_from_slice(&second);
    if m >= 3 {
        mm[0] = 2.0 * mm[1] - mm[2];
        mm[m] = 2.0 * mm[m - 1] - mm[m - 2];
    } else {
        mm[0] = mm[1];
        mm[m] = mm[1];
    }
    let mut d = vec![0.0; n];
    for i in 0..m {
        d[i] = (values[i + 1] - values[i]) / dt - dt * (2.0 * mm[i] + mm[i + 1]) / 6.0;
    }
    d[m] = (values[m] - values[m - 1]) / dt + dt * (mm[m - 1] + 2.0 * mm[m]) / 6.0;
    Ok(d)
}

/// Thomas algorithm for a general tridiagonal system; `sub[i]` couples row
/// i+1 to unknown i and `sup[i]` couples row i to unknown i+1.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || sub.len() + 1 != n || sup.len() + 1 != n {
        return invalid("tridiagonal system has inconsistent sizes");
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    for i in 0..n {
        if i > 0 {
            beta = diag[i] - sub[i - 1] * c[i - 1];
        }
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Singular(format!("zero pivot at row {i}")));
        }
        c[i] = if i + 1 < n { sup[i] / beta } else { 0.0 };
        let prev = if i > 0 { sub[i - 1] * d[i - 1] } else { 0.0 };
        d[i] = (rhs[i] - prev) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}
