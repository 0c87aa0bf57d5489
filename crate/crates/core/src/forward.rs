//! Spectral solvers for ∂ₜᵅu + Au = F: homogeneous evolution, Green
//! function, and separated sources ρ(t)g(x) in two independent forms.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{spline_derivative, Field, TimeGrid, TimeSeries};
use crate::io::csv_row;
use crate::mittag_leffler::mittag_leffler;
use crate::quadrature::{gl10, gl16, GaussLegendre};
use crate::special::{gamma, rgamma};
use crate::spectral::{project, EigenSystem};

/// Order α of the Caputo derivative, 0 < α ≤ 1. α = 1 is the classical
/// heat equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return invalid(format!("alpha must lie in (0, 1], got {alpha}"));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

/// Temporal factor ρ of a separated source, as node values and node
/// derivatives on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Rho {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl Rho {
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Self {
        let t = grid.nodes();
        Self {
            grid,
            values: t.iter().map(|&s| f(s)).collect(),
            derivs: t.iter().map(|&s| df(s)).collect(),
        }
    }

    /// Node samples with derivatives taken from the not-a-knot cubic spline.
    pub fn from_samples(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let derivs = if values.len() >= 4 {
            spline_derivative(&values, grid.dt())?
        } else {
            let slope = (values[values.len() - 1] - values[0]) / grid.t_final;
            vec![slope; values.len()]
        };
        Ok(Self { grid, values, derivs })
    }

    pub fn zero(grid: TimeGrid) -> Self {
        Self::from_fn(grid, |_| 0.0, |_| 0.0)
    }

    pub fn rho0(&self) -> f64 {
        self.values[0]
    }

    pub fn series(&self) -> TimeSeries {
        TimeSeries {
            times: self.grid.nodes(),
            values: self.values.clone(),
        }
    }
}

/// Separated source F(x, t) = ρ(t) g(x).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub rho: Rho,
    pub g: Field,
}

/// u(xᵢ, tⱼ) at row i, column j.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSolution {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub values: Array2<f64>,
    pub alpha: f64,
}

impl SpaceTimeSolution {
    pub fn trace(&self, i: usize) -> TimeSeries {
        TimeSeries {
            times: self.t.clone(),
            values: self.values.row(i).to_vec(),
        }
    }

    pub fn snapshot(&self, j: usize) -> Field {
        Field::new(self.values.column(j).to_vec())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// First row holds the times, first column the nodes.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "x\\t,{}", csv_row(self.t.iter().copied()))?;
        for (i, x) in self.x.iter().enumerate() {
            writeln!(out, "{}", csv_row(std::iter::once(*x).chain(self.values.row(i).iter().copied())))?;
        }
        Ok(())
    }
}

/// E_{α,1}(-λ t^α), equal to 1 at t = 0.
pub fn relaxation(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    mittag_leffler(alpha, 1.0, -lambda * t.powf(alpha))
}

fn active(coeffs: &[f64]) -> Vec<bool> {
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    coeffs.iter().map(|c| c.abs() > 1e-15 * scale).collect()
}

fn synthesize(es: &EigenSystem, amps: Vec<Option<Vec<f64>>>, times: Vec<f64>, alpha: f64) -> SpaceTimeSolution {
    let nt = times.len();
    let mut u = Array2::<f64>::zeros((es.mode_count(), nt));
    for (n, a) in amps.into_iter().enumerate() {
        if let Some(a) = a {
            u.row_mut(n).assign(&ndarray::ArrayView1::from(&a[..]));
        }
    }
    SpaceTimeSolution {
        x: es.domain.nodes(),
        t: times,
        values: es.eigenfunctions.dot(&u),
        alpha,
    }
}

/// u(x, t) = Σₙ E_{α,1}(-λₙ t^α)(a, φₙ)φₙ(x).
pub fn solve_homogeneous(
    es: &EigenSystem,
    a: &Field,
    alpha: FractionalOrder,
    times: &TimeGrid,
) -> Result<SpaceTimeSolution> {
    let c = project(a, es)?;
    let on = active(&c);
    let al = alpha.value();
    let ts = times.nodes();
    let amps = (0..es.mode_count())
        .into_par_iter()
        .map(|n| {
            if !on[n] {
                return Ok(None);
            }
            ts.iter()
                .map(|&t| Ok(c[n] * relaxation(al, es.eigenvalues[n], t)?))
                .collect::<Result<Vec<_>>>()
                .map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(synthesize(es, amps, ts, al))
}

/// G(xₖ, ·, t) = Σₙ E_{α,1}(-λₙ t^α)φₙ(xₖ)φₙ(·), a kernel with respect to
/// the discrete inner product of `es`.
pub fn green_function(es: &EigenSystem, x_index: usize, alpha: FractionalOrder, t: f64) -> Result<Field> {
    if !(t > 0.0) {
        return invalid(format!("Green function needs t > 0, got {t}"));
    }
    if x_index >= es.domain.points {
        return invalid(format!("grid index {x_index} out of range"));
    }
    let mut out = vec![0.0; es.domain.points];
    for n in 0..es.mode_count() {
        let w = relaxation(alpha.value(), es.eigenvalues[n], t)? * es.eigenfunctions[[x_index, n]];
        for (o, p) in out.iter_mut().zip(es.mode(n).iter()) {
            *o += w * p;
        }
    }
    Ok(Field::new(out))
}

/// Weights (w_lo, w_hi) with ∫_lo^hi w^q f(w) dw = w_lo f(lo) + w_hi f(hi)
/// for linear f.
fn power_linear_weights(q: f64, lo: f64, hi: f64) -> (f64, f64) {
    let len = hi - lo;
    if lo < 2.0 * len {
        let m0 = (hi.powf(q + 1.0) - lo.powf(q + 1.0)) / (q + 1.0);
        let m1 = (hi.powf(q + 2.0) - lo.powf(q + 2.0)) / (q + 2.0);
        let w_hi = (m1 - lo * m0) / len;
        (m0 - w_hi, w_hi)
    } else {
        function_linear_weights(gl10(), |w| Ok(w.powf(q)), lo, hi).expect("infallible kernel")
    }
}

fn function_linear_weights(
    rule: &GaussLegendre,
    f: impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let (mut a, mut b) = (0.0, 0.0);
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        let v = w * f(mid + half * x)? * half;
        let theta = 0.5 * (1.0 + x);
        a += v * (1.0 - theta);
        b += v * theta;
    }
    Ok((a, b))
}

/// μ(t) = (1/Γ(α))[ρ(0)t^{α-1} + ∫₀ᵗ ρ'(s)(t-s)^{α-1} ds] at the cell
/// midpoints, exact for piecewise-linear ρ'.
pub fn duhamel_mu(rho: &Rho, alpha: FractionalOrder) -> Result<TimeSeries> {
    let al = alpha.value();
    let q = al - 1.0;
    let m = rho.grid.steps;
    let h = rho.grid.dt();
    let scale = h.powf(al);
    let weights: Vec<(f64, f64)> = (0..m)
        .map(|d| {
            if d == 0 {
                power_linear_weights(q, 0.0, 0.5)
            } else {
                power_linear_weights(q, d as f64 - 0.5, d as f64 + 0.5)
            }
        })
        .collect();
    let dr = &rho.derivs;
    let mids = rho.grid.midpoints();
    let values = mids
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let (lo0, hi0) = weights[0];
            let mut acc = lo0 * 0.5 * (dr[k] + dr[k + 1]) + hi0 * dr[k];
            for j in 0..k {
                let (lo, hi) = weights[k - j];
                acc += lo * dr[j + 1] + hi * dr[j];
            }
            (rho.rho0() * t.powf(q) + scale * acc) * rgamma(al)
        })
        .collect();
    TimeSeries::new(mids, values)
}

/// Least-squares-free fit μ ≈ Σᵢ cᵢ s^{α-1+i} through the first midpoints.
pub(crate) fn singular_fit(mids: &[f64], mu: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let k = mids.len().min(3);
    let m = DMatrix::from_fn(k, k, |r, c| mids[r].powf(alpha - 1.0 + c as f64));
    let rhs = DVector::from_iterator(k, mu[..k].iter().copied());
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("singular start-up fit".into()))?;
    Ok(sol.iter().copied().collect())
}

/// μ minus its start-up fit, zero at the fitted midpoints.
fn fit_remainder(mids: &[f64], mu: &[f64], alpha: f64, c: &[f64]) -> Vec<f64> {
    mids.iter()
        .zip(mu)
        .enumerate()
        .map(|(k, (&s, &v))| {
            if k < c.len() {
                0.0
            } else {
                v - c.iter().enumerate().map(|(i, ci)| ci * s.powf(alpha - 1.0 + i as f64)).sum::<f64>()
            }
        })
        .collect()
}

/// Remainder value at the node tₖ, k ≥ 1, interpolated between midpoints
/// or extrapolated past the last one.
fn remainder_at_node(r: &[f64], k: usize) -> f64 {
    let m = r.len();
    if k < m {
        0.5 * (r[k - 1] + r[k])
    } else if m >= 2 {
        1.5 * r[m - 1] - 0.5 * r[m - 2]
    } else {
        r[m - 1]
    }
}

/// ∫₀^{tₖ} r(σ)κ(tₖ - σ) dσ for the piecewise-linear remainder r, given
/// the Toeplitz weights of κ over [(d-½)h, (d+½)h] (index d ≥ 1) and over
/// [0, h/2] (index 0).
fn remainder_convolution(r: &[f64], weights: &[(f64, f64)], k: usize) -> f64 {
    let (lo0, hi0) = weights[0];
    let mut acc = lo0 * remainder_at_node(r, k) + hi0 * r[k - 1];
    for d in 1..k {
        let (lo, hi) = weights[d];
        acc += lo * r[k - d] + hi * r[k - d - 1];
    }
    acc
}

/// ρ(t) = (1/Γ(1-α))∫₀ᵗ μ(s)(t-s)^{-α} ds at the nodes of the grid whose
/// midpoints carry μ. The t^{α-1} start-up behaviour is fitted and
/// integrated exactly; the rest is product integration.
pub fn recover_rho(mu: &TimeSeries, alpha: FractionalOrder) -> Result<TimeSeries> {
    let m = mu.len();
    if m == 0 {
        return invalid("empty mu series");
    }
    let h = if m >= 2 { mu.times[1] - mu.times[0] } else { 2.0 * mu.times[0] };
    let grid = TimeGrid::new(h * m as f64, m)?;
    let al = alpha.value();
    let c = singular_fit(&mu.times, &mu.values, al)?;
    let r = fit_remainder(&mu.times, &mu.values, al, &c);
    let fit_at = |t: f64| -> f64 {
        c.iter()
            .enumerate()
            .map(|(i, ci)| ci * gamma(al + i as f64) * rgamma(1.0 + i as f64) * t.powi(i as i32))
            .sum()
    };
    let nodes = grid.nodes();
    let values = if alpha.is_classical() {
        nodes
            .iter()
            .enumerate()
            .map(|(k, &t)| fit_at(t) + if k == 0 { 0.0 } else { remainder_at_node(&r, k) })
            .collect()
    } else {
        let q = -al;
        let scale = h.powf(1.0 - al) * rgamma(1.0 - al);
        let weights: Vec<(f64, f64)> = (0..m)
            .map(|d| {
                let (lo, hi) = if d == 0 {
                    power_linear_weights(q, 0.0, 0.5)
                } else {
                    power_linear_weights(q, d as f64 - 0.5, d as f64 + 0.5)
                };
                (scale * lo, scale * hi)
            })
            .collect();
        nodes
            .iter()
            .enumerate()
            .map(|(k, &t)| fit_at(t) + if k == 0 { 0.0 } else { remainder_convolution(&r, &weights, k) })
            .collect()
    };
    TimeSeries::new(nodes, values)
}

/// Linear-basis weights of `kernel` over [(d-½)h, (d+½)h], choosing the
/// rule by the distance to the singularity at the origin.
fn smooth_cell_weights(
    kernel: &(dyn Fn(f64) -> Result<f64> + Sync),
    lo: f64,
    hi: f64,
    d: usize,
    gl4: &GaussLegendre,
) -> Result<(f64, f64)> {
    let rule = match d {
        0 | 1 => gl16(),
        2..=7 => gl10(),
        _ => gl4,
    };
    function_linear_weights(rule, kernel, lo, hi)
}

/// The map μ ↦ ∫₀ᵗ μ(σ)v(t-σ) dσ on the time nodes for a kernel
/// v(τ) = Σ w E_{α,1}(-λτ^α). μ is given at the cell midpoints and
/// represented by its start-up fit plus a piecewise-linear remainder.
#[derive(Debug, Clone)]
pub struct TraceOperator {
    alpha: f64,
    grid: TimeGrid,
    /// Response to s^{α-1+i} at every node.
    fit_response: Vec<Vec<f64>>,
    weights: Vec<(f64, f64)>,
}

impl TraceOperator {
    /// `terms` are the (w, λ) pairs of the kernel. Without `remainder`
    /// only μ inside the span of the start-up fit is reproduced.
    pub fn new(terms: &[(f64, f64)], alpha: FractionalOrder, grid: &TimeGrid, remainder: bool) -> Result<Self> {
        let al = alpha.value();
        let h = grid.dt();
        let m = grid.steps;
        let ts = grid.nodes();
        let fit_response = (0..m.min(3))
            .map(|i| {
                let gi = gamma(al + i as f64);
                ts.iter()
                    .map(|&t| {
                        if t == 0.0 {
                            return Ok(0.0);
                        }
                        let ta = t.powf(al);
                        let pre = gi * t.powf(al + i as f64);
                        let mut acc = 0.0;
                        for &(w, lam) in terms {
                            acc += w * pre * mittag_leffler(al, al + i as f64 + 1.0, -lam * ta)?;
                        }
                        Ok(acc)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut weights = Vec::with_capacity(m);
        let w = 0.5 * h;
        let (mut p, mut q) = (0.0, 0.0);
        for &(c, lam) in terms {
            let z = -lam * w.powf(al);
            let e2 = mittag_leffler(al, 2.0, z)?;
            p += c * w * e2;
            q += c * w * w * (e2 - mittag_leffler(al, 3.0, z)?);
        }
        weights.push((p - q / w, q / w));
        if remainder {
            let gl4 = GaussLegendre::new(4);
            let kernel = |tau: f64| -> Result<f64> {
                let mut acc = 0.0;
                for &(c, lam) in terms {
                    acc += c * relaxation(al, lam, tau)?;
                }
                Ok(acc)
            };
            for d in 1..m {
                let lo = (d as f64 - 0.5) * h;
                weights.push(smooth_cell_weights(&kernel, lo, lo + h, d, &gl4)?);
            }
        }
        Ok(Self {
            alpha: al,
            grid: *grid,
            fit_response,
            weights,
        })
    }

    /// Trace values at the nodes for μ given at the midpoints.
    pub fn apply(&self, mu: &[f64]) -> Result<Vec<f64>> {
        let m = self.grid.steps;
        if mu.len() != m {
            return Err(Error::GridMismatch {
                expected: m,
                got: mu.len(),
            });
        }
        let mids = self.grid.midpoints();
        let c = singular_fit(&mids, mu, self.alpha)?;
        let r = fit_remainder(&mids, mu, self.alpha, &c);
        let with_rem = r.iter().any(|v| *v != 0.0);
        if with_rem && self.weights.len() < m {
            return invalid("trace operator was built without remainder weights");
        }
        Ok((0..=m)
            .map(|k| {
                if k == 0 {
                    return 0.0;
                }
                let mut acc: f64 = c.iter().zip(&self.fit_response).map(|(ci, f)| ci * f[k]).sum();
                if with_rem {
                    acc += remainder_convolution(&r, &self.weights, k);
                }
                acc
            })
            .collect())
    }
}

/// u(·, t) = ∫₀ᵗ μ(t-s) v_g(·, s) ds with v_g the homogeneous solution
/// started from g.
pub fn solve_source_duhamel(
    es: &EigenSystem,
    src: &SourceSpec,
    alpha: FractionalOrder,
    times: &TimeGrid,
) -> Result<SpaceTimeSolution> {
    check_grid(&src.rho, times)?;
    let al = alpha.value();
    let mu = duhamel_mu(&src.rho, alpha)?;
    let c = singular_fit(&mu.times, &mu.values, al)?;
    let needs_remainder = fit_remainder(&mu.times, &mu.values, al, &c).iter().any(|v| *v != 0.0);
    let gn = project(&src.g, es)?;
    let on = active(&gn);
    let amps = (0..es.mode_count())
        .into_par_iter()
        .map(|n| -> Result<Option<Vec<f64>>> {
            if !on[n] {
                return Ok(None);
            }
            let op = TraceOperator::new(&[(gn[n], es.eigenvalues[n])], alpha, times, needs_remainder)?;
            op.apply(&mu.values).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(synthesize(es, amps, times.nodes(), al))
}

/// uₙ(t) = (g, φₙ)∫₀ᵗ s^{α-1}E_{α,α}(-λₙ s^α)ρ(t-s) ds with ρ piecewise
/// linear on the time grid.
pub fn solve_source_spectral(
    es: &EigenSystem,
    src: &SourceSpec,
    alpha: FractionalOrder,
    times: &TimeGrid,
) -> Result<SpaceTimeSolution> {
    check_grid(&src.rho, times)?;
    let al = alpha.value();
    let gn = project(&src.g, es)?;
    let on = active(&gn);
    let h = times.dt();
    let m = times.steps;
    let rho = &src.rho.values;
    let gl4 = GaussLegendre::new(4);
    let amps = (0..es.mode_count())
        .into_par_iter()
        .map(|n| -> Result<Option<Vec<f64>>> {
            if !on[n] {
                return Ok(None);
            }
            let lam = es.eigenvalues[n];
            let kernel = move |s: f64| -> Result<f64> {
                Ok(s.powf(al - 1.0) * mittag_leffler(al, al, -lam * s.powf(al))?)
            };
            let z = -lam * h.powf(al);
            let k1 = h.powf(al) * mittag_leffler(al, al + 1.0, z)?;
            let k2 = h.powf(al + 1.0) * mittag_leffler(al, al + 2.0, z)?;
            // cell 0: ∫₀ʰ k = K1(h), ∫₀ʰ s k = hK1(h) - K2(h)
            let mut weights = vec![(k2 / h, k1 - k2 / h)];
            for d in 1..m {
                let lo = d as f64 * h;
                weights.push(smooth_cell_weights(&kernel, lo, lo + h, d, &gl4)?);
            }
            let mut out = vec![0.0; m + 1];
            for k in 1..=m {
                let mut acc = 0.0;
                for d in 0..k {
                    let (a, b) = weights[d];
                    acc += a * rho[k - d] + b * rho[k - d - 1];
                }
                out[k] = gn[n] * acc;
            }
            Ok(Some(out))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(synthesize(es, amps, times.nodes(), al))
}

fn check_grid(rho: &Rho, times: &TimeGrid) -> Result<()> {
    if rho.grid.steps != times.steps || (rho.grid.t_final - times.t_final).abs() > 1e-12 * times.t_final {
        return Err(Error::GridMismatch {
            expected: times.len(),
            got: rho.values.len(),
        });
    }
    Ok(())
}
