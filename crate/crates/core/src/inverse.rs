//! Recovery of ρ(t) in F = ρ(t)g(x) from the single-point trace u(x₀, ·).
//!
//! The trace satisfies u(x₀, t) = ∫₀ᵗ μ(σ)v_g(x₀, t-σ) dσ. With μ piecewise
//! constant on the time cells this is a lower-triangular Toeplitz system;
//! ρ then follows from μ by the reverse formula.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::forward::{recover_rho, FractionalOrder, TraceOperator};
use crate::grid::{Domain1D, Field, TimeGrid, TimeSeries};
use crate::l1::{l1_solve, L1Source};
use crate::linalg::SymTridiagonal;
use crate::mittag_leffler::mittag_leffler;
use crate::spectral::{discrete_eigensystem, project, EigenSystem};

/// Traces below this magnitude count as identically zero.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Safety factor of the discrepancy principle.
pub const DISCREPANCY_FACTOR: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularization {
    /// Plain forward substitution.
    None,
    /// Tikhonov with first-difference penalty and the given weight.
    Fixed { weight: f64 },
    /// Tikhonov weight chosen so the residual is 1.1 times the expected
    /// noise norm noise_level·max|data|·√M.
    Discrepancy { noise_level: f64 },
}

/// Product-integration kernel κ_d ≈ ∫_{dh}^{(d+1)h} v(τ) dτ from node
/// samples of v by the trapezoid rule.
pub fn trapezoid_kernel(vg_trace: &TimeSeries) -> Result<Vec<f64>> {
    if vg_trace.len() < 2 {
        return invalid("kernel trace needs at least two samples");
    }
    let h = vg_trace.times[1] - vg_trace.times[0];
    Ok(vg_trace.values.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).collect())
}

/// Pairs ((g, φₙ)φₙ(x₀), λₙ), so that v_g(x₀, τ) = Σ w E_{α,1}(-λτ^α).
pub fn kernel_terms(es: &EigenSystem, g: &Field, x0: usize) -> Result<Vec<(f64, f64)>> {
    if x0 >= es.domain.points {
        return invalid(format!("observation index {x0} out of range"));
    }
    let gn = project(g, es)?;
    Ok(gn
        .iter()
        .enumerate()
        .map(|(n, c)| (c * es.eigenfunctions[[x0, n]], es.eigenvalues[n]))
        .filter(|(w, _)| *w != 0.0)
        .collect())
}

/// Exact cell integrals of v_g(x₀, ·) for the truncated spectral solution,
/// from ∫₀^τ E_{α,1}(-λs^α) ds = τE_{α,2}(-λτ^α).
pub fn spectral_kernel(terms: &[(f64, f64)], alpha: FractionalOrder, grid: &TimeGrid) -> Result<Vec<f64>> {
    let al = alpha.value();
    let antider = grid
        .nodes()
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(0.0);
            }
            let ta = t.powf(al);
            let mut acc = 0.0;
            for &(w, lam) in terms {
                acc += w * t * mittag_leffler(al, 2.0, -lam * ta)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(antider.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Solution of the deconvolution step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deconvolution {
    /// μ at the cell midpoints.
    pub mu: TimeSeries,
    pub parameter: f64,
    /// √Δt·‖Kμ - d‖.
    pub residual: f64,
}

fn toeplitz(kernel: &[f64]) -> DMatrix<f64> {
    let m = kernel.len();
    DMatrix::from_fn(m, m, |i, j| if j <= i { kernel[i - j] } else { 0.0 })
}

fn apply_toeplitz(kernel: &[f64], mu: &[f64]) -> Vec<f64> {
    (0..mu.len())
        .map(|k| (0..=k).map(|j| mu[j] * kernel[k - j]).sum())
        .collect()
}

fn forward_substitution(kernel: &[f64], rhs: &[f64]) -> Vec<f64> {
    let mut mu = vec![0.0; rhs.len()];
    for k in 0..rhs.len() {
        let s: f64 = (0..k).map(|j| mu[j] * kernel[k - j]).sum();
        mu[k] = (rhs[k] - s) / kernel[0];
    }
    mu
}

/// Defect-correction sweeps against the accurate trace operator.
pub const REFINE_SWEEPS: usize = 3;

enum Inverter<'a> {
    Forward(&'a [f64]),
    Tikhonov {
        chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
        k: &'a DMatrix<f64>,
    },
}

impl Inverter<'_> {
    fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            Inverter::Forward(kernel) => forward_substitution(kernel, rhs),
            Inverter::Tikhonov { chol, k } => chol
                .solve(&k.tr_mul(&DVector::from_column_slice(rhs)))
                .iter()
                .copied()
                .collect(),
        }
    }
}

fn difference_gram(m: usize) -> DMatrix<f64> {
    let mut dtd = DMatrix::zeros(m, m);
    for i in 0..m.saturating_sub(1) {
        dtd[(i, i)] += 1.0;
        dtd[(i + 1, i + 1)] += 1.0;
        dtd[(i, i + 1)] -= 1.0;
        dtd[(i + 1, i)] -= 1.0;
    }
    dtd
}

fn tikhonov_factor(ktk: &DMatrix<f64>, dtd: &DMatrix<f64>, weight: f64) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    (ktk + dtd * weight)
        .cholesky()
        .ok_or_else(|| Error::IllConditioned(format!("normal equations not positive definite at weight {weight:e}")))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(fit: &[f64], rhs: &[f64]) -> f64 {
    norm(&fit.iter().zip(rhs).map(|(a, b)| a - b).collect::<Vec<_>>())
}

/// Solves K μ = data[1..] for the given kernel, then optionally refines μ
/// by defect correction against `refine`.
pub fn deconvolve(
    kernel: &[f64],
    data: &TimeSeries,
    alpha: FractionalOrder,
    reg: &Regularization,
    refine: Option<&TraceOperator>,
) -> Result<Deconvolution> {
    let m = kernel.len();
    if data.len() != m + 1 {
        return Err(Error::GridMismatch {
            expected: m + 1,
            got: data.len(),
        });
    }
    let kmax = kernel.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if kmax <= DEGENERATE_TOL * data.times[m] / m as f64 {
        return Err(Error::DegenerateKernel(
            "the observed homogeneous trace vanishes identically, so the data cannot determine rho".into(),
        ));
    }
    let h = data.times[1] - data.times[0];
    let rhs = &data.values[1..];
    let k_mat;
    let (inverter, parameter) = match *reg {
        Regularization::None => {
            if kernel[0].abs() <= 1e-14 * kmax {
                return Err(Error::IllConditioned(format!(
                    "leading kernel weight {:e} is negligible; use regularization",
                    kernel[0]
                )));
            }
            (Inverter::Forward(kernel), 0.0)
        }
        Regularization::Fixed { weight } => {
            if !(weight >= 0.0) {
                return invalid(format!("regularization weight must be nonnegative, got {weight}"));
            }
            k_mat = toeplitz(kernel);
            let chol = tikhonov_factor(&k_mat.tr_mul(&k_mat), &difference_gram(m), weight)?;
            (Inverter::Tikhonov { chol, k: &k_mat }, weight)
        }
        Regularization::Discrepancy { noise_level } => {
            if !(noise_level >= 0.0) {
                return invalid(format!("noise level must be nonnegative, got {noise_level}"));
            }
            k_mat = toeplitz(kernel);
            let ktk = k_mat.tr_mul(&k_mat);
            let dtd = difference_gram(m);
            let ktd = k_mat.tr_mul(&DVector::from_column_slice(rhs));
            let dmax = rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let target = DISCREPANCY_FACTOR * noise_level * dmax * (m as f64).sqrt();
            let residual_at = |w: f64| -> Result<f64> {
                let mu: Vec<f64> = tikhonov_factor(&ktk, &dtd, w)?.solve(&ktd).iter().copied().collect();
                Ok(residual(&apply_toeplitz(kernel, &mu), rhs))
            };
            let scale = ktk.norm() / dtd.norm().max(1.0);
            let (mut lo, mut hi) = ((1e-14 * scale).ln(), (1e6 * scale).ln());
            if target > 0.0 {
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if residual_at(mid.exp())? > target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            let w = lo.exp();
            let chol = tikhonov_factor(&ktk, &dtd, w)?;
            (Inverter::Tikhonov { chol, k: &k_mat }, w)
        }
    };
    let mut mu = averages_to_midpoints(&inverter.apply(rhs), h, alpha.value())?;
    let fit = match refine {
        Some(op) => {
            for _ in 0..REFINE_SWEEPS {
                let u = op.apply(&mu)?;
                let defect: Vec<f64> = rhs.iter().zip(&u[1..]).map(|(d, u)| d - u).collect();
                let delta = averages_to_midpoints(&inverter.apply(&defect), h, alpha.value())?;
                for (x, d) in mu.iter_mut().zip(delta) {
                    *x += d;
                }
            }
            op.apply(&mu)?[1..].to_vec()
        }
        None => apply_toeplitz(kernel, &inverter.apply(rhs)),
    };
    let mids = (0..m).map(|j| (j as f64 + 0.5) * h).collect();
    Ok(Deconvolution {
        residual: h.sqrt() * residual(&fit, rhs),
        mu: TimeSeries::new(mids, mu)?,
        parameter,
    })
}

/// Converts cell averages to midpoint values. The first cells use a fit
/// by averaged powers s^{α-1}, s^α, s^{α+1}; later cells subtract
/// h²μ''/24 estimated from second differences.
fn averages_to_midpoints(avg: &[f64], h: f64, alpha: f64) -> Result<Vec<f64>> {
    let m = avg.len();
    let mut out = avg.to_vec();
    let k = m.min(3);
    let powers: Vec<f64> = (0..k).map(|i| alpha - 1.0 + i as f64).collect();
    let cell_avg = |j: usize, q: f64| -> f64 {
        let j = j as f64;
        ((j + 1.0).powf(q + 1.0) - j.powf(q + 1.0)) * h.powf(q) / (q + 1.0)
    };
    let a = DMatrix::from_fn(k, k, |r, c| cell_avg(r, powers[c]));
    let c = a
        .lu()
        .solve(&DVector::from_column_slice(&avg[..k]))
        .ok_or_else(|| Error::Singular("singular start-up fit".into()))?;
    for (j, o) in out.iter_mut().enumerate().take(k) {
        let mid = (j as f64 + 0.5) * h;
        *o += (0..k).map(|i| c[i] * (mid.powf(powers[i]) - cell_avg(j, powers[i]))).sum::<f64>();
    }
    for j in k..m {
        let c = if j + 1 < m { j } else { j - 1 };
        out[j] -= (avg[c + 1] - 2.0 * avg[c] + avg[c - 1]) / 24.0;
    }
    Ok(out)
}

/// μ from the trace and the homogeneous trace v_g(x₀, ·), both sampled at
/// the time nodes.
pub fn recover_mu(
    data: &TimeSeries,
    vg_trace: &TimeSeries,
    alpha: FractionalOrder,
    reg: &Regularization,
) -> Result<TimeSeries> {
    if data.len() != vg_trace.len() {
        return Err(Error::GridMismatch {
            expected: vg_trace.len(),
            got: data.len(),
        });
    }
    Ok(deconvolve(&trapezoid_kernel(vg_trace)?, data, alpha, reg, None)?.mu)
}

/// Geometry shared by the forward data generator and the inversion.
#[derive(Debug, Clone)]
pub struct InverseSetup {
    pub domain: Domain1D,
    pub matrix: SymTridiagonal,
    pub g: Field,
    pub x0: usize,
    pub alpha: FractionalOrder,
    pub grid: TimeGrid,
}

/// u(x₀, ·) from the L1 scheme plus Gaussian noise with standard
/// deviation noise_level·max|u(x₀, ·)|, seeded.
pub fn generate_data(setup: &InverseSetup, rho_true: &TimeSeries, noise_level: f64, seed: u64) -> Result<TimeSeries> {
    if !(noise_level >= 0.0) {
        return invalid(format!("noise level must be nonnegative, got {noise_level}"));
    }
    if setup.x0 >= setup.domain.points {
        return invalid(format!("observation index {} out of range", setup.x0));
    }
    let src = L1Source::Separable {
        rho: rho_true.values.clone(),
        g: setup.g.clone(),
    };
    let zero = Field::zeros(setup.domain.points);
    let sol = l1_solve(&setup.matrix, &setup.domain, &zero, &src, setup.alpha, &setup.grid)?;
    let mut trace = sol.trace(setup.x0);
    let sigma = noise_level * trace.max_abs();
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in trace.values.iter_mut().skip(1) {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(trace)
}

/// Inverse source instance: known g, observed trace at x₀.
#[derive(Debug, Clone)]
pub struct InverseProblem {
    pub setup: InverseSetup,
    pub data: TimeSeries,
    pub noise_level: f64,
    pub regularization: Regularization,
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryResult {
    pub mu_hat: TimeSeries,
    pub rho_hat: TimeSeries,
    pub regularization_parameter: f64,
    pub residual: f64,
    /// √Δt·noise_level·max|data|·√M, the expected residual of the exact μ.
    pub noise_floor: f64,
    /// Whether g ≥ 0 and g ≢ 0.
    pub hypothesis_met: bool,
}

/// Homogeneous trace → μ → ρ.
pub fn run_inversion(prob: &InverseProblem) -> Result<RecoveryResult> {
    let s = &prob.setup;
    if s.x0 >= s.domain.points {
        return invalid(format!("observation index {} out of range", s.x0));
    }
    s.g.check_len(s.domain.points)?;
    if prob.data.len() != s.grid.len() {
        return Err(Error::GridMismatch {
            expected: s.grid.len(),
            got: prob.data.len(),
        });
    }
    let es = discrete_eigensystem(&s.matrix, prob.modes, &s.domain)?;
    let terms = kernel_terms(&es, &s.g, s.x0)?;
    let kernel = spectral_kernel(&terms, s.alpha, &s.grid)?;
    let gmax = s.g.max_abs();
    let kmax = kernel.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if gmax == 0.0 || kmax <= DEGENERATE_TOL * gmax * s.grid.dt() {
        return Err(Error::DegenerateKernel(format!(
            "v_g(x0, t) vanishes for all t at x0 = {}; rho is not identifiable from this observation",
            s.domain.x(s.x0)
        )));
    }
    let op = TraceOperator::new(&terms, s.alpha, &s.grid, true)?;
    let dec = deconvolve(&kernel, &prob.data, s.alpha, &prob.regularization, Some(&op))?;
    let rho_hat = recover_rho(&dec.mu, s.alpha)?;
    let m = s.grid.steps as f64;
    let dmax = prob.data.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    Ok(RecoveryResult {
        noise_floor: s.grid.dt().sqrt() * prob.noise_level * dmax * m.sqrt(),
        hypothesis_met: s.g.is_nonnegative() && !s.g.is_trivial(),
        mu_hat: dec.mu,
        rho_hat,
        regularization_parameter: dec.parameter,
        residual: dec.residual,
    })
}

/// Relative discrete L² error of an estimate against the truth.
pub fn relative_l2_error(estimate: &TimeSeries, truth: &TimeSeries) -> f64 {
    let num: f64 = estimate
        .values
        .iter()
        .zip(&truth.values)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let den: f64 = truth.values.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Reconstruction error of ρ̂ for each fixed Tikhonov weight.
pub fn regularization_sweep(prob: &InverseProblem, rho_true: &TimeSeries, weights: &[f64]) -> Result<Vec<(f64, f64)>> {
    weights
        .iter()
        .map(|&w| {
            let mut p = prob.clone();
            p.regularization = Regularization::Fixed { weight: w };
            Ok((w, relative_l2_error(&run_inversion(&p)?.rho_hat, rho_true)))
        })
        .collect()
}
