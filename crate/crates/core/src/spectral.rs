//! Eigensystem of A f = -(a f')' + c f on (0, L) with Dirichlet conditions.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1};

use crate::error::{invalid, Error, Result};
use crate::grid::{Domain1D, Field};
use crate::linalg::SymTridiagonal;

/// Coefficients of A sampled on a grid: a at the half-points
/// (j + 1/2)h, j = 0..=N_x, and c at the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticCoeffs {
    pub a_half: Vec<f64>,
    pub c: Vec<f64>,
    /// min a, the ellipticity constant.
    pub delta: f64,
}

impl EllipticCoeffs {
    pub fn from_fn(domain: &Domain1D, a: impl Fn(f64) -> f64, c: impl Fn(f64) -> f64) -> Result<Self> {
        let h = domain.h();
        let a_half: Vec<f64> = (0..=domain.points).map(|j| a((j as f64 + 0.5) * h)).collect();
        let c: Vec<f64> = domain.nodes().into_iter().map(c).collect();
        Self::new(a_half, c)
    }

    pub fn constant(domain: &Domain1D, a: f64, c: f64) -> Result<Self> {
        Self::from_fn(domain, |_| a, |_| c)
    }

    pub fn new(a_half: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a_half.len() != c.len() + 1 {
            return Err(Error::GridMismatch {
                expected: c.len() + 1,
                got: a_half.len(),
            });
        }
        let delta = a_half.iter().copied().fold(f64::INFINITY, f64::min);
        if !(delta > 0.0) || a_half.iter().any(|v| !v.is_finite()) {
            return invalid(format!("diffusion coefficient must be positive, min is {delta}"));
        }
        if let Some(bad) = c.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return invalid(format!("reaction coefficient must be nonnegative, found {bad}"));
        }
        Ok(Self { a_half, c, delta })
    }
}

/// Conservative second-order finite-difference matrix of A.
pub fn assemble_operator(domain: &Domain1D, coeffs: &EllipticCoeffs) -> Result<SymTridiagonal> {
    let n = domain.points;
    if coeffs.c.len() != n {
        return Err(Error::GridMismatch {
            expected: n,
            got: coeffs.c.len(),
        });
    }
    let h2 = domain.h() * domain.h();
    let diag = (0..n)
        .map(|i| (coeffs.a_half[i] + coeffs.a_half[i + 1]) / h2 + coeffs.c[i])
        .collect();
    let off = (1..n).map(|i| -coeffs.a_half[i] / h2).collect();
    SymTridiagonal::new(diag, off)
}

/// Eigenvalues λₙ and grid-sampled orthonormal eigenfunctions φₙ.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub domain: Domain1D,
    pub eigenvalues: Vec<f64>,
    /// φₙ(xᵢ) at row i, column n.
    pub eigenfunctions: Array2<f64>,
    /// Quadrature weights of the discrete inner product.
    pub weights: Vec<f64>,
}

/// Default number of retained modes for a grid of `points` nodes.
pub fn default_mode_count(points: usize) -> usize {
    (points / 4).clamp(1, 64)
}

impl EigenSystem {
    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn mode(&self, n: usize) -> ArrayView1<'_, f64> {
        self.eigenfunctions.column(n)
    }

    /// The same system restricted to its first `n` modes.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.mode_count() {
            return invalid(format!("cannot keep {n} of {} modes", self.mode_count()));
        }
        Ok(Self {
            domain: self.domain,
            eigenvalues: self.eigenvalues[..n].to_vec(),
            eigenfunctions: self.eigenfunctions.slice(ndarray::s![.., ..n]).to_owned(),
            weights: self.weights.clone(),
        })
    }

    /// max |⟨φₘ, φₙ⟩ - δₘₙ|.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.mode_count();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in a..n {
                let dot: f64 = self
                    .mode(a)
                    .iter()
                    .zip(self.mode(b).iter())
                    .zip(&self.weights)
                    .map(|((x, y), w)| w * x * y)
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    /// One column per eigenfunction after the x column; the header names
    /// each eigenvalue.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        let mut header = String::from("x");
        for l in &self.eigenvalues {
            header.push_str(&format!(",lambda={}", crate::io::fmt_g15(*l)));
        }
        writeln!(out, "{header}")?;
        for i in 0..self.domain.points {
            let row = self.eigenfunctions.row(i);
            writeln!(out, "{}", crate::io::csv_row(std::iter::once(self.domain.x(i)).chain(row.iter().copied())))?;
        }
        Ok(())
    }

    /// Σₙ cₙ φₙ
    pub fn reconstruct(&self, coeffs: &[f64]) -> Field {
        let mut out = vec![0.0; self.domain.points];
        for (n, &c) in coeffs.iter().enumerate().take(self.mode_count()) {
            if c == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.mode(n).iter()) {
                *o += c * p;
            }
        }
        Field::new(out)
    }
}

/// λₙ = (nπ/L)², φₙ = √(2/L) sin(nπx/L) for a ≡ 1, c ≡ 0.
pub fn analytic_eigensystem(domain: &Domain1D, modes: usize) -> Result<EigenSystem> {
    if modes == 0 || modes > domain.points {
        return invalid(format!("mode count must lie in 1..={}, got {modes}", domain.points));
    }
    let l = domain.length;
    let eigenvalues = (1..=modes).map(|n| (n as f64 * PI / l).powi(2)).collect();
    let scale = (2.0 / l).sqrt();
    let eigenfunctions = Array2::from_shape_fn((domain.points, modes), |(i, n)| {
        scale * crate::special::sin_pi((n as f64 + 1.0) * domain.x(i) / l)
    });
    Ok(EigenSystem {
        domain: *domain,
        eigenvalues,
        eigenfunctions,
        weights: vec![domain.h(); domain.points],
    })
}

/// First `modes` eigenpairs of the assembled matrix, normalised in the
/// discrete L² inner product, φ₁ positive.
pub fn discrete_eigensystem(
    matrix: &SymTridiagonal,
    modes: usize,
    domain: &Domain1D,
) -> Result<EigenSystem> {
    if matrix.dim() != domain.points {
        return Err(Error::GridMismatch {
            expected: domain.points,
            got: matrix.dim(),
        });
    }
    let (vals, vecs) = matrix.lowest_eigenpairs(modes)?;
    if vals[0] <= 0.0 {
        return invalid(format!("operator is not positive definite (lambda_1 = {})", vals[0]));
    }
    let h = domain.h();
    let s = 1.0 / h.sqrt();
    let mut ef = Array2::zeros((domain.points, modes));
    for (n, v) in vecs.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            ef[[i, n]] = x * s;
        }
    }
    if ef.column(0).iter().any(|&v| v <= 0.0) {
        return invalid("first eigenfunction is not strictly positive on the grid");
    }
    Ok(EigenSystem {
        domain: *domain,
        eigenvalues: vals,
        eigenfunctions: ef,
        weights: vec![h; domain.points],
    })
}

/// cₙ = Σᵢ wᵢ f(xᵢ) φₙ(xᵢ).
pub fn project(f: &Field, es: &EigenSystem) -> Result<Vec<f64>> {
    f.check_len(es.domain.points)?;
    Ok((0..es.mode_count())
        .map(|n| {
            es.mode(n)
                .iter()
                .zip(&f.values)
                .zip(&es.weights)
                .map(|((p, v), w)| w * p * v)
                .sum()
        })
        .collect())
}

/// (Σₙ |λₙ^γ (f, φₙ)|²)^{1/2} over the retained modes.
pub fn fractional_norm(f: &Field, es: &EigenSystem, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return invalid(format!("gamma must be nonnegative, got {gamma}"));
    }
    let c = project(f, es)?;
    Ok(c.iter()
        .zip(&es.eigenvalues)
        .map(|(c, l)| (l.powf(gamma) * c).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        let d = Domain1D::new(1.0, 63).unwrap();
        let es = analytic_eigensystem(&d, 8).unwrap();
        assert!((es.eigenvalues[0] - 9.869_604_401_089_358).abs() < 1e-12);
        let mid = d.exact_index(0.5).unwrap();
        assert!(es.eigenfunctions[[mid, 1]].abs() < 1e-15);
        assert!(es.orthonormality_residual() < 1e-13);
        let mut buf = Vec::new();
        es.truncated(2).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,lambda=9.86960440108936,lambda=39.4784176043574\n"));
        assert_eq!(text.lines().count(), 64);
        let d2 = Domain1D::new(2.0, 63).unwrap();
        let es2 = analytic_eigensystem(&d2, 3).unwrap();
        assert!((es2.eigenvalues[2] - 22.206_609_902_451_056).abs() < 1e-12);
    }

    #[test]
    fn assembly_stencil() {
        let d = Domain1D::new(1.0, 3).unwrap();
        let m = assemble_operator(&d, &EllipticCoeffs::constant(&d, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(m.diag, vec![32.0; 3]);
        assert_eq!(m.off, vec![-16.0; 2]);
        let m5 = assemble_operator(&d, &EllipticCoeffs::constant(&d, 1.0, 5.0).unwrap()).unwrap();
        assert_eq!(m5.diag, vec![37.0; 3]);
        let lam = m.eigenvalues().unwrap()[0];
        assert!((lam - 9.372_583).abs() < 1e-6);
        assert!(EllipticCoeffs::constant(&d, 0.0, 0.0).is_err());
        assert!(EllipticCoeffs::constant(&d, 1.0, -1.0).is_err());
    }

    #[test]
    fn discrete_system_contract() {
        let d = Domain1D::new(1.0, 511).unwrap();
        let m = assemble_operator(&d, &EllipticCoeffs::constant(&d, 1.0, 0.0).unwrap()).unwrap();
        let es = discrete_eigensystem(&m, 16, &d).unwrap();
        assert!((es.eigenvalues[0] - PI * PI).abs() < 1e-3);
        assert!(es.orthonormality_residual() < 1e-10);
        let kappa = 3.5;
        let m2 = assemble_operator(&d, &EllipticCoeffs::constant(&d, 1.0, kappa).unwrap()).unwrap();
        let es2 = discrete_eigensystem(&m2, 16, &d).unwrap();
        for n in 0..16 {
            assert!((es2.eigenvalues[n] - es.eigenvalues[n] - kappa).abs() < 1e-8);
            let diff = es2.mode(n).iter().zip(es.mode(n).iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(diff < 1e-8, "mode {n}");
        }
    }

    #[test]
    fn projections() {
        let d = Domain1D::new(1.0, 255).unwrap();
        let es = analytic_eigensystem(&d, 32).unwrap();
        let phi3 = Field::new(es.mode(2).to_vec());
        let c = project(&phi3, &es).unwrap();
        for (n, v) in c.iter().enumerate() {
            assert!((v - if n == 2 { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
        let s = d.sample(|x| (2.0 * PI * x).sin());
        let c = project(&s, &es).unwrap();
        assert!((c[1] - 0.5_f64.sqrt()).abs() < 1e-8);
        let f = d.sample(|x| x * (1.0 - x));
        let c = project(&f, &es).unwrap();
        for (k, v) in c.iter().enumerate().take(8) {
            let n = (k + 1) as f64;
            let exact = if (k + 1) % 2 == 1 { 4.0 * 2f64.sqrt() / (n * PI).powi(3) } else { 0.0 };
            assert!((v - exact).abs() < 1e-5, "n = {n}");
        }
        let back = es.reconstruct(&c);
        let err = back.values.iter().zip(&f.values).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-4);
        assert!(project(&Field::zeros(3), &es).is_err());
    }

    #[test]
    fn fractional_norms() {
        let d = Domain1D::new(1.0, 255).unwrap();
        let es = analytic_eigensystem(&d, 32).unwrap();
        let phi1 = Field::new(es.mode(0).to_vec());
        assert!((fractional_norm(&phi1, &es, 1.0).unwrap() - PI * PI).abs() < 1e-9);
        assert!((fractional_norm(&phi1, &es, 0.0).unwrap() - 1.0).abs() < 1e-12);
        // ‖x(1-x)‖_{D(A)} = (Σ_odd 32/(nπ)²)^{1/2} → 2 from below
        let es = analytic_eigensystem(&d, 64).unwrap();
        let n = fractional_norm(&d.sample(|x| x * (1.0 - x)), &es, 1.0).unwrap();
        assert!(n < 2.0 && n > 1.98, "{n}");
    }
}
