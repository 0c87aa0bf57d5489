//! Symmetric tridiagonal matrices: direct solves, eigenvalues by implicit QL,
//! eigenvectors by inverse iteration.

use crate::error::{invalid, Error, Result};

/// Symmetric tridiagonal matrix stored by its diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// off[i] couples rows i and i+1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return invalid(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            ));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// y = T x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// T + s I
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|d| d + s).collect(),
            off: self.off.clone(),
        }
    }

    /// Solves (T + shift I) x = rhs by the Thomas algorithm. Intended for
    /// diagonally dominant systems; a vanishing pivot is reported.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        ThomasFactor::new(self, shift)?.solve(rhs)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        tql_values(&mut d, &mut e)?;
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(d)
    }

    /// The `count` smallest eigenpairs. Eigenvectors have unit Euclidean norm,
    /// and the first nonzero component of each is positive.
    pub fn lowest_eigenpairs(&self, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.dim();
        if count == 0 || count > n {
            return invalid(format!("requested {count} eigenpairs of a {n}x{n} matrix"));
        }
        let all = self.eigenvalues()?;
        let values: Vec<f64> = all[..count].to_vec();
        let scale = all.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
        for (k, &lam) in values.iter().enumerate() {
            let mut v = inverse_iteration(self, lam, scale, k)?;
            // clean up against earlier vectors (only matters for close pairs)
            for _ in 0..2 {
                for w in &vectors {
                    let c: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                    for (vi, wi) in v.iter_mut().zip(w) {
                        *vi -= c * wi;
                    }
                }
                normalize(&mut v);
            }
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-300) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            vectors.push(v);
        }
        Ok((values, vectors))
    }
}

/// LU factors of (T + shift I) without pivoting.
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    lower: Vec<f64>,
    pivots: Vec<f64>,
    upper: Vec<f64>,
}

impl ThomasFactor {
    pub fn new(t: &SymTridiagonal, shift: f64) -> Result<Self> {
        let n = t.dim();
        let mut pivots = vec![0.0; n];
        let mut lower = vec![0.0; n.saturating_sub(1)];
        pivots[0] = t.diag[0] + shift;
        for i in 1..n {
            if pivots[i - 1] == 0.0 || !pivots[i - 1].is_finite() {
                return Err(Error::Singular(format!("zero pivot at row {}", i - 1)));
            }
            lower[i - 1] = t.off[i - 1] / pivots[i - 1];
            pivots[i] = t.diag[i] + shift - lower[i - 1] * t.off[i - 1];
        }
        if pivots[n - 1] == 0.0 || !pivots[n - 1].is_finite() {
            return Err(Error::Singular(format!("zero pivot at row {}", n - 1)));
        }
        Ok(Self {
            lower,
            pivots,
            upper: t.off.clone(),
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.pivots.len();
        if rhs.len() != n {
            return Err(Error::GridMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut y = rhs.to_vec();
        for i in 1..n {
            y[i] -= self.lower[i - 1] * y[i - 1];
        }
        y[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (y[i] - self.upper[i] * y[i + 1]) / self.pivots[i];
        }
        Ok(y)
    }
}

fn normalize(v: &mut [f64]) {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
}

const QL_MAX_ITER: usize = 60;

/// Implicit QL with Wilkinson shifts on (d, e), e[n-1] unused. Eigenvalues
/// overwrite d, unordered.
fn tql_values(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::EigenNoConvergence(QL_MAX_ITER));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Tridiagonal LU with partial pivoting of (T - shift I); the factor has up
/// to two super-diagonals.
struct PivotedLu {
    n: usize,
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swap: Vec<bool>,
}

impl PivotedLu {
    fn new(t: &SymTridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.dim();
        let mut u0: Vec<f64> = t.diag.iter().map(|d| d - shift).collect();
        let mut u1: Vec<f64> = t.off.clone();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swap = vec![false; n];
        let sub = &t.off;
        for i in 0..n.saturating_sub(1) {
            let below = sub[i];
            if below.abs() > u0[i].abs() {
                swap[i] = true;
                // rows i and i+1 exchange
                let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
                u0[i] = below;
                u1[i] = u0[i + 1];
                u2[i] = u1[i + 1];
                let m = a0 / below;
                l[i] = m;
                u0[i + 1] = a1 - m * u1[i];
                u1[i + 1] = a2 - m * u2[i];
            } else {
                if u0[i] == 0.0 {
                    u0[i] = tiny;
                }
                let m = below / u0[i];
                l[i] = m;
                u0[i + 1] -= m * u1[i];
                u1[i + 1] -= m * u2[i];
            }
        }
        for p in u0.iter_mut() {
            if p.abs() < tiny {
                *p = tiny.copysign(if *p == 0.0 { 1.0 } else { *p });
            }
        }
        Self {
            n,
            l,
            u0,
            u1,
            u2,
            swap,
        }
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.l[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * b[i + 2];
            }
            b[i] = s / self.u0[i];
        }
    }
}

fn inverse_iteration(t: &SymTridiagonal, lam: f64, scale: f64, seed: usize) -> Result<Vec<f64>> {
    let n = t.dim();
    let tiny = f64::EPSILON * scale;
    let lu = PivotedLu::new(t, lam, tiny);
    // deterministic start vector with components in every mode
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * (((i * 7 + seed * 13) % 17) as f64 / 17.0))
        .collect();
    normalize(&mut v);
    for _ in 0..6 {
        lu.solve_in_place(&mut v);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::EigenNoConvergence(6));
        }
        normalize(&mut v);
    }
    let tv = t.mul_vec(&v);
    let res = tv
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - lam * b).powi(2))
        .sum::<f64>()
        .sqrt();
    if res > 1e-8 * scale {
        return Err(Error::EigenNoConvergence(6));
    }
    Ok(v)
}
