//! L1 finite-difference time stepping for ∂ₜᵅu + A_h u = F, used as an
//! independent check on the spectral solvers.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::forward::{FractionalOrder, SpaceTimeSolution};
use crate::grid::{Domain1D, Field, TimeGrid};
use crate::linalg::{SymTridiagonal, ThomasFactor};
use crate::special::gamma;

/// b_k = (k+1)^{1-α} - k^{1-α}, k = 0..count-1.
pub fn l1_weights(alpha: FractionalOrder, count: usize) -> Vec<f64> {
    let p = 1.0 - alpha.value();
    (0..count)
        .map(|k| {
            if k == 0 {
                return 1.0;
            }
            let k = k as f64;
            (k + 1.0).powf(p) - k.powf(p)
        })
        .collect()
}

/// Right-hand side F(xᵢ, tₙ) of the stepping scheme.
#[derive(Debug, Clone, PartialEq)]
pub enum L1Source {
    Zero,
    /// ρ(tₙ) at every time node times g(xᵢ).
    Separable { rho: Vec<f64>, g: Field },
    /// F(xᵢ, tₙ) at row i, column n.
    Dense(Array2<f64>),
}

impl L1Source {
    fn check(&self, points: usize, nt: usize) -> Result<()> {
        let bad = |expected, got| Err(Error::GridMismatch { expected, got });
        match self {
            L1Source::Zero => Ok(()),
            L1Source::Separable { rho, g } => {
                if rho.len() != nt {
                    return bad(nt, rho.len());
                }
                g.check_len(points)
            }
            L1Source::Dense(f) => {
                if f.dim() != (points, nt) {
                    return bad(points * nt, f.len());
                }
                Ok(())
            }
        }
    }

    fn add_to(&self, rhs: &mut [f64], n: usize) {
        match self {
            L1Source::Zero => {}
            L1Source::Separable { rho, g } => {
                for (r, gv) in rhs.iter_mut().zip(&g.values) {
                    *r += rho[n] * gv;
                }
            }
            L1Source::Dense(f) => {
                for (r, fv) in rhs.iter_mut().zip(f.column(n).iter()) {
                    *r += fv;
                }
            }
        }
    }
}

/// Implicit L1 scheme: (σI + A_h)uⁿ = σ[Σ_{k=1}^{n-1}(b_{k-1} - b_k)u^{n-k}
/// + b_{n-1}u⁰] + Fⁿ with σ = 1/(Γ(2-α)Δt^α).
pub fn l1_solve(
    matrix: &SymTridiagonal,
    domain: &Domain1D,
    a: &Field,
    source: &L1Source,
    alpha: FractionalOrder,
    times: &TimeGrid,
) -> Result<SpaceTimeSolution> {
    let nx = domain.points;
    if matrix.dim() != nx {
        return Err(Error::GridMismatch {
            expected: nx,
            got: matrix.dim(),
        });
    }
    a.check_len(nx)?;
    let nt = times.len();
    source.check(nx, nt)?;
    let al = alpha.value();
    let dt = times.dt();
    let sigma = 1.0 / (gamma(2.0 - al) * dt.powf(al));
    let b = l1_weights(alpha, times.steps);
    let diffs: Vec<f64> = (1..b.len()).map(|k| b[k - 1] - b[k]).collect();
    let factor = ThomasFactor::new(matrix, sigma)?;

    let mut u = Array2::<f64>::zeros((nt, nx));
    u.row_mut(0).assign(&ndarray::ArrayView1::from(&a.values[..]));
    let mut rhs = vec![0.0; nx];
    for n in 1..nt {
        let b_last = b[n - 1];
        for (r, u0) in rhs.iter_mut().zip(&a.values) {
            *r = b_last * u0;
        }
        for k in 1..n {
            let w = diffs[k - 1];
            if w == 0.0 {
                continue;
            }
            for (r, v) in rhs.iter_mut().zip(u.row(n - k).iter()) {
                *r += w * v;
            }
        }
        for r in rhs.iter_mut() {
            *r *= sigma;
        }
        source.add_to(&mut rhs, n);
        let next = factor.solve(&rhs)?;
        u.row_mut(n).assign(&ndarray::ArrayView1::from(&next[..]));
    }
    Ok(SpaceTimeSolution {
        x: domain.nodes(),
        t: times.nodes(),
        values: u.reversed_axes().as_standard_layout().to_owned(),
        alpha: al,
    })
}
