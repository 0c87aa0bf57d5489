//! Gauss–Legendre rules, an adaptive integrator built on them, and the
//! product-integration moments used by the weakly singular convolutions.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// An n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫_a^b f.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 10-point rule.
pub fn gl10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// Shared 16-point rule.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

const MAX_SUBINTERVALS: usize = 4000;

/// Adaptive Gauss–Legendre integration of f over [a, b].
///
/// Each interval is accepted once the 10-point value agrees with the sum over
/// its two halves to within its share of `abs_tol`; otherwise it is bisected.
/// `breakpoints` (strictly inside (a, b)) seed the initial partition, which is
/// where known kinks or peaks of the integrand should go.
pub fn adaptive_gauss_legendre<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let rule = gl10();
    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&p| p > a && p < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup();

    let width = b - a;
    let mut stack: Vec<(f64, f64, f64)> = edges
        .windows(2)
        .map(|w| (w[0], w[1], rule.integrate(&mut f, w[0], w[1])))
        .collect();
    let mut total = 0.0;
    let mut comp = 0.0;
    let mut worst = 0.0_f64;
    let mut processed = 0;
    while let Some((lo, hi, whole)) = stack.pop() {
        processed += 1;
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(&mut f, lo, mid);
        let right = rule.integrate(&mut f, mid, hi);
        let refined = left + right;
        let err = (refined - whole).abs();
        let share = abs_tol * ((hi - lo) / width).max(1e-3);
        if err <= share || (hi - lo) < 1e-14 * width.max(1.0) || processed > MAX_SUBINTERVALS {
            if err > share {
                worst = worst.max(err);
            }
            // Neumaier summation over accepted pieces
            let t = total + refined;
            if total.abs() >= refined.abs() {
                comp += (total - t) + refined;
            } else {
                comp += (refined - t) + total;
            }
            total = t;
        } else {
            stack.push((mid, hi, right));
            stack.push((lo, mid, left));
        }
    }
    if worst > 100.0 * abs_tol {
        return Err(Error::Quadrature {
            tol: abs_tol,
            estimate: worst,
        });
    }
    Ok(total + comp)
}

/// Exact moments of the kernel (t - s)^q over [a, b] ⊂ [0, t], q > -1:
/// returns (∫ (t-s)^q ds, ∫ (t-s)^q s ds).
pub fn upper_power_moments(t: f64, a: f64, b: f64, q: f64) -> (f64, f64) {
    let wa = t - a;
    let wb = (t - b).max(0.0);
    let m0 = (wa.powf(q + 1.0) - wb.powf(q + 1.0)) / (q + 1.0);
    // s = t - w
    let w1 = (wa.powf(q + 2.0) - wb.powf(q + 2.0)) / (q + 2.0);
    (m0, t * m0 - w1)
}

/// Exact moments of s^p over [a, b], p > -1: returns (∫ s^p ds, ∫ s^{p+1} ds).
pub fn lower_power_moments(a: f64, b: f64, p: f64) -> (f64, f64) {
    let m0 = (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0);
    let m1 = (b.powf(p + 2.0) - a.powf(p + 2.0)) / (p + 2.0);
    (m0, m1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 10, 16] {
            let rule = GaussLegendre::new(n);
            let ws: f64 = rule.weights().iter().sum();
            assert!((ws - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let got = rule.integrate(|x| x.powi(deg as i32 - 1), 0.0, 1.0);
            assert!((got - 1.0 / deg as f64).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn adaptive_handles_peaks_and_kinks() {
        let v = adaptive_gauss_legendre(|x| (x - 0.3).abs(), 0.0, 1.0, &[], 1e-13).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-12);
        let w = 1e-3;
        let v = adaptive_gauss_legendre(|x| w / (w * w + (x - 0.5).powi(2)), 0.0, 1.0, &[0.5], 1e-12)
            .unwrap();
        let exact = 2.0 * (0.5 / w).atan();
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn power_moments_closed_forms() {
        let (m0, m1) = upper_power_moments(2.0, 0.5, 1.5, -0.5);
        let n0 = gl16().integrate(|s| (2.0 - s).powf(-0.5), 0.5, 1.5);
        let n1 = gl16().integrate(|s| s * (2.0 - s).powf(-0.5), 0.5, 1.5);
        assert!((m0 - n0).abs() < 1e-13 && (m1 - n1).abs() < 1e-13);
        let (l0, l1) = lower_power_moments(0.0, 1.0, -0.5);
        assert!((l0 - 2.0).abs() < 1e-15 && (l1 - 2.0 / 3.0).abs() < 1e-15);
    }
}
