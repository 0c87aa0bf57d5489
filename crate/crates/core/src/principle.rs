//! Numerical checks of the weak and strong maximum principles, Green
//! function nonnegativity and strict positivity.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::forward::{green_function, relaxation, FractionalOrder, SpaceTimeSolution};
use crate::grid::TimeSeries;
use crate::spectral::EigenSystem;

/// Outcome of a scan over the t > 0 part of a solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipleReport {
    pub principle: &'static str,
    pub min_value: f64,
    /// (x, t) of the minimum.
    pub argmin: (f64, f64),
    /// Number of maximal sub-tolerance intervals of t ↦ u(xᵢ, t), per node.
    pub zero_count_per_x: Vec<usize>,
    pub tolerance: f64,
    /// min_value < -tolerance (strict positivity: min_value <= tolerance).
    pub violated: bool,
    /// Whether the data satisfy the principle's hypotheses. A violation
    /// only speaks against the principle when this holds.
    pub hypothesis_met: bool,
}

impl PrincipleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn scan_min(sol: &SpaceTimeSolution) -> (f64, (f64, f64)) {
    let mut best = (f64::INFINITY, (f64::NAN, f64::NAN));
    for (i, row) in sol.values.rows().into_iter().enumerate() {
        for (j, &v) in row.iter().enumerate().skip(1) {
            if v < best.0 {
                best = (v, (sol.x[i], sol.t[j]));
            }
        }
    }
    best
}

fn zero_counts(sol: &SpaceTimeSolution, tol: f64) -> Vec<usize> {
    (0..sol.x.len())
        .map(|i| zero_set_estimate(&sol.trace(i), tol).count)
        .collect()
}

/// Weak maximum principle: nonnegative initial data and source give a
/// nonnegative solution. The t = 0 column counts as nonnegative down to
/// -tol.
pub fn check_weak_mp(sol: &SpaceTimeSolution, tol: f64, source_nonnegative: bool) -> PrincipleReport {
    let (min_value, argmin) = scan_min(sol);
    let initial_ok = sol.values.column(0).iter().all(|&v| v >= -tol);
    PrincipleReport {
        principle: "weak",
        min_value,
        argmin,
        zero_count_per_x: zero_counts(sol, tol),
        tolerance: tol,
        violated: min_value < -tol,
        hypothesis_met: initial_ok && source_nonnegative,
    }
}

/// Strict positivity for strictly positive initial data and no source.
pub fn check_strict_positivity(sol: &SpaceTimeSolution, tol: f64) -> PrincipleReport {
    let (min_value, argmin) = scan_min(sol);
    PrincipleReport {
        principle: "strict",
        min_value,
        argmin,
        zero_count_per_x: zero_counts(sol, tol),
        tolerance: tol,
        violated: min_value <= tol,
        hypothesis_met: sol.values.column(0).iter().all(|&v| v > 0.0),
    }
}

/// Maximal intervals of (0, T] on which |trace| <= tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    pub count: usize,
    pub zero_intervals: Vec<[f64; 2]>,
    pub tolerance: f64,
    /// The whole of (0, T] is below tolerance.
    pub degenerate: bool,
}

/// Counts maximal runs of sub-tolerance samples at t > 0.
pub fn zero_set_estimate(trace: &TimeSeries, tol: f64) -> ZeroSet {
    let mut intervals = Vec::new();
    let mut open: Option<[f64; 2]> = None;
    let mut all_small = true;
    for (&t, &v) in trace.times.iter().zip(&trace.values) {
        if t <= 0.0 {
            continue;
        }
        if v.abs() <= tol {
            match open.as_mut() {
                Some(iv) => iv[1] = t,
                None => open = Some([t, t]),
            }
        } else {
            all_small = false;
            if let Some(iv) = open.take() {
                intervals.push(iv);
            }
        }
    }
    if let Some(iv) = open {
        intervals.push(iv);
    }
    ZeroSet {
        count: intervals.len(),
        degenerate: all_small && !intervals.is_empty(),
        zero_intervals: intervals,
        tolerance: tol,
    }
}

/// Default zero-detection tolerance from an error estimate.
pub fn default_zero_tolerance(error_estimate: f64) -> f64 {
    10.0 * error_estimate
}

/// One (t, N) entry of a Green function scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenEntry {
    pub t: f64,
    pub modes: usize,
    pub min_value: f64,
    /// Observed deficit max(0, -min).
    pub epsilon: f64,
    /// Bound on the dropped modes, Σ_{n>N} E_{α,1}(-λₙt^α)·max|φₙ|², with
    /// λₙ extrapolated quadratically from λ_N.
    pub tail_bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenReport {
    pub x: f64,
    pub alpha: f64,
    pub entries: Vec<GreenEntry>,
    pub ok: bool,
}

fn tail_bound(es: &EigenSystem, modes: usize, alpha: FractionalOrder, t: f64) -> Result<f64> {
    let lam_n = es.eigenvalues[modes - 1];
    let c = lam_n / (modes * modes) as f64;
    let amp = 2.0 / es.domain.length;
    let last = 100 * modes;
    let mut sum = 0.0;
    for n in modes + 1..=last {
        sum += relaxation(alpha.value(), c * (n * n) as f64, t)?;
    }
    // E_{α,1}(-η) <= 1/(1 + η Γ(1-α)) gives a 1/n² remainder
    let rest = if alpha.is_classical() {
        0.0
    } else {
        let g = crate::special::gamma(1.0 - alpha.value());
        1.0 / (g * c * t.powf(alpha.value()) * last as f64)
    };
    Ok(amp * (sum + rest))
}

/// Minimum over y of the N-mode Green function G(x, ·, t) for every
/// (t, N) pair.
pub fn check_green_nonneg(
    es: &EigenSystem,
    x_index: usize,
    alpha: FractionalOrder,
    t_list: &[f64],
    n_list: &[usize],
) -> Result<GreenReport> {
    let mut entries = Vec::new();
    for &t in t_list {
        for &n in n_list {
            if n == 0 || n > es.mode_count() {
                return invalid(format!("mode count {n} outside 1..={}", es.mode_count()));
            }
            let sub = es.truncated(n)?;
            let g = green_function(&sub, x_index, alpha, t)?;
            let min_value = g.min();
            let tail = tail_bound(es, n, alpha, t)?;
            entries.push(GreenEntry {
                t,
                modes: n,
                min_value,
                epsilon: (-min_value).max(0.0),
                tail_bound: tail,
                within_bound: min_value >= -tail,
            });
        }
    }
    Ok(GreenReport {
        x: es.domain.x(x_index),
        alpha: alpha.value(),
        ok: entries.iter().all(|e| e.within_bound),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::solve_homogeneous;
    use crate::grid::{Domain1D, Field, TimeGrid};
    use crate::spectral::analytic_eigensystem;

    #[test]
    fn zero_sets() {
        let t: Vec<f64> = (0..=10).map(|j| j as f64 * 0.1).collect();
        let z = zero_set_estimate(&TimeSeries::from_fn(t.clone(), |_| 0.0), 1e-9);
        assert_eq!(z.count, 1);
        assert!(z.degenerate);
        assert_eq!(z.zero_intervals[0], [0.1, 1.0]);
        let z = zero_set_estimate(&TimeSeries::from_fn(t.clone(), |s| 1.0 + s), 1e-9);
        assert_eq!(z.count, 0);
        let v = vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let z = zero_set_estimate(&TimeSeries::new(t, v).unwrap(), 1e-9);
        assert_eq!(z.count, 3);
        assert!(!z.degenerate);
    }

    #[test]
    fn weak_and_strict_reports() {
        let es = analytic_eigensystem(&Domain1D::new(1.0, 63).unwrap(), 16).unwrap();
        let alpha = FractionalOrder::new(0.5).unwrap();
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let pos = solve_homogeneous(&es, &Field::new(es.mode(0).to_vec()), alpha, &grid).unwrap();
        let r = check_weak_mp(&pos, 1e-10, true);
        assert!(!r.violated && r.hypothesis_met);
        let s = check_strict_positivity(&pos, 0.0);
        assert!(!s.violated && s.hypothesis_met);
        assert!(s.zero_count_per_x.iter().all(|&c| c == 0));
        let sign = solve_homogeneous(&es, &Field::new(es.mode(1).to_vec()), alpha, &grid).unwrap();
        let r = check_weak_mp(&sign, 1e-10, true);
        assert!(r.min_value < 0.0 && r.violated && !r.hypothesis_met);
        let json = r.to_json();
        assert!(json.contains("\"min_value\"") && json.contains("\"argmin\""));
    }

    #[test]
    fn heat_kernel_is_nonnegative() {
        let es = analytic_eigensystem(&Domain1D::new(1.0, 255).unwrap(), 64).unwrap();
        let rep = check_green_nonneg(&es, 60, FractionalOrder::new(1.0).unwrap(), &[0.1], &[64]).unwrap();
        assert!(rep.entries[0].min_value >= -1e-12);
        assert!(rep.ok);
    }
}
