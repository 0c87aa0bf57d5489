use std::f64::consts::PI;

use fracdiff_core::*;

fn setup(nx: usize, modes: usize) -> (Domain1D, SymTridiagonal, EigenSystem) {
    let d = Domain1D::new(1.0, nx).unwrap();
    let coeffs = EllipticCoeffs::from_fn(&d, |x| 1.0 + 0.5 * x, |x| 2.0 * x * x).unwrap();
    let m = assemble_operator(&d, &coeffs).unwrap();
    let es = discrete_eigensystem(&m, modes, &d).unwrap();
    (d, m, es)
}

fn source_gap(es: &EigenSystem, d: &Domain1D, a: f64, steps: usize, linear: bool) -> f64 {
    let grid = TimeGrid::new(1.0, steps).unwrap();
    let alpha = FractionalOrder::new(a).unwrap();
    let rho = if linear {
        Rho::from_fn(grid, |t| 1.0 + 2.0 * t, |_| 2.0)
    } else {
        Rho::from_fn(grid, |t| 1.0 + (PI * t).sin(), |t| PI * (PI * t).cos())
    };
    let src = SourceSpec {
        rho,
        g: d.sample(|x| (1.0 - (x - 0.4).abs() / 0.3).max(0.0)),
    };
    let s = solve_source_spectral(es, &src, alpha, &grid).unwrap();
    let u = solve_source_duhamel(es, &src, alpha, &grid).unwrap();
    s.max_abs_diff(&u) / s.max_abs()
}

#[test]
fn spectral_and_duhamel_sources_agree() {
    let (d, _, es) = setup(63, 24);
    for &a in &[0.3, 0.7, 1.0] {
        let coarse = source_gap(&es, &d, a, 100, false);
        let fine = source_gap(&es, &d, a, 400, false);
        assert!(fine < 1e-5, "alpha {a}: {fine}");
        assert!(coarse / fine > 10.0, "alpha {a}: {coarse} -> {fine}");
        let exact = source_gap(&es, &d, a, 50, true);
        assert!(exact < 1e-10, "alpha {a}: {exact}");
    }
}

#[test]
fn eigenmode_relaxes_by_mittag_leffler() {
    let (_, _, es) = setup(47, 6);
    let grid = TimeGrid::new(2.0, 10).unwrap();
    let alpha = FractionalOrder::new(0.45).unwrap();
    let phi = Field::new(es.mode(3).to_vec());
    let sol = solve_homogeneous(&es, &phi, alpha, &grid).unwrap();
    for (j, &t) in sol.t.iter().enumerate() {
        let e = mittag_leffler(0.45, 1.0, -es.eigenvalues[3] * t.powf(0.45)).unwrap();
        for i in 0..47 {
            assert!((sol.values[[i, j]] - e * phi.values[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn green_function_is_symmetric_and_reproduces_solution() {
    let (d, _, es) = setup(31, 31);
    let alpha = FractionalOrder::new(0.6).unwrap();
    let t = 0.05;
    let g5 = green_function(&es, 5, alpha, t).unwrap();
    let g20 = green_function(&es, 20, alpha, t).unwrap();
    assert!((g5.values[20] - g20.values[5]).abs() < 1e-12);
    // u(x, t) = Σ_y G(x, y, t) a(y) h
    let a = d.sample(|x| x * x * (1.0 - x));
    let sol = solve_homogeneous(&es, &a, alpha, &TimeGrid::new(t, 1).unwrap()).unwrap();
    let via_green: f64 = g5.values.iter().zip(&a.values).map(|(g, v)| g * v * d.h()).sum();
    assert!((via_green - sol.values[[5, 1]]).abs() < 1e-12);
}

#[test]
fn zero_counts_are_stable_under_refinement() {
    let (d, _, es) = setup(63, 63);
    let alpha = FractionalOrder::new(0.5).unwrap();
    // sign-changing data: the zero set of the trace is a point in time
    let a = Field::new(
        es.mode(0)
            .iter()
            .zip(es.mode(1).iter())
            .map(|(p, q)| p - 1.5 * q)
            .collect(),
    );
    let i = d.nearest_index(0.2);
    let counts: Vec<usize> = [100usize, 400]
        .iter()
        .map(|&m| {
            let sol = solve_homogeneous(&es, &a, alpha, &TimeGrid::new(1.0, m).unwrap()).unwrap();
            let tr = sol.trace(i);
            // sign changes of the trace
            tr.values.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
        })
        .collect();
    assert_eq!(counts[0], counts[1]);
    assert_eq!(counts[0], 1);
}

#[test]
fn eigensystem_csv_layout() {
    let (_, _, es) = setup(7, 3);
    let mut out = Vec::new();
    es.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8);
    assert!(lines[0].starts_with("x,lambda="));
    assert_eq!(lines[1].split(',').count(), 4);
}
