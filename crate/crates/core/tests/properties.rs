use fracdiff_core::special::gamma;
use fracdiff_core::*;
use proptest::prelude::*;

fn alpha() -> impl Strategy<Value = f64> {
    0.05f64..=1.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ml_recurrence(a in 0.1f64..1.9, l in 0usize..=8, eta in 0.0f64..100.0) {
        let b = 1.0 + l as f64 * a;
        let lhs = mittag_leffler(a, b, -eta).unwrap();
        let rhs = 1.0 / gamma(b) - eta * mittag_leffler(a, b + a, -eta).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10, "residual {}", lhs - rhs);
    }

    #[test]
    fn relaxation_is_completely_monotone_in_range(a in alpha(), e1 in 0.0f64..6.0, e2 in 0.0f64..6.0) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let f = |e: f64| mittag_leffler(a, 1.0, -(10f64.powf(e) - 1.0)).unwrap();
        let (flo, fhi) = (f(lo), f(hi));
        prop_assert!(fhi > 0.0 && flo <= 1.0);
        prop_assert!(fhi <= flo + 1e-15);
    }

    #[test]
    fn ml_uniform_bound(a in 0.1f64..0.99, b in 0.5f64..3.0, e in -2.0f64..6.0) {
        // |E_{α,β}(-η)| <= C/(1+η) with C from the series and asymptotic regimes
        let eta = 10f64.powf(e);
        let v = mittag_leffler(a, b, -eta).unwrap();
        let c = 1.0 / gamma(b) + 1.0 / gamma(b - a).abs() + 2.0;
        prop_assert!(v.abs() * (1.0 + eta) <= c);
    }

    #[test]
    fn l1_weights_decrease_and_telescope(a in alpha(), n in 2usize..500) {
        let al = FractionalOrder::new(a).unwrap();
        let b = l1_weights(al, n);
        prop_assert_eq!(b[0], 1.0);
        for w in b.windows(2) {
            prop_assert!(w[1] <= w[0] && w[1] >= 0.0);
        }
        let s: f64 = b.iter().sum();
        prop_assert!((s - (n as f64).powf(1.0 - a)).abs() < 1e-10 * n as f64);
    }

    #[test]
    fn duhamel_round_trip(a in 0.1f64..=1.0, c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let al = FractionalOrder::new(a).unwrap();
        let grid = TimeGrid::new(1.0, 200).unwrap();
        let rho = Rho::from_fn(grid, |t| c0 + c1 * t + c2 * t * t, |t| c1 + 2.0 * c2 * t);
        let back = recover_rho(&duhamel_mu(&rho, al).unwrap(), al).unwrap();
        let err = back.max_abs_diff(&rho.series());
        prop_assert!(err < 1e-4 * (1.0 + c0.abs() + c1.abs() + c2.abs()), "err {err}");
    }

    #[test]
    fn source_solution_is_linear_in_rho(a in alpha(), s in -3.0f64..3.0) {
        let d = Domain1D::new(1.0, 31).unwrap();
        let m = assemble_operator(&d, &EllipticCoeffs::constant(&d, 1.0, 0.5).unwrap()).unwrap();
        let es = discrete_eigensystem(&m, 8, &d).unwrap();
        let grid = TimeGrid::new(0.5, 40).unwrap();
        let al = FractionalOrder::new(a).unwrap();
        let g = d.sample(|x| x * (1.0 - x));
        let solve = |f: &dyn Fn(f64) -> f64| {
            let rho = Rho::from_fn(grid, f, |_| 0.0);
            solve_source_spectral(&es, &SourceSpec { rho, g: g.clone() }, al, &grid).unwrap()
        };
        let base = solve(&|t| t * t);
        let one = solve(&|_| 1.0);
        let shifted = solve(&|t| t * t + s);
        let mut expect = base.clone();
        expect.values.scaled_add(s, &one.values);
        prop_assert!(shifted.max_abs_diff(&expect) < 1e-13 * (1.0 + s.abs()));
    }

    #[test]
    fn first_eigenfunction_is_positive(p in 0.1f64..3.0, q in 0.0f64..5.0, c in 0.0f64..20.0) {
        let d = Domain1D::new(1.0, 63).unwrap();
        let coeffs = EllipticCoeffs::from_fn(&d, |x| 1.0 + p * (q * x).sin().powi(2), |x| c * x).unwrap();
        let m = assemble_operator(&d, &coeffs).unwrap();
        let es = discrete_eigensystem(&m, 2, &d).unwrap();
        let phi = es.mode(0);
        let sign = phi[31].signum();
        prop_assert!(phi.iter().all(|v| v * sign > 0.0));
        prop_assert!(es.eigenvalues[0] < es.eigenvalues[1]);
    }

    #[test]
    fn l1_preserves_nonnegativity(a in alpha(), c in 0.0f64..10.0, x0 in 0.1f64..0.9, w in 0.02f64..0.3) {
        let d = Domain1D::new(1.0, 40).unwrap();
        let m = assemble_operator(&d, &EllipticCoeffs::constant(&d, 1.0, c).unwrap()).unwrap();
        let grid = TimeGrid::new(1.0, 60).unwrap();
        let init = d.sample(|x| (1.0 - (x - x0).abs() / w).max(0.0));
        let sol = l1_solve(&m, &d, &init, &L1Source::Zero, FractionalOrder::new(a).unwrap(), &grid).unwrap();
        prop_assert!(check_weak_mp(&sol, 0.0, true).min_value >= 0.0);
    }
}

#[test]
fn discrete_eigenvalues_converge_at_second_order() {
    let errs: Vec<f64> = [15usize, 31, 63, 127]
        .iter()
        .map(|&n| {
            let d = Domain1D::new(1.0, n).unwrap();
            let m = assemble_operator(&d, &EllipticCoeffs::constant(&d, 1.0, 0.0).unwrap()).unwrap();
            let es = discrete_eigensystem(&m, 3, &d).unwrap();
            (es.eigenvalues[2] - 9.0 * std::f64::consts::PI.powi(2)).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn eigenvalues_grow_quadratically() {
    let d = Domain1D::new(2.0, 511).unwrap();
    let m = assemble_operator(&d, &EllipticCoeffs::constant(&d, 1.0, 0.0).unwrap()).unwrap();
    let es = discrete_eigensystem(&m, 32, &d).unwrap();
    // λₙ ~ (nπ/L)²
    let n = [4.0f64, 8.0, 16.0, 32.0];
    let lam: Vec<f64> = n.iter().map(|&k| es.eigenvalues[k as usize - 1]).collect();
    for w in lam.windows(2) {
        assert!(((w[1] / w[0]).log2() - 2.0).abs() < 0.01);
    }
}
