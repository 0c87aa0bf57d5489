use std::fs::File;
use std::io::{BufWriter, Write};

use fracdiff_core::io::{csv_row, fmt_g15, write_columns};
use fracdiff_core::principle::default_zero_tolerance;
use fracdiff_core::{
    check_green_nonneg, check_strict_positivity, check_weak_mp, l1_solve, mittag_leffler, run_inversion,
    solve_homogeneous, solve_source_duhamel, solve_source_spectral, zero_set_estimate, Error, Field, InverseProblem,
    InverseSetup, L1Source, Regularization, SourceSpec, SpaceTimeSolution, TimeSeries,
};
use serde_json::{json, Value};

use crate::config::{
    CheckConfig, CounterexampleConfig, GreenConfig, InvertConfig, Method, MlConfig, Principle, Problem, RegChoice,
    SolveConfig, SourceConfig,
};
use crate::CliError;

fn create(path: &str) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn io_err(path: &str) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{path}: {e}"))
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("z grid must look like lo:hi:n, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect())
}

/// Prints "z,value" rows to stdout; returns no summary.
pub fn ml(cfg: &MlConfig) -> Result<Option<Value>, CliError> {
    let zs = match (&cfg.z_grid, cfg.z) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(z)) => vec![z],
        (None, None) => return Err(CliError::Config("either z or z_grid is required".into())),
    };
    let mut rows = Vec::with_capacity(zs.len());
    for z in zs {
        rows.push(format!("{},{}", fmt_g15(z), fmt_g15(mittag_leffler(cfg.alpha, cfg.beta, z)?)));
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "z,value").map_err(io_err("stdout"))?;
    for r in rows {
        writeln!(out, "{r}").map_err(io_err("stdout"))?;
    }
    Ok(None)
}

fn source_spec(src: &SourceConfig, p: &Problem) -> Result<SourceSpec, CliError> {
    Ok(SourceSpec {
        rho: src.rho.build(p.grid),
        g: src.g.sample(p)?,
    })
}

fn add_in_place(a: &mut SpaceTimeSolution, b: &SpaceTimeSolution) {
    a.values += &b.values;
}

fn forward(p: &Problem, initial: &Field, source: Option<&SourceConfig>, method: Method) -> Result<SpaceTimeSolution, CliError> {
    match method {
        Method::L1 => {
            let src = match source {
                None => L1Source::Zero,
                Some(s) => {
                    let spec = source_spec(s, p)?;
                    L1Source::Separable {
                        rho: spec.rho.values,
                        g: spec.g,
                    }
                }
            };
            Ok(l1_solve(&p.matrix, &p.domain, initial, &src, p.alpha, &p.grid)?)
        }
        Method::Spectral | Method::Duhamel => {
            let mut sol = solve_homogeneous(&p.es, initial, p.alpha, &p.grid)?;
            if let Some(s) = source {
                let spec = source_spec(s, p)?;
                let part = if method == Method::Spectral {
                    solve_source_spectral(&p.es, &spec, p.alpha, &p.grid)?
                } else {
                    solve_source_duhamel(&p.es, &spec, p.alpha, &p.grid)?
                };
                add_in_place(&mut sol, &part);
            }
            Ok(sol)
        }
    }
}

fn source_nonnegative(src: Option<&SourceConfig>, p: &Problem) -> Result<bool, CliError> {
    Ok(match src {
        None => true,
        Some(s) => {
            let spec = source_spec(s, p)?;
            spec.rho.values.iter().all(|v| *v >= 0.0) && spec.g.is_nonnegative()
        }
    })
}

pub fn solve(cfg: &SolveConfig) -> Result<Option<Value>, CliError> {
    let p = cfg.problem.build()?;
    let a = cfg.initial.sample(&p)?;
    let sol = forward(&p, &a, cfg.source.as_ref(), cfg.method)?;
    let mut out = create(&cfg.output)?;
    sol.write_csv(&mut out).map_err(io_err(&cfg.output))?;
    out.flush().map_err(io_err(&cfg.output))?;
    let last = sol.snapshot(sol.t.len() - 1);
    let min = sol.values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    Ok(Some(json!({
        "command": "solve",
        "method": cfg.method,
        "nx": p.domain.points,
        "steps": p.grid.steps,
        "modes": p.es.mode_count(),
        "max_abs": sol.max_abs(),
        "min": min,
        "final_max_abs": last.max_abs(),
        "output": cfg.output,
    })))
}

pub fn green(cfg: &GreenConfig) -> Result<Option<Value>, CliError> {
    let p = cfg.problem.build()?;
    if cfg.times.is_empty() || cfg.modes_list.is_empty() {
        return Err(CliError::Config("times and modes_list must be nonempty".into()));
    }
    let xi = p.domain.nearest_index(cfg.x);
    let report = check_green_nonneg(&p.es, xi, p.alpha, &cfg.times, &cfg.modes_list)?;
    let nmax = *cfg.modes_list.iter().max().expect("nonempty");
    let sub = p.es.truncated(nmax)?;
    let mut cols = vec![p.domain.nodes()];
    let mut header = vec!["y".to_string()];
    for &t in &cfg.times {
        cols.push(fracdiff_core::green_function(&sub, xi, p.alpha, t)?.values);
        header.push(format!("t={}", fmt_g15(t)));
    }
    let mut out = create(&cfg.output)?;
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    let hdr: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_columns(&mut out, &hdr, &refs).map_err(io_err(&cfg.output))?;
    out.flush().map_err(io_err(&cfg.output))?;
    Ok(Some(json!({
        "command": "green",
        "x": report.x,
        "alpha": report.alpha,
        "modes": nmax,
        "ok": report.ok,
        "entries": report.entries,
        "output": cfg.output,
    })))
}

pub fn check(cfg: &CheckConfig) -> Result<Option<Value>, CliError> {
    let p = cfg.problem.build()?;
    if !(cfg.tolerance >= 0.0) {
        return Err(CliError::Config(format!("tolerance must be nonnegative, got {}", cfg.tolerance)));
    }
    let (report, summary) = match cfg.principle {
        Principle::Green => {
            let xi = p.domain.nearest_index(cfg.x);
            let rep = check_green_nonneg(&p.es, xi, p.alpha, &cfg.times, &cfg.modes_list)?;
            let worst = rep.entries.iter().fold(f64::INFINITY, |m, e| m.min(e.min_value));
            let summary = json!({
                "command": "check",
                "principle": "green",
                "violated": !rep.ok,
                "min_value": worst,
            });
            (serde_json::to_value(&rep).expect("report serializes"), summary)
        }
        Principle::Weak | Principle::Strict => {
            let a = cfg.initial.sample(&p)?;
            if cfg.principle == Principle::Strict && cfg.source.is_some() {
                return Err(CliError::Config("strict positivity is checked without a source".into()));
            }
            let sol = forward(&p, &a, cfg.source.as_ref(), Method::Spectral)?;
            let rep = if cfg.principle == Principle::Weak {
                check_weak_mp(&sol, cfg.tolerance, source_nonnegative(cfg.source.as_ref(), &p)?)
            } else {
                check_strict_positivity(&sol, cfg.tolerance)
            };
            let summary = json!({
                "command": "check",
                "principle": rep.principle,
                "violated": rep.violated,
                "hypothesis_met": rep.hypothesis_met,
                "min_value": rep.min_value,
                "argmin": rep.argmin,
            });
            (serde_json::to_value(&rep).expect("report serializes"), summary)
        }
        Principle::ZeroSet => {
            let a = cfg.initial.sample(&p)?;
            let sol = forward(&p, &a, cfg.source.as_ref(), Method::Spectral)?;
            let tol = if cfg.tolerance > 0.0 {
                cfg.tolerance
            } else {
                default_zero_tolerance(1e-12 * sol.max_abs())
            };
            let mut sets = Vec::new();
            for &x in &cfg.points {
                let i = p.domain.nearest_index(x);
                let z = zero_set_estimate(&sol.trace(i), tol);
                sets.push(json!({ "x": p.domain.x(i), "zero_set": z }));
            }
            let counts: Vec<usize> = sets
                .iter()
                .map(|s| s["zero_set"]["count"].as_u64().unwrap_or(0) as usize)
                .collect();
            let summary = json!({
                "command": "check",
                "principle": "zero_set",
                "tolerance": tol,
                "counts": counts,
            });
            (json!({ "principle": "zero_set", "points": sets }), summary)
        }
    };
    let mut out = create(&cfg.output)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))
        .and_then(|_| out.flush())
        .map_err(io_err(&cfg.output))?;
    let mut summary = summary;
    summary["output"] = json!(cfg.output);
    Ok(Some(summary))
}

fn regularization(choice: &RegChoice, noise_level: f64) -> Result<Regularization, CliError> {
    match choice {
        RegChoice::Named(s) if s == "none" => Ok(Regularization::None),
        RegChoice::Named(s) if s == "auto" => Ok(if noise_level > 0.0 {
            Regularization::Discrepancy { noise_level }
        } else {
            Regularization::None
        }),
        RegChoice::Named(s) => Err(CliError::Config(format!(
            "regularization must be \"none\", \"auto\" or a nonnegative weight, got {s:?}"
        ))),
        RegChoice::Weight(w) if *w >= 0.0 => Ok(Regularization::Fixed { weight: *w }),
        RegChoice::Weight(w) => Err(CliError::Config(format!("regularization weight must be nonnegative, got {w}"))),
    }
}

pub fn invert(cfg: &InvertConfig) -> Result<Option<Value>, CliError> {
    let p = cfg.problem.build()?;
    if !(cfg.x0 > 0.0 && cfg.x0 < p.domain.length) {
        return Err(CliError::Config(format!("x0 must lie in (0, L), got {}", cfg.x0)));
    }
    let reg = regularization(&cfg.regularization, cfg.noise_level)?;
    let setup = InverseSetup {
        domain: p.domain,
        matrix: p.matrix.clone(),
        g: cfg.g.sample(&p)?,
        x0: p.domain.nearest_index(cfg.x0),
        alpha: p.alpha,
        grid: p.grid,
    };
    let times = p.grid.nodes();
    let rho_true = if cfg.zero_data {
        TimeSeries::from_fn(times.clone(), |_| 0.0)
    } else {
        TimeSeries::from_fn(times.clone(), |t| cfg.rho_true.value(t))
    };
    let data = if cfg.zero_data {
        rho_true.clone()
    } else {
        fracdiff_core::generate_data(&setup, &rho_true, cfg.noise_level, cfg.seed)?
    };
    let prob = InverseProblem {
        setup,
        data,
        noise_level: cfg.noise_level,
        regularization: reg,
        modes: p.es.mode_count(),
    };
    let res = run_inversion(&prob)?;
    let mut out = create(&cfg.output)?;
    let w = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "t,rho_true,rho_hat,t_mid,mu_hat")?;
        for j in 0..times.len() {
            let (tm, mu) = if j == 0 {
                (f64::NAN, f64::NAN)
            } else {
                (res.mu_hat.times[j - 1], res.mu_hat.values[j - 1])
            };
            writeln!(out, "{}", csv_row([times[j], rho_true.values[j], res.rho_hat.values[j], tm, mu]))?;
        }
        out.flush()
    };
    w(&mut out).map_err(io_err(&cfg.output))?;
    let rel = if rho_true.max_abs() > 0.0 {
        json!(fracdiff_core::inverse::relative_l2_error(&res.rho_hat, &rho_true))
    } else {
        Value::Null
    };
    Ok(Some(json!({
        "command": "invert",
        "x0": p.domain.x(prob.setup.x0),
        "rho_max_abs": res.rho_hat.max_abs(),
        "relative_l2_error": rel,
        "residual": res.residual,
        "noise_floor": res.noise_floor,
        "regularization_parameter": res.regularization_parameter,
        "hypothesis_met": res.hypothesis_met,
        "output": cfg.output,
    })))
}

pub fn counterexample(cfg: &CounterexampleConfig) -> Result<Option<Value>, CliError> {
    let p = cfg.problem.build()?;
    let l = p.domain.length;
    let center = p.domain.exact_index(0.5 * l).ok_or_else(|| {
        CliError::Config(format!(
            "x = L/2 must be a grid node, which needs an odd nx (got {})",
            p.domain.points
        ))
    })?;
    let g = p.domain.sample(|x| (2.0 * std::f64::consts::PI * x / l).sin());
    let zero = Field::zeros(p.domain.points);
    let run = |rho: &crate::config::RhoSpec| -> Result<SpaceTimeSolution, CliError> {
        let spec = SourceSpec {
            rho: rho.build(p.grid),
            g: g.clone(),
        };
        Ok(solve_source_spectral(&p.es, &spec, p.alpha, &p.grid)?)
    };
    let u = run(&cfg.rho)?;
    let u_alt = run(&cfg.rho_alt)?;
    let l1 = l1_solve(
        &p.matrix,
        &p.domain,
        &zero,
        &L1Source::Separable {
            rho: cfg.rho.build(p.grid).values,
            g: g.clone(),
        },
        p.alpha,
        &p.grid,
    )?;
    let trace = u.trace(center);
    let trace_alt = u_alt.trace(center);
    let trace_l1 = l1.trace(center);
    let quarter = p.domain.nearest_index(0.25 * l);
    let inversion = run_inversion(&InverseProblem {
        setup: InverseSetup {
            domain: p.domain,
            matrix: p.matrix.clone(),
            g,
            x0: center,
            alpha: p.alpha,
            grid: p.grid,
        },
        data: trace.clone(),
        noise_level: 0.0,
        regularization: Regularization::None,
        modes: p.es.mode_count(),
    });
    let inversion_msg = match inversion {
        Err(e @ Error::DegenerateKernel(_)) => e.to_string(),
        Err(e) => return Err(e.into()),
        Ok(_) => "accepted".to_string(),
    };
    let mut out = create(&cfg.output)?;
    write_columns(
        &mut out,
        &["t", "u_half", "u_half_alt", "u_half_l1", "u_quarter"],
        &[&trace.times, &trace.values, &trace_alt.values, &trace_l1.values, &u.trace(quarter).values],
    )
    .and_then(|_| out.flush())
    .map_err(io_err(&cfg.output))?;
    Ok(Some(json!({
        "command": "counterexample",
        "x": p.domain.x(center),
        "max_abs_u_at_half": trace.max_abs(),
        "l1_max_abs_u_at_half": trace_l1.max_abs(),
        "max_abs_u_alt_at_half": trace_alt.max_abs(),
        "max_abs_u": u.max_abs(),
        "max_abs_u_alt": u_alt.max_abs(),
        "inversion": inversion_msg,
        "uniqueness": false,
        "output": cfg.output,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_grid_parsing() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("2:5:1").unwrap(), vec![2.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:2:3").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn auto_regularization_follows_noise() {
        let auto = RegChoice::Named("auto".into());
        assert_eq!(regularization(&auto, 0.0).unwrap(), Regularization::None);
        assert_eq!(
            regularization(&auto, 0.01).unwrap(),
            Regularization::Discrepancy { noise_level: 0.01 }
        );
        assert!(regularization(&RegChoice::Named("lcurve".into()), 0.0).is_err());
        assert!(regularization(&RegChoice::Weight(-1.0), 0.0).is_err());
    }
}
