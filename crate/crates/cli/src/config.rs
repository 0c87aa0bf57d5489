//! Run configurations. Every field has a default; JSON files may set any
//! subset and unknown fields are rejected.

use std::f64::consts::PI;

use fracdiff_core::spectral::default_mode_count;
use fracdiff_core::{
    analytic_eigensystem, assemble_operator, discrete_eigensystem, Domain1D, EigenSystem,
    EllipticCoeffs, Field, FractionalOrder, Rho, SymTridiagonal, TimeGrid,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenKind {
    Discrete,
    Analytic,
}

/// Grid, operator and order shared by every solver command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    pub length: f64,
    pub nx: usize,
    pub modes: Option<usize>,
    pub t_final: f64,
    pub steps: usize,
    /// Constant diffusion coefficient a.
    pub a: f64,
    /// Constant reaction coefficient c.
    pub c: f64,
    pub eigensystem: EigenKind,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            length: 1.0,
            nx: 255,
            modes: None,
            t_final: 1.0,
            steps: 1000,
            a: 1.0,
            c: 0.0,
            eigensystem: EigenKind::Discrete,
        }
    }
}

/// Everything a solver needs, built from a [`ProblemConfig`].
pub struct Problem {
    pub alpha: FractionalOrder,
    pub domain: Domain1D,
    pub matrix: SymTridiagonal,
    pub grid: TimeGrid,
    pub es: EigenSystem,
}

impl ProblemConfig {
    pub fn mode_count(&self) -> usize {
        self.modes.unwrap_or_else(|| default_mode_count(self.nx))
    }

    pub fn build(&self) -> Result<Problem, CliError> {
        let alpha = FractionalOrder::new(self.alpha)?;
        let domain = Domain1D::new(self.length, self.nx)?;
        let coeffs = EllipticCoeffs::constant(&domain, self.a, self.c)?;
        let matrix = assemble_operator(&domain, &coeffs)?;
        let grid = TimeGrid::new(self.t_final, self.steps)?;
        let modes = self.mode_count();
        let es = match self.eigensystem {
            EigenKind::Discrete => discrete_eigensystem(&matrix, modes, &domain)?,
            EigenKind::Analytic => {
                if self.a != 1.0 || self.c != 0.0 {
                    return Err(CliError::Config(
                        "the analytic eigensystem requires a = 1 and c = 0".into(),
                    ));
                }
                analytic_eigensystem(&domain, modes)?
            }
        };
        Ok(Problem {
            alpha,
            domain,
            matrix,
            grid,
            es,
        })
    }
}

/// Spatial profile on (0, L).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero,
    Constant { value: f64 },
    /// x(L - x)
    Parabola,
    /// sin(mπx/L)
    Sine { mode: usize },
    /// n-th eigenfunction of the configured eigensystem (n ≥ 1).
    Eigenmode { n: usize },
    /// Piecewise-linear bump of half-width `width` around `center`.
    Hat { center: f64, width: f64 },
}

impl FunctionSpec {
    pub fn sample(&self, p: &Problem) -> Result<Field, CliError> {
        let l = p.domain.length;
        Ok(match *self {
            FunctionSpec::Zero => Field::zeros(p.domain.points),
            FunctionSpec::Constant { value } => p.domain.sample(|_| value),
            FunctionSpec::Parabola => p.domain.sample(|x| x * (l - x)),
            FunctionSpec::Sine { mode } => {
                if mode == 0 {
                    return Err(CliError::Config("sine mode must be at least 1".into()));
                }
                p.domain.sample(|x| (mode as f64 * PI * x / l).sin())
            }
            FunctionSpec::Eigenmode { n } => {
                if n == 0 || n > p.es.mode_count() {
                    return Err(CliError::Config(format!(
                        "eigenmode index must lie in 1..={}, got {n}",
                        p.es.mode_count()
                    )));
                }
                Field::new(p.es.mode(n - 1).to_vec())
            }
            FunctionSpec::Hat { center, width } => {
                if !(width > 0.0) {
                    return Err(CliError::Config(format!("hat width must be positive, got {width}")));
                }
                p.domain.sample(|x| (1.0 - (x - center).abs() / width).max(0.0))
            }
        })
    }
}

/// Temporal factor ρ with its exact derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoSpec {
    /// Σ coeffs[k] t^k
    Polynomial { coeffs: Vec<f64> },
    /// shift + amplitude·sin(frequency·π·t)
    Sine { shift: f64, amplitude: f64, frequency: f64 },
}

impl RhoSpec {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            RhoSpec::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            RhoSpec::Sine {
                shift,
                amplitude,
                frequency,
            } => shift + amplitude * (frequency * PI * t).sin(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            RhoSpec::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * t + k as f64 * c),
            RhoSpec::Sine {
                amplitude, frequency, ..
            } => amplitude * frequency * PI * (frequency * PI * t).cos(),
        }
    }

    pub fn build(&self, grid: TimeGrid) -> Rho {
        Rho::from_fn(grid, |t| self.value(t), |t| self.derivative(t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub rho: RhoSpec,
    pub g: FunctionSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    Duhamel,
    L1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlConfig {
    pub alpha: f64,
    pub beta: f64,
    pub z: Option<f64>,
    /// "lo:hi:n", n equally spaced points.
    pub z_grid: Option<String>,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 1.0,
            z: Some(-1.0),
            z_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub problem: ProblemConfig,
    pub initial: FunctionSpec,
    pub source: Option<SourceConfig>,
    pub method: Method,
    pub output: String,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            initial: FunctionSpec::Parabola,
            source: None,
            method: Method::Spectral,
            output: "solution.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenConfig {
    pub problem: ProblemConfig,
    /// Source point; the nearest grid node is used.
    pub x: f64,
    pub times: Vec<f64>,
    pub modes_list: Vec<usize>,
    pub output: String,
}

impl Default for GreenConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig {
                modes: Some(64),
                ..ProblemConfig::default()
            },
            x: 0.5,
            times: vec![1e-5, 0.01, 0.1, 0.5],
            modes_list: vec![16, 32, 64],
            output: "green.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Principle {
    Weak,
    Strict,
    ZeroSet,
    Green,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub problem: ProblemConfig,
    pub principle: Principle,
    pub initial: FunctionSpec,
    pub source: Option<SourceConfig>,
    pub tolerance: f64,
    /// Observation points of the zero-set count.
    pub points: Vec<f64>,
    /// Green function scan (principle = green).
    pub x: f64,
    pub times: Vec<f64>,
    pub modes_list: Vec<usize>,
    pub output: String,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig {
                modes: Some(64),
                steps: 500,
                ..ProblemConfig::default()
            },
            principle: Principle::Weak,
            initial: FunctionSpec::Parabola,
            source: None,
            tolerance: 1e-10,
            points: vec![0.05, 0.13, 0.21, 0.34, 0.42, 0.5, 0.58, 0.71, 0.86, 0.95],
            x: 0.5,
            times: vec![1e-5, 0.5],
            modes_list: vec![16, 64],
            output: "report.json".into(),
        }
    }
}

/// "none", "auto" or a fixed Tikhonov weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegChoice {
    Named(String),
    Weight(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvertConfig {
    pub problem: ProblemConfig,
    pub g: FunctionSpec,
    pub x0: f64,
    pub rho_true: RhoSpec,
    pub noise_level: f64,
    pub seed: u64,
    pub regularization: RegChoice,
    /// Invert identically zero data instead of generated data.
    pub zero_data: bool,
    pub output: String,
}

impl Default for InvertConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig {
                nx: 127,
                modes: Some(32),
                steps: 400,
                ..ProblemConfig::default()
            },
            g: FunctionSpec::Parabola,
            x0: 0.3,
            rho_true: RhoSpec::Sine {
                shift: 1.5,
                amplitude: 1.0,
                frequency: 1.0,
            },
            noise_level: 0.0,
            seed: 42,
            regularization: RegChoice::Named("auto".into()),
            zero_data: false,
            output: "inversion.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub problem: ProblemConfig,
    pub rho: RhoSpec,
    /// A second temporal factor; its trace at x = L/2 must coincide.
    pub rho_alt: RhoSpec,
    pub output: String,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig {
                steps: 400,
                ..ProblemConfig::default()
            },
            rho: RhoSpec::Polynomial {
                coeffs: vec![1.0, 0.0, 1.0],
            },
            rho_alt: RhoSpec::Sine {
                shift: 1.5,
                amplitude: 1.0,
                frequency: 1.0,
            },
            output: "counterexample.csv".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_spec_derivatives() {
        let p = RhoSpec::Polynomial {
            coeffs: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(p.value(2.0), 17.0);
        assert_eq!(p.derivative(2.0), 14.0);
        let s = RhoSpec::Sine {
            shift: 1.5,
            amplitude: 1.0,
            frequency: 1.0,
        };
        assert!((s.value(0.5) - 2.5).abs() < 1e-15);
        assert!(s.derivative(0.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<SolveConfig>(r#"{"problem": {"alpha": 0.3}}"#).is_ok());
        assert!(serde_json::from_str::<SolveConfig>(r#"{"problem": {"alfa": 0.3}}"#).is_err());
        assert!(serde_json::from_str::<SolveConfig>(r#"{"outptu": "x.csv"}"#).is_err());
        assert!(serde_json::from_str::<SolveConfig>(r#"{"initial": {"kind": "sine", "mode": 2, "x": 1}}"#).is_err());
    }
}
