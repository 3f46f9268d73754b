//! JSON experiment configuration with a versioned schema.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::hilbert::Norm;
use crate::solver::{log_spaced, Mode};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level experiment description, deserialized from a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub epsilons: EpsilonSpec,
    #[serde(default)]
    pub mode: Mode,
    /// Problem norm; defaults to H1 for the Newtonian instance, L2 otherwise.
    #[serde(default)]
    pub norm: Option<Norm>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Resolvent constant for certified general runs; defaults to 1 for
    /// operators flagged symmetric PSD.
    #[serde(default)]
    pub resolvent_c: Option<f64>,
    /// PASS/FAIL bound for certify-resolvent; defaults to 1 + 1e-8.
    #[serde(default)]
    pub resolvent_bound: Option<f64>,
    /// Output path; the CLI flag --out overrides it, stdout when absent.
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// Cubic Newtonian-potential operator on a grid, solved in the direct
    /// form with w = eps * h.
    NewtonianCubic {
        grid: GridSpec,
        #[serde(default)]
        h: ShiftFunction,
    },
    /// F(u) = A u + B(u, u) solved in the general shifted-resolvent form.
    MatrixQuadratic {
        matrix: Vec<Vec<f64>>,
        quadratic: Vec<Vec<Vec<f64>>>,
        /// Direction v for the admissible shift w = y - A v.
        #[serde(default)]
        v: Option<Vec<f64>>,
        /// Explicit w; exploratory mode only (no admissibility certificate).
        #[serde(default)]
        w: Option<Vec<f64>>,
        #[serde(default)]
        analytic_m2: Option<f64>,
        #[serde(default)]
        symmetric_psd: bool,
        /// Ball radius at which derivative bounds are sampled when no
        /// analytic M2 is supplied.
        #[serde(default)]
        bound_radius: Option<f64>,
    },
    /// Scalar cubic u^3, the one-dimensional vanishing-linearization case,
    /// with w = eps * h_scale.
    ScalarCubic {
        #[serde(default = "default_h_scale")]
        h_scale: f64,
    },
}

fn default_h_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: [f64; 3],
    pub edges: [f64; 3],
    pub points: [usize; 3],
}

impl GridSpec {
    pub fn build(&self) -> Result<GridDomain> {
        GridDomain::new(self.lower, self.edges, self.points)
    }
}

/// Shift direction h for the direct solver form.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShiftFunction {
    /// Constant function, normalized by the solver.
    #[default]
    Constant,
    /// Explicit nodal coefficients.
    Coefficients { values: Vec<f64> },
}

/// Either an explicit list or a log-spaced range of epsilon values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSpec {
    Values { values: Vec<f64> },
    LogRange { log_range: LogRange },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for EpsilonSpec {
    /// 8 points log-spaced over [1e-4, 1e-1].
    fn default() -> Self {
        EpsilonSpec::LogRange {
            log_range: LogRange {
                min: 1e-4,
                max: 1e-1,
                count: 8,
            },
        }
    }
}

impl EpsilonSpec {
    /// Materialize, validate (positive, distinct) and sort descending.
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let mut eps = match self {
            EpsilonSpec::Values { values } => values.clone(),
            EpsilonSpec::LogRange { log_range } => {
                if !(log_range.min > 0.0 && log_range.max > log_range.min) {
                    return Err(Error::Config("log_range needs 0 < min < max".into()));
                }
                if log_range.count < 2 {
                    return Err(Error::Config("log_range needs count >= 2".into()));
                }
                log_spaced(log_range.min, log_range.max, log_range.count)
            }
        };
        if eps.is_empty() {
            return Err(Error::Config("epsilon list is empty".into()));
        }
        if eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::Config(
                "epsilon values must be positive and finite".into(),
            ));
        }
        eps.sort_by(|a, b| b.total_cmp(a));
        if eps.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("epsilon values must be distinct".into()));
        }
        Ok(eps)
    }
}

/// Optional overrides of the solver defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default)]
    pub tol_step: Option<f64>,
    #[serde(default)]
    pub tol_res: Option<f64>,
    #[serde(default)]
    pub linear_tol: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub contraction_probes: Option<usize>,
    #[serde(default)]
    pub power_iterations: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        self.epsilons.resolve()?;
        if let ProblemSpec::MatrixQuadratic {
            matrix,
            quadratic,
            v,
            w,
            ..
        } = &self.problem
        {
            let n = matrix.len();
            if n == 0 || matrix.iter().any(|row| row.len() != n) {
                return Err(Error::Config("matrix must be square and nonempty".into()));
            }
            if quadratic.len() != n
                || quadratic
                    .iter()
                    .any(|p| p.len() != n || p.iter().any(|r| r.len() != n))
            {
                return Err(Error::Config(
                    "quadratic tensor must have shape n x n x n".into(),
                ));
            }
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::Config("v must have the matrix dimension".into()));
                }
            }
            if let Some(w) = w {
                if w.len() != n {
                    return Err(Error::Config("w must have the matrix dimension".into()));
                }
            }
            if v.is_none() && w.is_none() {
                return Err(Error::Config(
                    "matrix_quadratic needs either v (certified) or w (exploratory)".into(),
                ));
            }
        }
        if let ProblemSpec::NewtonianCubic { grid, h } = &self.problem {
            let g = grid.build()?;
            if let ShiftFunction::Coefficients { values } = h {
                if values.len() != g.len() {
                    return Err(Error::Config(format!(
                        "h has {} coefficients but the grid has {} nodes",
                        values.len(),
                        g.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Problem norm, defaulting per instance kind.
    pub fn norm(&self) -> Norm {
        self.norm.unwrap_or(match self.problem {
            ProblemSpec::NewtonianCubic { .. } => Norm::H1,
            _ => Norm::L2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "problem": {"kind": "scalar_cubic"},
        "epsilons": {"values": [0.01, 0.001]}
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.mode, Mode::Certified);
        assert_eq!(c.seed, 0);
        assert_eq!(c.norm(), Norm::L2);
        assert_eq!(c.epsilons.resolve().unwrap(), vec![0.01, 0.001]);
    }

    #[test]
    fn default_epsilon_grid_is_two_decades() {
        let spec = EpsilonSpec::default();
        let eps = spec.resolve().unwrap();
        assert_eq!(eps.len(), 8);
        assert!((eps[0] - 1e-1).abs() < 1e-15);
        assert!((eps[7] - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let text = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rejects_duplicate_epsilons() {
        let text = MINIMAL.replace("[0.01, 0.001]", "[0.01, 0.01]");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn rejects_nonpositive_epsilons() {
        let text = MINIMAL.replace("[0.01, 0.001]", "[0.01, -0.5]");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = MINIMAL.replace(
            "\"schema_version\": 1",
            "\"schema_version\": 1, \"typo\": 3",
        );
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn matrix_problem_requires_shift_information() {
        let text = r#"{
            "schema_version": 1,
            "problem": {
                "kind": "matrix_quadratic",
                "matrix": [[0.0, 0.0], [0.0, 1.0]],
                "quadratic": [[[0.5,0],[0,0]],[[0,0],[0,0.5]]]
            }
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn newtonian_config_round_trips() {
        let text = r#"{
            "schema_version": 1,
            "problem": {
                "kind": "newtonian_cubic",
                "grid": {"lower": [0,0,0], "edges": [1,1,1], "points": [6,6,6]},
                "h": {"kind": "constant"}
            },
            "epsilons": {"log_range": {"min": 1e-3, "max": 1e-2, "count": 3}},
            "mode": "exploratory",
            "seed": 7
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.norm(), Norm::H1);
        let eps = c.epsilons.resolve().unwrap();
        assert_eq!(eps.len(), 3);
        assert!(eps[0] > eps[1] && eps[1] > eps[2]);
    }
}
