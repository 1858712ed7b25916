//! Study configuration files (TOML).
//!
//! ```toml
//! [problem]
//! kind = "advect1d"        # advect1d | advdiff1d | advect2d
//! a = 0.5
//! a_y = 0.0                # advect2d only
//! nu = 0.0                 # advdiff1d only
//! t_end = 2.0
//!
//! [scheme]
//! name = "rk2u2"           # any registered scheme
//! cfl_max = 0.5            # optional override of the scheme's limit
//!
//! [refinement]
//! path = "constant-cfl"    # time-only | constant-cfl | constant-diffusion
//! ratio = "1/2"
//! segments = 100           # coarsest grid, per dimension
//! dt = 0.01                # coarsest time step
//! levels = 7
//! protocol = "single"      # single | two-tier
//!
//! [estimator]
//! orders = [2.0, 3.0]
//! order_quantum = 1.0
//! beta = 0.01
//! tolerance = 0.1
//! max_iterations = 5
//! iterate = false
//!
//! [midas]
//! enabled = false
//! interpolator = "linear"
//! objective = "auto"       # auto | two-level | finest-pair
//!
//! [output]
//! dir = "out/study"
//! ```
//!
//! Under the `two-tier` protocol every window is its own ladder of
//! `orders.len() + 1` levels refined by `ratio`, and successive windows start
//! from the previous window's coarsest grid refined by one half; `levels` then
//! counts windows.

use std::path::{Path, PathBuf};

use poem::estimator::{PresetOrders, DEFAULT_BETA, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use poem::grid::{
    build_ladder, parse_ratio, GridError, GridLadder, LadderSpec, ObjectivePolicy, Rational,
    RefinementPath, TimeBase,
};
use poem::midas::InterpolatorRegistry;
use poem::schemes::{ProblemKind, ProblemSpec, SchemeRegistry};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("{field}: {source}")]
    Ladder {
        field: &'static str,
        source: GridError,
    },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub problem: ProblemSection,
    pub scheme: SchemeSection,
    pub refinement: RefinementSection,
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub midas: MidasSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: String,
    pub a: f64,
    #[serde(default)]
    pub a_y: f64,
    #[serde(default)]
    pub nu: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub name: String,
    #[serde(default)]
    pub cfl_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    #[default]
    Single,
    TwoTier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementSection {
    pub path: String,
    pub ratio: String,
    pub segments: u64,
    pub dt: f64,
    pub levels: usize,
    #[serde(default)]
    pub protocol: Protocol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub orders: Vec<f64>,
    #[serde(default = "one")]
    pub order_quantum: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub iterate: bool,
}

fn one() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidasSection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_interpolator")]
    pub interpolator: String,
    #[serde(default = "default_objective")]
    pub objective: String,
}

fn default_interpolator() -> String {
    "linear".into()
}
fn default_objective() -> String {
    "auto".into()
}

impl Default for MidasSection {
    fn default() -> Self {
        MidasSection {
            enabled: false,
            interpolator: default_interpolator(),
            objective: default_objective(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// Command-line adjustments applied on top of a parsed file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub midas: Option<bool>,
    pub beta: Option<f64>,
    pub levels: Option<usize>,
    pub out: Option<PathBuf>,
}

/// A configuration whose every constraint has been checked, with the derived
/// objects the runner needs.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub raw: StudyConfig,
    pub name: String,
    pub problem: ProblemSpec,
    pub ratio: Rational,
    pub path: RefinementPath,
    pub orders: PresetOrders,
    pub policy: ObjectivePolicy,
    /// One ladder for the single protocol, one per window for two-tier.
    pub ladders: Vec<GridLadder>,
}

impl StudyConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.midas {
            self.midas.enabled = m;
        }
        if let Some(b) = o.beta {
            self.estimator.beta = b;
        }
        if let Some(l) = o.levels {
            self.refinement.levels = l;
        }
        if let Some(d) = &o.out {
            self.output.dir = Some(d.clone());
        }
    }

    /// Re-checks every constraint and builds the ladders the study will use.
    pub fn validate(self, name: &str) -> Result<ValidatedConfig, ConfigError> {
        let p = &self.problem;
        let kind: ProblemKind = p
            .kind
            .parse()
            .map_err(|e: poem::schemes::SchemeError| invalid("problem.kind", e.to_string()))?;
        let problem = match kind {
            ProblemKind::Advect1d => ProblemSpec::advect1d(p.a, p.t_end),
            ProblemKind::Advdiff1d => ProblemSpec::advdiff1d(p.a, p.nu, p.t_end),
            ProblemKind::Advect2d => ProblemSpec::advect2d(p.a, p.a_y, p.t_end),
        };
        if kind != ProblemKind::Advdiff1d && p.nu != 0.0 {
            return Err(invalid("problem.nu", format!("{} has no diffusion term", p.kind)));
        }
        if kind != ProblemKind::Advect2d && p.a_y != 0.0 {
            return Err(invalid("problem.a_y", format!("{} has no y direction", p.kind)));
        }
        problem
            .validate()
            .map_err(|e| invalid("problem", e.to_string()))?;

        let schemes = SchemeRegistry::default();
        let scheme = schemes
            .create(&self.scheme.name)
            .map_err(|e| invalid("scheme.name", e.to_string()))?;
        if !scheme.supports(kind) {
            return Err(invalid(
                "scheme.name",
                format!("{} cannot solve {}", self.scheme.name, p.kind),
            ));
        }
        if let Some(c) = self.scheme.cfl_max {
            if !(c > 0.0 && c.is_finite()) {
                return Err(invalid("scheme.cfl_max", format!("must be positive, got {c}")));
            }
        }

        let r = &self.refinement;
        let path: RefinementPath = r
            .path
            .parse()
            .map_err(|source| ConfigError::Ladder {
                field: "refinement.path",
                source,
            })?;
        let ratio = parse_ratio(&r.ratio).map_err(|source| ConfigError::Ladder {
            field: "refinement.ratio",
            source,
        })?;

        let e = &self.estimator;
        let orders = PresetOrders::new(e.orders.clone(), e.order_quantum)
            .map_err(|err| invalid("estimator.orders", err.to_string()))?;
        if orders.len() < 2 {
            return Err(invalid(
                "estimator.orders",
                "at least two preset orders are needed for the asymptotic-range check",
            ));
        }
        if !(e.beta > 0.0 && e.beta.is_finite()) {
            return Err(invalid("estimator.beta", format!("must be positive, got {}", e.beta)));
        }
        if !(e.tolerance > 0.0 && e.tolerance.is_finite()) {
            return Err(invalid(
                "estimator.tolerance",
                format!("must be positive, got {}", e.tolerance),
            ));
        }
        if e.max_iterations == 0 {
            return Err(invalid("estimator.max_iterations", "must be at least 1"));
        }

        let interpolators = InterpolatorRegistry::default();
        interpolators
            .create(&self.midas.interpolator)
            .map_err(|err| invalid("midas.interpolator", err.to_string()))?;
        let policy = match self.midas.objective.as_str() {
            "auto" => ObjectivePolicy::for_dims(kind.dims()),
            "two-level" => ObjectivePolicy::TwoLevel,
            "finest-pair" => ObjectivePolicy::FinestPair,
            other => {
                return Err(invalid(
                    "midas.objective",
                    format!("unknown policy {other:?}; expected auto, two-level or finest-pair"),
                ))
            }
        };

        let window_levels = orders.len() + 1;
        let time = |dt| TimeBase { dt, t_end: p.t_end };
        let ladders = match r.protocol {
            Protocol::Single => {
                if r.levels < window_levels {
                    return Err(invalid(
                        "refinement.levels",
                        format!(
                            "{} preset orders need windows of {window_levels} levels; got {} levels",
                            orders.len(),
                            r.levels
                        ),
                    ));
                }
                let spec = LadderSpec::uniform(kind.dims(), r.segments, ratio, r.levels, path, time(r.dt));
                vec![build_ladder(&spec).map_err(|source| ConfigError::Ladder {
                    field: "refinement",
                    source,
                })?]
            }
            Protocol::TwoTier => {
                if r.levels < 2 {
                    return Err(invalid(
                        "refinement.levels",
                        format!("the two-tier protocol needs at least 2 windows, got {}", r.levels),
                    ));
                }
                (0..r.levels)
                    .map(|j| {
                        let grow = 1u64 << j;
                        let segments = if path.refines_space() { r.segments * grow } else { r.segments };
                        let dt = r.dt / (grow as f64).powi(path.time_exponent() as i32);
                        let spec =
                            LadderSpec::uniform(kind.dims(), segments, ratio, window_levels, path, time(dt));
                        build_ladder(&spec).map_err(|source| ConfigError::Ladder {
                            field: "refinement",
                            source,
                        })
                    })
                    .collect::<Result<_, _>>()?
            }
        };

        Ok(ValidatedConfig {
            name: name.to_string(),
            problem,
            ratio,
            path,
            orders,
            policy,
            ladders,
            raw: self,
        })
    }
}

impl ValidatedConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut raw = StudyConfig::load(path)?;
        raw.apply(overrides);
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "study".into());
        raw.validate(&name)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.raw
            .output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    pub fn dims(&self) -> usize {
        self.problem.dims()
    }
}
