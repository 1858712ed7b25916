//! Reference finite-difference solvers on periodic unit domains.
//!
//! Schemes implement [`Scheme`] and are looked up by name through a
//! [`SchemeRegistry`]; [`solve`] drives any of them over one ladder level.

mod beam_warming;
mod problem;
mod rk2u2;
mod stability;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::grid::GridLadder;

pub use beam_warming::BeamWarming;
pub use problem::{exact_solution, source_term, InitialCondition, ProblemKind, ProblemSpec};
pub use rk2u2::Rk2U2;
pub use stability::max_amplification;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error("unknown scheme {name:?}; registered: {known}")]
    UnknownScheme { name: String, known: String },
    #[error("scheme {scheme} cannot solve {kind}")]
    Unsupported { scheme: String, kind: ProblemKind },
    #[error("unstable parameters: {0}")]
    UnstableParameters(String),
    #[error("end time {t_end} is not an integer number of steps of {dt}")]
    NonIntegerSteps { t_end: f64, dt: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("grid level has {got} dimensions, problem needs {want}")]
    DimensionMismatch { got: usize, want: usize },
}

/// Spatial and temporal resolution of one ladder level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGrid {
    pub level: usize,
    /// Segments per dimension; the periodic point at 1 is identified with 0.
    pub segments: Vec<u64>,
    pub dt: f64,
}

impl LevelGrid {
    pub fn new(level: usize, segments: Vec<u64>, dt: f64) -> Self {
        LevelGrid { level, segments, dt }
    }

    pub fn from_ladder(ladder: &GridLadder, level: usize) -> Self {
        LevelGrid {
            level,
            segments: ladder.segments(level).to_vec(),
            dt: ladder.dt(level),
        }
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.segments.iter().map(|&s| 1.0 / s as f64).collect()
    }

    pub fn len(&self) -> usize {
        self.segments.iter().product::<u64>() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of steps to reach `t_end`, rejecting step sizes that do not divide it.
    pub fn steps(&self, t_end: f64) -> Result<u64, SchemeError> {
        let err = || SchemeError::NonIntegerSteps { t_end, dt: self.dt };
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(err());
        }
        let n = t_end / self.dt;
        let rounded = n.round();
        if rounded < 1.0 || (n - rounded).abs() > 1e-9 * rounded {
            return Err(err());
        }
        Ok(rounded as u64)
    }

    /// Coordinates of the sample with row-major `index` (x fastest).
    pub fn coords(&self, index: usize) -> Vec<f64> {
        let mut rem = index as u64;
        self.segments
            .iter()
            .map(|&s| {
                let i = rem % s;
                rem /= s;
                i as f64 / s as f64
            })
            .collect()
    }
}

/// An approximate solution at `t_end` on one ladder level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldLevel {
    pub level: usize,
    pub segments: Vec<u64>,
    pub spacing: Vec<f64>,
    pub dt: f64,
    pub steps: u64,
    pub t_end: f64,
    /// Row-major samples, x fastest.
    pub values: Vec<f64>,
}

impl FieldLevel {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grid(&self) -> LevelGrid {
        LevelGrid::new(self.level, self.segments.clone(), self.dt)
    }

    /// Pointwise error against the exact solution at `t_end`.
    pub fn error_against_exact(&self, problem: &ProblemSpec) -> Vec<f64> {
        let grid = self.grid();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v - exact_solution(problem, &grid.coords(i), self.t_end))
            .collect()
    }
}

/// Per-scheme stability limits.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StabilityLimits {
    /// Largest admissible CFL number per dimension; `None` uses the scheme default.
    pub cfl_max: Option<f64>,
}

/// `c <= max`, allowing the few ulps by which `dt / dx` can overshoot a limit
/// the grid hits exactly (e.g. `t_end / steps` against `1 / segments`).
pub(crate) fn within_cfl(c: f64, max: f64) -> bool {
    c > 0.0 && c <= max * (1.0 + 4.0 * f64::EPSILON)
}

/// Sizes and coefficients a stepper needs, derived once per solve.
#[derive(Debug, Clone)]
pub struct StepContext<'a> {
    pub problem: &'a ProblemSpec,
    pub segments: &'a [u64],
    pub spacing: Vec<f64>,
    pub dt: f64,
    pub steps: u64,
}

impl StepContext<'_> {
    /// CFL number `a Δt / Δx` along each dimension.
    pub fn cfl(&self) -> Vec<f64> {
        let speeds = [self.problem.a, self.problem.a_y];
        self.spacing
            .iter()
            .zip(speeds)
            .map(|(dx, a)| a * self.dt / dx)
            .collect()
    }
}

pub trait Scheme: Send + Sync {
    fn name(&self) -> &'static str;

    fn supports(&self, kind: ProblemKind) -> bool;

    fn default_cfl_max(&self) -> f64;

    /// Rejects parameter combinations outside the scheme's stability region.
    fn check_stability(&self, ctx: &StepContext<'_>, limits: &StabilityLimits)
        -> Result<(), SchemeError>;

    /// Advances `values` from `t = 0` through `ctx.steps` steps.
    fn advance(&self, ctx: &StepContext<'_>, values: &mut Vec<f64>);
}

impl fmt::Debug for dyn Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scheme({})", self.name())
    }
}

pub type SchemeFactory = fn() -> Box<dyn Scheme>;

/// Name-keyed collection of scheme constructors.
#[derive(Clone)]
pub struct SchemeRegistry {
    factories: BTreeMap<String, SchemeFactory>,
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        SchemeRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, factory: SchemeFactory) -> Option<SchemeFactory> {
        self.factories.insert(name.to_ascii_lowercase(), factory)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn Scheme>, SchemeError> {
        self.factories
            .get(&name.to_ascii_lowercase())
            .map(|f| f())
            .ok_or_else(|| SchemeError::UnknownScheme {
                name: name.to_string(),
                known: self.names().collect::<Vec<_>>().join(", "),
            })
    }
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        let mut r = SchemeRegistry::empty();
        r.register("bw", || Box::new(BeamWarming));
        r.register("rk2u2", || Box::new(Rk2U2));
        r
    }
}

pub fn solve(
    scheme: &dyn Scheme,
    problem: &ProblemSpec,
    grid: &LevelGrid,
    limits: &StabilityLimits,
) -> Result<FieldLevel, SchemeError> {
    problem.validate()?;
    if !scheme.supports(problem.kind) {
        return Err(SchemeError::Unsupported {
            scheme: scheme.name().to_string(),
            kind: problem.kind,
        });
    }
    if grid.segments.len() != problem.dims() {
        return Err(SchemeError::DimensionMismatch {
            got: grid.segments.len(),
            want: problem.dims(),
        });
    }
    if grid.segments.iter().any(|&s| s < 3) {
        return Err(SchemeError::InvalidProblem(format!(
            "level {} has {:?} segments; the stencils need at least 3",
            grid.level, grid.segments
        )));
    }
    let steps = grid.steps(problem.t_end)?;
    let ctx = StepContext {
        problem,
        segments: &grid.segments,
        spacing: grid.spacing(),
        dt: problem.t_end / steps as f64,
        steps,
    };
    scheme.check_stability(&ctx, limits)?;

    let mut values: Vec<f64> = (0..grid.len())
        .map(|i| problem.initial_value(&grid.coords(i)))
        .collect();
    scheme.advance(&ctx, &mut values);

    Ok(FieldLevel {
        level: grid.level,
        segments: grid.segments.clone(),
        spacing: ctx.spacing.clone(),
        dt: ctx.dt,
        steps,
        t_end: problem.t_end,
        values,
    })
}

/// Periodic neighbour tables: `back[k][i]` is the index `k + 1` cells behind `i`,
/// `ahead[k][i]` the index `k + 1` cells ahead.
pub(crate) struct Neighbours {
    pub back: [Vec<usize>; 2],
    pub ahead: [Vec<usize>; 2],
}

impl Neighbours {
    pub fn new(n: usize) -> Self {
        let shift = |k: usize| (0..n).map(|i| (i + k) % n).collect::<Vec<_>>();
        Neighbours {
            back: [shift(n - 1), shift(n - 2)],
            ahead: [shift(1), shift(2)],
        }
    }
}
