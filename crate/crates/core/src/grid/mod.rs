//! Refinement ladders, irreducible units, and the exact lattice bookkeeping
//! that locates shared grid points across levels.
//!
//! Coordinates inside units are exact rationals; they only become floating
//! point at the solver and estimator boundaries.

mod ladder;
mod unit;

pub use ladder::{build_ladder, GridLadder, LadderSpec, RefinementPath, TimeBase};
pub use unit::{
    flat_index, irreducible_unit, AxisUnit, Levels, ObjectivePoint, ObjectivePolicy, Placement,
    Provenance, RetainedPoint, SharedPointMap, UnitPoint, UnitSignature,
};

pub type Rational = num_rational::Ratio<i64>;

/// Parses `"num/den"` (or a bare integer) into an exact rational.
pub fn parse_ratio(s: &str) -> Result<Rational, GridError> {
    let bad = || GridError::MalformedRatio(s.to_string());
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: i64 = n.parse().map_err(|_| bad())?;
    let d: i64 = d.parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    /// `level` is 1-based.
    #[error("level {level} would need {value} grid segments, which is not an integer")]
    NonIntegerSegments { level: usize, value: String },
    /// `level` is 1-based.
    #[error("level {level} would need {value} time steps, which is not an integer")]
    NonIntegerSteps { level: usize, value: String },
    #[error("refinement ratio {0} is outside [1/2, 1)")]
    RatioOutOfRange(String),
    #[error("a refinement ladder needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
    #[error("per-dimension refinement ratios must be equal, got {0:?}")]
    MixedRatios(Vec<String>),
    #[error("{ratios} refinement ratios given for {dims} dimensions")]
    RatioCount { dims: usize, ratios: usize },
    #[error("only 1 or 2 refined space dimensions are supported, got {0}")]
    UnsupportedDims(usize),
    #[error("dimension {dim} has zero base segments")]
    ZeroSegments { dim: usize },
    #[error("time step {dt} and end time {t_end} must be positive and finite")]
    InvalidTime { dt: f64, t_end: f64 },
    #[error("malformed ratio {0:?}; expected \"num/den\"")]
    MalformedRatio(String),
    #[error("unknown refinement path {0:?}; expected time-only, constant-cfl or constant-diffusion")]
    UnknownPath(String),
}
