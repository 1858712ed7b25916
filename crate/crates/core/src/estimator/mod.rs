//! Error estimation with preset orders of accuracy.
//!
//! Each window of `k + 1` consecutive levels is fitted pointwise to
//! `φ_l = φ_e + Σ_m T_m r^{(l−1) p_m}`, where the unknowns `T_m = D_{p_m} h^{p_m}`
//! live on the window's coarsest level. Norms of the terms across windows give
//! convergence slopes, the asymptotic-range ratio `β̃`, and the order check.

mod fit;
mod linalg;
mod orders;
mod report;
mod stats;

pub use fit::{
    build_system, estimate_error, fit_expansion, gre_baseline, ExpansionFit, ExpansionSolver,
    GreEstimate,
};
pub use linalg::{Lu, Matrix};
pub(crate) use fit::check_orders_and_ratio;
pub use orders::{
    check_orders, iterate_orders, IterationStep, OrderCheck, OrderIteration, PresetOrders,
    TermVerdict, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE,
};
pub use report::{
    window_slopes, BetaOutcome, ConvergenceReport, ExactReference, FitPoint, NormSlopes,
    WindowFit, WindowSummary,
};
pub use stats::{beta_ratio, log_slope, norms, BetaVerdict, NormKind, Norms, DEFAULT_BETA};

use crate::grid::{Provenance, SharedPointMap, UnitSignature};
use crate::schemes::FieldLevel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error("preset orders contain the repeated value {0}")]
    DegenerateOrders(f64),
    #[error("invalid preset orders: {0}")]
    InvalidOrders(String),
    #[error("refinement ratio {0} is outside (0, 1)")]
    RatioOutOfRange(f64),
    #[error("expansion system is singular")]
    SingularSystem,
    #[error("expected values on {expected} levels, got {got}")]
    WrongLevelCount { expected: usize, got: usize },
    #[error("{values} field values but {fits} fits")]
    MismatchedSupport { values: usize, fits: usize },
    #[error("cannot take norms of an empty field")]
    EmptyField,
    #[error("a slope needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("log-log slope needs positive values; entry {index} is {value}")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("spacing must decrease between points, got {coarse} then {fine}")]
    SpacingNotDecreasing { coarse: f64, fine: f64 },
    #[error("the asymptotic ratio needs at least 2 terms, got {0}")]
    TooFewTerms(usize),
    #[error("leading term vanishes; asymptotic ratio is indeterminate")]
    ZeroLeadingTerm,
    #[error("order check needs at least 2 windows, got {0}")]
    InsufficientWindows(usize),
    #[error("term {term} has no finite slope at the finest windows")]
    UndefinedSlope { term: usize },
    #[error(
        "orders did not settle within {iterations} iterations; best attempt {:?}",
        best.final_orders
    )]
    NoConvergence {
        iterations: usize,
        best: Box<OrderIteration>,
    },
    #[error("observed order undefined: difference ratio {ratio} is not positive")]
    UndefinedOrder { ratio: f64 },
    #[error("window mismatch: {0}")]
    MismatchedWindow(String),
}

/// Fits every all-level shared location of a window of consecutive levels.
///
/// `fields` run coarsest first; `h` is the window's spacing on its coarsest level
/// and `r` the ratio between the spacings of adjacent levels.
pub fn fit_window(
    fields: &[FieldLevel],
    h: f64,
    orders: &PresetOrders,
    r: f64,
) -> Result<WindowFit, EstimatorError> {
    if fields.len() != orders.len() + 1 {
        return Err(EstimatorError::WrongLevelCount {
            expected: orders.len() + 1,
            got: fields.len(),
        });
    }
    let segments: Vec<Vec<u64>> = fields.iter().map(|f| f.segments.clone()).collect();
    if segments.iter().any(|s| s.len() != segments[0].len()) {
        return Err(EstimatorError::MismatchedWindow(
            "levels differ in dimension".into(),
        ));
    }
    let map = SharedPointMap::build(&UnitSignature::from_segments(&segments), None);
    let solver = ExpansionSolver::new(orders, r)?;
    let mut values = vec![0.0; fields.len()];
    let points = map
        .points()
        .iter()
        .map(|p| {
            for (l, f) in fields.iter().enumerate() {
                let i = p.indices[l].expect("all-level shared points exist on every level");
                values[l] = f.values[i];
            }
            Ok(FitPoint {
                coord: p.coord_f64(),
                provenance: Provenance::AllShared,
                coarse_value: Some(values[0]),
                fit: solver.fit(&values, h)?,
            })
        })
        .collect::<Result<Vec<_>, EstimatorError>>()?;
    Ok(WindowFit {
        first_level: fields[0].level,
        h,
        points,
    })
}
