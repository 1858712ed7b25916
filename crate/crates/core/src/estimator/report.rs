use serde::Serialize;

use super::{beta_ratio, norms, EstimatorError, ExpansionFit, NormKind, Norms, PresetOrders};
use crate::grid::Provenance;

/// One location of a window together with its fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitPoint {
    pub coord: Vec<f64>,
    pub provenance: Provenance,
    /// The field on the window's coarsest level, when that level has a point here.
    pub coarse_value: Option<f64>,
    pub fit: ExpansionFit,
}

/// Fits at every retained location of one window of consecutive levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowFit {
    /// Ladder index of the window's coarsest level.
    pub first_level: usize,
    /// Spacing of the window's coarsest level.
    pub h: f64,
    pub points: Vec<FitPoint>,
}

impl WindowFit {
    pub fn shared(&self) -> impl Iterator<Item = &FitPoint> {
        self.points
            .iter()
            .filter(|p| p.provenance == Provenance::AllShared)
    }

    pub fn objective(&self) -> impl Iterator<Item = &FitPoint> {
        self.points
            .iter()
            .filter(|p| p.provenance == Provenance::Objective)
    }
}

/// What is known about the exact solution, for comparisons against it.
pub struct ExactReference<'a> {
    /// Exact solution at the end time.
    pub solution: &'a dyn Fn(&[f64]) -> f64,
    /// Error norms of the window's coarsest level over its whole grid.
    pub level_error: Norms,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum BetaOutcome {
    Determined { beta_tilde: f64, asymptotic: bool },
    /// The leading term vanished, so the ratio has no value.
    Indeterminate,
}

impl BetaOutcome {
    pub fn beta_tilde(&self) -> Option<f64> {
        match self {
            BetaOutcome::Determined { beta_tilde, .. } => Some(*beta_tilde),
            BetaOutcome::Indeterminate => None,
        }
    }

    pub fn is_asymptotic(&self) -> bool {
        matches!(self, BetaOutcome::Determined { asymptotic: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSummary {
    pub first_level: usize,
    pub h: f64,
    pub log_h: f64,
    pub support: usize,
    pub objective_points: usize,
    /// Norms of each coefficient term over the whole support.
    pub term_norms: Vec<Norms>,
    /// Term norms over the all-level shared locations only.
    pub shared_term_norms: Vec<Norms>,
    /// Term norms over the objective locations only, when there are any.
    pub objective_term_norms: Option<Vec<Norms>>,
    /// `ε̃` of the coarsest level over the whole support.
    pub estimated_error: Norms,
    /// `ε̃` over the all-level shared locations.
    pub estimated_error_shared: Norms,
    /// `ε` of the coarsest level over the all-level shared locations.
    pub exact_error_shared: Option<Norms>,
    /// `ε` of the coarsest level over its full grid.
    pub exact_error_level: Option<Norms>,
    /// `φ̃_e − φ_e` over the whole support.
    pub extrapolation_error: Option<Norms>,
    pub beta: BetaOutcome,
}

impl WindowSummary {
    pub fn new(
        window: &WindowFit,
        orders: &PresetOrders,
        beta: f64,
        exact: Option<&ExactReference<'_>>,
    ) -> Result<Self, EstimatorError> {
        let k = orders.len();
        if window.points.is_empty() {
            return Err(EstimatorError::EmptyField);
        }
        if let Some(p) = window.points.iter().find(|p| p.fit.terms.len() != k) {
            return Err(EstimatorError::WrongLevelCount {
                expected: k + 1,
                got: p.fit.terms.len() + 1,
            });
        }
        let term_norms_of = |pts: &[&FitPoint]| -> Result<Vec<Norms>, EstimatorError> {
            (0..k)
                .map(|m| norms(&pts.iter().map(|p| p.fit.terms[m]).collect::<Vec<_>>()))
                .collect()
        };
        let all: Vec<&FitPoint> = window.points.iter().collect();
        let shared: Vec<&FitPoint> = window.shared().collect();
        let objective: Vec<&FitPoint> = window.objective().collect();

        let term_norms = term_norms_of(&all)?;
        let l2: Vec<f64> = term_norms.iter().map(|n| n.l2).collect();
        let beta = if k < 2 {
            BetaOutcome::Indeterminate
        } else {
            match beta_ratio(&l2, beta) {
                Ok(v) => BetaOutcome::Determined {
                    beta_tilde: v.beta_tilde,
                    asymptotic: v.asymptotic,
                },
                Err(EstimatorError::ZeroLeadingTerm) => BetaOutcome::Indeterminate,
                Err(e) => return Err(e),
            }
        };

        let estimate =
            |pts: &[&FitPoint]| norms(&pts.iter().map(|p| p.fit.error_estimate()).collect::<Vec<_>>());

        let (exact_error_shared, exact_error_level, extrapolation_error) = match exact {
            Some(ex) => {
                let on_coarse: Vec<f64> = shared
                    .iter()
                    .filter_map(|p| p.coarse_value.map(|v| v - (ex.solution)(&p.coord)))
                    .collect();
                let extrap: Vec<f64> = all
                    .iter()
                    .map(|p| p.fit.phi_e_hat - (ex.solution)(&p.coord))
                    .collect();
                (
                    Some(norms(&on_coarse)?),
                    Some(ex.level_error),
                    Some(norms(&extrap)?),
                )
            }
            None => (None, None, None),
        };

        Ok(WindowSummary {
            first_level: window.first_level,
            h: window.h,
            log_h: window.h.log10(),
            support: all.len(),
            objective_points: objective.len(),
            term_norms,
            shared_term_norms: term_norms_of(&shared)?,
            objective_term_norms: if objective.is_empty() {
                None
            } else {
                Some(term_norms_of(&objective)?)
            },
            estimated_error: estimate(&all)?,
            estimated_error_shared: estimate(&shared)?,
            exact_error_shared,
            exact_error_level,
            extrapolation_error,
            beta,
        })
    }
}

/// Slopes of one quantity in each norm; entry `w` joins windows `w` and `w + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSlopes {
    pub l1: Vec<Option<f64>>,
    pub l2: Vec<Option<f64>>,
    pub linf: Vec<Option<f64>>,
}

impl NormSlopes {
    pub fn get(&self, kind: NormKind) -> &[Option<f64>] {
        match kind {
            NormKind::L1 => &self.l1,
            NormKind::L2 => &self.l2,
            NormKind::Linf => &self.linf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub orders: Vec<f64>,
    pub order_quantum: f64,
    pub beta_threshold: f64,
    pub windows: Vec<WindowSummary>,
    /// `term_slopes[m][w]`: L2 slope of term `m` between windows `w` and `w + 1`.
    pub term_slopes: Vec<Vec<Option<f64>>>,
    pub estimated_error_slopes: NormSlopes,
    pub exact_error_slopes: Option<NormSlopes>,
    pub extrapolation_error_slopes: Option<NormSlopes>,
}

/// Slope between consecutive windows; `None` where a value is not positive.
pub fn window_slopes(h: &[f64], values: &[f64]) -> Vec<Option<f64>> {
    h.windows(2)
        .zip(values.windows(2))
        .map(|(h, v)| {
            (v[0] > 0.0 && v[1] > 0.0 && v[0].is_finite() && v[1].is_finite())
                .then(|| (v[1].log10() - v[0].log10()) / (h[1].log10() - h[0].log10()))
        })
        .collect()
}

impl ConvergenceReport {
    pub fn new(orders: &PresetOrders, beta: f64, windows: Vec<WindowSummary>) -> Self {
        let h: Vec<f64> = windows.iter().map(|w| w.h).collect();
        let slopes_of = |f: &dyn Fn(&WindowSummary) -> Option<Norms>| -> Option<NormSlopes> {
            let ns: Option<Vec<Norms>> = windows.iter().map(f).collect();
            let ns = ns?;
            let col = |kind: NormKind| {
                window_slopes(&h, &ns.iter().map(|n| n.get(kind)).collect::<Vec<_>>())
            };
            Some(NormSlopes {
                l1: col(NormKind::L1),
                l2: col(NormKind::L2),
                linf: col(NormKind::Linf),
            })
        };
        let term_slopes = (0..orders.len())
            .map(|m| {
                let v: Vec<f64> = windows.iter().map(|w| w.term_norms[m].l2).collect();
                window_slopes(&h, &v)
            })
            .collect();
        let estimated_error_slopes =
            slopes_of(&|w| Some(w.estimated_error)).expect("always present");
        let exact_error_slopes = slopes_of(&|w| w.exact_error_level);
        let extrapolation_error_slopes = slopes_of(&|w| w.extrapolation_error);
        ConvergenceReport {
            orders: orders.orders().to_vec(),
            order_quantum: orders.quantum(),
            beta_threshold: beta,
            windows,
            term_slopes,
            estimated_error_slopes,
            exact_error_slopes,
            extrapolation_error_slopes,
        }
    }

    /// Slope of each term between the two finest windows.
    pub fn finest_term_slopes(&self) -> Vec<Option<f64>> {
        self.term_slopes
            .iter()
            .map(|s| s.last().copied().flatten())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(coord: f64, provenance: Provenance, terms: Vec<f64>, phi1: f64) -> FitPoint {
        let sum: f64 = terms.iter().sum();
        FitPoint {
            coord: vec![coord],
            provenance,
            coarse_value: (provenance == Provenance::AllShared).then_some(phi1),
            fit: ExpansionFit {
                phi_e_hat: phi1 - sum,
                terms,
                base_spacing: 0.1,
            },
        }
    }

    fn series(h: f64) -> WindowFit {
        WindowFit {
            first_level: 0,
            h,
            points: vec![
                point(0.0, Provenance::AllShared, vec![h, 0.5 * h * h], 2.0 + h),
                point(0.5, Provenance::Objective, vec![-h, -0.5 * h * h], 2.0),
            ],
        }
    }

    #[test]
    fn slopes_follow_term_orders() {
        let orders = PresetOrders::new(vec![1.0, 2.0], 1.0).unwrap();
        let windows: Vec<WindowSummary> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| WindowSummary::new(&series(h), &orders, 0.01, None).unwrap())
            .collect();
        let report = ConvergenceReport::new(&orders, 0.01, windows);
        for (m, p) in [1.0, 2.0].iter().enumerate() {
            for s in &report.term_slopes[m] {
                assert!((s.unwrap() - p).abs() < 1e-12);
            }
        }
        let w = &report.windows[0];
        assert_eq!(w.support, 2);
        assert_eq!(w.objective_points, 1);
        assert!((w.beta.beta_tilde().unwrap() - 0.05).abs() < 1e-15);
        assert!(!w.beta.is_asymptotic());
        assert!(report.exact_error_slopes.is_none());
    }

    #[test]
    fn vanishing_leading_term_is_indeterminate() {
        let orders = PresetOrders::new(vec![1.0, 2.0], 1.0).unwrap();
        let window = WindowFit {
            first_level: 0,
            h: 0.1,
            points: vec![point(0.0, Provenance::AllShared, vec![0.0, 0.1], 1.0)],
        };
        let w = WindowSummary::new(&window, &orders, 0.01, None).unwrap();
        assert_eq!(w.beta, BetaOutcome::Indeterminate);
    }

    #[test]
    fn exact_comparisons() {
        let orders = PresetOrders::new(vec![1.0, 2.0], 1.0).unwrap();
        let exact = |_: &[f64]| 2.0;
        let reference = ExactReference {
            solution: &exact,
            level_error: norms(&[0.1, -0.1]).unwrap(),
        };
        let w = WindowSummary::new(&series(0.1), &orders, 0.01, Some(&reference)).unwrap();
        assert!((w.exact_error_shared.unwrap().l2 - 0.1).abs() < 1e-15);
        assert_eq!(w.exact_error_level.unwrap().linf, 0.1);
        // φ̃_e at the shared point: 2.1 − 0.1 − 0.005; at the objective point 2 + 0.1 + 0.005
        assert!((w.extrapolation_error.unwrap().linf - 0.105).abs() < 1e-14);
    }
}
