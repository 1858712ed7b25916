use serde::{Deserialize, Serialize};

use super::{ConvergenceReport, EstimatorError};

pub const DEFAULT_TOLERANCE: f64 = 0.1;
pub const DEFAULT_MAX_ITERATIONS: usize = 5;

/// Strictly increasing, positive exponents of the error expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetOrders {
    orders: Vec<f64>,
    order_quantum: f64,
}

impl PresetOrders {
    pub fn new(orders: Vec<f64>, order_quantum: f64) -> Result<Self, EstimatorError> {
        if orders.is_empty() {
            return Err(EstimatorError::InvalidOrders("at least one order is required".into()));
        }
        if orders.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(EstimatorError::InvalidOrders(format!(
                "orders must be positive, got {orders:?}"
            )));
        }
        for w in orders.windows(2) {
            if w[0] == w[1] {
                return Err(EstimatorError::DegenerateOrders(w[0]));
            }
            if w[0] > w[1] {
                return Err(EstimatorError::InvalidOrders(format!(
                    "orders must be strictly increasing, got {orders:?}"
                )));
            }
        }
        if !(order_quantum > 0.0) || !order_quantum.is_finite() {
            return Err(EstimatorError::InvalidOrders(format!(
                "order quantum must be positive, got {order_quantum}"
            )));
        }
        Ok(PresetOrders {
            orders,
            order_quantum,
        })
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn quantum(&self) -> f64 {
        self.order_quantum
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Keeps the matching orders, inserts `mu`, then pads above the top order in
    /// quantum steps until the original count is restored.
    pub fn replace_deviating(&self, matches: &[bool], mu: f64) -> PresetOrders {
        let k = self.len();
        let mut next: Vec<f64> = self
            .orders
            .iter()
            .zip(matches)
            .filter(|(_, &ok)| ok)
            .map(|(&p, _)| p)
            .chain(std::iter::once(mu))
            .collect();
        next.sort_by(f64::total_cmp);
        next.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        next.truncate(k);
        while next.len() < k {
            let top = *next.last().unwrap();
            next.push(top + self.order_quantum);
        }
        PresetOrders {
            orders: next,
            order_quantum: self.order_quantum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermVerdict {
    pub preset: f64,
    pub observed_slope: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderCheck {
    pub tolerance: f64,
    pub verdicts: Vec<TermVerdict>,
    /// Suggested smallest missed order, when any term deviates.
    pub mu: Option<f64>,
}

impl OrderCheck {
    pub fn all_match(&self) -> bool {
        self.verdicts.iter().all(|v| v.matches)
    }

    pub fn deviations(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.matches).count()
    }
}

/// Compares each term's slope between the two finest windows with its preset order.
pub fn check_orders(
    report: &ConvergenceReport,
    quantum: f64,
    tolerance: f64,
) -> Result<OrderCheck, EstimatorError> {
    if report.windows.len() < 2 {
        return Err(EstimatorError::InsufficientWindows(report.windows.len()));
    }
    let slopes = report.finest_term_slopes();
    let verdicts = report
        .orders
        .iter()
        .zip(&slopes)
        .enumerate()
        .map(|(m, (&p, s))| {
            let s = s.ok_or(EstimatorError::UndefinedSlope { term: m })?;
            Ok(TermVerdict {
                preset: p,
                observed_slope: s,
                matches: (s - p).abs() <= tolerance,
            })
        })
        .collect::<Result<Vec<_>, EstimatorError>>()?;
    let mu = verdicts
        .iter()
        .filter(|v| !v.matches)
        .map(|v| ((v.observed_slope / quantum).round() * quantum).max(quantum))
        .min_by(f64::total_cmp);
    Ok(OrderCheck {
        tolerance,
        verdicts,
        mu,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStep {
    pub orders: Vec<f64>,
    pub check: OrderCheck,
    pub report: ConvergenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderIteration {
    pub final_orders: Vec<f64>,
    pub converged: bool,
    pub trail: Vec<IterationStep>,
}

impl OrderIteration {
    /// The step with the fewest deviating terms (earliest on ties).
    pub fn best(&self) -> &IterationStep {
        self.trail
            .iter()
            .min_by_key(|s| s.check.deviations())
            .expect("an iteration records at least one step")
    }
}

/// Repeats `study` with updated orders until every term's slope matches its
/// preset order or `max_iterations` studies have run.
pub fn iterate_orders<F>(
    initial: &PresetOrders,
    max_iterations: usize,
    tolerance: f64,
    mut study: F,
) -> Result<OrderIteration, EstimatorError>
where
    F: FnMut(&PresetOrders) -> Result<ConvergenceReport, EstimatorError>,
{
    if max_iterations == 0 {
        return Err(EstimatorError::InvalidOrders("max_iterations must be at least 1".into()));
    }
    let mut orders = initial.clone();
    let mut trail = Vec::new();
    for _ in 0..max_iterations {
        let report = study(&orders)?;
        let check = check_orders(&report, orders.quantum(), tolerance)?;
        let done = check.all_match();
        let next = check.mu.map(|mu| {
            let matches: Vec<bool> = check.verdicts.iter().map(|v| v.matches).collect();
            orders.replace_deviating(&matches, mu)
        });
        trail.push(IterationStep {
            orders: orders.orders().to_vec(),
            check,
            report,
        });
        if done {
            return Ok(OrderIteration {
                final_orders: orders.orders().to_vec(),
                converged: true,
                trail,
            });
        }
        if let Some(next) = next {
            orders = next;
        }
    }
    let attempt = OrderIteration {
        final_orders: Vec::new(),
        converged: false,
        trail,
    };
    let best = attempt.best().orders.clone();
    Err(EstimatorError::NoConvergence {
        iterations: max_iterations,
        best: Box::new(OrderIteration {
            final_orders: best,
            ..attempt
        }),
    })
}
