use serde::Serialize;

use super::linalg::{Lu, Matrix};
use super::{EstimatorError, PresetOrders};

/// Expansion `φ_l = φ_e + Σ_m T_m r^{(l−1) p_m}` fitted at one location, where
/// `T_m = D_{p_m} h^{p_m}` on the window's coarsest level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionFit {
    pub phi_e_hat: f64,
    pub terms: Vec<f64>,
    pub base_spacing: f64,
}

impl ExpansionFit {
    /// `Σ_m T_m`: the estimated error of the window's coarsest level.
    pub fn error_estimate(&self) -> f64 {
        self.terms.iter().sum()
    }
}

/// Rows `[1, r^{l p_1}, …, r^{l p_k}]` for `l = 0..=k`.
pub fn build_system(orders: &[f64], r: f64) -> Result<Matrix, EstimatorError> {
    check_orders_and_ratio(orders, r)?;
    let k = orders.len();
    let rows = (0..=k)
        .map(|l| {
            std::iter::once(1.0)
                .chain(orders.iter().map(|&p| r.powf(l as f64 * p)))
                .collect()
        })
        .collect();
    Ok(Matrix::from_rows(rows))
}

pub(crate) fn check_orders_and_ratio(orders: &[f64], r: f64) -> Result<(), EstimatorError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(EstimatorError::RatioOutOfRange(r));
    }
    if orders.is_empty() {
        return Err(EstimatorError::InvalidOrders("no orders given".into()));
    }
    for w in orders.windows(2) {
        if w[0] == w[1] {
            return Err(EstimatorError::DegenerateOrders(w[0]));
        }
    }
    Ok(())
}

/// Factorised expansion system, reused for every location of a window.
#[derive(Debug, Clone)]
pub struct ExpansionSolver {
    lu: Lu,
    k: usize,
}

impl ExpansionSolver {
    pub fn new(orders: &PresetOrders, r: f64) -> Result<Self, EstimatorError> {
        let m = build_system(orders.orders(), r)?;
        let lu = m.lu().ok_or(EstimatorError::SingularSystem)?;
        Ok(ExpansionSolver {
            lu,
            k: orders.len(),
        })
    }

    /// `values[l]` is the field at level `l` of the window, coarsest first.
    pub fn fit(&self, values: &[f64], base_spacing: f64) -> Result<ExpansionFit, EstimatorError> {
        if values.len() != self.k + 1 {
            return Err(EstimatorError::WrongLevelCount {
                expected: self.k + 1,
                got: values.len(),
            });
        }
        let x = self.lu.solve(values);
        Ok(ExpansionFit {
            phi_e_hat: x[0],
            terms: x[1..].to_vec(),
            base_spacing,
        })
    }
}

pub fn fit_expansion(
    values: &[f64],
    orders: &PresetOrders,
    r: f64,
    base_spacing: f64,
) -> Result<ExpansionFit, EstimatorError> {
    ExpansionSolver::new(orders, r)?.fit(values, base_spacing)
}

/// `ε̃ = φ_l − φ̃_e` at each fitted location.
pub fn estimate_error(
    level_values: &[f64],
    fits: &[ExpansionFit],
) -> Result<Vec<f64>, EstimatorError> {
    if level_values.len() != fits.len() {
        return Err(EstimatorError::MismatchedSupport {
            values: level_values.len(),
            fits: fits.len(),
        });
    }
    Ok(level_values
        .iter()
        .zip(fits)
        .map(|(v, f)| v - f.phi_e_hat)
        .collect())
}

/// Observed-order (generalised Richardson) estimate from three levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreEstimate {
    pub observed_order: f64,
    /// Estimated error of the coarsest of the three levels.
    pub error: f64,
}

pub fn gre_baseline(phi1: f64, phi2: f64, phi3: f64, r: f64) -> Result<GreEstimate, EstimatorError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(EstimatorError::RatioOutOfRange(r));
    }
    let ratio = (phi3 - phi2) / (phi2 - phi1);
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(EstimatorError::UndefinedOrder { ratio });
    }
    let q = ratio.ln() / r.ln();
    Ok(GreEstimate {
        observed_order: q,
        error: (phi2 - phi1) / (r.powf(q) - 1.0),
    })
}
