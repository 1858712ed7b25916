use serde::Serialize;

use super::EstimatorError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl Norms {
    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.l1,
            NormKind::L2 => self.l2,
            NormKind::Linf => self.linf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L1, NormKind::L2, NormKind::Linf];

    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "L1",
            NormKind::L2 => "L2",
            NormKind::Linf => "Linf",
        }
    }
}

/// Mean absolute value, root mean square and maximum absolute value, summed
/// in index order so results are reproducible.
pub fn norms(field: &[f64]) -> Result<Norms, EstimatorError> {
    if field.is_empty() {
        return Err(EstimatorError::EmptyField);
    }
    let n = field.len() as f64;
    let (mut abs_sum, mut sq_sum, mut max) = (0.0f64, 0.0f64, 0.0f64);
    for &v in field {
        let a = v.abs();
        abs_sum += a;
        sq_sum += a * a;
        max = max.max(a);
    }
    let l1 = abs_sum / n;
    // Summation round-off can invert L1 <= L2 <= Linf by an ulp or so (a constant
    // field is the usual case); the exact values satisfy it, so restore the order.
    let l2 = (sq_sum / n).sqrt().clamp(l1.min(max), max);
    Ok(Norms {
        l1: l1.min(l2),
        l2,
        linf: max,
    })
}

/// `Δ log10(value) / Δ log10(h)` between consecutive entries of `(h, value)` pairs.
pub fn log_slope(series: &[(f64, f64)]) -> Result<Vec<f64>, EstimatorError> {
    if series.len() < 2 {
        return Err(EstimatorError::TooFewPoints(series.len()));
    }
    for (i, &(h, v)) in series.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            return Err(EstimatorError::NonPositiveValue { index: i, value: v });
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(EstimatorError::NonPositiveValue { index: i, value: h });
        }
    }
    series
        .windows(2)
        .map(|w| {
            let (h0, v0) = w[0];
            let (h1, v1) = w[1];
            if h1 >= h0 {
                return Err(EstimatorError::SpacingNotDecreasing { coarse: h0, fine: h1 });
            }
            Ok((v1.log10() - v0.log10()) / (h1.log10() - h0.log10()))
        })
        .collect()
}

pub const DEFAULT_BETA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaVerdict {
    pub beta_tilde: f64,
    pub asymptotic: bool,
}

/// Ratio of the second to the first term's L2 norm; the window is in the
/// asymptotic range when it falls below `beta`.
pub fn beta_ratio(term_l2: &[f64], beta: f64) -> Result<BetaVerdict, EstimatorError> {
    if term_l2.len() < 2 {
        return Err(EstimatorError::TooFewTerms(term_l2.len()));
    }
    if term_l2[0] == 0.0 {
        return Err(EstimatorError::ZeroLeadingTerm);
    }
    let beta_tilde = term_l2[1].abs() / term_l2[0].abs();
    Ok(BetaVerdict {
        beta_tilde,
        asymptotic: beta_tilde < beta,
    })
}
