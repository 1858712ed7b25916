//! Work-unit cost comparison between two studies.

use serde::Serialize;

use crate::config::ValidatedConfig;
use crate::study::Plan;

/// Measured wall-time speed-up quoted for the fractional-ratio 2+1D study,
/// shown for context only.
pub const REFERENCE_SPEEDUP: f64 = 4.55;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostEntry {
    pub name: String,
    pub ratio: String,
    /// Points times steps for each distinct level, coarsest first.
    pub level_units: Vec<u128>,
    pub total: u128,
}

impl CostEntry {
    pub fn new(config: &ValidatedConfig) -> Self {
        let plan = Plan::new(config);
        let level_units: Vec<u128> = plan.distinct_levels().iter().map(|k| k.work_units()).collect();
        CostEntry {
            name: config.name.clone(),
            ratio: config.ratio.to_string(),
            total: level_units.iter().sum(),
            level_units,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostComparison {
    pub first: CostEntry,
    pub second: CostEntry,
    /// `first.total / second.total`.
    pub ratio: f64,
    pub reference_speedup: f64,
}

impl CostComparison {
    pub fn new(first: &ValidatedConfig, second: &ValidatedConfig) -> Self {
        let (first, second) = (CostEntry::new(first), CostEntry::new(second));
        CostComparison {
            ratio: first.total as f64 / second.total as f64,
            first,
            second,
            reference_speedup: REFERENCE_SPEEDUP,
        }
    }

    pub fn render(&self) -> String {
        let line = |e: &CostEntry| {
            format!(
                "{:<24} r = {:<5} levels {:<3} work units {}\n",
                e.name,
                e.ratio,
                e.level_units.len(),
                e.total
            )
        };
        format!(
            "{}{}work-unit ratio {:.4} (measured wall-time speed-up reported for the 2+1D study: {:.2}x)\n",
            line(&self.first),
            line(&self.second),
            self.ratio,
            self.reference_speedup
        )
    }
}
