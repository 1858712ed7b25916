//! Planning and execution of a refinement study.

use std::collections::BTreeMap;
use std::sync::Arc;

use poem::estimator::{
    check_orders, fit_window, gre_baseline, iterate_orders, norms, ConvergenceReport,
    EstimatorError, ExactReference, Norms, OrderCheck, OrderIteration, PresetOrders, WindowFit,
    WindowSummary,
};
use poem::grid::{ratio_to_f64, SharedPointMap, UnitSignature};
use poem::midas::{run_midas, InterpolatorRegistry};
use poem::schemes::{
    exact_solution, solve, FieldLevel, LevelGrid, SchemeRegistry, StabilityLimits,
};
use serde::Serialize;

use crate::config::ValidatedConfig;
use crate::CliError;

/// A distinct grid: segments per dimension and number of time steps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LevelKey {
    pub segments: Vec<u64>,
    pub steps: u64,
}

impl LevelKey {
    pub fn work_units(&self) -> u128 {
        self.segments.iter().map(|&s| s as u128).product::<u128>() * self.steps as u128
    }
}

/// The levels and spacing of one estimation window.
#[derive(Debug, Clone, Serialize)]
pub struct WindowPlan {
    /// Window label; the first ladder level for the single protocol, the
    /// window number for two-tier.
    pub index: usize,
    pub levels: Vec<LevelKey>,
    pub h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Plan {
    pub ratio: f64,
    pub windows: Vec<WindowPlan>,
}

impl Plan {
    pub fn new(config: &ValidatedConfig) -> Plan {
        let k1 = config.orders.len() + 1;
        let key = |ladder: &poem::grid::GridLadder, l: usize| LevelKey {
            segments: ladder.segments(l).to_vec(),
            steps: ladder.steps(l),
        };
        let windows = if config.ladders.len() == 1 {
            let ladder = &config.ladders[0];
            (0..=ladder.levels() - k1)
                .map(|w| WindowPlan {
                    index: w,
                    levels: (w..w + k1).map(|l| key(ladder, l)).collect(),
                    h: ladder.h(w),
                })
                .collect()
        } else {
            config
                .ladders
                .iter()
                .enumerate()
                .map(|(j, ladder)| WindowPlan {
                    index: j,
                    levels: (0..k1).map(|l| key(ladder, l)).collect(),
                    h: ladder.h(0),
                })
                .collect()
        };
        Plan {
            ratio: ratio_to_f64(config.ladders[0].ratio()),
            windows,
        }
    }

    /// Every distinct level, coarsest first.
    pub fn distinct_levels(&self) -> Vec<LevelKey> {
        let mut keys: Vec<LevelKey> = self.windows.iter().flat_map(|w| w.levels.clone()).collect();
        keys.sort_by(|a, b| (a.work_units(), a).cmp(&(b.work_units(), b)));
        keys.dedup();
        keys
    }

    pub fn total_work_units(&self) -> u128 {
        self.distinct_levels().iter().map(LevelKey::work_units).sum()
    }
}

/// A solved level and its error against the exact solution over the whole grid.
#[derive(Debug, Clone)]
pub struct SolvedLevel {
    pub field: Arc<FieldLevel>,
    pub exact_error: Option<Norms>,
}

/// Observed-order estimates at the all-level shared points of one window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreWindow {
    pub index: usize,
    pub log_h: f64,
    pub points: usize,
    /// Points where the observed order is undefined (sign change in the differences).
    pub undefined: usize,
    pub mean_order: Option<f64>,
    pub min_order: Option<f64>,
    pub max_order: Option<f64>,
    /// L2 norm of the observed-order error estimate over the defined points.
    pub estimated_error_l2: Option<f64>,
    /// L2 norm of the exact error of the coarsest level at the same points.
    pub exact_error_l2: Option<f64>,
}

/// Everything the runner computed; written out by [`crate::output`].
#[derive(Debug, Clone, Serialize)]
pub struct StudyOutcome {
    pub name: String,
    pub plan: Plan,
    pub work_units: u128,
    pub midas: bool,
    pub report: ConvergenceReport,
    pub check: Option<OrderCheck>,
    pub iteration: Option<OrderIteration>,
    pub gre: Vec<GreWindow>,
    /// Term L2 norms at shared and objective points per window (MIDAS only).
    pub midas_windows: Vec<MidasWindowSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MidasWindowSummary {
    pub index: usize,
    pub log_h: f64,
    pub shared_points: usize,
    pub objective_points: usize,
    pub interpolated_values: usize,
    pub shared_l2: Vec<f64>,
    pub objective_l2: Option<Vec<f64>>,
}

pub struct Study {
    pub config: ValidatedConfig,
    pub plan: Plan,
    levels: BTreeMap<LevelKey, SolvedLevel>,
}

impl Study {
    /// Solves every distinct level of the plan, concurrently.
    pub fn prepare(config: ValidatedConfig) -> Result<Study, CliError> {
        let plan = Plan::new(&config);
        let registry = SchemeRegistry::default();
        let scheme = registry.create(&config.raw.scheme.name)?;
        let limits = StabilityLimits {
            cfl_max: config.raw.scheme.cfl_max,
        };
        let problem = &config.problem;
        let keys = plan.distinct_levels();

        let solved: Vec<Result<SolvedLevel, CliError>> = std::thread::scope(|s| {
            let handles: Vec<_> = keys
                .iter()
                .map(|key| {
                    let scheme = &scheme;
                    let limits = &limits;
                    s.spawn(move || -> Result<SolvedLevel, CliError> {
                        let dt = problem.t_end / key.steps as f64;
                        let grid = LevelGrid::new(0, key.segments.clone(), dt);
                        let field = solve(scheme.as_ref(), problem, &grid, limits)?;
                        let exact_error = if problem.has_exact_solution() {
                            Some(norms(&field.error_against_exact(problem)).map_err(poem::Error::from)?)
                        } else {
                            None
                        };
                        Ok(SolvedLevel {
                            field: Arc::new(field),
                            exact_error,
                        })
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect()
        });
        let mut levels = BTreeMap::new();
        for (key, level) in keys.into_iter().zip(solved) {
            levels.insert(key, level?);
        }
        Ok(Study { config, plan, levels })
    }

    /// Fields of one window, labelled with consecutive level numbers.
    fn window_fields(&self, w: &WindowPlan) -> Vec<FieldLevel> {
        w.levels
            .iter()
            .enumerate()
            .map(|(i, key)| {
                let mut f = (*self.levels[key].field).clone();
                f.level = w.index + i;
                f
            })
            .collect()
    }

    fn midas_enabled(&self) -> bool {
        self.config.raw.midas.enabled
    }

    fn fit(&self, w: &WindowPlan, orders: &PresetOrders) -> Result<(WindowFit, usize), CliError> {
        let fields = self.window_fields(w);
        if self.midas_enabled() {
            let interp = InterpolatorRegistry::default().create(&self.config.raw.midas.interpolator)?;
            let m = run_midas(&fields, w.h, orders, self.plan.ratio, self.config.policy, interp.as_ref())?;
            let interpolated = m.interpolated.iter().flatten().filter(|&&b| b).count();
            Ok((m.fit, interpolated))
        } else {
            Ok((fit_window(&fields, w.h, orders, self.plan.ratio).map_err(poem::Error::from)?, 0))
        }
    }

    /// Fits every window with `orders` and assembles the convergence report.
    pub fn analyze(&self, orders: &PresetOrders) -> Result<(ConvergenceReport, Vec<MidasWindowSummary>), CliError> {
        let problem = &self.config.problem;
        let t_end = problem.t_end;
        let solution = |x: &[f64]| exact_solution(problem, x, t_end);
        let beta = self.config.raw.estimator.beta;
        let mut summaries = Vec::with_capacity(self.plan.windows.len());
        let mut midas = Vec::new();
        for w in &self.plan.windows {
            let (fit, interpolated) = self.fit(w, orders)?;
            let exact = self.levels[&w.levels[0]].exact_error.map(|level_error| ExactReference {
                solution: &solution,
                level_error,
            });
            let s = WindowSummary::new(&fit, orders, beta, exact.as_ref()).map_err(poem::Error::from)?;
            if self.midas_enabled() {
                midas.push(MidasWindowSummary {
                    index: w.index,
                    log_h: s.log_h,
                    shared_points: s.support - s.objective_points,
                    objective_points: s.objective_points,
                    interpolated_values: interpolated,
                    shared_l2: s.shared_term_norms.iter().map(|n| n.l2).collect(),
                    objective_l2: s
                        .objective_term_norms
                        .as_ref()
                        .map(|v| v.iter().map(|n| n.l2).collect()),
                });
            }
            summaries.push(s);
        }
        Ok((ConvergenceReport::new(orders, beta, summaries), midas))
    }

    /// Observed-order baseline on the first three levels of every window.
    pub fn gre(&self) -> Vec<GreWindow> {
        let problem = &self.config.problem;
        self.plan
            .windows
            .iter()
            .map(|w| {
                let fields: Vec<&FieldLevel> =
                    w.levels.iter().take(3).map(|k| self.levels[k].field.as_ref()).collect();
                let segments: Vec<Vec<u64>> = fields.iter().map(|f| f.segments.clone()).collect();
                let map = SharedPointMap::build(&UnitSignature::from_segments(&segments), None);
                let (mut orders, mut est, mut exact) = (Vec::new(), Vec::new(), Vec::new());
                let mut undefined = 0;
                for p in map.points() {
                    let v: Vec<f64> = (0..3)
                        .map(|l| fields[l].values[p.indices[l].expect("all-level shared point")])
                        .collect();
                    match gre_baseline(v[0], v[1], v[2], self.plan.ratio) {
                        Ok(g) => {
                            orders.push(g.observed_order);
                            est.push(g.error);
                            exact.push(v[0] - exact_solution(problem, &p.coord_f64(), problem.t_end));
                        }
                        Err(_) => undefined += 1,
                    }
                }
                let l2 = |v: &[f64]| norms(v).ok().map(|n| n.l2);
                let o: Vec<f64> = orders.into_iter().filter(|x: &f64| x.is_finite()).collect();
                GreWindow {
                    index: w.index,
                    log_h: w.h.log10(),
                    points: map.len(),
                    undefined,
                    mean_order: (!o.is_empty()).then(|| o.iter().sum::<f64>() / o.len() as f64),
                    min_order: o.iter().copied().reduce(f64::min),
                    max_order: o.iter().copied().reduce(f64::max),
                    estimated_error_l2: l2(&est),
                    exact_error_l2: problem.has_exact_solution().then(|| l2(&exact)).flatten(),
                }
            })
            .collect()
    }

    /// The full study: fit with the configured orders, check them, optionally
    /// iterate, and run the observed-order baseline.
    pub fn run(&self) -> Result<StudyOutcome, CliError> {
        let e = &self.config.raw.estimator;
        let orders = &self.config.orders;
        let (report, midas_windows) = self.analyze(orders)?;
        let check = match check_orders(&report, orders.quantum(), e.tolerance) {
            Ok(c) => Some(c),
            Err(EstimatorError::UndefinedSlope { .. } | EstimatorError::InsufficientWindows(_)) => None,
            Err(err) => return Err(poem::Error::from(err).into()),
        };
        let iteration = if e.iterate { Some(self.iterate()?) } else { None };
        Ok(StudyOutcome {
            name: self.config.name.clone(),
            work_units: self.plan.total_work_units(),
            midas: self.midas_enabled(),
            plan: self.plan.clone(),
            report,
            check,
            iteration,
            gre: self.gre(),
            midas_windows,
        })
    }

    /// Order iteration from the configured orders.
    pub fn iterate(&self) -> Result<OrderIteration, CliError> {
        self.iterate_from(&self.config.orders)
    }

    /// Order iteration from `initial`. Exhausting the budget is not an error
    /// here: the trail and the best attempt come back with `converged == false`.
    pub fn iterate_from(&self, initial: &PresetOrders) -> Result<OrderIteration, CliError> {
        let e = &self.config.raw.estimator;
        let mut failure = None;
        let result = iterate_orders(initial, e.max_iterations, e.tolerance, |o| {
            self.analyze(o).map(|(r, _)| r).map_err(|err| {
                let msg = err.to_string();
                failure = Some(err);
                EstimatorError::InvalidOrders(msg)
            })
        });
        if let Some(err) = failure {
            return Err(err);
        }
        match result {
            Ok(it) => Ok(it),
            Err(EstimatorError::NoConvergence { best, .. }) => Ok(*best),
            Err(err) => Err(poem::Error::from(err).into()),
        }
    }

    pub fn level(&self, key: &LevelKey) -> Option<&SolvedLevel> {
        self.levels.get(key)
    }
}
