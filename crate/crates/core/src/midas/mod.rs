//! Difference interpolation for fractional refinement ratios.
//!
//! Under a fractional ratio only a few points are shared by all levels of a
//! window. Differences `e_{j+1,j} = φ_{j+1} − φ_j` are defined on the coarser
//! lattice common to each consecutive pair; interpolating them to locations
//! defined on at least two levels lets the coefficient terms be solved there too.

mod interp;

use num_integer::Integer;
use serde::Serialize;

pub use interp::{
    interp_weights, InterpStencil, Interpolator, InterpolatorFactory, InterpolatorRegistry, Linear,
};

use crate::estimator::{
    EstimatorError, ExpansionFit, FitPoint, Lu, Matrix, PresetOrders,
    WindowFit,
};
use crate::grid::{flat_index, ObjectivePolicy, Rational, SharedPointMap, UnitSignature};
use crate::schemes::FieldLevel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MidasError {
    #[error("fields do not form a ladder window: {0}")]
    MismatchedLadder(String),
    #[error("neighbours {lower}..{upper} do not bracket {objective}")]
    NonBracketing {
        objective: String,
        lower: String,
        upper: String,
    },
    #[error("no usable neighbours at {location}: {detail}")]
    InsufficientNeighbors { location: String, detail: String },
    #[error("unknown interpolator {name:?}; registered: {known}")]
    UnknownInterpolator { name: String, known: String },
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// `e = φ_fine − φ_coarse` on the lattice where both levels have points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffField {
    /// Ladder levels `(coarse, fine)`.
    pub levels: (usize, usize),
    /// Lattice nodes per unit length along each axis.
    pub lattice: Vec<u64>,
    /// Row-major, x fastest.
    pub values: Vec<f64>,
}

impl DiffField {
    /// Value at a lattice node (periodic); `None` off the lattice.
    pub fn at(&self, coord: &[Rational]) -> Option<f64> {
        flat_index(coord, &self.lattice).map(|i| self.values[i])
    }
}

pub fn differences(coarse: &FieldLevel, fine: &FieldLevel) -> Result<DiffField, MidasError> {
    if coarse.segments.len() != fine.segments.len() {
        return Err(MidasError::MismatchedLadder(format!(
            "levels {} and {} differ in dimension",
            coarse.level, fine.level
        )));
    }
    if coarse.t_end != fine.t_end {
        return Err(MidasError::MismatchedLadder(format!(
            "levels {} and {} end at different times",
            coarse.level, fine.level
        )));
    }
    for f in [coarse, fine] {
        if f.values.len() != f.segments.iter().product::<u64>() as usize {
            return Err(MidasError::MismatchedLadder(format!(
                "level {} has {} values for {:?} segments",
                f.level,
                f.values.len(),
                f.segments
            )));
        }
    }
    let lattice: Vec<u64> = coarse
        .segments
        .iter()
        .zip(&fine.segments)
        .map(|(a, b)| a.gcd(b))
        .collect();
    let strides = |segs: &[u64]| -> Vec<u64> {
        segs.iter().zip(&lattice).map(|(s, g)| s / g).collect()
    };
    let (sc, sf) = (strides(&coarse.segments), strides(&fine.segments));
    let n: u64 = lattice.iter().product();
    let values = (0..n)
        .map(|g| {
            let (mut rem, mut ic, mut i_f, mut stride_c, mut stride_f) = (g, 0u64, 0u64, 1u64, 1u64);
            for d in 0..lattice.len() {
                let k = rem % lattice[d];
                rem /= lattice[d];
                ic += k * sc[d] * stride_c;
                i_f += k * sf[d] * stride_f;
                stride_c *= coarse.segments[d];
                stride_f *= fine.segments[d];
            }
            fine.values[i_f as usize] - coarse.values[ic as usize]
        })
        .collect();
    Ok(DiffField {
        levels: (coarse.level, fine.level),
        lattice,
        values,
    })
}

/// Differences of each consecutive pair at one location.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointDifferences {
    pub values: Vec<f64>,
    /// Whether each value came from interpolation rather than direct subtraction.
    pub interpolated: Vec<bool>,
}

/// Values of every difference field at `coord`, taken directly where the pair
/// lattice has a node and interpolated otherwise.
pub fn interpolate_differences(
    diffs: &[DiffField],
    coord: &[Rational],
    interpolator: &dyn Interpolator,
) -> Result<PointDifferences, MidasError> {
    let mut values = Vec::with_capacity(diffs.len());
    let mut interpolated = Vec::with_capacity(diffs.len());
    for d in diffs {
        if let Some(v) = d.at(coord) {
            values.push(v);
            interpolated.push(false);
            continue;
        }
        let stencil = interpolator.stencil(coord, &d.lattice)?;
        let mut sum = 0.0;
        for (n, w) in stencil.neighbors.iter().zip(stencil.weights_f64()) {
            let v = d.at(n).ok_or_else(|| MidasError::InsufficientNeighbors {
                location: format!("{coord:?}"),
                detail: format!("stencil node {n:?} is not on the lattice of levels {:?}", d.levels),
            })?;
            sum += w * v;
        }
        values.push(sum);
        interpolated.push(true);
    }
    if !interpolated.is_empty() && interpolated.iter().all(|&i| i) {
        return Err(MidasError::InsufficientNeighbors {
            location: format!("{coord:?}"),
            detail: "no difference is defined directly here".into(),
        });
    }
    Ok(PointDifferences {
        values,
        interpolated,
    })
}

/// Factorised difference system: row `j` is `(r^{p_m} − 1) r^{j p_m}`.
#[derive(Debug, Clone)]
pub struct DifferenceSolver {
    lu: Lu,
    orders: Vec<f64>,
    r: f64,
}

impl DifferenceSolver {
    pub fn new(orders: &PresetOrders, r: f64) -> Result<Self, MidasError> {
        crate::estimator::check_orders_and_ratio(orders.orders(), r)?;
        let k = orders.len();
        let rows = (0..k)
            .map(|j| {
                orders
                    .orders()
                    .iter()
                    .map(|&p| (r.powf(p) - 1.0) * r.powf(j as f64 * p))
                    .collect()
            })
            .collect();
        let lu = Matrix::from_rows(rows)
            .lu()
            .ok_or(EstimatorError::SingularSystem)?;
        Ok(DifferenceSolver {
            lu,
            orders: orders.orders().to_vec(),
            r,
        })
    }

    /// `diffs[j] = φ_{j+1} − φ_j` (window levels, 0-based); `phi` is the field at
    /// window level `phi_level`.
    pub fn fit(
        &self,
        diffs: &[f64],
        phi: f64,
        phi_level: usize,
        base_spacing: f64,
    ) -> Result<ExpansionFit, MidasError> {
        if diffs.len() != self.orders.len() {
            return Err(EstimatorError::WrongLevelCount {
                expected: self.orders.len() + 1,
                got: diffs.len() + 1,
            }
            .into());
        }
        let terms = self.lu.solve(diffs);
        let at_level: f64 = terms
            .iter()
            .zip(&self.orders)
            .map(|(t, &p)| t * self.r.powf(phi_level as f64 * p))
            .sum();
        Ok(ExpansionFit {
            phi_e_hat: phi - at_level,
            terms,
            base_spacing,
        })
    }
}

pub fn fit_from_differences(
    diffs: &[f64],
    orders: &PresetOrders,
    r: f64,
    phi: f64,
    phi_level: usize,
    base_spacing: f64,
) -> Result<ExpansionFit, MidasError> {
    DifferenceSolver::new(orders, r)?.fit(diffs, phi, phi_level, base_spacing)
}

/// MIDAS result for one window: fits at the all-shared and objective locations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MidasWindow {
    pub fit: WindowFit,
    /// For each retained point, which pair differences were interpolated.
    pub interpolated: Vec<Vec<bool>>,
}

/// Runs MIDAS on a window of consecutive levels (`fields` coarsest first).
pub fn run_midas(
    fields: &[FieldLevel],
    h: f64,
    orders: &PresetOrders,
    r: f64,
    policy: ObjectivePolicy,
    interpolator: &dyn Interpolator,
) -> Result<MidasWindow, MidasError> {
    if fields.len() != orders.len() + 1 {
        return Err(EstimatorError::WrongLevelCount {
            expected: orders.len() + 1,
            got: fields.len(),
        }
        .into());
    }
    for w in fields.windows(2) {
        if w[1].level != w[0].level + 1 {
            return Err(MidasError::MismatchedLadder(format!(
                "levels {} and {} are not consecutive",
                w[0].level, w[1].level
            )));
        }
    }
    let diffs: Vec<DiffField> = fields
        .windows(2)
        .map(|w| differences(&w[0], &w[1]))
        .collect::<Result<_, _>>()?;
    let segments: Vec<Vec<u64>> = fields.iter().map(|f| f.segments.clone()).collect();
    let map = SharedPointMap::build(&UnitSignature::from_segments(&segments), Some(policy));
    let solver = DifferenceSolver::new(orders, r)?;

    let mut points = Vec::with_capacity(map.len());
    let mut interpolated = Vec::with_capacity(map.len());
    for p in map.points() {
        let d = interpolate_differences(&diffs, &p.coord, interpolator)?;
        let finest = p.finest_level();
        let phi = fields[finest].values[p.indices[finest].expect("finest level defines the point")];
        points.push(FitPoint {
            coord: p.coord_f64(),
            provenance: p.provenance,
            coarse_value: p.indices[0].map(|i| fields[0].values[i]),
            fit: solver.fit(&d.values, phi, finest, h)?,
        });
        interpolated.push(d.interpolated);
    }
    Ok(MidasWindow {
        fit: WindowFit {
            first_level: fields[0].level,
            h,
            points,
        },
        interpolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::fit_expansion;
    use crate::grid::Provenance;

    fn field(level: usize, s: u64, f: impl Fn(f64) -> f64) -> FieldLevel {
        FieldLevel {
            level,
            segments: vec![s],
            spacing: vec![1.0 / s as f64],
            dt: 0.1,
            steps: 1,
            t_end: 1.0,
            values: (0..s).map(|i| f(i as f64 / s as f64)).collect(),
        }
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn identical_fields_have_zero_differences() {
        let a = field(0, 4, |x| x.cos());
        let b = field(1, 6, |x| x.cos());
        let d = differences(&a, &b).unwrap();
        assert_eq!(d.lattice, [2]);
        assert!(d.values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn single_term_difference() {
        let (h, p, rr) = (0.25f64, 2, 2.0 / 3.0f64);
        let a = field(0, 4, |_| h.powi(p));
        let b = field(1, 6, |_| (rr * h).powi(p));
        let d = differences(&a, &b).unwrap();
        for v in d.values {
            assert!((v - h.powi(p) * (rr.powi(p) - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn one_third_in_four_six_nine() {
        let f = |x: f64| 2.0 * x + 1.0;
        let fields = [field(0, 4, f), field(1, 6, |x| f(x) + 0.5), field(2, 9, |x| f(x) + 0.75)];
        let diffs = vec![
            differences(&fields[0], &fields[1]).unwrap(),
            differences(&fields[1], &fields[2]).unwrap(),
        ];
        let d = interpolate_differences(&diffs, &[r(1, 3)], &Linear).unwrap();
        assert_eq!(d.interpolated, [true, false]);
        assert!((d.values[0] - 0.5).abs() < 1e-15);
        assert!((d.values[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_differences_give_the_field() {
        let orders = PresetOrders::new(vec![1.0, 2.0], 1.0).unwrap();
        let fit = fit_from_differences(&[0.0, 0.0], &orders, 0.5, 3.5, 2, 0.1).unwrap();
        assert_eq!(fit.phi_e_hat, 3.5);
        assert!(fit.terms.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn agrees_with_direct_fit() {
        let orders = PresetOrders::new(vec![2.0, 3.0], 1.0).unwrap();
        let rr = 0.75;
        let phi = [1.3, 1.21, 1.17];
        let direct = fit_expansion(&phi, &orders, rr, 0.1).unwrap();
        for level in 0..3 {
            let m = fit_from_differences(
                &[phi[1] - phi[0], phi[2] - phi[1]],
                &orders,
                rr,
                phi[level],
                level,
                0.1,
            )
            .unwrap();
            assert!((m.phi_e_hat - direct.phi_e_hat).abs() < 1e-13);
            for (a, b) in m.terms.iter().zip(&direct.terms) {
                assert!((a - b).abs() < 1e-13 * b.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn densified_window_recovers_a_uniform_error() {
        // φ_l(x) = g(x) + 1.5 h_l: the differences are constant, so interpolating
        // them is exact and only g survives in the extrapolated field.
        let (rr, h) = (2.0 / 3.0f64, 0.25);
        let g = |x: f64| (6.0 * x).sin();
        let make = |l: usize, s| {
            let hl = h * rr.powi(l as i32);
            field(l, s, move |x| g(x) + 1.5 * hl)
        };
        let fields = vec![make(0, 8), make(1, 12), make(2, 18)];
        let orders = PresetOrders::new(vec![1.0, 2.0], 1.0).unwrap();
        let w = run_midas(&fields, h, &orders, rr, ObjectivePolicy::TwoLevel, &Linear).unwrap();
        // 2 units × (1 shared + 3 objective)
        assert_eq!(w.fit.points.len(), 8);
        assert_eq!(w.fit.objective().count(), 6);
        for p in &w.fit.points {
            let x = p.coord[0];
            assert!((p.fit.terms[0] - 1.5 * h).abs() < 1e-12, "{p:?}");
            assert!(p.fit.terms[1].abs() < 1e-12);
            assert!((p.fit.phi_e_hat - g(x)).abs() < 1e-12);
        }
        assert!(w.fit.points.iter().any(|p| p.provenance == Provenance::AllShared));
    }
}
