use std::f64::consts::TAU;

use poem::estimator::{fit_window, PresetOrders};
use poem::grid::{ObjectivePolicy, Rational, SharedPointMap, UnitSignature};
use poem::midas::{interp_weights, run_midas, Linear};
use poem::schemes::FieldLevel;
use proptest::prelude::*;

/// Smooth periodic profile `c0 + c1 sin(2π(x + y) + shift)`.
#[derive(Debug, Clone, Copy)]
struct Profile {
    mean: f64,
    amplitude: f64,
    shift: f64,
}

impl Profile {
    fn at(&self, coord: &[f64]) -> f64 {
        self.mean + self.amplitude * (TAU * coord.iter().sum::<f64>() + self.shift).sin()
    }
}

fn profile(mean: std::ops::Range<f64>, amplitude: std::ops::Range<f64>) -> impl Strategy<Value = Profile> {
    (mean, amplitude, 0.0..TAU).prop_map(|(mean, amplitude, shift)| Profile {
        mean,
        amplitude,
        shift,
    })
}

/// Fields `φ_l(x) = exact(x) + Σ T_m(x) r^{l p_m}` on consecutive levels.
fn fields(
    segments: &[u64],
    dims: usize,
    exact: Profile,
    terms: &[Profile],
    orders: &[f64],
    r: f64,
) -> Vec<FieldLevel> {
    segments
        .iter()
        .enumerate()
        .map(|(l, &s)| {
            let n = (s as usize).pow(dims as u32);
            let values = (0..n)
                .map(|i| {
                    let coord: Vec<f64> = (0..dims)
                        .map(|d| ((i / (s as usize).pow(d as u32)) % s as usize) as f64 / s as f64)
                        .collect();
                    exact.at(&coord)
                        + terms
                            .iter()
                            .zip(orders)
                            .map(|(t, p)| t.at(&coord) * r.powf(l as f64 * p))
                            .sum::<f64>()
                })
                .collect();
            FieldLevel {
                level: l,
                segments: vec![s; dims],
                spacing: vec![1.0 / s as f64; dims],
                dt: 0.1,
                steps: 10,
                t_end: 1.0,
                values,
            }
        })
        .collect()
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn fractional() -> impl Strategy<Value = (Vec<u64>, f64)> {
    prop::sample::select(vec![
        (vec![4u64, 6, 9], 2.0 / 3.0),
        (vec![9, 12, 16], 0.75),
        (vec![16, 20, 25], 0.8),
        (vec![2, 4, 8], 0.5),
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn agrees_with_direct_fit_on_full_support(
        (base, r) in fractional(),
        repeats in 1u64..=3,
        two_d in any::<bool>(),
        exact in profile(1.0..2.0, 0.0..0.5),
        terms in prop::collection::vec(profile(1.5..2.0, 0.0..0.5), 2),
    ) {
        let dims = if two_d { 2 } else { 1 };
        let segments: Vec<u64> = base.iter().map(|s| s * repeats).collect();
        let orders = [2.0, 3.0];
        let preset = PresetOrders::new(orders.to_vec(), 1.0).unwrap();
        let fields = fields(&segments, dims, exact, &terms, &orders, r);
        let h = 1.0 / segments[0] as f64;
        let direct = fit_window(&fields, h, &preset, r).unwrap();
        let policy = ObjectivePolicy::for_dims(dims);
        let midas = run_midas(&fields, h, &preset, r, policy, &Linear).unwrap();
        let shared: Vec<_> = midas.fit.shared().collect();
        prop_assert_eq!(shared.len(), direct.points.len());
        for (m, d) in shared.iter().zip(&direct.points) {
            prop_assert_eq!(&m.coord, &d.coord);
            prop_assert!(rel(m.fit.phi_e_hat, d.fit.phi_e_hat) <= 1e-12);
            for (a, b) in m.fit.terms.iter().zip(&d.fit.terms) {
                prop_assert!(rel(*a, *b) <= 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn uniform_terms_survive_interpolation(
        (base, r) in fractional(),
        exact in profile(1.0..2.0, 0.0..0.5),
        t1 in 0.1..1.0f64,
        t2 in 0.1..1.0f64,
    ) {
        // Differences are then constant in space, which linear weights carry exactly.
        let orders = [2.0, 3.0];
        let preset = PresetOrders::new(orders.to_vec(), 1.0).unwrap();
        let flat = |v: f64| Profile { mean: v, amplitude: 0.0, shift: 0.0 };
        let fields = fields(&base, 1, exact, &[flat(t1), flat(t2)], &orders, r);
        let midas = run_midas(&fields, 0.1, &preset, r, ObjectivePolicy::TwoLevel, &Linear).unwrap();
        for p in midas.fit.objective() {
            prop_assert!(rel(p.fit.terms[0], t1) <= 1e-12 && rel(p.fit.terms[1], t2) <= 1e-12);
            prop_assert!(rel(p.fit.phi_e_hat, exact.at(&p.coord)) <= 1e-12);
        }
    }

    #[test]
    fn weights_reproduce_affine_functions(
        box_lo in prop::collection::vec((0i64..8, 1i64..=8), 1..=2),
        widths in prop::collection::vec((1i64..=4, 1i64..=6), 2),
        fractions in prop::collection::vec((0i64..=12, 12i64..=12), 2),
        slope in prop::collection::vec(-20i64..=20, 2),
        offset in -20i64..=20,
    ) {
        let dims = box_lo.len();
        let q = |(n, d): (i64, i64)| Rational::new(n, d);
        let lower: Vec<Rational> = box_lo.iter().map(|&b| q(b)).collect();
        let upper: Vec<Rational> = (0..dims).map(|d| lower[d] + q(widths[d])).collect();
        let objective: Vec<Rational> =
            (0..dims).map(|d| lower[d] + (upper[d] - lower[d]) * q(fractions[d])).collect();
        let stencil = interp_weights(&objective, &lower, &upper).unwrap();
        prop_assert_eq!(stencil.weights.iter().sum::<Rational>(), Rational::from_integer(1));
        let affine = |p: &[Rational]| {
            p.iter()
                .zip(&slope)
                .fold(Rational::from_integer(offset), |acc, (x, &c)| acc + *x * c)
        };
        let interpolated: Rational = stencil
            .neighbors
            .iter()
            .zip(&stencil.weights)
            .map(|(n, w)| affine(n) * *w)
            .sum();
        prop_assert_eq!(interpolated, affine(&objective));
    }
}

#[test]
fn interpolation_quadruples_usable_points_in_thirds() {
    let unit = UnitSignature::from_segments(&[vec![4], vec![6], vec![9]]);
    let bare = SharedPointMap::build(&unit, None);
    let dense = SharedPointMap::build(&unit, Some(ObjectivePolicy::TwoLevel));
    assert_eq!((bare.len(), dense.len()), (1, 4));
    let coords: Vec<Rational> = dense.points().iter().map(|p| p.coord[0]).collect();
    let q = Rational::new;
    assert_eq!(coords, [q(0, 1), q(1, 3), q(1, 2), q(2, 3)]);
}
