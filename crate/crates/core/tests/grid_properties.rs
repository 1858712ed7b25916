use num_integer::Integer;
use poem::grid::{
    build_ladder, irreducible_unit, AxisUnit, LadderSpec, Levels, Rational, RefinementPath,
    SharedPointMap, TimeBase, UnitSignature,
};
use proptest::prelude::*;

/// Per-level segment counts `g · n^(L−1−l) · d^l` for the ratio `n/d`.
fn ladder_segments(g: u64, n: u64, d: u64, levels: u32) -> Vec<u64> {
    (0..levels).map(|l| g * n.pow(levels - 1 - l) * d.pow(l)).collect()
}

fn coprime_ratio() -> impl Strategy<Value = (u64, u64)> {
    (1u64..=6, 1u64..=3)
        .prop_map(|(n, extra)| (n, n + extra))
        .prop_filter("reduced ratio", |(n, d)| n.gcd(d) == 1)
}

proptest! {
    #[test]
    fn repeated_units_rebuild_every_lattice(
        g in 1u64..=5,
        (n, d) in coprime_ratio(),
        levels in 2u32..=4,
    ) {
        let segments = ladder_segments(g, n, d, levels);
        let unit = AxisUnit::from_segments(&segments);
        prop_assert_eq!(unit.repeats(), g);
        for (l, &s_full) in segments.iter().enumerate() {
            let s = unit.s_per_level()[l];
            prop_assert_eq!(s * unit.repeats(), s_full);
            let mut rebuilt: Vec<Rational> = (0..unit.repeats())
                .flat_map(|c| (0..s).map(move |j| Rational::new((c * s + j) as i64, (s * g) as i64)))
                .collect();
            rebuilt.sort();
            let lattice: Vec<Rational> =
                (0..s_full).map(|k| Rational::new(k as i64, s_full as i64)).collect();
            prop_assert_eq!(rebuilt, lattice);
        }
    }

    #[test]
    fn all_shared_points_lie_on_every_pair(
        (n, d) in coprime_ratio(),
        levels in 2u32..=4,
    ) {
        let segments: Vec<Vec<u64>> =
            ladder_segments(1, n, d, levels).into_iter().map(|s| vec![s]).collect();
        let unit = UnitSignature::from_segments(&segments);
        let all = unit.shared_points(Levels::All);
        prop_assert_eq!(all.clone(), vec![vec![Rational::from_integer(0)], vec![Rational::from_integer(1)]]);
        for i in 0..unit.levels() {
            for j in i + 1..unit.levels() {
                let pair = unit.shared_points(Levels::Pair(i, j));
                prop_assert!(all.iter().all(|p| pair.contains(p)));
            }
        }
    }

    #[test]
    fn shared_point_indices_match_coordinates(
        g in 1u64..=3,
        n in 1u64..=5,
        two_d in any::<bool>(),
    ) {
        let dims = if two_d { 2 } else { 1 };
        let spec = LadderSpec::uniform(
            dims,
            g * n * n,
            Rational::new(n as i64, n as i64 + 1),
            3,
            RefinementPath::ConstantCfl,
            TimeBase { dt: 1.0 / (n * n) as f64, t_end: 1.0 },
        );
        let ladder = build_ladder(&spec).unwrap();
        let map = SharedPointMap::build(&irreducible_unit(&ladder), None);
        prop_assert!(!map.is_empty());
        for p in map.all_shared() {
            for l in 0..ladder.levels() {
                let s = ladder.segments(l);
                let i = p.indices[l].expect("defined on every level");
                // Row-major, x fastest: recover the coordinate exactly.
                let (ix, iy) = (i as u64 % s[0], i as u64 / s[0]);
                prop_assert_eq!(p.coord[0], Rational::new(ix as i64, s[0] as i64));
                if dims == 2 {
                    prop_assert_eq!(p.coord[1], Rational::new(iy as i64, s[1] as i64));
                }
            }
        }
    }
}

#[test]
fn next_integer_ratio_minimizes_interior_points() {
    for s1 in 1u64..=8 {
        let per_shared = |s2: u64| {
            let unit = AxisUnit::from_segments(&[s1, s2]);
            (unit.s_per_level()[0] == s1).then(|| {
                let shared = unit.shared(&[0, 1]).len() as u64;
                Rational::new(unit.interior_points() as i64, shared as i64)
            })
        };
        let best = (s1 + 1..=4 * s1).filter_map(|s2| per_shared(s2).map(|v| (v, s2))).min();
        assert_eq!(best.map(|(_, s2)| s2), Some(s1 + 1), "s1 = {s1}");
    }
}

#[test]
fn fractional_ladder_rejects_non_integer_levels() {
    let spec = LadderSpec::uniform(
        1,
        4,
        Rational::new(2, 3),
        4,
        RefinementPath::ConstantCfl,
        TimeBase { dt: 0.25, t_end: 1.0 },
    );
    assert!(build_ladder(&spec).is_err());
}
