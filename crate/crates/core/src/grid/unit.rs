use std::collections::BTreeMap;

use num_integer::Integer;
use serde::Serialize;

use super::{GridLadder, Rational};

/// A coordinate inside an irreducible unit, one exact rational per axis in `[0, 1]`.
pub type UnitPoint = Vec<Rational>;

/// Level selection for shared-point queries. Level indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Levels {
    Pair(usize, usize),
    All,
}

/// Which locations MIDAS targets inside a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectivePolicy {
    /// Every location defined on at least two, but not all, levels.
    #[default]
    TwoLevel,
    /// Only locations shared by the two finest levels (minus the all-shared ones).
    FinestPair,
}

impl ObjectivePolicy {
    /// Two-level targets in 1D; the finest pair in 2D, as laid out for the
    /// tensor-product units.
    pub fn for_dims(dims: usize) -> Self {
        if dims >= 2 {
            ObjectivePolicy::FinestPair
        } else {
            ObjectivePolicy::TwoLevel
        }
    }
}

/// Where an objective location sits in its unit. Governs the interpolation stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    Line,
    Edge,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectivePoint {
    pub coord: UnitPoint,
    pub placement: Placement,
    /// Levels on which the field is defined at this location.
    pub levels: Vec<usize>,
}

/// One axis of an irreducible unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxisUnit {
    s_per_level: Vec<u64>,
    repeats: u64,
}

impl AxisUnit {
    /// Splits per-level segment counts `{S_l}` into `gcd({S_l})` identical units of
    /// `S_l / gcd` segments each.
    pub fn from_segments(segments: &[u64]) -> Self {
        assert!(!segments.is_empty(), "a unit needs at least one level");
        let repeats = segments.iter().fold(0u64, |g, &s| g.gcd(&s));
        assert!(repeats > 0, "segment counts must be positive");
        AxisUnit {
            s_per_level: segments.iter().map(|s| s / repeats).collect(),
            repeats,
        }
    }

    pub fn s_per_level(&self) -> &[u64] {
        &self.s_per_level
    }

    pub fn repeats(&self) -> u64 {
        self.repeats
    }

    pub fn levels(&self) -> usize {
        self.s_per_level.len()
    }

    pub fn defines(&self, level: usize, x: Rational) -> bool {
        (x * Rational::from_integer(self.s_per_level[level] as i64)).is_integer()
    }

    /// Spacing of the lattice on which every listed level is defined.
    pub fn shared_step(&self, levels: &[usize]) -> Rational {
        let g = levels
            .iter()
            .fold(0u64, |g, &l| g.gcd(&self.s_per_level[l]));
        Rational::new(1, g as i64)
    }

    /// Coordinates in `[0, 1]` where every listed level has a grid point.
    pub fn shared(&self, levels: &[usize]) -> Vec<Rational> {
        let step = self.shared_step(levels);
        let n = *step.denom();
        (0..=n).map(|k| step * Rational::from_integer(k)).collect()
    }

    /// Interior grid points of all levels inside one unit.
    pub fn interior_points(&self) -> u64 {
        self.s_per_level.iter().map(|s| s - 1).sum()
    }
}

/// The smallest repeating block of a set of systematically refined grids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitSignature {
    axes: Vec<AxisUnit>,
}

pub fn irreducible_unit(ladder: &GridLadder) -> UnitSignature {
    UnitSignature::from_segments(ladder.all_segments())
}

impl UnitSignature {
    /// `segments[level][dim]`.
    pub fn from_segments(segments: &[Vec<u64>]) -> Self {
        assert!(!segments.is_empty());
        let dims = segments[0].len();
        let axes = (0..dims)
            .map(|d| {
                let per_level: Vec<u64> = segments.iter().map(|s| s[d]).collect();
                AxisUnit::from_segments(&per_level)
            })
            .collect();
        UnitSignature { axes }
    }

    pub fn axes(&self) -> &[AxisUnit] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn levels(&self) -> usize {
        self.axes[0].levels()
    }

    /// `s_per_level()[level][dim]`.
    pub fn s_per_level(&self) -> Vec<Vec<u64>> {
        (0..self.levels())
            .map(|l| self.axes.iter().map(|a| a.s_per_level[l]).collect())
            .collect()
    }

    /// Number of units tiling the domain.
    pub fn repeats(&self) -> u64 {
        self.axes.iter().map(|a| a.repeats).product()
    }

    pub fn defines(&self, level: usize, point: &[Rational]) -> bool {
        self.axes
            .iter()
            .zip(point)
            .all(|(a, &x)| a.defines(level, x))
    }

    pub fn defining_levels(&self, point: &[Rational]) -> Vec<usize> {
        (0..self.levels())
            .filter(|&l| self.defines(l, point))
            .collect()
    }

    pub fn shared_points(&self, levels: Levels) -> Vec<UnitPoint> {
        let set: Vec<usize> = match levels {
            Levels::Pair(i, j) => vec![i, j],
            Levels::All => (0..self.levels()).collect(),
        };
        tensor(self.axes.iter().map(|a| a.shared(&set)).collect())
    }

    pub fn all_shared(&self) -> Vec<UnitPoint> {
        self.shared_points(Levels::All)
    }

    pub fn pair_shared(&self) -> BTreeMap<(usize, usize), Vec<UnitPoint>> {
        let n = self.levels();
        let mut map = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                map.insert((i, j), self.shared_points(Levels::Pair(i, j)));
            }
        }
        map
    }

    pub fn objective_locations(&self, policy: ObjectivePolicy) -> Vec<ObjectivePoint> {
        let n = self.levels();
        let mut candidates: Vec<UnitPoint> = match policy {
            ObjectivePolicy::TwoLevel => self.pair_shared().into_values().flatten().collect(),
            ObjectivePolicy::FinestPair if n >= 2 => {
                self.shared_points(Levels::Pair(n - 2, n - 1))
            }
            ObjectivePolicy::FinestPair => Vec::new(),
        };
        candidates.sort();
        candidates.dedup();
        candidates
            .into_iter()
            .filter_map(|coord| {
                let levels = self.defining_levels(&coord);
                if levels.len() < 2 || levels.len() == n {
                    return None;
                }
                let placement = self.placement(&coord);
                Some(ObjectivePoint {
                    coord,
                    placement,
                    levels,
                })
            })
            .collect()
    }

    fn placement(&self, coord: &[Rational]) -> Placement {
        if self.dims() == 1 {
            return Placement::Line;
        }
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        if coord.iter().any(|&x| x == zero || x == one) {
            Placement::Edge
        } else {
            Placement::Interior
        }
    }

    /// Fraction of the finest level's points at which coefficient terms become
    /// available. Each unit owns the half-open box `[0, 1)^d`, so the boundary
    /// shared with a neighbouring unit is counted once.
    pub fn shared_fraction(&self, include_midas: bool, policy: ObjectivePolicy) -> Rational {
        let owned = |p: &[Rational]| p.iter().all(|&x| x < Rational::from_integer(1));
        let mut usable = self.all_shared().iter().filter(|p| owned(p)).count();
        if include_midas {
            usable += self
                .objective_locations(policy)
                .iter()
                .filter(|o| owned(&o.coord))
                .count();
        }
        let finest: u64 = self
            .axes
            .iter()
            .map(|a| a.s_per_level[self.levels() - 1])
            .product();
        Rational::new(usable as i64, finest as i64)
    }
}

fn tensor(axes: Vec<Vec<Rational>>) -> Vec<UnitPoint> {
    axes.into_iter().fold(vec![Vec::new()], |acc, axis| {
        let mut out = Vec::with_capacity(acc.len() * axis.len());
        for prefix in &acc {
            for &x in &axis {
                let mut p = prefix.clone();
                p.push(x);
                out.push(p);
            }
        }
        out
    })
}

/// Origin of a retained location in a [`SharedPointMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Defined on every level; coefficient terms follow from direct differences.
    AllShared,
    /// Defined on at least two levels; some differences are interpolated.
    Objective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetainedPoint {
    /// Global coordinate in `[0, 1)^d`.
    pub coord: Vec<Rational>,
    /// Flattened sample index on each level (row-major, x fastest), when defined.
    pub indices: Vec<Option<usize>>,
    pub provenance: Provenance,
    pub placement: Placement,
}

impl RetainedPoint {
    pub fn coord_f64(&self) -> Vec<f64> {
        self.coord
            .iter()
            .map(|x| *x.numer() as f64 / *x.denom() as f64)
            .collect()
    }

    /// Finest level on which the field is defined here.
    pub fn finest_level(&self) -> usize {
        self.indices
            .iter()
            .rposition(Option::is_some)
            .expect("retained points are defined on at least one level")
    }
}

/// Every retained location of a refinement window over the whole periodic
/// domain, unit by unit.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedPointMap {
    segments: Vec<Vec<u64>>,
    points: Vec<RetainedPoint>,
}

impl SharedPointMap {
    /// All-shared points, plus the objective locations of `objectives` when given.
    pub fn build(unit: &UnitSignature, objectives: Option<ObjectivePolicy>) -> Self {
        let one = Rational::from_integer(1);
        let owned = |p: &[Rational]| p.iter().all(|&x| x < one);
        let mut local: Vec<(UnitPoint, Provenance, Placement)> = unit
            .all_shared()
            .into_iter()
            .filter(|p| owned(p))
            .map(|p| {
                let placement = unit.placement(&p);
                (p, Provenance::AllShared, placement)
            })
            .collect();
        if let Some(policy) = objectives {
            local.extend(
                unit.objective_locations(policy)
                    .into_iter()
                    .filter(|o| owned(&o.coord))
                    .map(|o| (o.coord, Provenance::Objective, o.placement)),
            );
        }
        local.sort_by(|a, b| a.0.iter().rev().cmp(b.0.iter().rev()));

        let dims = unit.dims();
        let segments: Vec<Vec<u64>> = (0..unit.levels())
            .map(|l| {
                unit.axes()
                    .iter()
                    .map(|a| a.s_per_level()[l] * a.repeats())
                    .collect()
            })
            .collect();
        let repeats: Vec<u64> = unit.axes().iter().map(AxisUnit::repeats).collect();
        let unit_count: u64 = repeats.iter().product();

        let mut points = Vec::with_capacity(unit_count as usize * local.len());
        for u in 0..unit_count {
            // x varies fastest
            let mut rem = u;
            let offsets: Vec<u64> = repeats
                .iter()
                .map(|&g| {
                    let o = rem % g;
                    rem /= g;
                    o
                })
                .collect();
            for (xi, provenance, placement) in &local {
                let coord: Vec<Rational> = (0..dims)
                    .map(|d| {
                        (Rational::from_integer(offsets[d] as i64) + xi[d])
                            / Rational::from_integer(repeats[d] as i64)
                    })
                    .collect();
                let indices = segments
                    .iter()
                    .map(|seg| flat_index(&coord, seg))
                    .collect();
                points.push(RetainedPoint {
                    coord,
                    indices,
                    provenance: *provenance,
                    placement: *placement,
                });
            }
        }
        // Row-major over the domain: y outer, x inner.
        points.sort_by(|a, b| a.coord.iter().rev().cmp(b.coord.iter().rev()));
        SharedPointMap { segments, points }
    }

    pub fn points(&self) -> &[RetainedPoint] {
        &self.points
    }

    /// `segments()[level][dim]` of the window the map was built for.
    pub fn segments(&self) -> &[Vec<u64>] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn all_shared(&self) -> impl Iterator<Item = &RetainedPoint> {
        self.points
            .iter()
            .filter(|p| p.provenance == Provenance::AllShared)
    }
}

/// Row-major index of a global coordinate on a periodic grid with `segments`
/// per dimension, if the coordinate is a grid point there.
pub fn flat_index(coord: &[Rational], segments: &[u64]) -> Option<usize> {
    let mut index = 0usize;
    let mut stride = 1usize;
    for (x, &s) in coord.iter().zip(segments) {
        let scaled = *x * Rational::from_integer(s as i64);
        if !scaled.is_integer() {
            return None;
        }
        let i = scaled.to_integer().rem_euclid(s as i64) as usize;
        index += i * stride;
        stride *= s as usize;
    }
    Some(index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn unit_1d(s: &[u64]) -> UnitSignature {
        UnitSignature::from_segments(&s.iter().map(|&x| vec![x]).collect::<Vec<_>>())
    }

    fn unit_2d(s: &[u64]) -> UnitSignature {
        UnitSignature::from_segments(&s.iter().map(|&x| vec![x, x]).collect::<Vec<_>>())
    }

    fn flat(points: Vec<UnitPoint>) -> Vec<Rational> {
        points.into_iter().map(|p| p[0]).collect()
    }

    /// Independent oracle: enumerate both lattices as fractions k/s and intersect.
    fn lattice_intersection(a: u64, b: u64) -> Vec<Rational> {
        let mut out: Vec<Rational> = (0..=a as i64)
            .map(|k| r(k, a as i64))
            .filter(|x| (0..=b as i64).any(|m| r(m, b as i64) == *x))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn gcd_decomposition() {
        let u = unit_1d(&[8, 12, 18]);
        assert_eq!(u.repeats(), 2);
        assert_eq!(u.axes()[0].s_per_level(), &[4, 6, 9]);
        let u = unit_1d(&[4, 6, 9]);
        assert_eq!(u.repeats(), 1);
        let u = unit_1d(&[3, 6, 12]);
        assert_eq!(u.repeats(), 3);
        assert_eq!(u.axes()[0].s_per_level(), &[1, 2, 4]);
    }

    #[test]
    fn pair_and_all_shared_in_four_six_nine() {
        let u = unit_1d(&[4, 6, 9]);
        assert_eq!(
            flat(u.shared_points(Levels::Pair(1, 2))),
            vec![r(0, 1), r(1, 3), r(2, 3), r(1, 1)]
        );
        assert_eq!(flat(u.shared_points(Levels::Pair(1, 2))), lattice_intersection(6, 9));
        assert_eq!(
            flat(u.shared_points(Levels::Pair(0, 1))),
            vec![r(0, 1), r(1, 2), r(1, 1)]
        );
        assert_eq!(flat(u.shared_points(Levels::Pair(0, 1))), lattice_intersection(4, 6));
        assert_eq!(flat(u.all_shared()), vec![r(0, 1), r(1, 1)]);
    }

    #[test]
    fn objective_locations_1d() {
        let u = unit_1d(&[4, 6, 9]);
        let obj: Vec<Rational> = u
            .objective_locations(ObjectivePolicy::TwoLevel)
            .into_iter()
            .map(|o| o.coord[0])
            .collect();
        assert_eq!(obj, vec![r(1, 3), r(1, 2), r(2, 3)]);

        // Doubling: 1/2 lives on levels 2 and 3; 1/4 and 3/4 on level 3 alone.
        let u = unit_1d(&[1, 2, 4]);
        let obj = u.objective_locations(ObjectivePolicy::TwoLevel);
        assert_eq!(obj.len(), 1);
        assert_eq!(obj[0].coord, vec![r(1, 2)]);
        assert_eq!(obj[0].levels, vec![1, 2]);
    }

    #[test]
    fn objective_locations_by_enumeration() {
        // Oracle: scan every finest-level-or-coarser lattice point directly.
        for s in [[4u64, 6, 9], [9, 12, 16], [16, 20, 25], [1, 2, 4], [2, 3, 6]] {
            let u = unit_1d(&s);
            let mut all: Vec<Rational> = s
                .iter()
                .flat_map(|&n| (0..=n as i64).map(move |k| r(k, n as i64)))
                .collect();
            all.sort();
            all.dedup();
            let expected: Vec<Rational> = all
                .into_iter()
                .filter(|x| {
                    let c = s.iter().filter(|&&n| (*x * r(n as i64, 1)).is_integer()).count();
                    c >= 2 && c < s.len()
                })
                .collect();
            let got: Vec<Rational> = u
                .objective_locations(ObjectivePolicy::TwoLevel)
                .into_iter()
                .map(|o| o.coord[0])
                .collect();
            assert_eq!(got, expected, "unit {s:?}");
        }
    }

    #[test]
    fn objective_locations_2d_follow_finest_pair() {
        let u = unit_2d(&[4, 6, 9]);
        let obj = u.objective_locations(ObjectivePolicy::FinestPair);
        // {0, 1/3, 2/3, 1}^2 minus the four corners
        assert_eq!(obj.len(), 12);
        let thirds = [r(0, 1), r(1, 3), r(2, 3), r(1, 1)];
        for o in &obj {
            assert!(thirds.contains(&o.coord[0]) && thirds.contains(&o.coord[1]));
            let corner = o.coord.iter().all(|x| *x == r(0, 1) || *x == r(1, 1));
            assert!(!corner);
            assert_eq!(o.levels, vec![1, 2]);
        }
        let interior = obj.iter().filter(|o| o.placement == Placement::Interior).count();
        assert_eq!(interior, 4);
        assert_eq!(obj.len() - interior, 8);
    }

    #[test]
    fn shared_fractions() {
        let u = unit_1d(&[4, 6, 9]);
        assert_eq!(u.shared_fraction(false, ObjectivePolicy::TwoLevel), r(1, 9));
        assert_eq!(u.shared_fraction(true, ObjectivePolicy::TwoLevel), r(4, 9));
        let u = unit_1d(&[1, 2, 4]);
        assert_eq!(u.shared_fraction(false, ObjectivePolicy::TwoLevel), r(1, 4));
        let u = unit_2d(&[4, 6, 9]);
        assert_eq!(u.shared_fraction(false, ObjectivePolicy::FinestPair), r(1, 81));
        assert_eq!(u.shared_fraction(true, ObjectivePolicy::FinestPair), r(9, 81));
    }

    #[test]
    fn shared_point_map_indices() {
        let unit = unit_1d(&[8, 12, 18]);
        let map = SharedPointMap::build(&unit, Some(ObjectivePolicy::TwoLevel));
        // two units, each owning x=0 plus three objective locations
        assert_eq!(map.len(), 8);
        let coords: Vec<Rational> = map.points().iter().map(|p| p.coord[0]).collect();
        assert_eq!(
            coords,
            vec![r(0, 1), r(1, 6), r(1, 4), r(1, 3), r(1, 2), r(2, 3), r(3, 4), r(5, 6)]
        );
        let half = &map.points()[4];
        assert_eq!(half.provenance, Provenance::AllShared);
        assert_eq!(half.indices, vec![Some(4), Some(6), Some(9)]);
        let sixth = &map.points()[1];
        assert_eq!(sixth.provenance, Provenance::Objective);
        assert_eq!(sixth.indices, vec![None, Some(2), Some(3)]);
        assert_eq!(sixth.finest_level(), 2);
    }

    #[test]
    fn shared_point_map_2d_row_major() {
        let unit = unit_2d(&[2, 4, 8]);
        let map = SharedPointMap::build(&unit, None);
        assert_eq!(map.len(), 4);
        let p = &map.points()[1];
        assert_eq!(p.coord, vec![r(1, 2), r(0, 1)]);
        assert_eq!(p.indices, vec![Some(1), Some(2), Some(4)]);
        let p = &map.points()[2];
        assert_eq!(p.coord, vec![r(0, 1), r(1, 2)]);
        assert_eq!(p.indices, vec![Some(2), Some(8), Some(32)]);
    }
}
