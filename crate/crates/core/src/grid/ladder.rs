use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{GridError, Rational};

/// How the time step follows the spatial refinement, `r_t = r_x^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefinementPath {
    /// Only the time step is refined; the spatial grid is frozen.
    TimeOnly,
    /// `s = 1`: the CFL number is held constant.
    ConstantCfl,
    /// `s = 2`: the diffusion number is held constant.
    ConstantDiffusion,
}

impl RefinementPath {
    pub const ALL: [RefinementPath; 3] = [
        RefinementPath::TimeOnly,
        RefinementPath::ConstantCfl,
        RefinementPath::ConstantDiffusion,
    ];

    /// Exponent `s` applied to the refinement ratio to obtain the time ratio.
    pub fn time_exponent(self) -> u32 {
        match self {
            RefinementPath::TimeOnly | RefinementPath::ConstantCfl => 1,
            RefinementPath::ConstantDiffusion => 2,
        }
    }

    pub fn refines_space(self) -> bool {
        !matches!(self, RefinementPath::TimeOnly)
    }

    pub fn name(self) -> &'static str {
        match self {
            RefinementPath::TimeOnly => "time-only",
            RefinementPath::ConstantCfl => "constant-cfl",
            RefinementPath::ConstantDiffusion => "constant-diffusion",
        }
    }
}

impl fmt::Display for RefinementPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RefinementPath {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RefinementPath::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| GridError::UnknownPath(s.to_string()))
    }
}

/// Coarsest time step and final time of a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBase {
    pub dt: f64,
    pub t_end: f64,
}

/// Inputs to [`build_ladder`].
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSpec {
    /// Segment count of the coarsest grid, one entry per refined space dimension.
    pub base_segments: Vec<u64>,
    /// Refinement ratio per space dimension; all entries must agree.
    pub ratios: Vec<Rational>,
    pub levels: usize,
    pub path: RefinementPath,
    pub time: TimeBase,
}

impl LadderSpec {
    /// Square ladder with the same base segment count and ratio in every dimension.
    pub fn uniform(
        dims: usize,
        base_segments: u64,
        ratio: Rational,
        levels: usize,
        path: RefinementPath,
        time: TimeBase,
    ) -> Self {
        LadderSpec {
            base_segments: vec![base_segments; dims],
            ratios: vec![ratio; dims],
            levels,
            path,
            time,
        }
    }
}

/// A validated sequence of systematically refined uniform Cartesian grids.
///
/// Level 0 is the coarsest. Segment and step counts are exact integers on
/// every level; spacings are derived from them on demand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridLadder {
    dims: usize,
    #[serde(serialize_with = "serialize_ratio")]
    ratio: Rational,
    path: RefinementPath,
    time: TimeBase,
    segments: Vec<Vec<u64>>,
    steps: Vec<u64>,
}

fn serialize_ratio<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

/// Tolerance used when deciding whether `t_end / dt` is an integer.
const STEP_COUNT_TOLERANCE: f64 = 1e-9;

pub fn build_ladder(spec: &LadderSpec) -> Result<GridLadder, GridError> {
    let dims = spec.base_segments.len();
    if !(1..=2).contains(&dims) {
        return Err(GridError::UnsupportedDims(dims));
    }
    if spec.ratios.len() != dims {
        return Err(GridError::RatioCount {
            dims,
            ratios: spec.ratios.len(),
        });
    }
    let ratio = spec.ratios[0];
    if spec.ratios.iter().any(|r| *r != ratio) {
        return Err(GridError::MixedRatios(
            spec.ratios.iter().map(|r| r.to_string()).collect(),
        ));
    }
    check_ratio(ratio)?;
    if spec.levels < 3 {
        return Err(GridError::TooFewLevels(spec.levels));
    }
    if let Some(d) = spec.base_segments.iter().position(|&s| s == 0) {
        return Err(GridError::ZeroSegments { dim: d });
    }
    let TimeBase { dt, t_end } = spec.time;
    if !(dt > 0.0 && dt.is_finite() && t_end > 0.0 && t_end.is_finite()) {
        return Err(GridError::InvalidTime { dt, t_end });
    }

    let mut segments = vec![spec.base_segments.clone()];
    for level in 1..spec.levels {
        let prev = &segments[level - 1];
        let next = if spec.path.refines_space() {
            prev.iter()
                .map(|&s| refine_count(s, ratio, 1))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|value| GridError::NonIntegerSegments {
                    level: level + 1,
                    value,
                })?
        } else {
            prev.clone()
        };
        segments.push(next);
    }

    let base_steps = (t_end / dt).round();
    if base_steps < 1.0 || ((base_steps * dt - t_end).abs() > STEP_COUNT_TOLERANCE * t_end) {
        return Err(GridError::NonIntegerSteps {
            level: 1,
            value: format!("{}", t_end / dt),
        });
    }
    let mut steps = vec![base_steps as u64];
    let s = spec.path.time_exponent();
    for level in 1..spec.levels {
        let n = refine_count(steps[level - 1], ratio, s).map_err(|value| {
            GridError::NonIntegerSteps {
                level: level + 1,
                value,
            }
        })?;
        steps.push(n);
    }

    Ok(GridLadder {
        dims,
        ratio,
        path: spec.path,
        time: spec.time,
        segments,
        steps,
    })
}

pub(crate) fn check_ratio(ratio: Rational) -> Result<(), GridError> {
    let half = Rational::new(1, 2);
    let one = Rational::from_integer(1);
    if ratio < half || ratio >= one {
        return Err(GridError::RatioOutOfRange(ratio.to_string()));
    }
    Ok(())
}

/// `count / ratio^power`, or the non-integral value rendered for diagnostics.
fn refine_count(count: u64, ratio: Rational, power: u32) -> Result<u64, String> {
    let num = (*ratio.numer() as i128).pow(power);
    let den = (*ratio.denom() as i128).pow(power);
    let scaled = (count as i128) * den;
    let (q, rem) = scaled.div_rem(&num);
    if rem != 0 {
        let exact = Rational::new(scaled as i64, num as i64);
        let approx = scaled as f64 / num as f64;
        return Err(format!("{exact} = {approx}"));
    }
    u64::try_from(q).map_err(|_| format!("{q} (overflow)"))
}

impl GridLadder {
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn levels(&self) -> usize {
        self.steps.len()
    }

    /// Refinement ratio of the path parameter `h` between adjacent levels.
    pub fn ratio(&self) -> Rational {
        self.ratio
    }

    pub fn path(&self) -> RefinementPath {
        self.path
    }

    pub fn time(&self) -> TimeBase {
        self.time
    }

    /// Ratio between time steps of adjacent levels.
    pub fn time_ratio(&self) -> Rational {
        self.ratio.pow(self.path.time_exponent() as i32)
    }

    pub fn segments(&self, level: usize) -> &[u64] {
        &self.segments[level]
    }

    pub fn all_segments(&self) -> &[Vec<u64>] {
        &self.segments
    }

    pub fn steps(&self, level: usize) -> u64 {
        self.steps[level]
    }

    pub fn dt(&self, level: usize) -> f64 {
        self.time.t_end / self.steps[level] as f64
    }

    pub fn spacing(&self, level: usize) -> Vec<f64> {
        self.segments[level].iter().map(|&s| 1.0 / s as f64).collect()
    }

    /// The refinement parameter `h` of a level: `dt` for time-only ladders,
    /// otherwise the spacing of the first space dimension.
    pub fn h(&self, level: usize) -> f64 {
        if self.path.refines_space() {
            1.0 / self.segments[level][0] as f64
        } else {
            self.dt(level)
        }
    }

    /// Grid points (periodic, so `S` per dimension) times time steps, per level.
    pub fn work_units(&self, level: usize) -> u128 {
        let points: u128 = self.segments[level].iter().map(|&s| s as u128).product();
        points * self.steps[level] as u128
    }

    /// A sub-ladder made of `count` consecutive levels starting at `first`.
    pub fn window(&self, first: usize, count: usize) -> Option<GridLadder> {
        if first + count > self.levels() || count == 0 {
            return None;
        }
        Some(GridLadder {
            dims: self.dims,
            ratio: self.ratio,
            path: self.path,
            time: TimeBase {
                dt: self.dt(first),
                t_end: self.time.t_end,
            },
            segments: self.segments[first..first + count].to_vec(),
            steps: self.steps[first..first + count].to_vec(),
        })
    }
}
