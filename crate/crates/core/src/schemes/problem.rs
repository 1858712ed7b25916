use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SchemeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// `φ_t + a φ_x = 0` on the periodic unit interval.
    Advect1d,
    /// `φ_t + a φ_x = ν φ_xx + S(x, t)` with a manufactured source.
    Advdiff1d,
    /// `φ_t + a_x φ_x + a_y φ_y = 0` on the periodic unit square.
    Advect2d,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [
        ProblemKind::Advect1d,
        ProblemKind::Advdiff1d,
        ProblemKind::Advect2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Advect1d => "advect1d",
            ProblemKind::Advdiff1d => "advdiff1d",
            ProblemKind::Advect2d => "advect2d",
        }
    }

    pub fn dims(self) -> usize {
        match self {
            ProblemKind::Advect2d => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SchemeError::InvalidProblem(format!("unknown problem kind {s:?}")))
    }
}

/// Initial data. Only the manufactured profile has a known exact solution;
/// the constant variant exists so tests can probe the steppers in isolation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum InitialCondition {
    #[default]
    Manufactured,
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Advection speed along x.
    pub a: f64,
    /// Advection speed along y (2D only).
    pub a_y: f64,
    /// Diffusivity (advection-diffusion only).
    pub nu: f64,
    pub t_end: f64,
    #[serde(default)]
    pub initial: InitialCondition,
}

impl ProblemSpec {
    pub fn advect1d(a: f64, t_end: f64) -> Self {
        ProblemSpec {
            kind: ProblemKind::Advect1d,
            a,
            a_y: 0.0,
            nu: 0.0,
            t_end,
            initial: InitialCondition::Manufactured,
        }
    }

    pub fn advdiff1d(a: f64, nu: f64, t_end: f64) -> Self {
        ProblemSpec {
            kind: ProblemKind::Advdiff1d,
            nu,
            ..ProblemSpec::advect1d(a, t_end)
        }
    }

    pub fn advect2d(a_x: f64, a_y: f64, t_end: f64) -> Self {
        ProblemSpec {
            kind: ProblemKind::Advect2d,
            a_y,
            ..ProblemSpec::advect1d(a_x, t_end)
        }
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    pub fn dims(&self) -> usize {
        self.kind.dims()
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        let bad = |msg: String| Err(SchemeError::InvalidProblem(msg));
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("advection speed a = {} must be positive", self.a));
        }
        if self.kind == ProblemKind::Advect2d && !(self.a_y > 0.0 && self.a_y.is_finite()) {
            return bad(format!("advection speed a_y = {} must be positive", self.a_y));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad(format!("diffusivity nu = {} must be non-negative", self.nu));
        }
        if self.kind != ProblemKind::Advdiff1d && self.nu != 0.0 {
            return bad(format!("{} has no diffusion term; nu must be 0", self.kind));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("end time t_end = {} must be positive", self.t_end));
        }
        Ok(())
    }

    pub fn initial_value(&self, coords: &[f64]) -> f64 {
        match self.initial {
            InitialCondition::Constant(c) => c,
            InitialCondition::Manufactured => exact_solution(self, coords, 0.0),
        }
    }

    /// Whether [`exact_solution`] describes the evolution of this problem.
    pub fn has_exact_solution(&self) -> bool {
        self.initial == InitialCondition::Manufactured
    }
}

/// Manufactured solution `2 + cos(2π(x − a t))`, or `2 + cos(2π(x + y − (a_x + a_y) t))` in 2D.
pub fn exact_solution(problem: &ProblemSpec, coords: &[f64], t: f64) -> f64 {
    let phase = match problem.kind {
        ProblemKind::Advect1d | ProblemKind::Advdiff1d => coords[0] - problem.a * t,
        ProblemKind::Advect2d => coords[0] + coords[1] - (problem.a + problem.a_y) * t,
    };
    2.0 + (2.0 * PI * phase).cos()
}

/// Forcing that makes [`exact_solution`] exact for the advection-diffusion problem:
/// `S = 4π²ν cos(2π(x − a t))`. Zero for the pure advection problems.
pub fn source_term(problem: &ProblemSpec, x: f64, t: f64) -> f64 {
    match problem.kind {
        ProblemKind::Advdiff1d => {
            4.0 * PI * PI * problem.nu * (2.0 * PI * (x - problem.a * t)).cos()
        }
        _ => 0.0,
    }
}
