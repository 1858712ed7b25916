use super::{within_cfl, Neighbours, ProblemKind, Scheme, SchemeError, StabilityLimits, StepContext};

/// Second-order one-sided Lax–Wendroff-type scheme for `φ_t + a φ_x = 0`, `a > 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BeamWarming;

impl BeamWarming {
    /// One update from the values at `i`, `i − 1`, `i − 2`.
    #[inline]
    pub fn update(c: f64, phi: f64, phi_m1: f64, phi_m2: f64) -> f64 {
        phi - 0.5 * c * (3.0 * phi - 4.0 * phi_m1 + phi_m2)
            + 0.5 * c * c * (phi - 2.0 * phi_m1 + phi_m2)
    }
}

impl Scheme for BeamWarming {
    fn name(&self) -> &'static str {
        "bw"
    }

    fn supports(&self, kind: ProblemKind) -> bool {
        kind == ProblemKind::Advect1d
    }

    fn default_cfl_max(&self) -> f64 {
        2.0
    }

    fn check_stability(
        &self,
        ctx: &StepContext<'_>,
        limits: &StabilityLimits,
    ) -> Result<(), SchemeError> {
        let c = ctx.cfl()[0];
        let max = limits.cfl_max.unwrap_or(self.default_cfl_max());
        if within_cfl(c, max) {
            Ok(())
        } else {
            Err(SchemeError::UnstableParameters(format!(
                "Beam-Warming needs 0 < c <= {max}, got c = {c}"
            )))
        }
    }

    fn advance(&self, ctx: &StepContext<'_>, values: &mut Vec<f64>) {
        let c = ctx.cfl()[0];
        let nb = Neighbours::new(values.len());
        let mut next = vec![0.0; values.len()];
        for _ in 0..ctx.steps {
            for (i, out) in next.iter_mut().enumerate() {
                *out = Self::update(c, values[i], values[nb.back[0][i]], values[nb.back[1][i]]);
            }
            std::mem::swap(values, &mut next);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{solve, InitialCondition, LevelGrid, ProblemSpec};

    #[test]
    fn single_step_by_hand() {
        // c = 0.5: φ − 0.25(3φ − 4φ₋₁ + φ₋₂) + 0.125(φ − 2φ₋₁ + φ₋₂)
        let (p, m1, m2) = (1.0, 2.0, 4.0);
        let expected = 1.0 - 0.25 * (3.0 - 8.0 + 4.0) + 0.125 * (1.0 - 4.0 + 4.0);
        assert_eq!(BeamWarming::update(0.5, p, m1, m2), expected);
        assert_eq!(expected, 1.375);
    }

    #[test]
    fn one_step_on_a_field() {
        let problem = ProblemSpec::advect1d(0.5, 0.01);
        let grid = LevelGrid::new(0, vec![100], 0.01);
        let f = solve(&BeamWarming, &problem, &grid, &Default::default()).unwrap();
        assert_eq!(f.steps, 1);
        let init: Vec<f64> = (0..100).map(|i| problem.initial_value(&[i as f64 / 100.0])).collect();
        for i in 0..100 {
            let want = BeamWarming::update(0.5, init[i], init[(i + 99) % 100], init[(i + 98) % 100]);
            assert_eq!(f.values[i], want);
        }
    }

    #[test]
    fn c_equal_to_one_and_two_shift_exactly() {
        // The scheme is exact for c = 1 and c = 2: it copies φ from one or two cells back.
        for (c, shift) in [(1.0, 1), (2.0, 2)] {
            let init = [0.3, -1.0, 2.5, 7.0, 0.0];
            let got: Vec<f64> = (0..5)
                .map(|i| BeamWarming::update(c, init[i], init[(i + 4) % 5], init[(i + 3) % 5]))
                .collect();
            for i in 0..5 {
                assert!((got[i] - init[(i + 5 - shift) % 5]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_data_stays_constant() {
        let problem = ProblemSpec::advect1d(0.5, 2.0).with_initial(InitialCondition::Constant(1.75));
        let grid = LevelGrid::new(0, vec![40], 0.01);
        let f = solve(&BeamWarming, &problem, &grid, &Default::default()).unwrap();
        assert!(f.values.iter().all(|&v| v == 1.75));
    }

    #[test]
    fn stability_gate() {
        let problem = ProblemSpec::advect1d(0.5, 2.0);
        let grid = LevelGrid::new(0, vec![100], 0.05); // c = 2.5
        assert!(matches!(
            solve(&BeamWarming, &problem, &grid, &Default::default()),
            Err(SchemeError::UnstableParameters(_))
        ));
    }
}
