use std::f64::consts::PI;

use super::{within_cfl, 
    max_amplification, Neighbours, ProblemKind, Scheme, SchemeError, StabilityLimits, StepContext,
};

/// Heun's method in time, second-order upwind advection, fourth-order central diffusion.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rk2U2;

/// The semi-discrete operator `L(φ, t)` on a periodic grid.
enum Operator {
    Line {
        a: f64,
        nu: f64,
        nb: Neighbours,
        dx: f64,
        /// `cos 2πx_i`, `sin 2πx_i` for the manufactured forcing.
        forcing: Option<(Vec<f64>, Vec<f64>)>,
    },
    Plane {
        a: [f64; 2],
        nx: usize,
        bx: Neighbours,
        by: Neighbours,
        dx: [f64; 2],
    },
}

impl Operator {
    fn new(ctx: &StepContext<'_>) -> Self {
        let p = ctx.problem;
        match p.kind {
            ProblemKind::Advect1d | ProblemKind::Advdiff1d => {
                let n = ctx.segments[0] as usize;
                let forcing = (p.kind == ProblemKind::Advdiff1d && p.nu != 0.0).then(|| {
                    let x = |i: usize| 2.0 * PI * i as f64 / n as f64;
                    (
                        (0..n).map(|i| x(i).cos()).collect(),
                        (0..n).map(|i| x(i).sin()).collect(),
                    )
                });
                Operator::Line {
                    a: p.a,
                    nu: p.nu,
                    nb: Neighbours::new(n),
                    dx: ctx.spacing[0],
                    forcing,
                }
            }
            ProblemKind::Advect2d => {
                let nx = ctx.segments[0] as usize;
                Operator::Plane {
                    a: [p.a, p.a_y],
                    nx,
                    bx: Neighbours::new(nx),
                    by: Neighbours::new(ctx.segments[1] as usize),
                    dx: [ctx.spacing[0], ctx.spacing[1]],
                }
            }
        }
    }

    fn apply(&self, phi: &[f64], t: f64, out: &mut [f64]) {
        match self {
            Operator::Line {
                a,
                nu,
                nb,
                dx,
                forcing,
            } => {
                let adv = -a / (2.0 * dx);
                let dif = nu / (12.0 * dx * dx);
                let [m1, m2] = &nb.back;
                let [p1, p2] = &nb.ahead;
                if *nu == 0.0 {
                    for (i, o) in out.iter_mut().enumerate() {
                        *o = adv * (3.0 * phi[i] - 4.0 * phi[m1[i]] + phi[m2[i]]);
                    }
                } else {
                    for (i, o) in out.iter_mut().enumerate() {
                        let (f, fm1, fm2) = (phi[i], phi[m1[i]], phi[m2[i]]);
                        *o = adv * (3.0 * f - 4.0 * fm1 + fm2)
                            + dif * (-phi[p2[i]] + 16.0 * phi[p1[i]] - 30.0 * f + 16.0 * fm1 - fm2);
                    }
                }
                if let Some((cx, sx)) = forcing {
                    // 4π²ν cos(2π(x − a t)) expanded so only two products remain per point.
                    let amp = 4.0 * PI * PI * nu;
                    let (ct, st) = ((2.0 * PI * a * t).cos(), (2.0 * PI * a * t).sin());
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += amp * (cx[i] * ct + sx[i] * st);
                    }
                }
            }
            Operator::Plane { a, nx, bx, by, dx } => {
                let ax = -a[0] / (2.0 * dx[0]);
                let ay = -a[1] / (2.0 * dx[1]);
                let [xm1, xm2] = &bx.back;
                let [ym1, ym2] = &by.back;
                for (j, row) in out.chunks_exact_mut(*nx).enumerate() {
                    let base = j * nx;
                    let (r1, r2) = (ym1[j] * nx, ym2[j] * nx);
                    for (i, o) in row.iter_mut().enumerate() {
                        let f = phi[base + i];
                        *o = ax * (3.0 * f - 4.0 * phi[base + xm1[i]] + phi[base + xm2[i]])
                            + ay * (3.0 * f - 4.0 * phi[r1 + i] + phi[r2 + i]);
                    }
                }
            }
        }
    }
}

impl Scheme for Rk2U2 {
    fn name(&self) -> &'static str {
        "rk2u2"
    }

    fn supports(&self, _kind: ProblemKind) -> bool {
        true
    }

    fn default_cfl_max(&self) -> f64 {
        0.5
    }

    fn check_stability(
        &self,
        ctx: &StepContext<'_>,
        limits: &StabilityLimits,
    ) -> Result<(), SchemeError> {
        let max = limits.cfl_max.unwrap_or(self.default_cfl_max());
        for (d, c) in ctx.cfl().into_iter().enumerate() {
            if !within_cfl(c, max) {
                return Err(SchemeError::UnstableParameters(format!(
                    "RK2U2 needs 0 < c <= {max} in every dimension, got c = {c} along axis {d}"
                )));
            }
        }
        let g = max_amplification(ctx);
        if g > 1.0 + 1e-12 {
            return Err(SchemeError::UnstableParameters(format!(
                "RK2U2 amplification factor reaches {g:.6} (dt = {}, spacing = {:?}, nu = {})",
                ctx.dt, ctx.spacing, ctx.problem.nu
            )));
        }
        Ok(())
    }

    fn advance(&self, ctx: &StepContext<'_>, values: &mut Vec<f64>) {
        let op = Operator::new(ctx);
        let n = values.len();
        let dt = ctx.dt;
        let (mut k1, mut k2, mut hat) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for step in 0..ctx.steps {
            let t = step as f64 * dt;
            op.apply(values, t, &mut k1);
            for ((h, &v), &k) in hat.iter_mut().zip(values.iter()).zip(&k1) {
                *h = v + dt * k;
            }
            op.apply(&hat, t + dt, &mut k2);
            for ((v, &a), &b) in values.iter_mut().zip(&k1).zip(&k2) {
                *v += 0.5 * dt * (a + b);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{solve, InitialCondition, LevelGrid, ProblemSpec};

    fn l2(v: &[f64]) -> f64 {
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    }

    #[test]
    fn one_heun_step_by_hand() {
        let problem = ProblemSpec::advect1d(0.5, 0.01);
        let grid = LevelGrid::new(0, vec![8], 0.01);
        let f = solve(&Rk2U2, &problem, &grid, &Default::default()).unwrap();
        let dx = 1.0 / 8.0;
        let init: Vec<f64> = (0..8).map(|i| problem.initial_value(&[i as f64 * dx])).collect();
        let op = |p: &[f64]| -> Vec<f64> {
            (0..8)
                .map(|i| -0.5 * (3.0 * p[i] - 4.0 * p[(i + 7) % 8] + p[(i + 6) % 8]) / (2.0 * dx))
                .collect()
        };
        let k1 = op(&init);
        let hat: Vec<f64> = (0..8).map(|i| init[i] + 0.01 * k1[i]).collect();
        let k2 = op(&hat);
        for i in 0..8 {
            let want = init[i] + 0.005 * (k1[i] + k2[i]);
            assert!((f.values[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_data_stays_constant() {
        for problem in [
            ProblemSpec::advect1d(0.5, 1.0),
            ProblemSpec::advect2d(0.25, 0.25, 1.0),
        ] {
            let problem = problem.with_initial(InitialCondition::Constant(-3.5));
            let segs = vec![20; problem.dims()];
            let grid = LevelGrid::new(0, segs, 0.02);
            let f = solve(&Rk2U2, &problem, &grid, &Default::default()).unwrap();
            assert!(f.values.iter().all(|&v| v == -3.5));
        }
    }

    #[test]
    fn second_order_under_constant_cfl() {
        let problem = ProblemSpec::advect1d(0.5, 2.0);
        let errs: Vec<f64> = [100u64, 200, 400]
            .iter()
            .map(|&s| {
                let grid = LevelGrid::new(0, vec![s], 1.0 / s as f64);
                let f = solve(&Rk2U2, &problem, &grid, &Default::default()).unwrap();
                l2(&f.error_against_exact(&problem))
            })
            .collect();
        let slope = (errs[1] / errs[2]).log2();
        assert!((slope - 2.0).abs() < 0.05, "{errs:?} {slope}");
    }

    #[test]
    fn diffusion_with_forcing_converges() {
        let problem = ProblemSpec::advdiff1d(0.4, 0.01, 2.5);
        let errs: Vec<f64> = [(50u64, 0.005), (100, 0.00125), (200, 0.0003125)]
            .iter()
            .map(|&(s, dt)| {
                let grid = LevelGrid::new(0, vec![s], dt);
                let f = solve(&Rk2U2, &problem, &grid, &Default::default()).unwrap();
                l2(&f.error_against_exact(&problem))
            })
            .collect();
        let slope = (errs[1] / errs[2]).log2();
        assert!((slope - 2.0).abs() < 0.1, "{errs:?} {slope}");
    }

    #[test]
    fn cfl_gate() {
        let problem = ProblemSpec::advect1d(0.5, 2.0);
        let grid = LevelGrid::new(0, vec![100], 0.02); // c = 1
        assert!(matches!(
            solve(&Rk2U2, &problem, &grid, &Default::default()),
            Err(SchemeError::UnstableParameters(_))
        ));
        // Raising the CFL limit does not bypass the amplification check:
        // at θ = π the factor is 1 − 4c + 8c², which exceeds 1 for c > 1/2.
        let relaxed = StabilityLimits { cfl_max: Some(1.0) };
        let err = solve(&Rk2U2, &problem, &grid, &relaxed).unwrap_err();
        assert!(err.to_string().contains("amplification"), "{err}");
    }

    #[test]
    fn diffusion_number_gate() {
        let problem = ProblemSpec::advdiff1d(0.4, 0.5, 2.5);
        let grid = LevelGrid::new(0, vec![50], 0.005);
        let err = solve(&Rk2U2, &problem, &grid, &Default::default()).unwrap_err();
        assert!(err.to_string().contains("amplification"), "{err}");
    }
}
