use std::f64::consts::PI;

use super::{ProblemKind, StepContext};

/// Largest modulus of the Heun amplification factor over sampled Fourier modes,
/// for the upwind advection and fourth-order diffusion operators.
pub fn max_amplification(ctx: &StepContext<'_>) -> f64 {
    let samples = match ctx.problem.kind {
        ProblemKind::Advect2d => 96,
        _ => 1024,
    };
    let theta = |k: usize| 2.0 * PI * k as f64 / samples as f64;
    let symbol = |dim: usize, t: f64| -> (f64, f64) {
        let a = if dim == 0 { ctx.problem.a } else { ctx.problem.a_y };
        let dx = ctx.spacing[dim];
        // −a Dx with Dx = (3 − 4e^{−iθ} + e^{−2iθ}) / (2Δx)
        let re = -a * (3.0 - 4.0 * t.cos() + (2.0 * t).cos()) / (2.0 * dx);
        let im = -a * (4.0 * t.sin() - (2.0 * t).sin()) / (2.0 * dx);
        // ν Dxx with Dxx = (32cos θ − 2cos 2θ − 30) / (12Δx²)
        let diff = ctx.problem.nu * (32.0 * t.cos() - 2.0 * (2.0 * t).cos() - 30.0)
            / (12.0 * dx * dx);
        (re + diff, im)
    };
    let heun = |(re, im): (f64, f64)| {
        let (zr, zi) = (ctx.dt * re, ctx.dt * im);
        // 1 + z + z²/2
        let gr = 1.0 + zr + 0.5 * (zr * zr - zi * zi);
        let gi = zi + zr * zi;
        gr.hypot(gi)
    };
    let mut worst: f64 = 0.0;
    if ctx.spacing.len() == 1 {
        for k in 0..samples {
            worst = worst.max(heun(symbol(0, theta(k))));
        }
    } else {
        for kx in 0..samples {
            let sx = symbol(0, theta(kx));
            for ky in 0..samples {
                let sy = symbol(1, theta(ky));
                worst = worst.max(heun((sx.0 + sy.0, sx.1 + sy.1)));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::ProblemSpec;

    fn ctx<'a>(p: &'a ProblemSpec, segments: &'a [u64], dt: f64) -> StepContext<'a> {
        StepContext {
            problem: p,
            segments,
            spacing: segments.iter().map(|&s| 1.0 / s as f64).collect(),
            dt,
            steps: 1,
        }
    }

    #[test]
    fn stable_at_the_study_settings() {
        let p = ProblemSpec::advect1d(0.5, 2.0);
        assert!(max_amplification(&ctx(&p, &[100], 0.01)) <= 1.0 + 1e-12);
        let p = ProblemSpec::advdiff1d(0.4, 0.01, 2.5);
        assert!(max_amplification(&ctx(&p, &[50], 0.005)) <= 1.0 + 1e-12);
        assert!(max_amplification(&ctx(&p, &[50], 0.01)) > 1.0);
        let p = ProblemSpec::advect2d(0.25, 0.25, 2.0);
        assert!(max_amplification(&ctx(&p, &[32, 32], 1.0 / 32.0)) <= 1.0 + 1e-12);
    }

    #[test]
    fn large_steps_amplify() {
        let p = ProblemSpec::advect1d(0.5, 2.0);
        assert!(max_amplification(&ctx(&p, &[100], 0.012)) > 1.0);
        let p = ProblemSpec::advdiff1d(0.4, 1.0, 2.5);
        assert!(max_amplification(&ctx(&p, &[50], 0.01)) > 1.0);
    }
}
