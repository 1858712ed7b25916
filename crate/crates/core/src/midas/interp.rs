use std::collections::BTreeMap;
use std::fmt;

use super::MidasError;
use crate::grid::Rational;

/// Weights that carry values from lattice nodes to an objective location.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpStencil {
    pub objective: Vec<Rational>,
    pub neighbors: Vec<Vec<Rational>>,
    pub weights: Vec<Rational>,
}

impl InterpStencil {
    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| *w.numer() as f64 / *w.denom() as f64)
            .collect()
    }

    /// Applies the stencil to a function of the neighbour coordinates.
    pub fn apply(&self, f: impl Fn(&[Rational]) -> f64) -> f64 {
        self.neighbors
            .iter()
            .zip(self.weights_f64())
            .map(|(n, w)| w * f(n))
            .sum()
    }
}

/// Tensor-product linear weights from the box `[lower, upper]` to `objective`.
/// Axes where the objective coincides with a bound contribute one node.
pub fn interp_weights(
    objective: &[Rational],
    lower: &[Rational],
    upper: &[Rational],
) -> Result<InterpStencil, MidasError> {
    let non_bracketing = || MidasError::NonBracketing {
        objective: fmt_point(objective),
        lower: fmt_point(lower),
        upper: fmt_point(upper),
    };
    if objective.len() != lower.len() || objective.len() != upper.len() {
        return Err(non_bracketing());
    }
    let one = Rational::from_integer(1);
    let mut neighbors: Vec<Vec<Rational>> = vec![Vec::new()];
    let mut weights = vec![one];
    // Build axis by axis with x varying fastest in the final ordering.
    for d in 0..objective.len() {
        let (x, a, b) = (objective[d], lower[d], upper[d]);
        if !(a <= x && x <= b) {
            return Err(non_bracketing());
        }
        let axis: Vec<(Rational, Rational)> = if x == a {
            vec![(a, one)]
        } else if x == b {
            vec![(b, one)]
        } else {
            let t = (x - a) / (b - a);
            vec![(a, one - t), (b, t)]
        };
        let mut next_n = Vec::with_capacity(neighbors.len() * axis.len());
        let mut next_w = Vec::with_capacity(neighbors.len() * axis.len());
        for &(c, w) in &axis {
            for (n, &wn) in neighbors.iter().zip(&weights) {
                let mut p = n.clone();
                p.push(c);
                next_n.push(p);
                next_w.push(wn * w);
            }
        }
        neighbors = next_n;
        weights = next_w;
    }
    Ok(InterpStencil {
        objective: objective.to_vec(),
        neighbors,
        weights,
    })
}

fn fmt_point(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Strategy for building stencils on a lattice with `lattice[d]` nodes per unit
/// length along axis `d`.
pub trait Interpolator: Send + Sync {
    fn name(&self) -> &'static str;

    fn stencil(&self, objective: &[Rational], lattice: &[u64])
        -> Result<InterpStencil, MidasError>;
}

impl fmt::Debug for dyn Interpolator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Interpolator({})", self.name())
    }
}

/// Linear along lines and edges, bilinear in the interior, from the nearest
/// bracketing lattice nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct Linear;

impl Interpolator for Linear {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn stencil(
        &self,
        objective: &[Rational],
        lattice: &[u64],
    ) -> Result<InterpStencil, MidasError> {
        let (lower, upper): (Vec<Rational>, Vec<Rational>) = objective
            .iter()
            .zip(lattice)
            .map(|(&x, &n)| {
                let n = Rational::from_integer(n as i64);
                let q = x * n;
                (q.floor() / n, q.ceil() / n)
            })
            .unzip();
        interp_weights(objective, &lower, &upper)
    }
}

pub type InterpolatorFactory = fn() -> Box<dyn Interpolator>;

#[derive(Clone)]
pub struct InterpolatorRegistry {
    factories: BTreeMap<String, InterpolatorFactory>,
}

impl InterpolatorRegistry {
    pub fn empty() -> Self {
        InterpolatorRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, factory: InterpolatorFactory) -> Option<InterpolatorFactory> {
        self.factories.insert(name.to_ascii_lowercase(), factory)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn Interpolator>, MidasError> {
        self.factories
            .get(&name.to_ascii_lowercase())
            .map(|f| f())
            .ok_or_else(|| MidasError::UnknownInterpolator {
                name: name.to_string(),
                known: self.names().collect::<Vec<_>>().join(", "),
            })
    }
}

impl Default for InterpolatorRegistry {
    fn default() -> Self {
        let mut r = InterpolatorRegistry::empty();
        r.register("linear", || Box::new(Linear));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn one_third_between_zero_and_half() {
        let s = interp_weights(&[r(1, 3)], &[r(0, 1)], &[r(1, 2)]).unwrap();
        assert_eq!(s.neighbors, [vec![r(0, 1)], vec![r(1, 2)]]);
        assert_eq!(s.weights, [r(1, 3), r(2, 3)]);
    }

    #[test]
    fn midpoint() {
        let s = interp_weights(&[r(1, 2)], &[r(0, 1)], &[r(1, 1)]).unwrap();
        assert_eq!(s.weights, [r(1, 2), r(1, 2)]);
    }

    #[test]
    fn bilinear_tensor() {
        let s = interp_weights(&[r(1, 3), r(1, 2)], &[r(0, 1), r(0, 1)], &[r(1, 2), r(1, 1)])
            .unwrap();
        assert_eq!(s.weights, [r(1, 6), r(2, 6), r(1, 6), r(2, 6)]);
        assert_eq!(s.weights.iter().sum::<Rational>(), r(1, 1));
        // affine functions are reproduced exactly
        let f = |p: &[Rational]| r(3, 1) * p[0] - r(5, 7) * p[1] + r(1, 4);
        let interpolated: Rational = s.neighbors.iter().zip(&s.weights).map(|(n, w)| f(n) * w).sum();
        assert_eq!(interpolated, f(&s.objective));
    }

    #[test]
    fn edge_points_use_two_nodes() {
        let s = interp_weights(&[r(1, 3), r(0, 1)], &[r(0, 1), r(0, 1)], &[r(1, 2), r(0, 1)])
            .unwrap();
        assert_eq!(s.neighbors.len(), 2);
    }

    #[test]
    fn rejects_non_bracketing() {
        assert!(matches!(
            interp_weights(&[r(2, 3)], &[r(0, 1)], &[r(1, 2)]),
            Err(MidasError::NonBracketing { .. })
        ));
    }

    #[test]
    fn linear_picks_nearest_lattice_nodes() {
        let s = Linear.stencil(&[r(1, 3)], &[2]).unwrap();
        assert_eq!(s.neighbors, [vec![r(0, 1)], vec![r(1, 2)]]);
        let s = Linear.stencil(&[r(2, 3)], &[2]).unwrap();
        assert_eq!(s.neighbors, [vec![r(1, 2)], vec![r(1, 1)]]);
        assert_eq!(s.weights, [r(2, 3), r(1, 3)]);
        let s = Linear.stencil(&[r(1, 2)], &[2]).unwrap();
        assert_eq!(s.neighbors, [vec![r(1, 2)]]);
    }

    #[test]
    fn registry() {
        let reg = InterpolatorRegistry::default();
        assert_eq!(reg.create("linear").unwrap().name(), "linear");
        assert!(reg.create("cubic").is_err());
    }
}
