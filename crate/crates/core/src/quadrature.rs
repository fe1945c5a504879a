//! Composite Gauss-Legendre quadrature with doubling refinement.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest number of panel doublings attempted before giving up.
pub const MAX_REFINEMENTS: usize = 8;

/// Controls how overlap and Fisher integrals are discretized.
///
/// Lengths are measured in units of the PSF characteristic length σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Half-width of the integration window beyond each source, in σ.
    pub truncation_radius: f64,
    /// Panels per σ of domain length.
    pub panel_count: usize,
    pub nodes_per_panel: usize,
    pub abs_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            truncation_radius: 12.0,
            panel_count: 1,
            nodes_per_panel: 32,
            abs_tolerance: 1e-12,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_radius >= 8.0) {
            return Err(Error::InvalidInput(format!(
                "truncation_radius must be >= 8, got {}",
                self.truncation_radius
            )));
        }
        if self.panel_count == 0 || self.nodes_per_panel == 0 {
            return Err(Error::InvalidInput(
                "panel_count and nodes_per_panel must be positive".into(),
            ));
        }
        if !(self.abs_tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "abs_tolerance must be positive, got {}",
                self.abs_tolerance
            )));
        }
        Ok(())
    }
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of P_n, found by Newton iteration from the Tricomi estimate.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of a composite rule over one interval.
#[derive(Debug, Clone)]
pub struct QuadratureGrid<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureGrid<T> {
    /// Builds the composite rule on `[a, b]`.
    ///
    /// The interval is cut into uniform panels (`spec.panel_count` per `unit`, times
    /// `2^level`), and additionally at every breakpoint strictly inside `(a, b)`.
    pub fn composite(
        rule: &GaussLegendre,
        a: T,
        b: T,
        unit: T,
        breakpoints: &[T],
        spec: &QuadratureSpec,
        level: usize,
    ) -> Self {
        let len = b - a;
        let per_unit = (spec.panel_count << level) as f64;
        let panels = ((len / unit).as_f64() * per_unit).ceil().max(1.0) as usize;
        let width = len / T::from_usize_lossy(panels);

        let mut edges: Vec<T> = (0..=panels)
            .map(|i| a + width * T::from_usize_lossy(i))
            .collect();
        edges[panels] = b;
        let eps = len * T::lit(1e-13);
        edges.extend(
            breakpoints
                .iter()
                .copied()
                .filter(|&x| x > a + eps && x < b - eps),
        );
        edges.sort_by(|x, y| x.partial_cmp(y).expect("finite edges"));
        edges.dedup_by(|x, y| (*x - *y).abs() <= eps);

        let per_panel = rule.nodes.len();
        let mut nodes = Vec::with_capacity((edges.len() - 1) * per_panel);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let half = T::lit(0.5);
        for pair in edges.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let mid = (lo + hi) * half;
            let rad = (hi - lo) * half;
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + rad * T::lit(x));
                weights.push(rad * T::lit(w));
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<const N: usize>(&self, f: impl Fn(T) -> [T; N]) -> [T; N] {
        let mut acc = [T::zero(); N];
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            for k in 0..N {
                acc[k] += w * v[k];
            }
        }
        acc
    }
}

/// Integrates a vector-valued function over `[a, b]`, doubling the panel count until two
/// successive estimates agree to `spec.abs_tolerance` in every component.
pub fn integrate<T: Real, const N: usize>(
    f: impl Fn(T) -> [T; N],
    a: T,
    b: T,
    unit: T,
    breakpoints: &[T],
    spec: &QuadratureSpec,
) -> Result<[T; N]> {
    refine(spec, |level, rule| {
        QuadratureGrid::composite(rule, a, b, unit, breakpoints, spec, level).integrate(&f)
    })
}

/// Runs `estimate(level)` at increasing refinement levels until successive values agree.
pub(crate) fn refine<T: Real, const N: usize>(
    spec: &QuadratureSpec,
    mut estimate: impl FnMut(usize, &GaussLegendre) -> [T; N],
) -> Result<[T; N]> {
    spec.validate()?;
    let rule = GaussLegendre::new(spec.nodes_per_panel);
    let tol = T::lit(spec.abs_tolerance);
    let mut prev = estimate(0, &rule);
    let mut change = T::zero();
    for level in 1..=MAX_REFINEMENTS {
        let next = estimate(level, &rule);
        change = prev
            .iter()
            .zip(&next)
            .map(|(p, n)| (*p - *n).abs())
            .fold(T::zero(), |m, d| if d > m { d } else { m });
        if change <= tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Convergence {
        refinements: MAX_REFINEMENTS,
        change: change.as_f64(),
        tolerance: spec.abs_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_degree_2n_minus_1() {
        let rule = GaussLegendre::new(32);
        let s: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(62))
            .sum();
        assert!((s - 2.0 / 63.0).abs() < 1e-14);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_rule_has_center_node() {
        let rule = GaussLegendre::new(5);
        assert_eq!(rule.nodes[2], 0.0);
        let s: f64 = rule
            .weights
            .iter()
            .zip(&rule.nodes)
            .map(|(w, x)| w * x.powi(8))
            .sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn composite_integrates_gaussian() {
        let spec = QuadratureSpec::default();
        let [v] = integrate(|x: f64| [(-x * x).exp()], -12.0, 12.0, 1.0, &[], &spec).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn breakpoints_split_panels() {
        let rule = GaussLegendre::new(4);
        let spec = QuadratureSpec::default();
        let g = QuadratureGrid::composite(&rule, 0.0, 2.0, 1.0, &[0.5, 3.0, 1.0], &spec, 0);
        // edges 0, 0.5, 1, 2 -> three panels
        assert_eq!(g.len(), 12);
        // |x - 0.5| is piecewise linear with a kink on an edge, so the rule is exact
        let s: f64 = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(x, w): (&f64, &f64)| w * (x - 0.5).abs())
            .sum();
        assert!((s - (0.125 + 1.125)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = QuadratureSpec {
            truncation_radius: 4.0,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
        let spec = QuadratureSpec {
            abs_tolerance: 0.0,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let spec = QuadratureSpec {
            nodes_per_panel: 1,
            abs_tolerance: 1e-30,
            ..Default::default()
        };
        let r = integrate(
            |x: f64| [(50.0 * x).sin().abs()],
            0.0,
            10.0,
            1.0,
            &[],
            &spec,
        );
        assert!(matches!(r, Err(Error::Convergence { .. })));
    }
}
