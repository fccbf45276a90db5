//! Gauss–Legendre rules, composite panel grids and small extrapolation helpers.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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

    /// Cached 16-point rule used for field grids.
    pub fn g16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    /// Cached 8-point rule used for smooth cell integrals.
    pub fn g8() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(8))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(
        &self,
        a: f64,
        b: f64,
        mut f: F,
    ) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| f(mid + half * t) * *w)
            .sum::<Complex64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite Gauss–Legendre grid: ascending panel edges with a fixed rule on each panel.
///
/// `nodes()` lists all quadrature nodes in ascending order, `weights()` the matching weights.
#[derive(Debug, Clone)]
pub struct PanelGrid {
    edges: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    per_panel: usize,
}

impl PanelGrid {
    /// Builds panels over `[a, b]`, splitting at every breakpoint inside the interval and
    /// subdividing each piece so that no panel is wider than `max_width`.
    pub fn new(a: f64, b: f64, breakpoints: &[f64], max_width: f64, rule: &GaussLegendre) -> Self {
        assert!(b > a, "panel grid needs a nonempty interval");
        let mut cuts: Vec<f64> = vec![a];
        let mut inner: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&x| x > a && x < b)
            .collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
        cuts.extend(inner);
        cuts.push(b);

        let mut edges = vec![a];
        for pair in cuts.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let n = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            for j in 1..=n {
                edges.push(if j == n {
                    hi
                } else {
                    lo + (hi - lo) * j as f64 / n as f64
                });
            }
        }

        let mut nodes = Vec::with_capacity((edges.len() - 1) * rule.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in edges.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            let mid = 0.5 * (pair[0] + pair[1]);
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + half * t);
                weights.push(w * half);
            }
        }
        Self {
            edges,
            nodes,
            weights,
            per_panel: rule.len(),
        }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn per_panel(&self) -> usize {
        self.per_panel
    }

    pub fn panel_count(&self) -> usize {
        self.edges.len() - 1
    }

    /// Weighted sum of real samples taken at `nodes()`.
    pub fn sum(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn sum_complex(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.weights.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Evaluates at `x = 0` the polynomial through `(xs[i], ys[i])` (Neville's scheme).
pub fn neville_at_zero(xs: &[f64], ys: &[Complex64]) -> Complex64 {
    assert_eq!(xs.len(), ys.len());
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (p[i] * (-xj) - p[i + 1] * (-xi)) / (xi - xj);
        }
    }
    p[0]
}

/// Composite Simpson rule on uniformly spaced samples; falls back to the trapezoid on the
/// last interval when the number of intervals is odd.
pub fn simpson_uniform(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut acc = 0.0;
    let mut i = 0;
    while i < even {
        acc += values[i] + 4.0 * values[i + 1] + values[i + 2];
        i += 2;
    }
    acc *= step / 3.0;
    if even < intervals {
        // 3/8-free correction: cubic-accurate last interval using four points.
        if n >= 4 {
            let (a, b, c, d) = (values[n - 4], values[n - 3], values[n - 2], values[n - 1]);
            acc += step * (a - 5.0 * b + 19.0 * c + 9.0 * d) / 24.0;
        } else {
            acc += 0.5 * step * (values[n - 2] + values[n - 1]);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 8, 16, 33] {
            let rule = GaussLegendre::new(n);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14, "n={n} weights sum {wsum}");
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn panel_grid_respects_breakpoints() {
        let g = PanelGrid::new(-1.0, 2.0, &[0.0, 0.5, 7.0], 0.4, GaussLegendre::g8());
        for bp in [0.0, 0.5] {
            assert!(g.edges().contains(&bp));
        }
        assert!(g.edges().windows(2).all(|w| w[1] - w[0] <= 0.4 + 1e-12));
        let integral = g.sum(&g.nodes().iter().map(|x| x.exp()).collect::<Vec<_>>());
        assert!((integral - (2f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn neville_recovers_polynomial_intercept() {
        let xs = [0.1, 0.2, 0.4, 0.8];
        let ys: Vec<Complex64> = xs
            .iter()
            .map(|x| Complex64::new(3.0 - 2.0 * x + x * x * x, 1.0 + x))
            .collect();
        let v = neville_at_zero(&xs, &ys);
        assert!((v - Complex64::new(3.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn simpson_handles_odd_and_even_interval_counts() {
        for n in [5usize, 6, 101, 102] {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson_uniform(&v, h) - 0.25).abs() < 1e-13, "n={n}");
        }
    }
}
