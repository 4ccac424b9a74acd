//! Gauss-Legendre rules and composite rules graded toward endpoint
//! singularities.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of the `m`-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(m: usize) -> Self {
        assert!(m > 0);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let half = m.div_ceil(2);
        for i in 0..half {
            // Tricomi initial guess, then Newton on P_m.
            let theta = PI * (i as f64 + 0.75) / (m as f64 + 0.5);
            let mut x = theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[m - 1 - i] = x;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared cached rule with `m` points.
    pub fn get(m: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&m) {
            return rule.clone();
        }
        let rule = Arc::new(Self::compute(m));
        cache.lock().unwrap().insert(m, rule.clone());
        rule
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let m = m as f64;
    let d = m * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A flat list of quadrature nodes and weights on the real line.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn gauss(a: f64, b: f64, m: usize) -> Self {
        let mut r = Self::new();
        r.push_panel(a, b, m);
        r
    }

    /// Appends an `m`-point Gauss panel on [a, b].
    pub fn push_panel(&mut self, a: f64, b: f64, m: usize) {
        let gl = GaussLegendre::get(m);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            self.nodes.push(mid + half * x);
            self.weights.push(half * w);
        }
    }

    pub fn extend(&mut self, other: Rule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Panel breakpoints on [a, b] refined geometrically (ratio 1/2) toward `a`
/// until the innermost panel is narrower than `min_width`.
pub fn graded_breaks(a: f64, b: f64, min_width: f64) -> Vec<(f64, f64)> {
    let mut panels = Vec::new();
    let len = b - a;
    if len <= 0.0 {
        return panels;
    }
    let mut hi = b;
    let mut w = 0.5 * len;
    while w > min_width.max(len * 1e-300) {
        panels.push((a + w, hi));
        hi = a + w;
        w *= 0.5;
    }
    panels.push((a, hi));
    panels
}

/// Composite rule on [a, b] graded toward `a`. Panel `j` of width `w_j`
/// receives `base + ceil(density * w_j)` nodes.
pub fn graded_toward_start(a: f64, b: f64, min_width: f64, base: usize, density: f64) -> Rule {
    let mut rule = Rule::new();
    for (lo, hi) in graded_breaks(a, b, min_width) {
        let m = base + (density * (hi - lo)).ceil() as usize;
        rule.push_panel(lo, hi, m);
    }
    rule
}

/// Composite rule on [a, b] graded toward `b`.
pub fn graded_toward_end(a: f64, b: f64, min_width: f64, base: usize, density: f64) -> Rule {
    let r = graded_toward_start(0.0, b - a, min_width, base, density);
    Rule {
        nodes: r.nodes.iter().map(|t| b - t).collect(),
        weights: r.weights,
    }
}

/// Composite rule on [a, b] graded toward both endpoints.
pub fn graded_both(a: f64, b: f64, min_width: f64, base: usize, density: f64) -> Rule {
    let mid = 0.5 * (a + b);
    let mut r = graded_toward_start(a, mid, min_width, base, density);
    r.extend(graded_toward_end(mid, b, min_width, base, density));
    r
}

/// Composite rule on [a, b] graded toward an interior point `c`.
pub fn graded_around(a: f64, b: f64, c: f64, min_width: f64, base: usize, density: f64) -> Rule {
    let mut r = Rule::new();
    if c > a {
        r.extend(graded_toward_end(a, c, min_width, base, density));
    }
    if c < b {
        r.extend(graded_toward_start(c, b, min_width, base, density));
    }
    r
}

/// Uniform composite rule with `panels` panels of `m` points each.
pub fn uniform(a: f64, b: f64, panels: usize, m: usize) -> Rule {
    let mut r = Rule::new();
    let h = (b - a) / panels as f64;
    for k in 0..panels {
        r.push_panel(a + k as f64 * h, a + (k + 1) as f64 * h, m);
    }
    r
}

/// Tensor rule on the unit disk: Gauss-Legendre in the radius (with the
/// polar Jacobian folded into the weights) times the trapezoid rule in angle.
#[derive(Debug, Clone)]
pub struct DiskRule {
    pub points: Vec<num_complex::Complex64>,
    pub weights: Vec<f64>,
}

impl DiskRule {
    pub fn new(radial: usize, angular: usize) -> Self {
        let gl = Rule::gauss(0.0, 1.0, radial);
        let mut points = Vec::with_capacity(radial * angular);
        let mut weights = Vec::with_capacity(radial * angular);
        let dt = 2.0 * PI / angular as f64;
        for (r, w) in gl.iter() {
            for k in 0..angular {
                let t = (k as f64 + 0.5) * dt;
                points.push(num_complex::Complex64::from_polar(r, t));
                weights.push(w * r * dt);
            }
        }
        Self { points, weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for m in [1, 2, 5, 16, 33, 200] {
            let r = Rule::gauss(0.0, 1.0, m);
            let deg = 2 * m - 1;
            let v = r.integrate(|x| x.powi(deg as i32));
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "m={m} v={v}");
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn large_rule_is_accurate() {
        let r = Rule::gauss(-1.0, 1.0, 1500);
        let v = r.integrate(|x| (40.0 * x).cos());
        assert!((v - 2.0 * 40f64.sin() / 40.0).abs() < 1e-13);
    }

    #[test]
    fn grading_handles_endpoint_singularities() {
        let r = graded_toward_start(0.0, 1.0, 1e-15, 12, 0.0);
        let v = r.integrate(|x| x.ln());
        assert!((v + 1.0).abs() < 1e-13, "{v}");
        let v = r.integrate(|x| x.powf(-0.5));
        assert!((v - 2.0).abs() < 1e-7, "{v}");
        let r = graded_around(0.0, 1.0, 0.3, 1e-12, 12, 0.0);
        let v = r.integrate(|x| (x - 0.3f64).abs().ln());
        let exact = 0.3 * 0.3f64.ln() - 0.3 + 0.7 * 0.7f64.ln() - 0.7;
        assert!((v - exact).abs() < 1e-12, "{v} {exact}");
    }

    #[test]
    fn disk_rule_area_and_moments() {
        let d = DiskRule::new(20, 40);
        let area: f64 = d.weights.iter().sum();
        assert!((area - PI).abs() < 1e-13);
        let m2: f64 = d.points.iter().zip(&d.weights).map(|(p, w)| w * p.norm_sqr()).sum();
        assert!((m2 - PI / 2.0).abs() < 1e-13);
    }
}
