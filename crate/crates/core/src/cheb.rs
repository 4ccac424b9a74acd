//! Chebyshev collocation on [0, 1] for functions of definite parity in r.
//!
//! The grid is the positive half of a `2P`-point Chebyshev-Lobatto grid on
//! [-1, 1]; since the total count is even, no node falls on r = 0. Parity
//! folding turns the full differentiation matrices into `P x P` blocks.

use nalgebra::DMatrix;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug)]
pub struct ChebGrid {
    p: usize,
    full: Vec<f64>,
    d: DMatrix<f64>,
    d2: DMatrix<f64>,
}

/// Parity of a radial function under r -> -r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_mode(m: usize) -> Self {
        if m.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

impl ChebGrid {
    fn build(p: usize) -> Self {
        assert!(p >= 2, "need at least two radial nodes");
        let n = 2 * p - 1;
        let nf = n as f64;
        let full: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / nf).cos()).collect();
        let c = |i: usize| {
            let s = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
            if i == 0 || i == n {
                2.0 * s
            } else {
                s
            }
        };
        let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
        for i in 0..=n {
            let mut row = 0.0;
            for j in 0..=n {
                if i == j {
                    continue;
                }
                let dx = 2.0
                    * (PI * (i + j) as f64 / (2.0 * nf)).sin()
                    * (PI * (j as f64 - i as f64) / (2.0 * nf)).sin();
                let v = c(i) / c(j) / dx;
                d[(i, j)] = v;
                row += v;
            }
            d[(i, i)] = -row;
        }
        let d2 = &d * &d;
        Self { p, full, d, d2 }
    }

    /// Shared grid with `p` nodes in (0, 1].
    pub fn get(p: usize) -> Arc<ChebGrid> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ChebGrid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(g) = cache.lock().unwrap().get(&p) {
            return g.clone();
        }
        let g = Arc::new(Self::build(p));
        cache.lock().unwrap().insert(p, g.clone());
        g
    }

    pub fn len(&self) -> usize {
        self.p
    }

    pub fn is_empty(&self) -> bool {
        self.p == 0
    }

    /// Nodes in decreasing order; `nodes()[0] == 1`.
    pub fn nodes(&self) -> &[f64] {
        &self.full[..self.p]
    }

    fn fold(&self, m: &DMatrix<f64>, parity: Parity) -> DMatrix<f64> {
        let n = 2 * self.p - 1;
        let s = parity.sign();
        DMatrix::from_fn(self.p, self.p, |i, j| m[(i, j)] + s * m[(i, n - j)])
    }

    /// First-derivative matrix acting on samples of a function with the given parity.
    pub fn d1(&self, parity: Parity) -> DMatrix<f64> {
        self.fold(&self.d, parity)
    }

    /// Second-derivative matrix acting on samples of a function with the given parity.
    pub fn d2(&self, parity: Parity) -> DMatrix<f64> {
        self.fold(&self.d2, parity)
    }

    /// Derivative at r = 1 of the parity extension of `values`.
    pub fn deriv_at_one(&self, values: &[f64], parity: Parity) -> f64 {
        let n = 2 * self.p - 1;
        let s = parity.sign();
        (0..self.p)
            .map(|j| (self.d[(0, j)] + s * self.d[(0, n - j)]) * values[j])
            .sum()
    }

    /// Barycentric interpolation of the parity extension of `values` at `r`.
    pub fn interpolate(&self, values: &[f64], parity: Parity, r: f64) -> f64 {
        let n = 2 * self.p - 1;
        let s = parity.sign();
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..=n {
            let fj = if j < self.p { values[j] } else { s * values[n - j] };
            let dx = r - self.full[j];
            if dx == 0.0 {
                return fj;
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                w *= 0.5;
            }
            let t = w / dx;
            num += t * fj;
            den += t;
        }
        num / den
    }
}
