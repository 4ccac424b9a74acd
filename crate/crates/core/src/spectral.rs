//! Power-series shape representation and boundary Fourier analysis.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

/// Coefficients of `h(z) = ĝ₀ z + Σ_{n=1}^{N} ĝ_n z^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub struct ShapeCoeffs {
    pub g0: f64,
    /// `gn[k]` is `ĝ_{k+1}`.
    pub gn: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct ShapeRepr {
    n: usize,
    g0: f64,
    gn: Vec<[f64; 2]>,
}

impl TryFrom<ShapeRepr> for ShapeCoeffs {
    type Error = Error;
    fn try_from(r: ShapeRepr) -> Result<Self> {
        if r.gn.len() != r.n {
            return Err(Error::Parse(format!(
                "shape declares N = {} but lists {} coefficients",
                r.n,
                r.gn.len()
            )));
        }
        Ok(ShapeCoeffs {
            g0: r.g0,
            gn: r.gn.into_iter().map(|[a, b]| Complex64::new(a, b)).collect(),
        })
    }
}

impl From<ShapeCoeffs> for ShapeRepr {
    fn from(s: ShapeCoeffs) -> Self {
        ShapeRepr { n: s.gn.len(), g0: s.g0, gn: s.gn.iter().map(|c| [c.re, c.im]).collect() }
    }
}

impl ShapeCoeffs {
    pub fn zeros(n: usize) -> Self {
        Self { g0: 0.0, gn: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.gn.len()
    }

    /// `ĝ_n` for `n ≥ 1` (zero beyond the truncation).
    pub fn mode(&self, n: usize) -> Complex64 {
        if n == 0 {
            Complex64::new(self.g0, 0.0)
        } else {
            self.gn.get(n - 1).copied().unwrap_or_default()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.g0 == 0.0 && self.gn.iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { g0: self.g0 * s, gn: self.gn.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().max(other.order());
        Self {
            g0: self.g0 + other.g0,
            gn: (1..=n).map(|k| self.mode(k) + other.mode(k)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Max-modulus over all coefficients.
    pub fn norm_inf(&self) -> f64 {
        self.gn.iter().map(|c| c.norm()).fold(self.g0.abs(), f64::max)
    }

    /// `(h(z), h'(z))` by Horner's scheme.
    pub fn h_and_dh(&self, z: Complex64) -> (Complex64, Complex64) {
        // h = z P(z), P = ĝ₀ + Σ ĝ_n z^n; h' = P + z P'.
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.gn.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        dp = dp * z + p;
        p = p * z + self.g0;
        (z * p, p + z * dp)
    }

    /// `(f(z), f'(z))` with `f = z + h`.
    pub fn f_and_df(&self, z: Complex64) -> (Complex64, Complex64) {
        let (h, dh) = self.h_and_dh(z);
        (z + h, dh + 1.0)
    }

    /// Power-series coefficients `b_k` of `f`, `k = 0..=N+1`.
    pub fn f_coeffs(&self) -> Vec<Complex64> {
        let mut b = vec![Complex64::new(0.0, 0.0); self.order() + 2];
        b[1] = Complex64::new(1.0 + self.g0, 0.0);
        for (k, c) in self.gn.iter().enumerate() {
            b[k + 2] = *c;
        }
        b
    }

    /// Largest imaginary part among the coefficients; zero for shapes
    /// symmetric under reflection in the real axis.
    pub fn symmetry_defect(&self) -> f64 {
        self.gn.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }
}

/// `ξ̂₀ = 2ĝ₀`, `ξ̂_n = ĝ_n`: Fourier coefficients of `Re[e^{-iφ} g(e^{iφ})]`
/// up to a factor 1/2, for `n = 0..=N`.
pub fn xi_coeffs(h: &ShapeCoeffs) -> Vec<Complex64> {
    std::iter::once(Complex64::new(2.0 * h.g0, 0.0)).chain(h.gn.iter().copied()).collect()
}

/// Uniform angles `2πj/M`.
pub fn angles(m: usize) -> Vec<f64> {
    (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

/// `(f(e^{iφ_j}), f'(e^{iφ_j}))` on `M` uniform angles.
pub fn eval_boundary(h: &ShapeCoeffs, m: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = h.order();
    if m < 2 * n + 2 {
        return Err(Error::InvalidInput(format!(
            "boundary grid of {m} points is too coarse for N = {n} (need {})",
            2 * n + 2
        )));
    }
    let b = h.f_coeffs();
    let mut f = vec![Complex64::new(0.0, 0.0); m];
    let mut df = vec![Complex64::new(0.0, 0.0); m];
    for (k, c) in b.iter().enumerate() {
        f[k % m] += c;
        if k >= 1 {
            df[(k - 1) % m] += c * k as f64;
        }
    }
    let fft = FftPlanner::new().plan_fft_inverse(m);
    fft.process(&mut f);
    fft.process(&mut df);
    Ok((f, df))
}

/// `1/√2 - max_{|z|=1} (|h| + |h'|)` sampled on `8(N+1)` boundary points.
/// Positive values certify that `z + h` is injective on the closed disk.
pub fn injectivity_margin(h: &ShapeCoeffs) -> f64 {
    let m = (8 * (h.order() + 1)).max(64);
    let mut worst: f64 = 0.0;
    for phi in angles(m) {
        let (v, d) = h.h_and_dh(Complex64::from_polar(1.0, phi));
        worst = worst.max(v.norm() + d.norm());
    }
    FRAC_1_SQRT_2 - worst
}

/// Area of `f(D)`: `π(|1 + ĝ₀|² + Σ (n+1)|ĝ_n|²)`.
pub fn area(h: &ShapeCoeffs) -> f64 {
    let tail: f64 = h.gn.iter().enumerate().map(|(k, c)| (k + 2) as f64 * c.norm_sqr()).sum();
    PI * ((1.0 + h.g0).powi(2) + tail)
}

/// First moment `∫_D f |f'|² dy` of the image domain.
pub fn first_moment(h: &ShapeCoeffs) -> Complex64 {
    let b = h.f_coeffs();
    let top = b.len() - 1;
    let mut s = Complex64::new(0.0, 0.0);
    for k in 1..top {
        for j in 1..=top - k {
            s += b[k] * b[j] * (j as f64) * b[k + j].conj();
        }
    }
    s * PI
}

/// Fourier coefficients `Ŝ_n`, `n = 0..=N`, of a real function on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpectrum {
    pub coeffs: Vec<Complex64>,
}

impl BoundarySpectrum {
    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); n + 1] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Spectrum of real samples on `M` uniform angles, truncated at `N`.
pub fn analyze(samples: &[f64], n: usize) -> BoundarySpectrum {
    let m = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mut coeffs: Vec<Complex64> = (0..=n)
        .map(|k| if k <= m / 2 { buf[k] / m as f64 } else { Complex64::new(0.0, 0.0) })
        .collect();
    coeffs[0].im = 0.0;
    BoundarySpectrum { coeffs }
}

/// Real samples `Ŝ₀ + 2 Re Σ_{n≥1} Ŝ_n e^{inφ_j}` on `M` uniform angles.
pub fn synthesize(s: &BoundarySpectrum, m: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[0] = Complex64::new(s.coeffs[0].re, 0.0);
    for (k, c) in s.coeffs.iter().enumerate().skip(1) {
        buf[k % m] += c;
        buf[(m - k % m) % m] += c.conj();
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Writes the boundary curve `f(e^{iφ})` as `phi,x1,x2` rows.
pub fn write_boundary_csv<W: Write>(h: &ShapeCoeffs, m: usize, mut w: W) -> std::io::Result<()> {
    writeln!(w, "phi,x1,x2")?;
    for phi in angles(m) {
        let (f, _) = h.f_and_df(Complex64::from_polar(1.0, phi));
        writeln!(w, "{phi:.17e},{:.17e},{:.17e}", f.re, f.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_shape(rng: &mut ChaCha8Rng, n: usize, size: f64) -> ShapeCoeffs {
        ShapeCoeffs {
            g0: size * rng.gen_range(-1.0..1.0),
            gn: (1..=n)
                .map(|k| {
                    let d = size / (k * k) as f64;
                    c(d * rng.gen_range(-1.0..1.0), d * rng.gen_range(-1.0..1.0))
                })
                .collect(),
        }
    }

    #[test]
    fn xi_examples() {
        let mut h = ShapeCoeffs::zeros(3);
        h.g0 = 1.0;
        h.gn[1] = c(3.0, 4.0);
        let xi = xi_coeffs(&h);
        assert_eq!(xi[0], c(2.0, 0.0));
        assert_eq!(xi[2], c(3.0, 4.0));
        assert_eq!(xi[2].conj(), c(3.0, -4.0));
        assert!(xi_coeffs(&ShapeCoeffs::zeros(4)).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn boundary_evaluation() {
        let (f, _) = eval_boundary(&ShapeCoeffs::zeros(4), 16).unwrap();
        for (j, v) in f.iter().enumerate() {
            let phi = 2.0 * PI * j as f64 / 16.0;
            assert!((v - Complex64::from_polar(1.0, phi)).norm() < 1e-15);
        }
        let mut h = ShapeCoeffs::zeros(2);
        h.gn[0] = c(1e-3, 0.0);
        let (f, _) = eval_boundary(&h, 8).unwrap();
        assert!((f[0] - c(1.001, 0.0)).norm() < 1e-15);
        assert!(eval_boundary(&h, 5).is_err());
    }

    #[test]
    fn boundary_derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_shape(&mut rng, 6, 0.2);
        let m = 4096;
        let (f, df) = eval_boundary(&h, m).unwrap();
        let dphi = 2.0 * PI / m as f64;
        for j in (0..m).step_by(97) {
            let fd = (f[(j + 1) % m] - f[(j + m - 1) % m]) / (2.0 * dphi);
            let exact = Complex64::i() * Complex64::from_polar(1.0, j as f64 * dphi) * df[j];
            assert!((fd - exact).norm() < 1e-4);
        }
    }

    #[test]
    fn margin_examples() {
        assert!((injectivity_margin(&ShapeCoeffs::zeros(3)) - FRAC_1_SQRT_2).abs() < 1e-15);
        let mut h = ShapeCoeffs::zeros(1);
        h.g0 = 0.8;
        assert!(injectivity_margin(&h) < 0.0);
    }

    #[test]
    fn area_examples() {
        assert!((area(&ShapeCoeffs::zeros(5)) - PI).abs() < 1e-15);
        let eps = 0.01;
        let mut h = ShapeCoeffs::zeros(2);
        h.gn[0] = c(eps, 0.0);
        assert!((area(&h) - PI * (1.0 + 2.0 * eps * eps)).abs() < 1e-15);
        // derivative at the disk along g is 2π ĝ₀
        let mut g = ShapeCoeffs::zeros(2);
        g.g0 = 1.0;
        g.gn[1] = c(0.3, 0.2);
        let t = 1e-6;
        let d = (area(&g.scaled(t)) - area(&g.scaled(-t))) / (2.0 * t);
        assert!((d - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn area_and_moment_match_disk_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rule = crate::quad::DiskRule::new(40, 96);
        for _ in 0..5 {
            let h = random_shape(&mut rng, 8, 0.1);
            let mut a = 0.0;
            let mut m = Complex64::new(0.0, 0.0);
            for (z, w) in rule.points.iter().zip(&rule.weights) {
                let (f, df) = h.f_and_df(*z);
                a += w * df.norm_sqr();
                m += f * (w * df.norm_sqr());
            }
            assert!((a - area(&h)).abs() < 1e-10);
            assert!((m - first_moment(&h)).norm() < 1e-10);
        }
    }

    #[test]
    fn fourier_examples() {
        let s = analyze(&[1.0; 16], 4);
        assert!((s.coeffs[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(s.coeffs[1..].iter().all(|v| v.norm() < 1e-15));
        let cos: Vec<f64> = angles(32).iter().map(|p| p.cos()).collect();
        assert!((analyze(&cos, 4).coeffs[1] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn analyze_synthesize_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20;
        let mut spec = BoundarySpectrum::zeros(n);
        spec.coeffs[0] = c(rng.gen_range(-1.0..1.0), 0.0);
        for k in 1..=n {
            spec.coeffs[k] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let samples = synthesize(&spec, 64);
        let back = analyze(&samples, n);
        for k in 0..=n {
            assert!((back.coeffs[k] - spec.coeffs[k]).norm() < 1e-12);
        }
        let again = synthesize(&back, 64);
        let err = samples.iter().zip(&again).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn boundary_maximum_dominates_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let h = random_shape(&mut rng, 6, 0.3);
            let bmax = angles(512)
                .iter()
                .map(|p| {
                    let (v, d) = h.h_and_dh(Complex64::from_polar(1.0, *p));
                    v.norm() + d.norm()
                })
                .fold(0.0, f64::max);
            for i in 0..30 {
                for j in 0..60 {
                    let z = Complex64::from_polar(i as f64 / 30.0, 2.0 * PI * j as f64 / 60.0);
                    let (v, d) = h.h_and_dh(z);
                    assert!(v.norm() + d.norm() <= bmax + 1e-12);
                }
            }
        }
    }

    #[test]
    fn json_shape_format() {
        let mut h = ShapeCoeffs::zeros(2);
        h.g0 = 0.5;
        h.gn[0] = c(1.0, -2.0);
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"n":2,"g0":0.5,"gn":[[1.0,-2.0],[0.0,0.0]]}"#);
        let back: ShapeCoeffs = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
        assert!(serde_json::from_str::<ShapeCoeffs>(r#"{"n":3,"g0":0,"gn":[]}"#).is_err());
    }
}
