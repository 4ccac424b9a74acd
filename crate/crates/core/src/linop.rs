//! The linearized free-boundary operator at the disk, its explicit inverse,
//! the non-resonance scan and the first-order response in the mass.

use crate::coeffs::{build_mode_table, ModeTable};
use crate::error::{Error, Result};
use crate::potential::{BaseState, InteractionCase};
use crate::quad::Rule;
use crate::spectral::{analyze, angles, BoundarySpectrum, ShapeCoeffs};
use crate::SCHEMA_VERSION;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Modes with `|ω_n|` below this are treated as resonant.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Responses of the particle force to the basis shapes `z`, `z^{n+1}`, `i z^{n+1}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForceResponse {
    pub dilation: f64,
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

impl ForceResponse {
    pub fn apply(&self, g: &ShapeCoeffs) -> f64 {
        let mut w = g.g0 * self.dilation;
        for (k, c) in g.gn.iter().enumerate() {
            w += c.re * self.real[k] + c.im * self.imag[k];
        }
        w
    }
}

/// Derivative of `∂_{x₁} U_h(a, 0)` at `h = 0` along `g`, for the basis shapes
/// up to order `n_max`, by tensor Gauss-Legendre/trapezoid quadrature on the disk.
pub fn force_response(case: InteractionCase, a: f64, n_max: usize) -> ForceResponse {
    let radial = Rule::gauss(0.0, 1.0, 64);
    let m = (2 * n_max + 64).max(128);
    let dt = 2.0 * PI / m as f64;
    let x = Complex64::new(a, 0.0);
    let mut dilation = 0.0;
    let mut real = vec![0.0; n_max];
    let mut imag = vec![0.0; n_max];
    let (nu, p) = match case {
        InteractionCase::A { nu } => (nu, nu + 2.0),
        InteractionCase::B => (1.0, 2.0),
    };
    for (r, wr) in radial.iter() {
        for j in 0..m {
            let z = Complex64::from_polar(r, (j as f64 + 0.5) * dt);
            let w = x - z;
            let d2 = w.norm_sqr();
            let inv = d2.powf(-0.5 * p);
            let weight = wr * r * dt * nu;
            // W[g] = ∫ -Re g·A + Re(w ḡ)·B + Re g'·C
            let ka = inv * weight;
            let kb = p * w.re * inv / d2 * weight;
            let kc = 2.0 * w.re * inv * weight;
            let term = |g: Complex64, dg: Complex64| -g.re * ka + (w * g.conj()).re * kb + dg.re * kc;
            dilation += term(z, Complex64::new(1.0, 0.0));
            let mut zn = z; // z^{n}
            for n in 1..=n_max {
                let g = zn * z;
                let dg = zn * (n as f64 + 1.0);
                real[n - 1] += term(g, dg);
                let i = Complex64::i();
                imag[n - 1] += term(i * g, i * dg);
                zn *= z;
            }
        }
    }
    ForceResponse { dilation, real, imag }
}

/// The operator `(g, b, μ) ↦ (𝓛g - μ, (Ω₀² - U₀''(a₀)) b - W[g], 2π ĝ₀)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearizedOperator {
    pub base: BaseState,
    pub table: ModeTable,
    /// `Ω₀² - U₀''(a₀)`.
    pub particle_diag: f64,
    pub force: ForceResponse,
}

impl LinearizedOperator {
    pub fn new(base: &BaseState, n_max: usize) -> Result<Self> {
        let table = build_mode_table(base, n_max)?;
        Ok(Self::from_table(base, table))
    }

    /// Assembles the operator from a precomputed (or synthetic) table.
    pub fn from_table(base: &BaseState, table: ModeTable) -> Self {
        let particle_diag = base.omega0 * base.omega0 - base.u0_d2_at_a0;
        let force = force_response(base.case, base.a0, table.n_max);
        Self { base: base.clone(), table, particle_diag, force }
    }

    pub fn n_max(&self) -> usize {
        self.table.n_max
    }

    /// Forward application.
    pub fn forward(&self, g: &ShapeCoeffs, b: f64, mu: f64) -> (BoundarySpectrum, f64, f64) {
        let n = self.n_max();
        let mut s = BoundarySpectrum::zeros(n);
        s.coeffs[0] = Complex64::new(2.0 * self.table.omega[0] * g.g0 - mu, 0.0);
        for k in 1..=n {
            s.coeffs[k] = g.mode(k) * self.table.omega[k];
        }
        let z = self.particle_diag * b - self.force.apply(g);
        (s, z, 2.0 * PI * g.g0)
    }

    /// First resonant mode, if any.
    pub fn first_resonance(&self) -> Option<(usize, f64)> {
        (1..=self.n_max())
            .map(|n| (n, self.table.omega[n]))
            .find(|(_, w)| !(w.abs() >= RESONANCE_TOL))
    }

    /// Solves `𝓛g - μ = S`, `(Ω₀² - U₀''(a₀)) b - W[g] = Z`, `2π ĝ₀ = M`.
    pub fn solve(&self, s: &BoundarySpectrum, z: f64, m: f64) -> Result<(ShapeCoeffs, f64, f64)> {
        if let Some((n, omega)) = self.first_resonance() {
            return Err(Error::Resonance { n, omega });
        }
        if !(self.particle_diag > 0.0) {
            return Err(Error::InvalidInput(format!(
                "particle equation is not invertible (diagonal {})",
                self.particle_diag
            )));
        }
        let n = self.n_max();
        let mut g = ShapeCoeffs::zeros(n);
        g.g0 = m / (2.0 * PI);
        let s0 = s.coeffs.first().map(|c| c.re).unwrap_or(0.0);
        let mu = 2.0 * self.table.omega[0] * g.g0 - s0;
        for k in 1..=n.min(s.order()) {
            g.gn[k - 1] = s.coeffs[k] / self.table.omega[k];
        }
        let b = (z + self.force.apply(&g)) / self.particle_diag;
        Ok((g, b, mu))
    }

    /// Spectrum of `U_X` on the unit circle for the particle at `(a₀, 0)`.
    pub fn particle_spectrum(&self) -> BoundarySpectrum {
        particle_spectrum(self.base.case, self.base.a0, self.n_max())
    }

    /// First-order response `-m D𝔽⁻¹ ∂_m𝔽` at the base state.
    pub fn first_order_response(&self, m: f64) -> Result<(ShapeCoeffs, f64, f64)> {
        let (g, b, mu) = self.solve(&self.particle_spectrum(), 0.0, 0.0)?;
        Ok((g.scaled(-m), -m * b, -m * mu))
    }
}

/// Fourier coefficients of `U_X(e^{iφ})` with `X = (a, 0)`.
pub fn particle_spectrum(case: InteractionCase, a: f64, n_max: usize) -> BoundarySpectrum {
    let m = (4 * n_max + 64).max(256);
    let x = Complex64::new(a, 0.0);
    let samples: Vec<f64> = angles(m)
        .iter()
        .map(|&p| case.kernel((Complex64::from_polar(1.0, p) - x).norm_sqr()))
        .collect();
    analyze(&samples, n_max)
}

/// A resonant mode found by the scan.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Resonance {
    pub n: usize,
    pub omega: f64,
}

/// Result of the non-resonance scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub min_abs_omega: f64,
    pub argmin_n: usize,
    /// First `n_T` such that the leading term dominates on `[n_T, N]`.
    pub tail_certified_from: Option<usize>,
    pub margin_factor: f64,
    pub resonances: Vec<Resonance>,
}

impl ScanReport {
    pub fn is_clean(&self) -> bool {
        self.resonances.is_empty() && self.tail_certified_from.is_some()
    }
}

/// Scans `ω_1..=ω_N` for (near) zeros and certifies the sign of the tail.
pub fn nonresonance_scan(op: &LinearizedOperator, margin_factor: f64) -> ScanReport {
    let t = &op.table;
    let d = op.base.dphi0_at_1;
    let half_w2 = 0.5 * op.base.omega0 * op.base.omega0;
    let mut min_abs = f64::INFINITY;
    let mut argmin = 1;
    let mut resonances = Vec::new();
    for n in 1..=t.n_max {
        let w = t.omega[n].abs();
        if w < min_abs {
            min_abs = w;
            argmin = n;
        }
        if !(w >= RESONANCE_TOL) {
            resonances.push(Resonance { n, omega: t.omega[n] });
        }
    }
    let dominated = |n: usize| {
        let np1 = n as f64 + 1.0;
        0.5 * d * d * np1 > margin_factor * (half_w2 + (d * t.a_deriv[n]).abs() * np1 + t.c[n].abs())
    };
    let mut tail = None;
    for n in (1..=t.n_max).rev() {
        if dominated(n) {
            tail = Some(n);
        } else {
            break;
        }
    }
    ScanReport {
        schema_version: SCHEMA_VERSION,
        min_abs_omega: min_abs,
        argmin_n: argmin,
        tail_certified_from: tail,
        margin_factor,
        resonances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rigid_b(a0: f64, n: usize) -> LinearizedOperator {
        let base = BaseState::rigid(InteractionCase::B, a0, 32).unwrap();
        LinearizedOperator::new(&base, n).unwrap()
    }

    #[test]
    fn force_response_case_b_closed_forms() {
        let f = force_response(InteractionCase::B, 2.0, 3);
        assert!((f.dilation - PI).abs() < 1e-12, "{}", f.dilation);
        assert!((f.real[0] - PI / 4.0).abs() < 1e-12, "{}", f.real[0]);
        assert!(f.imag[0].abs() < 1e-12);
    }

    #[test]
    fn case_b_particle_spectrum() {
        let s = particle_spectrum(InteractionCase::B, 2.0, 10);
        assert!((s.coeffs[0].re - 2f64.ln()).abs() < 1e-14);
        for n in 1..=10 {
            let e = -1.0 / (2.0 * n as f64 * 2f64.powi(n as i32));
            assert!((s.coeffs[n].re - e).abs() < 1e-14);
            assert!(s.coeffs[n].im.abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let op = rigid_b(3.0, 16);
        let (g, b, mu) = op.solve(&BoundarySpectrum::zeros(16), 0.0, 0.0).unwrap();
        assert!(g.is_zero() && b == 0.0 && mu == 0.0);
    }

    #[test]
    fn mass_only_rhs() {
        let op = rigid_b(3.0, 8);
        let (g, _, mu) = op.solve(&BoundarySpectrum::zeros(8), 0.0, 2.0 * PI).unwrap();
        assert!((g.g0 - 1.0).abs() < 1e-15);
        assert!((mu - 2.0 * op.table.omega[0]).abs() < 1e-14);
    }

    #[test]
    fn single_mode_round_trip() {
        let op = rigid_b(3.0, 8);
        let mut s = BoundarySpectrum::zeros(8);
        s.coeffs[2] = Complex64::new(1.0, 0.0);
        let (g, b, mu) = op.solve(&s, 0.0, 0.0).unwrap();
        assert!((g.gn[1].re - 1.0 / op.table.omega[2]).abs() < 1e-14);
        let (s2, z2, m2) = op.forward(&g, b, mu);
        assert!((s2.coeffs[2] - s.coeffs[2]).norm() < 1e-14);
        assert!(z2.abs() < 1e-14 && m2.abs() < 1e-14);
    }

    #[test]
    fn resonant_base_is_detected() {
        // Rigid rotation balanced at a₀ = 2 in the logarithmic case puts
        // ω₂ = -Ω₀² + π/4 exactly at zero.
        let op = rigid_b(2.0, 8);
        assert!(op.table.omega[2].abs() < 1e-12);
        match op.first_order_response(1e-4) {
            Err(Error::Resonance { n, .. }) => assert_eq!(n, 2),
            other => panic!("expected resonance, got {other:?}"),
        }
        let rep = nonresonance_scan(&op, 1.0);
        assert_eq!(rep.resonances[0].n, 2);
    }

    #[test]
    fn planted_resonance() {
        let base = BaseState::rigid(InteractionCase::B, 3.0, 32).unwrap();
        let mut table = build_mode_table(&base, 8).unwrap();
        table.omega[3] = 0.0;
        let op = LinearizedOperator::from_table(&base, table);
        let rep = nonresonance_scan(&op, 2.0);
        assert_eq!(rep.resonances, vec![Resonance { n: 3, omega: 0.0 }]);
        assert!(matches!(op.solve(&BoundarySpectrum::zeros(8), 0.0, 0.0), Err(Error::Resonance { n: 3, .. })));
    }

    #[test]
    fn first_order_is_real_and_linear() {
        let op = rigid_b(3.0, 32);
        let (h1, a1, l1) = op.first_order_response(1e-4).unwrap();
        let (h2, a2, l2) = op.first_order_response(2e-4).unwrap();
        assert!(h1.symmetry_defect() < 1e-12);
        assert_eq!(h2, h1.scaled(2.0));
        assert_eq!(a2, 2.0 * a1);
        assert_eq!(l2, 2.0 * l1);
        let (h0, a0, l0) = op.first_order_response(0.0).unwrap();
        assert!(h0.is_zero() && a0 == 0.0 && l0 == 0.0);
    }

    #[test]
    fn rigid_scan_n1() {
        let base = BaseState::rigid(InteractionCase::B, 3.0, 32).unwrap();
        let op = LinearizedOperator::new(&base, 64).unwrap();
        let w2 = base.omega0 * base.omega0;
        assert!((op.table.omega[1] + 0.5 * w2).abs() < 1e-13);
        let rep = nonresonance_scan(&op, 1.0);
        assert!(rep.resonances.is_empty());
        assert!(rep.tail_certified_from.is_some());
    }
}
