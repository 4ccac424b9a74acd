//! Radial boundary-value problems on the unit disk: the base stream function
//! `φ₀` and the mode responses `A_n`.

use crate::cheb::{ChebGrid, Parity};
use crate::error::{Error, Result};
use crate::kernel::VorticityProfile;
use crate::quad::Rule;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Default number of collocation nodes in (0, 1].
pub const DEFAULT_RADIAL_NODES: usize = 128;

/// A radial function `r^power * q(r)` where `q` is stored on a Chebyshev grid
/// and has definite parity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    /// Collocation nodes in increasing order; the last one is 1.
    pub nodes: Vec<f64>,
    /// Function values at `nodes`.
    pub values: Vec<f64>,
    pub deriv_at_1: f64,
    pub parity: Parity,
    pub power: usize,
    /// Samples of the reduced factor `q` at `nodes`.
    pub reduced: Vec<f64>,
}

impl RadialProfile {
    fn from_cheb(samples_desc: &[f64], parity: Parity, power: usize, deriv_at_1: f64) -> Self {
        let grid = ChebGrid::get(samples_desc.len());
        let nodes: Vec<f64> = grid.nodes().iter().rev().copied().collect();
        let reduced: Vec<f64> = samples_desc.iter().rev().copied().collect();
        let values = nodes
            .iter()
            .zip(&reduced)
            .map(|(r, q)| r.powi(power as i32) * q)
            .collect();
        Self { nodes, values, deriv_at_1, parity, power, reduced }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn cheb_samples(&self) -> Vec<f64> {
        self.reduced.iter().rev().copied().collect()
    }

    /// Value at `r` in [0, 1] by spectral interpolation.
    pub fn eval(&self, r: f64) -> f64 {
        let grid = ChebGrid::get(self.len());
        let q = grid.interpolate(&self.cheb_samples(), self.parity, r);
        r.powi(self.power as i32) * q
    }

    /// Values at many points.
    pub fn eval_many(&self, rs: &[f64]) -> Vec<f64> {
        let grid = ChebGrid::get(self.len());
        let s = self.cheb_samples();
        rs.iter()
            .map(|&r| r.powi(self.power as i32) * grid.interpolate(&s, self.parity, r))
            .collect()
    }

    /// Derivative at r = 1 from the collocation matrix.
    pub fn collocation_deriv_at_1(&self) -> f64 {
        let grid = ChebGrid::get(self.len());
        // (r^p q)'(1) = p q(1) + q'(1)
        let s = self.cheb_samples();
        self.power as f64 * s[0] + grid.deriv_at_one(&s, self.parity)
    }

    /// Writes `r,value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,value")?;
        for (r, v) in self.nodes.iter().zip(&self.values) {
            writeln!(w, "{r:.17e},{v:.17e}")?;
        }
        Ok(())
    }
}

/// Start value of the shooting iteration: series of the regular solution
/// with `φ(0) = c` evaluated at small `r`.
fn series_start(g: &VorticityProfile, c: f64, r: f64) -> (f64, f64) {
    let [g0, g1, _, _] = g.eval_all(c);
    let phi = c + g0 * r * r / 4.0 + g1 * g0 * r.powi(4) / 64.0;
    let dphi = g0 * r / 2.0 + g1 * g0 * r.powi(3) / 16.0;
    (phi, dphi)
}

/// Integrates `φ'' + φ'/r = G(φ)` from `φ(0) = c` and records `φ` at the
/// increasing radii `stops` (the last one is 1).
fn shoot(g: &VorticityProfile, c: f64, stops: &[f64], substeps: usize) -> Vec<f64> {
    let r0 = (0.5 * stops[0]).min(1e-3);
    let (mut y, mut v) = series_start(g, c, r0);
    let mut r = r0;
    let rhs = |r: f64, y: f64, v: f64| (v, g.eval(y) - v / r);
    let mut out = Vec::with_capacity(stops.len());
    for &target in stops {
        let h = (target - r) / substeps as f64;
        for _ in 0..substeps {
            let (k1y, k1v) = rhs(r, y, v);
            let (k2y, k2v) = rhs(r + 0.5 * h, y + 0.5 * h * k1y, v + 0.5 * h * k1v);
            let (k3y, k3v) = rhs(r + 0.5 * h, y + 0.5 * h * k2y, v + 0.5 * h * k2v);
            let (k4y, k4v) = rhs(r + h, y + h * k3y, v + h * k3v);
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            r += h;
        }
        r = target;
        out.push(y);
    }
    out
}

/// Endpoint value of the shooting map; blow-up is mapped to a signed infinity.
fn shoot_end(g: &VorticityProfile, c: f64) -> f64 {
    let stops: Vec<f64> = (1..=50).map(|k| k as f64 / 50.0).collect();
    let vals = shoot(g, c, &stops, 8);
    let mut last = c;
    for v in vals {
        if !v.is_finite() || v.abs() > 1e150 {
            return if last >= 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        last = v;
    }
    last
}

/// Finds `φ(0)` with `φ(1) = 0` by bracketing and Illinois bisection.
fn shooting_center(g: &VorticityProfile) -> Result<f64> {
    let sup = g.sup_abs(-1.0, 1.0);
    let mut lo = -10.0 * (1.0 + sup);
    let mut hi = 10.0 * (1.0 + sup);
    let mut flo = shoot_end(g, lo);
    let mut fhi = shoot_end(g, hi);
    let mut widen = 0;
    while flo > 0.0 || fhi < 0.0 {
        widen += 1;
        if widen > 20 {
            return Err(Error::Bracketing { lo, hi });
        }
        if flo > 0.0 {
            lo *= 4.0;
            flo = shoot_end(g, lo);
        }
        if fhi < 0.0 {
            hi *= 4.0;
            fhi = shoot_end(g, hi);
        }
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    let mut side = 0i8;
    for _ in 0..300 {
        let c = if flo.is_finite() && fhi.is_finite() {
            let t = (lo * fhi - hi * flo) / (fhi - flo);
            if t > lo && t < hi {
                t
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * (lo + hi)
        };
        let fc = shoot_end(g, c);
        if fc == 0.0 || (hi - lo) < 1e-14 * (1.0 + c.abs()) {
            return Ok(c);
        }
        if fc < 0.0 {
            lo = c;
            flo = fc;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            fhi = fc;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if fc.abs() < 1e-13 {
            return Ok(c);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gauss rule on [0, 1] used for the boundary-derivative identities.
fn green_rule(p: usize, n: usize) -> Rule {
    Rule::gauss(0.0, 1.0, p.max(n + 40) + 16)
}

/// Solves `(1/r)(r φ')' = G(φ)`, `φ(1) = 0`, regular at the origin, on `p` nodes.
pub fn solve_phi0(g: &VorticityProfile, p: usize) -> Result<RadialProfile> {
    if p < 8 {
        return Err(Error::InvalidInput(format!("need at least 8 radial nodes, got {p}")));
    }
    if !g.monotone_certified {
        return Err(Error::NonMonotone(f64::NAN));
    }
    let grid = ChebGrid::get(p);
    let r = grid.nodes();
    let center = shooting_center(g)?;
    g.check_monotone(center.min(0.0) - 1.0, center.max(0.0) + 1.0)?;

    let mut stops: Vec<f64> = r.iter().rev().copied().collect();
    let last = stops.len() - 1;
    stops[last] = 1.0;
    let mut phi: Vec<f64> = shoot(g, center, &stops, 4).into_iter().rev().collect();
    phi[0] = 0.0;

    // Newton on the collocation system.
    let d1 = grid.d1(Parity::Even);
    let d2 = grid.d2(Parity::Even);
    let m = p - 1;
    let op = DMatrix::from_fn(m, m, |i, j| {
        d2[(i + 1, j + 1)] + d1[(i + 1, j + 1)] / r[i + 1]
    });
    for it in 0..40 {
        let x = DVector::from_column_slice(&phi[1..]);
        let mut res = &op * &x;
        let mut jac = op.clone();
        for i in 0..m {
            let [gv, gd, _, _] = g.eval_all(phi[i + 1]);
            res[i] -= gv;
            jac[(i, i)] -= gd;
        }
        let step = jac
            .lu()
            .solve(&res)
            .ok_or_else(|| Error::LinearSolve("base stream function Jacobian".into()))?;
        let mut size: f64 = 0.0;
        for i in 0..m {
            phi[i + 1] -= step[i];
            size = size.max(step[i].abs());
        }
        let scale = 1.0 + phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if size <= 1e-14 * scale {
            break;
        }
        if it == 39 {
            return Err(Error::NonConvergence {
                what: "base stream function Newton",
                iterations: 40,
                last: size,
            });
        }
    }

    let mut prof = RadialProfile::from_cheb(&phi, Parity::Even, 0, 0.0);
    let rule = green_rule(p, 0);
    let vals = prof.eval_many(&rule.nodes);
    prof.deriv_at_1 = rule
        .iter()
        .zip(&vals)
        .map(|((x, w), v)| w * x * g.eval(*v))
        .sum();
    Ok(prof)
}

/// Which discretization to use for the mode problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeForm {
    /// `A_n` directly, parity `(-1)^n`.
    Direct,
    /// `A_n = r^n α_n` with `α_n` even.
    Reduced,
    /// Direct below n = 8, reduced from there on.
    Auto,
}

/// Solves `(1/r)(r A')' - n² A / r² - G'(φ₀) A = r^n G(φ₀)`, `A(1) = 0`,
/// and returns the profile; `deriv_at_1` holds `A_n'(1)`.
pub fn solve_an(
    n: usize,
    phi0: &RadialProfile,
    g: &VorticityProfile,
    form: ModeForm,
) -> Result<RadialProfile> {
    let p = phi0.len();
    let grid = ChebGrid::get(p);
    let r = grid.nodes();
    let phi = phi0.cheb_samples();
    let g0: Vec<f64> = phi.iter().map(|&v| g.eval(v)).collect();
    let g1: Vec<f64> = phi.iter().map(|&v| g.d1(v)).collect();
    let reduced = match form {
        ModeForm::Direct => false,
        ModeForm::Reduced => true,
        ModeForm::Auto => n >= 8,
    };
    let m = p - 1;
    let nf = n as f64;
    let (parity, power) = if reduced { (Parity::Even, n) } else { (Parity::of_mode(n), 0) };
    let d1 = grid.d1(parity);
    let d2 = grid.d2(parity);
    let mut op = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for i in 0..m {
        let ri = r[i + 1];
        for j in 0..m {
            op[(i, j)] = if reduced {
                d2[(i + 1, j + 1)] + (2.0 * nf + 1.0) / ri * d1[(i + 1, j + 1)]
            } else {
                d2[(i + 1, j + 1)] + d1[(i + 1, j + 1)] / ri
            };
        }
        op[(i, i)] -= g1[i + 1];
        if !reduced {
            op[(i, i)] -= nf * nf / (ri * ri);
            rhs[i] = ri.powi(n as i32) * g0[i + 1];
        } else {
            rhs[i] = g0[i + 1];
        }
    }
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::LinearSolve(format!("mode n = {n}")))?;
    let mut samples = vec![0.0; p];
    samples[1..].copy_from_slice(sol.as_slice());
    let mut prof = RadialProfile::from_cheb(&samples, parity, power, 0.0);

    // A'(1) = ∫₀¹ r^{n+1} (G₁ A + r^n G₀) dr
    let rule = green_rule(p, n);
    let q = prof.eval_many(&rule.nodes);
    let phis = phi0.eval_many(&rule.nodes);
    prof.deriv_at_1 = rule
        .iter()
        .zip(q.iter().zip(&phis))
        .map(|((x, w), (a, ph))| {
            let [gv, gd, _, _] = g.eval_all(*ph);
            let xn = x.powi(n as i32);
            w * xn * x * (gd * a + xn * gv)
        })
        .sum();
    Ok(prof)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_profile_is_a_parabola() {
        let g = VorticityProfile::rigid_preset(1.0).unwrap();
        let p = solve_phi0(&g, 64).unwrap();
        for (r, v) in p.nodes.iter().zip(&p.values) {
            assert!((v - 0.5 * (1.0 - r * r)).abs() < 1e-13);
        }
        assert!((p.deriv_at_1 + 1.0).abs() < 1e-14);
        assert!((p.collocation_deriv_at_1() + 1.0).abs() < 1e-10);
        assert_eq!(*p.nodes.last().unwrap(), 1.0);
        assert_eq!(*p.values.last().unwrap(), 0.0);
    }

    #[test]
    fn zero_profile_gives_zero() {
        let g = VorticityProfile::constant(0.0);
        let p = solve_phi0(&g, 32).unwrap();
        assert!(p.values.iter().all(|v| v.abs() < 1e-14));
        assert_eq!(p.deriv_at_1, 0.0);
    }

    #[test]
    fn rigid_modes_match_closed_form() {
        let g = VorticityProfile::rigid_preset(0.7).unwrap();
        let phi = solve_phi0(&g, 64).unwrap();
        for n in [0usize, 1, 2, 5, 9, 30] {
            let a = solve_an(n, &phi, &g, ModeForm::Auto).unwrap();
            let exact = -0.7 / (n as f64 + 1.0);
            assert!((a.deriv_at_1 - exact).abs() < 1e-12 * exact.abs(), "n={n}");
            for k in 0..20 {
                let r = k as f64 / 19.0;
                let e = -2.0 * 0.7 * r.powi(n as i32) * (r * r - 1.0) / (4.0 * n as f64 + 4.0);
                assert!((a.eval(r) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reduced_and_direct_forms_agree() {
        let g = VorticityProfile::exponential(-2.0, 0.5, 1.0).unwrap();
        let phi = solve_phi0(&g, 96).unwrap();
        for n in [1usize, 4, 16] {
            let a = solve_an(n, &phi, &g, ModeForm::Direct).unwrap();
            let b = solve_an(n, &phi, &g, ModeForm::Reduced).unwrap();
            assert!((a.deriv_at_1 - b.deriv_at_1).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn csv_export() {
        let g = VorticityProfile::rigid_preset(1.0).unwrap();
        let p = solve_phi0(&g, 16).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert!(text.starts_with("r,value"));
    }
}
