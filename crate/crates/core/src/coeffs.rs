//! Interaction-potential coefficients `c_n`, the constant `γ₀` and the
//! Fourier multipliers `ω_n` of the linearized free-boundary operator.

use crate::error::{Error, Result};
use crate::par::map_range;
use crate::potential::{BaseState, InteractionCase};
use crate::quad::{graded_toward_end, graded_toward_start, Rule};
use crate::radial_ode::{solve_an, ModeForm};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

/// Target accuracy of the quadrature path for `c_n`.
pub const CN_TOLERANCE: f64 = 1e-8;

/// Closed form of `c_n` in the logarithmic case.
pub fn c_n_case_b(n: usize) -> f64 {
    if n == 0 {
        FRAC_PI_2
    } else {
        FRAC_PI_2 * (1.0 - 1.0 / n as f64)
    }
}

/// Result of a `c_n` table quadrature.
#[derive(Debug, Clone)]
pub struct CnTable {
    pub values: Vec<f64>,
    /// Largest imaginary part of the (real) disk integrals.
    pub imag_residue: f64,
    /// Difference to a coarser rule.
    pub error_estimate: f64,
}

/// Angular rule on (-π/2, π/2): uniform panels, graded toward both ends.
fn theta_rule(n: usize, scale: f64, nodes: usize) -> Rule {
    let panels = ((scale * (n as f64 / 3.0 + 8.0)).ceil() as usize).max(4);
    let h = PI / panels as f64;
    let mut r = Rule::new();
    let a = -FRAC_PI_2;
    r.extend(graded_toward_start(a, a + h, 1e-10, nodes, 0.0));
    for k in 1..panels - 1 {
        r.push_panel(a + k as f64 * h, a + (k + 1) as f64 * h, nodes);
    }
    r.extend(graded_toward_end(FRAC_PI_2 - h, FRAC_PI_2, 1e-10, nodes, 0.0));
    r
}

/// Integrates `c_0..=c_N` with polar coordinates centered at the boundary
/// point `y = 1`: `y = 1 - ρ e^{iθ}`, `0 < ρ < 2 cos θ`.
fn c_table_rule(case: InteractionCase, nmax: usize, scale: f64) -> (Vec<f64>, f64) {
    let nodes = 16;
    let thetas = theta_rule(nmax, scale, nodes);
    let base = if scale >= 1.0 { 10 } else { 8 };
    let density = 0.5 * scale * nmax as f64;
    let chunks = 64.min(thetas.len());
    let per = thetas.len().div_ceil(chunks);
    let partial = map_range(0..chunks, |c| {
        let mut re = vec![0.0; nmax + 1];
        let mut im = vec![0.0; nmax + 1];
        let lo = c * per;
        let hi = ((c + 1) * per).min(thetas.len());
        for t in lo..hi {
            let (theta, wt) = (thetas.nodes[t], thetas.weights[t]);
            let len = 2.0 * theta.cos();
            if len <= 0.0 {
                continue;
            }
            let e = Complex64::from_polar(1.0, theta);
            let rho_rule = graded_toward_start(0.0, len, 1e-12 * len.max(1e-300), base, density);
            for (rho, wr) in rho_rule.iter() {
                let y = Complex64::new(1.0, 0.0) - e * rho;
                let w = 0.5 * wt * wr * rho;
                // weight and the case-specific factor (ν, resp. ln ρ)
                let (fa, aux) = match case {
                    InteractionCase::A { nu } => (w * rho.powf(-nu), nu),
                    InteractionCase::B => (w, rho.ln()),
                };
                let mut yk = Complex64::new(1.0, 0.0);
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..=nmax {
                    s += yk;
                    let kk = 2.0 * (k + 1) as f64;
                    let v = match case {
                        InteractionCase::A { .. } => (s * aux - yk * kk) * fa,
                        InteractionCase::B => (s + yk * (kk * aux)) * fa,
                    };
                    re[k] += v.re;
                    im[k] += v.im;
                    yk *= y;
                }
            }
        }
        (re, im)
    });
    let mut re = vec![0.0; nmax + 1];
    let mut im = vec![0.0; nmax + 1];
    for (r, i) in partial {
        for k in 0..=nmax {
            re[k] += r[k];
            im[k] += i[k];
        }
    }
    let residue = im.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    (re, residue)
}

/// `c_0..=c_N` by quadrature of the disk integrals (either case).
pub fn c_table_quadrature(case: InteractionCase, nmax: usize) -> Result<CnTable> {
    case.validate()?;
    let (fine, residue) = c_table_rule(case, nmax, 1.0);
    let (coarse, _) = c_table_rule(case, nmax, 0.8);
    let err = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
        .fold(0.0, f64::max);
    if !(err <= CN_TOLERANCE) {
        return Err(Error::Quadrature { achieved: err, target: CN_TOLERANCE });
    }
    Ok(CnTable { values: fine, imag_residue: residue, error_estimate: err })
}

/// `c_0..=c_N`: closed form in case B, quadrature in case A.
pub fn c_table(case: InteractionCase, nmax: usize) -> Result<Vec<f64>> {
    match case {
        InteractionCase::B => Ok((0..=nmax).map(c_n_case_b).collect()),
        InteractionCase::A { .. } => Ok(c_table_quadrature(case, nmax)?.values),
    }
}

/// Single coefficient `c_n`.
pub fn c_n(case: InteractionCase, n: usize) -> Result<f64> {
    match case {
        InteractionCase::B => Ok(c_n_case_b(n)),
        InteractionCase::A { .. } => Ok(c_table(case, n)?[n]),
    }
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the last even-column estimate.
pub fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    if n < 3 {
        return *s.last().unwrap_or(&0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = *s.last().unwrap();
    let mut col = 0;
    while cur.len() > 1 {
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|i| {
                let d = cur[i + 1] - cur[i];
                let p = if col == 0 { 0.0 } else { prev[i + 1] };
                if d == 0.0 {
                    f64::INFINITY
                } else {
                    p + 1.0 / d
                }
            })
            .collect();
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 {
            if let Some(v) = cur.last() {
                if v.is_finite() {
                    best = *v;
                } else {
                    break;
                }
            }
        }
    }
    best
}

/// Inner integral `∫₀^∞ e^{-r} (r² + ζ²)^{-(2+ν)/2} dr`.
fn gamma0_inner(nu: f64, zeta: f64) -> f64 {
    let mut rule = graded_toward_start(0.0, 40.0, (0.05 * zeta).max(1e-12), 20, 0.0);
    rule.push_panel(40.0, 80.0, 20);
    let p = -(2.0 + nu) / 2.0;
    rule.integrate(|r| (-r).exp() * (r * r + zeta * zeta).powf(p))
}

/// `γ₀^ν = ν ∫₀^∞∫₀^∞ e^{-r} ζ sin ζ (r² + ζ²)^{-(2+ν)/2} dr dζ`, summed
/// over half-periods of `sin ζ` and accelerated with Wynn's epsilon.
pub fn gamma0(nu: f64) -> Result<f64> {
    InteractionCase::A { nu }.validate()?;
    const PERIODS: usize = 80;
    let mut partial = Vec::with_capacity(PERIODS);
    let mut acc = 0.0;
    for k in 0..PERIODS {
        let a = k as f64 * PI;
        let rule = if k == 0 {
            graded_toward_start(0.0, PI, 1e-10, 20, 0.0)
        } else {
            Rule::gauss(a, a + PI, 24)
        };
        acc += rule.integrate(|z| z * z.sin() * gamma0_inner(nu, z));
        partial.push(nu * acc);
    }
    let est = wynn_epsilon(&partial);
    let est2 = wynn_epsilon(&partial[..PERIODS - 10]);
    let err = (est - est2).abs();
    if !(err < 1e-8) {
        return Err(Error::Quadrature { achieved: err, target: 1e-8 });
    }
    Ok(est)
}

/// Per-mode data of the linearization at the disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeTable {
    pub n_max: usize,
    /// `A_n'(1)` for `n = 0..=N`.
    pub a_deriv: Vec<f64>,
    /// `c_n` for `n = 0..=N`.
    pub c: Vec<f64>,
    /// `ω_n` for `n = 0..=N`.
    pub omega: Vec<f64>,
}

/// `ω_n = -½φ₀'(1)²(n+1) + φ₀'(1)A_n'(1)(n+1) - ½Ω₀² + c_n`.
pub fn omega_formula(dphi: f64, a_deriv: f64, omega0: f64, c: f64, n: usize) -> f64 {
    let np1 = n as f64 + 1.0;
    -0.5 * dphi * dphi * np1 + dphi * a_deriv * np1 - 0.5 * omega0 * omega0 + c
}

impl ModeTable {
    pub fn omega_at(&self, n: usize) -> f64 {
        self.omega[n]
    }

    /// Writes `n,a_deriv,c,omega` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,a_deriv,c,omega")?;
        for n in 0..=self.n_max {
            writeln!(
                w,
                "{n},{:.17e},{:.17e},{:.17e}",
                self.a_deriv[n], self.c[n], self.omega[n]
            )?;
        }
        Ok(())
    }
}

/// Builds `A_n'(1)`, `c_n` and `ω_n` for `n = 0..=N`.
pub fn build_mode_table(base: &BaseState, n_max: usize) -> Result<ModeTable> {
    if n_max < 1 {
        return Err(Error::InvalidInput("mode table needs N >= 1".into()));
    }
    let a_deriv: Vec<f64> = map_range(0..n_max + 1, |n| {
        solve_an(n, &base.phi0, &base.profile, ModeForm::Auto).map(|p| p.deriv_at_1)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let c = c_table(base.case, n_max)?;
    let omega = (0..=n_max)
        .map(|n| omega_formula(base.dphi0_at_1, a_deriv[n], base.omega0, c[n], n))
        .collect();
    Ok(ModeTable { n_max, a_deriv, c, omega })
}
