//! The ten acceptance checks, each reduced to a pass/fail record with the
//! measured quantity and the tolerance it was held to.

use crate::coeffs::{build_mode_table, c_n_case_b, c_table_quadrature, gamma0};
use crate::error::{Error, Result};
use crate::kernel::VorticityProfile;
use crate::linop::LinearizedOperator;
use crate::potential::{u0, u0_d1, u0_d2, u0_wallis_series_raw, BaseState, InteractionCase, WALLIS_SERIES_CALIBRATION};
use crate::radial_ode::{solve_an, solve_phi0, ModeForm};
use crate::residual::{quasi_newton_solve, ResidualMap, ResidualOptions};
use crate::spectral::{eval_boundary, injectivity_margin, BoundarySpectrum, ShapeCoeffs};
use crate::SCHEMA_VERSION;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

/// Knobs of the acceptance run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub radial_nodes: usize,
    pub angular: usize,
    /// Truncation order of the shape in criteria 7 and 8.
    pub shape_order: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { radial_nodes: 128, angular: 256, shape_order: 32, seed: 7 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CriterionReport {
    fn new(id: u8, name: &str, passed: bool, measured: f64, tolerance: f64, detail: String) -> Self {
        Self { id, name: name.into(), passed, measured, tolerance, detail }
    }

    fn failed(id: u8, name: &str, tolerance: f64, err: &Error) -> Self {
        Self::new(id, name, false, f64::NAN, tolerance, format!("error: {err}"))
    }

    /// One summary line.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: measured {:.3e} (tolerance {:.1e}) {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub options: VerifyOptions,
    pub criteria: Vec<CriterionReport>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub fn run_all(opts: &VerifyOptions) -> VerifyReport {
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        options: opts.clone(),
        criteria: CRITERIA.iter().map(|&id| run_criterion(id, opts)).collect(),
    }
}

pub fn run_criterion(id: u8, opts: &VerifyOptions) -> CriterionReport {
    match id {
        1 => case_b_closed_forms(),
        2 => rigid_mode_derivatives(opts),
        3 => mode_derivative_asymptotics(opts),
        4 => unit_exponent_growth(),
        5 => round_trip(opts),
        6 => rigid_multipliers(opts),
        7 => residual_scaling(opts),
        8 => quasi_newton_quality(opts),
        9 => potential_properties(),
        10 => conformal_certification(opts),
        _ => CriterionReport::new(id, "unknown", false, f64::NAN, 0.0, "no such criterion".into()),
    }
}

fn case_b_closed_forms() -> CriterionReport {
    const NAME: &str = "case B coefficients";
    const TOL: f64 = 1e-6;
    let exact = c_n_case_b(0) == FRAC_PI_2
        && c_n_case_b(1) == 0.0
        && (2..=64).all(|n| c_n_case_b(n) == FRAC_PI_2 * (1.0 - 1.0 / n as f64));
    match c_table_quadrature(InteractionCase::B, 64) {
        Ok(t) => {
            let err = (0..=64).map(|n| (t.values[n] - c_n_case_b(n)).abs()).fold(0.0, f64::max);
            CriterionReport::new(
                1,
                NAME,
                exact && err < TOL,
                err,
                TOL,
                format!("closed form exact: {exact}; quadrature max error over n <= 64"),
            )
        }
        Err(e) => CriterionReport::failed(1, NAME, TOL, &e),
    }
}

fn rigid_mode_derivatives(opts: &VerifyOptions) -> CriterionReport {
    const NAME: &str = "rigid A_n'(1)";
    const TOL: f64 = 1e-8;
    let run = || -> Result<f64> {
        let base = BaseState::rigid(InteractionCase::B, 2.0, opts.radial_nodes)?;
        let w = base.omega0;
        let mut worst: f64 = 0.0;
        for n in 0..=64 {
            let a = solve_an(n, &base.phi0, &base.profile, ModeForm::Auto)?.deriv_at_1;
            let exact = -w / (n as f64 + 1.0);
            worst = worst.max(((a - exact) / exact).abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(e) => CriterionReport::new(2, NAME, e < TOL, e, TOL, "max relative error over n <= 64".into()),
        Err(e) => CriterionReport::failed(2, NAME, TOL, &e),
    }
}

/// Profile used for the non-rigid asymptotics: `G(u) = -2 + ½eᵘ`.
pub fn nonrigid_profile() -> VorticityProfile {
    VorticityProfile::exponential(-2.0, 0.5, 1.0).expect("monotone preset")
}

fn mode_derivative_asymptotics(opts: &VerifyOptions) -> CriterionReport {
    const NAME: &str = "A_n'(1) asymptotics";
    const TOL: f64 = 0.02;
    let run = || -> Result<(f64, [f64; 3])> {
        let g = nonrigid_profile();
        let phi0 = solve_phi0(&g, opts.radial_nodes)?;
        let gb = g.eval(0.0);
        let mut x = [0.0; 3];
        for (k, n) in [64usize, 128, 256].into_iter().enumerate() {
            let a = solve_an(n, &phi0, &g, ModeForm::Auto)?.deriv_at_1;
            x[k] = 2.0 * n as f64 * a / gb;
        }
        // remove 1/n and 1/n² terms
        let r1 = 2.0 * x[1] - x[0];
        let r2 = 2.0 * x[2] - x[1];
        Ok(((4.0 * r2 - r1) / 3.0, x))
    };
    match run() {
        Ok((v, x)) => CriterionReport::new(
            3,
            NAME,
            (v - 1.0).abs() < TOL,
            (v - 1.0).abs(),
            TOL,
            format!("extrapolated 2n A_n'(1)/G = {v:.6}; raw {:.6} {:.6} {:.6}", x[0], x[1], x[2]),
        ),
        Err(e) => CriterionReport::failed(3, NAME, TOL, &e),
    }
}

fn unit_exponent_growth() -> CriterionReport {
    const NAME: &str = "c_n growth for nu = 1";
    const TOL: f64 = 0.05;
    let run = || -> Result<(bool, f64, f64, f64)> {
        let t = c_table_quadrature(InteractionCase::A { nu: 1.0 }, 512)?;
        let g = gamma0(1.0)?;
        let ns: Vec<usize> = (4..=9).map(|k| 1usize << k).collect();
        let q: Vec<f64> = ns.iter().map(|&n| t.values[n] / (n as f64).ln()).collect();
        let increasing = q.windows(2).all(|w| w[1] > w[0]);
        let at512 = (q[q.len() - 1] / g - 1.0).abs();
        // least squares of c_n/ln n against 1/ln n on the last four points
        let pts: Vec<(f64, f64)> = ns[2..].iter().zip(&q[2..]).map(|(&n, &v)| (1.0 / (n as f64).ln(), v)).collect();
        let k = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        let intercept = (sy - slope * sx) / k;
        Ok((increasing, at512, (intercept / g - 1.0).abs(), g))
    };
    match run() {
        Ok((inc, at512, extrap, g)) => CriterionReport::new(
            4,
            NAME,
            inc && at512 < 0.15 && extrap < TOL,
            extrap,
            TOL,
            format!("increasing {inc}; |c_512/(ln 512 gamma0) - 1| = {at512:.4} (< 0.15); gamma0 = {g:.10}"),
        ),
        Err(e) => CriterionReport::failed(4, NAME, TOL, &e),
    }
}

/// Random band-limited right-hand side with modes `1..=n`.
pub fn random_rhs<R: Rng>(rng: &mut R, n: usize) -> (BoundarySpectrum, f64, f64) {
    let mut s = BoundarySpectrum::zeros(n);
    s.coeffs[0] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
    for c in s.coeffs.iter_mut().skip(1) {
        *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    (s, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn round_trip(opts: &VerifyOptions) -> CriterionReport {
    const NAME: &str = "linear operator round trip";
    const TOL: f64 = 1e-10;
    let run = || -> Result<f64> {
        let base = BaseState::rigid(InteractionCase::B, 3.0, opts.radial_nodes)?;
        let op = LinearizedOperator::new(&base, 64)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let (s, z, m) = random_rhs(&mut rng, 64);
            let (g, b, mu) = op.solve(&s, z, m)?;
            let (s2, z2, m2) = op.forward(&g, b, mu);
            let scale = s.max_abs().max(z.abs()).max(m.abs());
            let err = s.coeffs.iter().zip(&s2.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            worst = worst.max(err.max((z - z2).abs()).max((m - m2).abs()) / scale);
        }
        Ok(worst)
    };
    match run() {
        Ok(e) => CriterionReport::new(5, NAME, e < TOL, e, TOL, "50 seeded right-hand sides, N = 64, a0 = 3".into()),
        Err(e) => CriterionReport::failed(5, NAME, TOL, &e),
    }
}

fn rigid_multipliers(opts: &VerifyOptions) -> CriterionReport {
    const NAME: &str = "rigid multipliers";
    const TOL: f64 = 1e-10;
    let run = || -> Result<f64> {
        let base = BaseState::rigid(InteractionCase::B, 2.0, opts.radial_nodes)?;
        let t = build_mode_table(&base, 256)?;
        let w2 = base.omega0 * base.omega0;
        Ok((0..=256)
            .map(|n| (t.omega[n] - (-0.5 * n as f64 * w2 + t.c[n])).abs())
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(e) => CriterionReport::new(6, NAME, e < TOL, e, TOL, "max deviation over n <= 256".into()),
        Err(e) => CriterionReport::failed(6, NAME, TOL, &e),
    }
}

/// Ratios `‖𝔽(first_order(m))‖ / ‖𝔽(first_order(m/2))‖` for each `m`.
pub fn first_order_ratios(case: InteractionCase, a0: f64, masses: &[f64], opts: &VerifyOptions) -> Result<Vec<f64>> {
    let base = BaseState::rigid(case, a0, opts.radial_nodes)?;
    let op = LinearizedOperator::new(&base, opts.shape_order)?;
    let ro = ResidualOptions { radial_nodes: opts.radial_nodes, angular: opts.angular, ..Default::default() };
    let map = ResidualMap::new(&base, opts.shape_order, ro)?;
    let norm = |m: f64| -> Result<f64> {
        let (g, b, l) = op.first_order_response(m)?;
        Ok(map.eval(&g, base.a0 + b, base.lambda0 + l, m)?.norm())
    };
    masses.iter().map(|&m| Ok(norm(m)? / norm(0.5 * m)?)).collect()
}

/// Base distance of criteria 7 and 8.
pub const CONTINUATION_A0: f64 = 2.0;
/// Non-resonant distance used for the companion check in the detail text.
pub const COMPANION_A0: f64 = 3.0;

fn residual_scaling(opts: &VerifyOptions) -> CriterionReport {
    const NAME: &str = "first-order residual scaling";
    let masses = [1e-4, 5e-5];
    let ok = |r: &[f64]| r.iter().all(|v| (3.2..=4.8).contains(v));
    let companion = match first_order_ratios(InteractionCase::B, COMPANION_A0, &masses, opts) {
        Ok(r) => format!("a0 = {COMPANION_A0}: ratios {:.4} {:.4} ({})", r[0], r[1], if ok(&r) { "in range" } else { "out of range" }),
        Err(e) => format!("a0 = {COMPANION_A0}: {e}"),
    };
    match first_order_ratios(InteractionCase::B, CONTINUATION_A0, &masses, opts) {
        Ok(r) => {
            let worst = r.iter().map(|v| (v - 4.0).abs()).fold(0.0, f64::max);
            CriterionReport::new(7, NAME, ok(&r), worst, 0.8, format!("|ratio - 4|; ratios {:.4} {:.4}; {companion}", r[0], r[1]))
        }
        Err(e) => CriterionReport::new(7, NAME, false, f64::NAN, 0.8, format!("a0 = {CONTINUATION_A0}: {e}; {companion}")),
    }
}

/// Solves at `m` and returns the worst of the normalized quality measures
/// (each divided by its tolerance) together with a description.
pub fn solution_quality(case: InteractionCase, a0: f64, m: f64, opts: &VerifyOptions) -> Result<(f64, String)> {
    let base = BaseState::rigid(case, a0, opts.radial_nodes)?;
    let op = LinearizedOperator::new(&base, opts.shape_order)?;
    let ro = ResidualOptions { radial_nodes: opts.radial_nodes, angular: opts.angular, ..Default::default() };
    let map = ResidualMap::new(&base, opts.shape_order, ro)?;
    let s = quasi_newton_solve(&op, &map, m)?;
    let d = &s.diagnostics;
    let com = d.center_of_mass[0].hypot(d.center_of_mass[1]);
    let score = (s.residual_norm / 1e-8)
        .max(d.area_error / 1e-8)
        .max(d.symmetry_defect / 1e-10)
        .max(com / 1e-6);
    Ok((
        score,
        format!(
            "residual {:.2e}, area {:.2e}, symmetry {:.2e}, center of mass {:.2e}, {} iterations",
            s.residual_norm, d.area_error, d.symmetry_defect, com, s.iterations
        ),
    ))
}

fn quasi_newton_quality(opts: &VerifyOptions) -> CriterionReport {
    const NAME: &str = "quasi-Newton solution at m = 1e-4";
    let companion = match solution_quality(InteractionCase::B, COMPANION_A0, 1e-4, opts) {
        Ok((s, d)) => format!("a0 = {COMPANION_A0}: {d} ({})", if s < 1.0 { "within tolerances" } else { "outside tolerances" }),
        Err(e) => format!("a0 = {COMPANION_A0}: {e}"),
    };
    match solution_quality(InteractionCase::B, CONTINUATION_A0, 1e-4, opts) {
        Ok((s, d)) => CriterionReport::new(8, NAME, s < 1.0, s, 1.0, format!("worst measure / tolerance; {d}; {companion}")),
        Err(e) => CriterionReport::new(8, NAME, false, f64::NAN, 1.0, format!("a0 = {CONTINUATION_A0}: {e}; {companion}")),
    }
}

fn potential_properties() -> CriterionReport {
    const NAME: &str = "disk potential";
    const TOL: f64 = 1e-4;
    let run = || -> Result<(bool, f64, f64, f64)> {
        let mut monotone = true;
        for case in [InteractionCase::A { nu: 0.5 }, InteractionCase::A { nu: 1.0 }, InteractionCase::B] {
            let mut prev = f64::INFINITY;
            for k in 1..=60 {
                let r = 1.0 + 9.0 * k as f64 / 60.0;
                let d1 = u0_d1(case, r)?;
                let d2 = u0_d2(case, r)?;
                let q = d1 / r;
                monotone &= d1 > 0.0 && d2 <= 0.0 && q < prev;
                prev = q;
            }
        }
        let centre = (u0(InteractionCase::A { nu: 1.0 }, 0.0)? + 2.0 * PI).abs();
        let unit = InteractionCase::A { nu: 1.0 };
        let calib = u0(unit, 2.0)? / u0_wallis_series_raw(2.0);
        let mut worst: f64 = 0.0;
        for k in 0..=35 {
            let r = 1.5 + 3.5 * k as f64 / 35.0;
            worst = worst.max((calib * u0_wallis_series_raw(r) - u0(unit, r)?).abs());
        }
        Ok((monotone, centre, worst, calib))
    };
    match run() {
        Ok((mono, centre, worst, calib)) => CriterionReport::new(
            9,
            NAME,
            mono && centre < 1e-8 && worst < TOL,
            worst,
            TOL,
            format!(
                "monotonicity {mono}; |U0(0) + 2pi| = {centre:.1e} (< 1e-8); series calibration {calib:.12} (library constant {WALLIS_SERIES_CALIBRATION:.12})"
            ),
        ),
        Err(e) => CriterionReport::failed(9, NAME, TOL, &e),
    }
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

/// Whether the closed polygon through `pts` crosses itself; checks all
/// pairs of non-adjacent edges.
pub fn polygon_self_intersects(pts: &[Complex64]) -> bool {
    let m = pts.len();
    for i in 0..m {
        let (a, b) = (pts[i], pts[(i + 1) % m]);
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            let (c, d) = (pts[j], pts[(j + 1) % m]);
            let d1 = orient(a, b, c);
            let d2 = orient(a, b, d);
            let d3 = orient(c, d, a);
            let d4 = orient(c, d, b);
            if d1 * d2 <= 0.0 && d3 * d4 <= 0.0 {
                return true;
            }
        }
    }
    false
}

/// Random shape whose boundary sup of `|h| + |h'|` is at most `level`.
pub fn random_certified_shape<R: Rng>(rng: &mut R, level: f64) -> ShapeCoeffs {
    let n = rng.gen_range(1..=12);
    let mut h = ShapeCoeffs::zeros(n);
    h.g0 = rng.gen_range(-1.0..1.0);
    for c in h.gn.iter_mut() {
        *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    // |h| + |h'| <= 2|ĝ₀| + Σ (n+2)|ĝ_n| on the circle
    let bound = 2.0 * h.g0.abs() + h.gn.iter().enumerate().map(|(k, c)| (k as f64 + 3.0) * c.norm()).sum::<f64>();
    h.scaled(level / bound)
}

fn conformal_certification(opts: &VerifyOptions) -> CriterionReport {
    const NAME: &str = "conformal certification";
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(10));
    let mut crossings = 0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..100 {
        let level = FRAC_1_SQRT_2 * rng.gen_range(0.05..0.999);
        let h = random_certified_shape(&mut rng, level);
        let margin = injectivity_margin(&h);
        min_margin = min_margin.min(margin);
        match eval_boundary(&h, 512) {
            Ok((pts, _)) => crossings += polygon_self_intersects(&pts) as usize,
            Err(_) => crossings += 1,
        }
    }
    let mut wrong_sign = 0;
    for _ in 0..20 {
        // a single mode has |h| + |h'| constant on the circle
        let n = rng.gen_range(1..=12);
        let level = FRAC_1_SQRT_2 * rng.gen_range(1.02..2.0);
        let mut h = ShapeCoeffs::zeros(n);
        h.gn[n - 1] = Complex64::from_polar(level / (n as f64 + 2.0), rng.gen_range(0.0..2.0 * PI));
        if !(injectivity_margin(&h) < 0.0) {
            wrong_sign += 1;
        }
    }
    CriterionReport::new(
        10,
        NAME,
        crossings == 0 && min_margin > 0.0 && wrong_sign == 0,
        (crossings + wrong_sign) as f64,
        0.0,
        format!("100 certified shapes (smallest margin {min_margin:.2e}), {crossings} crossings; 20 violating shapes, {wrong_sign} with nonnegative margin"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_oracle_detects_figure_eight() {
        let eight: Vec<Complex64> = (0..64)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 64.0;
                Complex64::new(t.sin(), (2.0 * t).sin())
            })
            .collect();
        assert!(polygon_self_intersects(&eight));
        let circle: Vec<Complex64> = (0..64).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 64.0)).collect();
        assert!(!polygon_self_intersects(&circle));
    }

    #[test]
    fn certified_shapes_respect_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let h = random_certified_shape(&mut rng, 0.5);
            assert!(injectivity_margin(&h) >= FRAC_1_SQRT_2 - 0.5 - 1e-15);
        }
    }

    #[test]
    fn cheap_criteria_pass() {
        let o = VerifyOptions::default();
        for id in [1, 5, 10] {
            let r = run_criterion(id, &o);
            assert!(r.passed, "{}", r.line());
        }
    }
}
