//! Interaction potential of the unit disk and the unperturbed equilibrium.

use crate::error::{Error, Result};
use crate::kernel::VorticityProfile;
use crate::quad::{graded_around, graded_toward_end, graded_toward_start, Rule};
use crate::radial_ode::{solve_phi0, RadialProfile};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Interaction kernel between fluid elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum InteractionCase {
    /// Attractive power law `-|x - y|^{-ν}` with `ν ∈ (0, 1]`.
    A { nu: f64 },
    /// Logarithmic kernel `ln|x - y|`.
    B,
}

impl InteractionCase {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InteractionCase::A { nu } if !(nu > 0.0 && nu <= 1.0) => Err(Error::InvalidInput(
                format!("exponent nu must lie in (0, 1], got {nu}"),
            )),
            _ => Ok(()),
        }
    }

    /// Kernel as a function of the squared distance, with its first two
    /// derivatives in that variable.
    #[inline]
    pub(crate) fn kernel_d(&self, d: f64) -> (f64, f64, f64) {
        match *self {
            InteractionCase::A { nu } => {
                let h = 0.5 * nu;
                let p = d.powf(-h);
                (-p, h * p / d, -h * (h + 1.0) * p / (d * d))
            }
            InteractionCase::B => (0.5 * d.ln(), 0.5 / d, -0.5 / (d * d)),
        }
    }

    /// Potential of a unit point source at squared distance `d`.
    #[inline]
    pub fn kernel(&self, d: f64) -> f64 {
        match *self {
            InteractionCase::A { nu } => -d.powf(-0.5 * nu),
            InteractionCase::B => 0.5 * d.ln(),
        }
    }
}

/// Target absolute accuracy for the disk-potential quadrature.
pub const U0_TOLERANCE: f64 = 1e-9;

/// Integrates `F(s, c, d)` over the unit disk in polar coordinates around
/// the point `(r, 0)`, where `s` is the source radius, `c = cos φ` and `d`
/// the squared distance. The rule is graded toward the (near-)singular
/// point `s = min(r, 1)`, `φ = 0`; `base` sets the nodes per panel.
fn disk_integral<F: Fn(f64, f64, f64) -> f64>(r: f64, base: usize, f: &F) -> f64 {
    let srule = if r <= 1.0 {
        graded_around(0.0, 1.0, r, 1e-15, base, 0.0)
    } else {
        let w = (0.05 * (r - 1.0).min(1.0)).max(1e-15);
        graded_toward_end(0.0, 1.0, w, base, 0.0)
    };
    let mut total = 0.0;
    for (s, ws) in srule.iter() {
        if s == 0.0 {
            continue;
        }
        let scale = ((r - s).abs() / (r * s).sqrt().max(1e-300) * 0.1).max(1e-15);
        let prule = if scale >= 1.0 {
            Rule::gauss(0.0, PI, base + 8)
        } else {
            graded_toward_start(0.0, PI, scale, base, 0.0)
        };
        let mut inner = 0.0;
        for (phi, wp) in prule.iter() {
            let sh = (0.5 * phi).sin();
            let d = (r - s) * (r - s) + 4.0 * r * s * sh * sh;
            inner += wp * f(s, phi.cos(), d);
        }
        total += ws * s * 2.0 * inner;
    }
    total
}

/// Runs [`disk_integral`] at two resolutions; returns the finer value and
/// the difference as an error estimate.
fn disk_integral_est<F: Fn(f64, f64, f64) -> f64>(r: f64, f: F) -> (f64, f64) {
    let coarse = disk_integral(r, 14, &f);
    let fine = disk_integral(r, 22, &f);
    (fine, (fine - coarse).abs())
}

fn check(value: f64, err: f64, target: f64) -> Result<f64> {
    if !(err <= target * (1.0 + value.abs())) || !value.is_finite() {
        Err(Error::Quadrature { achieved: err, target })
    } else {
        Ok(value)
    }
}

/// `U₀(r)` by direct quadrature of the disk integral.
pub fn u0_quadrature(case: InteractionCase, r: f64) -> Result<(f64, f64)> {
    case.validate()?;
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!("radius must be nonnegative, got {r}")));
    }
    if r == 0.0 {
        let rule = graded_toward_start(0.0, 1.0, 1e-15, 22, 0.0);
        let v = 2.0 * PI * rule.integrate(|s| s * case.kernel(s * s));
        return Ok((v, 0.0));
    }
    Ok(disk_integral_est(r, |_, _, d| case.kernel(d)))
}

/// `U₀'(r)` by quadrature, for `r > 1`.
pub fn u0_d1_quadrature(case: InteractionCase, r: f64) -> Result<(f64, f64)> {
    case.validate()?;
    exterior(r)?;
    Ok(disk_integral_est(r, |s, c, d| {
        let (_, k1, _) = case.kernel_d(d);
        2.0 * k1 * (r - s * c)
    }))
}

/// `U₀''(r)` by quadrature, for `r > 1`.
pub fn u0_d2_quadrature(case: InteractionCase, r: f64) -> Result<(f64, f64)> {
    case.validate()?;
    exterior(r)?;
    Ok(disk_integral_est(r, |s, c, d| {
        let (_, k1, k2) = case.kernel_d(d);
        let x = r - s * c;
        4.0 * k2 * x * x + 2.0 * k1
    }))
}

fn exterior(r: f64) -> Result<()> {
    if !(r > 1.0) {
        return Err(Error::InvalidInput(format!(
            "derivatives of the disk potential are evaluated for r > 1, got {r}"
        )));
    }
    Ok(())
}

/// Unperturbed potential `U₀(r) = ∫_D K(|x - y|) dy` at `|x| = r`.
pub fn u0(case: InteractionCase, r: f64) -> Result<f64> {
    match case {
        InteractionCase::B => {
            if !(r >= 0.0) {
                return Err(Error::InvalidInput(format!("radius must be nonnegative, got {r}")));
            }
            Ok(if r <= 1.0 { -0.5 * PI * (1.0 - r * r) } else { PI * r.ln() })
        }
        InteractionCase::A { .. } => {
            let (v, e) = u0_quadrature(case, r)?;
            check(v, e, U0_TOLERANCE)
        }
    }
}

/// `U₀'(r)` for `r > 1`.
pub fn u0_d1(case: InteractionCase, r: f64) -> Result<f64> {
    match case {
        InteractionCase::B => {
            exterior(r)?;
            Ok(PI / r)
        }
        InteractionCase::A { .. } => {
            let (v, e) = u0_d1_quadrature(case, r)?;
            check(v, e, U0_TOLERANCE)
        }
    }
}

/// `U₀''(r)` for `r > 1`.
pub fn u0_d2(case: InteractionCase, r: f64) -> Result<f64> {
    match case {
        InteractionCase::B => {
            exterior(r)?;
            Ok(-PI / (r * r))
        }
        InteractionCase::A { .. } => {
            let (v, e) = u0_d2_quadrature(case, r)?;
            check(v, e, U0_TOLERANCE)
        }
    }
}

/// Multiplier turning the tabulated Wallis series for `ν = 1` into the
/// potential; fixed by comparison with direct quadrature (see tests).
pub const WALLIS_SERIES_CALIBRATION: f64 = 2.0 * PI;

/// Uncalibrated Wallis-type series for `U₀` at `ν = 1`.
pub fn u0_wallis_series_raw(r: f64) -> f64 {
    let mut w = PI / 2.0;
    let mut sum = 0.0;
    for k in 0..2_000_000usize {
        if k > 0 {
            w *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        let kf = k as f64;
        let term = if r >= 1.0 {
            w * w / (2.0 * kf + 2.0) / r.powf(2.0 * kf + 1.0)
        } else {
            w * w * (r / (2.0 * kf + 2.0) + r / (2.0 * kf - 1.0) - r.powf(2.0 * kf) / (2.0 * kf - 1.0))
        };
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && k > 4 {
            break;
        }
    }
    -4.0 / (PI * PI) * sum
}

/// Calibrated series for `U₀` at `ν = 1`.
pub fn u0_wallis_series(r: f64) -> f64 {
    WALLIS_SERIES_CALIBRATION * u0_wallis_series_raw(r)
}

/// Angular speed `Ω₀ = sqrt(U₀'(a₀)/a₀)` balancing the particle at distance `a₀`.
pub fn omega_from_a0(case: InteractionCase, a0: f64) -> Result<f64> {
    if !(a0 > 1.0) || !a0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "particle distance must exceed 1, got {a0}"
        )));
    }
    Ok((u0_d1(case, a0)? / a0).sqrt())
}

/// Smallest and largest admissible particle distance.
pub const A0_RANGE: (f64, f64) = (2.0, 1e6);

/// Inverse of [`omega_from_a0`] on `[2, 10⁶]` by bisection in `ln a`.
pub fn a0_from_omega(case: InteractionCase, omega0: f64) -> Result<f64> {
    let (lo_a, hi_a) = A0_RANGE;
    let w_max = omega_from_a0(case, lo_a)?;
    let w_min = omega_from_a0(case, hi_a)?;
    if !(omega0 >= w_min && omega0 <= w_max) {
        return Err(Error::InvalidInput(format!(
            "omega0 = {omega0} outside the admissible interval [{w_min}, {w_max}]"
        )));
    }
    if omega0 == w_max {
        return Ok(lo_a);
    }
    let (mut lo, mut hi) = (lo_a.ln(), hi_a.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let w = omega_from_a0(case, mid.exp())?;
        if w > omega0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// The `m = 0` equilibrium: unit disk, particle at `(a₀, 0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseState {
    pub case: InteractionCase,
    pub profile: VorticityProfile,
    pub omega0: f64,
    pub a0: f64,
    pub lambda0: f64,
    pub phi0: RadialProfile,
    pub dphi0_at_1: f64,
    pub g_at_boundary: f64,
    /// `U₀(1)`.
    pub u0_at_1: f64,
    /// `U₀''(a₀)`.
    pub u0_d2_at_a0: f64,
}

/// Threshold below which `φ₀'(1)` is treated as zero.
pub const DEGENERATE_DPHI: f64 = 1e-10;

/// Builds the base state for a particle at distance `a0`.
pub fn make_base_state(
    case: InteractionCase,
    a0: f64,
    profile: VorticityProfile,
    radial_nodes: usize,
) -> Result<BaseState> {
    case.validate()?;
    if !(a0 >= A0_RANGE.0) {
        return Err(Error::InvalidInput(format!("a0 must be at least 2, got {a0}")));
    }
    let omega0 = omega_from_a0(case, a0)?;
    let phi0 = solve_phi0(&profile, radial_nodes)?;
    let dphi = phi0.deriv_at_1;
    if dphi.abs() < DEGENERATE_DPHI {
        return Err(Error::DegenerateBoundaryDerivative(dphi));
    }
    let u1 = u0(case, 1.0)?;
    Ok(BaseState {
        case,
        omega0,
        a0,
        lambda0: 0.5 * dphi * dphi - 0.5 * omega0 * omega0 + u1,
        dphi0_at_1: dphi,
        g_at_boundary: profile.eval(0.0),
        u0_at_1: u1,
        u0_d2_at_a0: u0_d2(case, a0)?,
        profile,
        phi0,
    })
}

impl BaseState {
    /// Rigid rotation with the angular speed that balances the particle.
    pub fn rigid(case: InteractionCase, a0: f64, radial_nodes: usize) -> Result<Self> {
        let omega0 = omega_from_a0(case, a0)?;
        make_base_state(case, a0, VorticityProfile::rigid_preset(omega0)?, radial_nodes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_b_closed_forms() {
        assert_eq!(u0(InteractionCase::B, 1.0).unwrap(), 0.0);
        assert!((u0(InteractionCase::B, std::f64::consts::E).unwrap() - PI).abs() < 1e-15);
        assert!((u0_d1(InteractionCase::B, 2.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((u0_d2(InteractionCase::B, 2.0).unwrap() + PI / 4.0).abs() < 1e-15);
        assert!(u0_d1(InteractionCase::B, 1.0).is_err());
    }

    #[test]
    fn case_b_quadrature_matches_closed_form() {
        for r in [0.0, 0.3, 0.999, 1.0, 1.001, 1.5, 3.0] {
            let (q, _) = u0_quadrature(InteractionCase::B, r).unwrap();
            let c = u0(InteractionCase::B, r).unwrap();
            assert!((q - c).abs() < 1e-8, "r={r} q={q} c={c}");
        }
        for r in [1.01, 2.0, 5.0] {
            let (d1, _) = u0_d1_quadrature(InteractionCase::B, r).unwrap();
            let (d2, _) = u0_d2_quadrature(InteractionCase::B, r).unwrap();
            assert!((d1 - PI / r).abs() < 1e-8, "r={r}");
            assert!((d2 + PI / (r * r)).abs() < 1e-7, "r={r} {d2}");
        }
    }

    #[test]
    fn case_a_center_and_boundary() {
        let a = InteractionCase::A { nu: 1.0 };
        assert!((u0(a, 0.0).unwrap() + 2.0 * PI).abs() < 1e-12);
        // ∫_D dy/|1 - y| = 4
        assert!((u0(a, 1.0).unwrap() + 4.0).abs() < 1e-9);
    }

    #[test]
    fn wallis_series_calibration() {
        let a = InteractionCase::A { nu: 1.0 };
        let ratio = u0(a, 2.0).unwrap() / u0_wallis_series_raw(2.0);
        assert!((ratio - WALLIS_SERIES_CALIBRATION).abs() < 1e-9);
        assert!((u0_wallis_series(0.0) + 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn omega_a0_round_trip() {
        let b = InteractionCase::B;
        assert!((omega_from_a0(b, 2.0).unwrap() - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((a0_from_omega(b, PI.sqrt() / 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(a0_from_omega(b, 10.0).is_err());
        for case in [b, InteractionCase::A { nu: 0.5 }] {
            for a in [2.0, 2.5, 4.0] {
                let w = omega_from_a0(case, a).unwrap();
                assert!((a0_from_omega(case, w).unwrap() - a).abs() < 1e-10);
            }
            assert!(omega_from_a0(case, 2.0).unwrap() > omega_from_a0(case, 3.0).unwrap());
        }
    }

    #[test]
    fn rigid_base_state_case_b() {
        let s = BaseState::rigid(InteractionCase::B, 2.0, 32).unwrap();
        assert!((s.omega0 - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((s.dphi0_at_1 + PI.sqrt() / 2.0).abs() < 1e-13);
        assert!(s.lambda0.abs() < 1e-13);
        let z = make_base_state(InteractionCase::B, 2.0, VorticityProfile::constant(0.0), 32);
        assert!(matches!(z, Err(Error::DegenerateBoundaryDerivative(_))));
    }
}
