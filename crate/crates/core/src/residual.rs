//! The nonlinear free-boundary map, the stream function on the deformed
//! body, and the frozen-Jacobian continuation in the particle mass.

use crate::cheb::{ChebGrid, Parity};
use crate::error::{Error, Result};
use crate::kernel::VorticityProfile;
use crate::linop::LinearizedOperator;
use crate::potential::{BaseState, InteractionCase};
use crate::quad::{graded_toward_start, Rule};
use crate::spectral::{analyze, area, first_moment, injectivity_margin, BoundarySpectrum, ShapeCoeffs};
use crate::SCHEMA_VERSION;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

/// Discretization and iteration controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualOptions {
    /// Chebyshev nodes in (0, 1].
    pub radial_nodes: usize,
    /// Uniform angles on the boundary and in the disk.
    pub angular: usize,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub newton_tol: f64,
    pub newton_max: usize,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            radial_nodes: 128,
            angular: 256,
            picard_tol: 1e-13,
            picard_max: 500,
            newton_tol: 1e-8,
            newton_max: 50,
        }
    }
}

impl ResidualOptions {
    /// Angular grid used for truncation order `n`.
    pub fn angular_for(&self, n: usize) -> usize {
        self.angular.max((4 * (n + 2)).next_power_of_two())
    }
}

fn fft_pair(m: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
}

/// Values of `f` and `f'` at `r e^{i(φ_j + δ)}` for all `M` angles `φ_j`.
fn ring_values(
    b: &[Complex64],
    r: f64,
    delta: f64,
    inv: &dyn Fft<f64>,
    m: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut f = vec![Complex64::new(0.0, 0.0); m];
    let mut df = vec![Complex64::new(0.0, 0.0); m];
    let rot = Complex64::from_polar(r, delta);
    let mut rk = Complex64::new(1.0, 0.0); // (r e^{iδ})^k
    for (k, c) in b.iter().enumerate() {
        f[k % m] += c * rk;
        if k + 1 < b.len() {
            df[k % m] += b[k + 1] * (k as f64 + 1.0) * rk;
        }
        rk *= rot;
    }
    inv.process(&mut f);
    inv.process(&mut df);
    (f, df)
}

/// Per-mode Dirichlet solvers for `Δ - Λ` on the Chebyshev x uniform grid.
pub struct PoissonSolver {
    p: usize,
    m: usize,
    lambda: f64,
    lus: Vec<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    /// Interpolation matrices to the Gauss rule, by parity.
    interp: [DMatrix<f64>; 2],
    green: Rule,
}

impl PoissonSolver {
    pub fn new(p: usize, m: usize, lambda: f64) -> Result<Self> {
        let grid = ChebGrid::get(p);
        let r = grid.nodes();
        let mut lus = Vec::with_capacity(m / 2 + 1);
        for k in 0..=m / 2 {
            let par = Parity::of_mode(k);
            let d1 = grid.d1(par);
            let d2 = grid.d2(par);
            let kk = (k * k) as f64;
            let op = DMatrix::from_fn(p - 1, p - 1, |i, j| {
                let ri = r[i + 1];
                let mut v = d2[(i + 1, j + 1)] + d1[(i + 1, j + 1)] / ri;
                if i == j {
                    v -= kk / (ri * ri) + lambda;
                }
                v
            });
            let lu = op.lu();
            if !lu.is_invertible() {
                return Err(Error::LinearSolve(format!("disk Poisson mode {k}")));
            }
            lus.push(lu);
        }
        let green = Rule::gauss(0.0, 1.0, p + m / 4 + 24);
        let interp = [Parity::Even, Parity::Odd].map(|par| {
            DMatrix::from_fn(green.len(), p, |i, j| {
                let mut e = vec![0.0; p];
                e[j] = 1.0;
                grid.interpolate(&e, par, green.nodes[i])
            })
        });
        Ok(Self { p, m, lambda, lus, interp, green })
    }

    fn mode_index(&self, k: usize) -> usize {
        if k <= self.m / 2 {
            k
        } else {
            self.m - k
        }
    }
}

/// Stream function `φ_h` on the disk: Chebyshev radii x uniform angles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiskField {
    pub radii: Vec<f64>,
    pub angular: usize,
    /// `values[i * M + j]` at radius `radii[i]`, angle `2πj/M`.
    pub values: Vec<f64>,
    /// Normal derivative `∂_r φ(1, φ_j)`.
    pub boundary_normal: Vec<f64>,
    pub iterations: usize,
    pub last_update: f64,
}

impl DiskField {
    /// Boundary trace (identically zero by construction).
    pub fn boundary_trace(&self) -> &[f64] {
        &self.values[..self.angular]
    }

    /// Angular derivative of the boundary trace, spectrally.
    pub fn boundary_tangential(&self) -> Vec<f64> {
        let m = self.angular;
        let (fwd, inv) = fft_pair(m);
        let mut buf: Vec<Complex64> = self.boundary_trace().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fwd.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            let w = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
            *c *= Complex64::new(0.0, w) / m as f64;
        }
        inv.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Radial profile of the angular mean at the grid radii.
    pub fn mean_profile(&self) -> Vec<f64> {
        self.values
            .chunks(self.angular)
            .map(|row| row.iter().sum::<f64>() / self.angular as f64)
            .collect()
    }
}

/// Solves `Δφ = |f'|² G(φ)` in the disk, `φ = 0` on the circle, by damped
/// Picard iteration `(Δ - Λ)φ_{k+1} = |f'|²G(φ_k) - Λφ_k`.
pub fn solve_phi_h(
    h: &ShapeCoeffs,
    g: &VorticityProfile,
    warm: &[f64],
    solver: &PoissonSolver,
    opts: &ResidualOptions,
) -> Result<DiskField> {
    let margin = injectivity_margin(h);
    if !(margin > 0.0) {
        return Err(Error::NonInjective { margin });
    }
    let p = solver.p;
    let m = solver.m;
    let grid = ChebGrid::get(p);
    let radii = grid.nodes().to_vec();
    let (fwd, inv) = fft_pair(m);
    let b = h.f_coeffs();
    let mut weight = vec![0.0; p * m];
    for (i, &r) in radii.iter().enumerate() {
        let (_, df) = ring_values(&b, r, 0.0, inv.as_ref(), m);
        for j in 0..m {
            weight[i * m + j] = df[j].norm_sqr();
        }
    }
    let mut u = vec![0.0; p * m];
    for i in 1..p {
        for j in 0..m {
            u[i * m + j] = warm[i];
        }
    }
    let lam = solver.lambda;
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); m]; p];
    let mut last = f64::INFINITY;
    let mut iterations = 0;
    let mut rhs_hat = rows.clone();
    for it in 0..opts.picard_max {
        iterations = it + 1;
        for i in 0..p {
            for j in 0..m {
                let v = u[i * m + j];
                let q = weight[i * m + j] * g.eval(v);
                rows[i][j] = Complex64::new(q - lam * v, 0.0);
                rhs_hat[i][j] = Complex64::new(q, 0.0);
            }
            fwd.process(&mut rows[i]);
        }
        let mut hat = vec![vec![Complex64::new(0.0, 0.0); m]; p];
        for k in 0..m {
            let lu = &solver.lus[solver.mode_index(k)];
            let rhs = DMatrix::from_fn(p - 1, 2, |i, c| {
                let z = rows[i + 1][k] / m as f64;
                if c == 0 {
                    z.re
                } else {
                    z.im
                }
            });
            let sol = lu
                .solve(&rhs)
                .ok_or_else(|| Error::LinearSolve(format!("disk Poisson mode {k}")))?;
            for i in 0..p - 1 {
                hat[i + 1][k] = Complex64::new(sol[(i, 0)], sol[(i, 1)]);
            }
        }
        let mut change: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 1..p {
            inv.process(&mut hat[i]);
            for j in 0..m {
                let v = hat[i][j].re;
                change = change.max((v - u[i * m + j]).abs());
                scale = scale.max(v.abs());
                u[i * m + j] = v;
            }
        }
        last = change;
        if change <= opts.picard_tol * (1.0 + scale) {
            break;
        }
        if it + 1 == opts.picard_max {
            return Err(Error::NonConvergence { what: "disk stream function", iterations, last });
        }
    }
    // Boundary normal derivative: ∂_r û_k(1) = ∫₀¹ r^{|k|+1} q̂_k(r) dr.
    for i in 0..p {
        for j in 0..m {
            let v = u[i * m + j];
            rhs_hat[i][j] = Complex64::new(weight[i * m + j] * g.eval(v), 0.0);
        }
        fwd.process(&mut rhs_hat[i]);
    }
    let mut dn = vec![Complex64::new(0.0, 0.0); m];
    for (k, dnk) in dn.iter_mut().enumerate() {
        let mk = solver.mode_index(k);
        let e = &solver.interp[mk % 2];
        let col_re = DVector::from_fn(p, |i, _| rhs_hat[i][k].re);
        let col_im = DVector::from_fn(p, |i, _| rhs_hat[i][k].im);
        let vr = e * col_re;
        let vi = e * col_im;
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, (x, w)) in solver.green.iter().enumerate() {
            let f = w * x.powi(mk as i32 + 1);
            acc += Complex64::new(vr[idx], vi[idx]) * f;
        }
        *dnk = acc / m as f64;
    }
    inv.process(&mut dn);
    Ok(DiskField {
        radii,
        angular: m,
        values: u,
        boundary_normal: dn.iter().map(|c| c.re).collect(),
        iterations,
        last_update: last,
    })
}

/// Offsets and weights of the boundary rule, graded toward zero on both sides.
fn offset_rule(n: usize) -> Rule {
    let half = graded_toward_start(0.0, PI, 1e-9, 16, 2.0 * (n as f64 + 2.0));
    let mut r = Rule::new();
    for (x, w) in half.iter() {
        r.nodes.push(x);
        r.weights.push(w);
        r.nodes.push(-x);
        r.weights.push(w);
    }
    r
}

/// `U_h ∘ f_h(e^{iφ_j})` on `M` uniform angles.
///
/// The area integral over `f_h(D)` is turned into a boundary integral with
/// the divergence theorem: `K(X - ξ) = Δ_ξ Φ(ξ)` where `Φ` is a radial
/// primitive of the kernel, so `U_h(X) = ∮ ∇Φ · n ds`.
pub fn boundary_potential(h: &ShapeCoeffs, case: InteractionCase, m: usize) -> Result<Vec<f64>> {
    case.validate()?;
    let n = h.order();
    if m < 2 * n + 4 {
        return Err(Error::InvalidInput(format!("{m} angles are too few for N = {n}")));
    }
    let b = h.f_coeffs();
    let (_, inv) = fft_pair(m);
    let (targets, _) = ring_values(&b, 1.0, 0.0, inv.as_ref(), m);
    let rule = offset_rule(n);
    let mut out = vec![0.0; m];
    for (delta, wd) in rule.iter() {
        let (src, dsrc) = ring_values(&b, 1.0, delta, inv.as_ref(), m);
        for j in 0..m {
            let ang = 2.0 * PI * j as f64 / m as f64 + delta;
            // n ds = e^{iψ} f'(e^{iψ}) dψ
            let nds = Complex64::from_polar(1.0, ang) * dsrc[j];
            let w = targets[j] - src[j];
            let d2 = w.norm_sqr();
            // gradient of Φ in the source variable
            let grad = match case {
                InteractionCase::A { nu } => w * (d2.powf(-0.5 * nu) / (2.0 - nu)),
                InteractionCase::B => {
                    if d2 == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        -w * ((d2.ln() - 1.0) / 4.0)
                    }
                }
            };
            out[j] += wd * (grad.conj() * nds).re;
        }
    }
    Ok(out)
}

/// Gradient `(∂₁U_h, ∂₂U_h)` at `X = (a, 0)` as a complex number, from
/// `∇U_h(X) = -∮ K(X - ξ) n ds` on `M` boundary points.
pub fn particle_force_vector(h: &ShapeCoeffs, case: InteractionCase, a: f64, m: usize) -> Result<Complex64> {
    let b = h.f_coeffs();
    let (_, inv) = fft_pair(m);
    let (f, df) = ring_values(&b, 1.0, 0.0, inv.as_ref(), m);
    let x = Complex64::new(a, 0.0);
    let dist = f.iter().map(|p| (x - p).norm()).fold(f64::INFINITY, f64::min);
    if !(a >= 1.5) || !(dist >= 0.25) {
        return Err(Error::Proximity { distance: dist });
    }
    let dpsi = 2.0 * PI / m as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let nds = Complex64::from_polar(1.0, j as f64 * dpsi) * df[j];
        acc -= nds * case.kernel((x - f[j]).norm_sqr());
    }
    Ok(acc * dpsi)
}

/// `∂_{x₁} U_h(a, 0)`.
pub fn particle_force(h: &ShapeCoeffs, case: InteractionCase, a: f64, m: usize) -> Result<f64> {
    Ok(particle_force_vector(h, case, a, m)?.re)
}

/// Components of `𝔽(h, a, λ, m)`.
#[derive(Debug, Clone)]
pub struct ResidualValue {
    /// First component sampled on the boundary grid.
    pub samples: Vec<f64>,
    pub spectrum: BoundarySpectrum,
    pub particle: f64,
    pub mass: f64,
    pub field: DiskField,
    /// `U_h ∘ f_h` on the boundary grid.
    pub self_potential: Vec<f64>,
}

impl ResidualValue {
    /// Sup norm over the three components.
    pub fn norm(&self) -> f64 {
        self.samples
            .iter()
            .fold(self.particle.abs().max(self.mass.abs()), |a, v| a.max(v.abs()))
    }
}

/// Evaluator of `𝔽` with a fixed base state and discretization.
pub struct ResidualMap {
    pub base: BaseState,
    pub opts: ResidualOptions,
    pub n_max: usize,
    solver: PoissonSolver,
    warm: Vec<f64>,
}

impl ResidualMap {
    pub fn new(base: &BaseState, n_max: usize, opts: ResidualOptions) -> Result<Self> {
        let m = opts.angular_for(n_max);
        let p = opts.radial_nodes;
        let grid = ChebGrid::get(p);
        let warm: Vec<f64> = grid.nodes().iter().map(|&r| base.phi0.eval(r)).collect();
        // Λ bounds |f'|² G'(φ) near the base state with some room for the deformation.
        let gmax = warm.iter().map(|&v| base.profile.d1(v)).fold(0.0, f64::max);
        let lambda = if gmax > 0.0 { 1.25 * gmax } else { 0.0 };
        let solver = PoissonSolver::new(p, m, lambda)?;
        Ok(Self { base: base.clone(), opts, n_max, solver, warm })
    }

    pub fn angular(&self) -> usize {
        self.solver.m
    }

    /// Evaluates `𝔽(h, a, λ, m)`.
    pub fn eval(&self, h: &ShapeCoeffs, a: f64, lambda: f64, mass: f64) -> Result<ResidualValue> {
        let m = self.angular();
        let case = self.base.case;
        let field = solve_phi_h(h, &self.base.profile, &self.warm, &self.solver, &self.opts)?;
        let upot = boundary_potential(h, case, m)?;
        let b = h.f_coeffs();
        let (_, inv) = fft_pair(m);
        let (f, df) = ring_values(&b, 1.0, 0.0, inv.as_ref(), m);
        let w2 = self.base.omega0 * self.base.omega0;
        let x = Complex64::new(a, 0.0);
        let samples: Vec<f64> = (0..m)
            .map(|j| {
                let dn = field.boundary_normal[j];
                0.5 * dn * dn / df[j].norm_sqr() - 0.5 * w2 * f[j].norm_sqr()
                    + upot[j]
                    + mass * case.kernel((f[j] - x).norm_sqr())
                    - lambda
            })
            .collect();
        let spectrum = analyze(&samples, self.n_max);
        let particle = w2 * a - particle_force(h, case, a, m)?;
        Ok(ResidualValue {
            samples,
            spectrum,
            particle,
            mass: area(h) - PI,
            field,
            self_potential: upot,
        })
    }
}

/// Physical diagnostics of a solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub area_error: f64,
    /// `(∫_{E_h} x dx + m X) / (π + m)`.
    pub center_of_mass: [f64; 2],
    pub symmetry_defect: f64,
    pub injectivity_margin: f64,
    /// Sup over the boundary of `|P - U_h - m U_X|`.
    pub pressure_jump_sup: f64,
    /// `∂_{x₂} U_h(X)`.
    pub transverse_force: f64,
    /// Sup of the tangential derivative of `φ_h` on the circle.
    pub tangential_sup: f64,
}

/// One quasi-Newton step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterateRecord {
    pub iteration: usize,
    pub residual: f64,
    pub a: f64,
    pub lambda: f64,
    pub coeff_norm: f64,
    pub injectivity_margin: f64,
}

/// A converged equilibrium.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub schema_version: u32,
    pub m: f64,
    pub h: ShapeCoeffs,
    pub a: f64,
    pub lambda: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub diagnostics: Diagnostics,
    pub history: Vec<IterateRecord>,
}

/// Writes the iterate history as CSV.
pub fn write_history_csv<W: Write>(hist: &[IterateRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "iteration,residual,a,lambda,coeff_norm,injectivity_margin")?;
    for r in hist {
        writeln!(
            w,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.iteration, r.residual, r.a, r.lambda, r.coeff_norm, r.injectivity_margin
        )?;
    }
    Ok(())
}

/// `F(u) = ∫₀^u (G(s) + 2Ω₀) ds`.
pub fn pressure_primitive(g: &VorticityProfile, omega0: f64, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    Rule::gauss(0.0, u, 24).integrate(|s| g.eval(s) + 2.0 * omega0)
}

fn diagnostics(map: &ResidualMap, h: &ShapeCoeffs, a: f64, lambda: f64, mass: f64, r: &ResidualValue) -> Result<Diagnostics> {
    let m = map.angular();
    let base = &map.base;
    let b = h.f_coeffs();
    let (_, inv) = fft_pair(m);
    let (f, df) = ring_values(&b, 1.0, 0.0, inv.as_ref(), m);
    let x = Complex64::new(a, 0.0);
    let w2 = base.omega0 * base.omega0;
    let trace = r.field.boundary_trace();
    let mut jump: f64 = 0.0;
    for j in 0..m {
        let grad2 = r.field.boundary_normal[j].powi(2) / df[j].norm_sqr();
        let p = pressure_primitive(&base.profile, base.omega0, trace[j]) - 0.5 * grad2
            + 0.5 * w2 * f[j].norm_sqr()
            + lambda;
        let outer = r.self_potential[j] + mass * base.case.kernel((f[j] - x).norm_sqr());
        jump = jump.max((p - outer).abs());
    }
    let com = (first_moment(h) + x * mass) / (PI + mass);
    let tangential_sup = r.field.boundary_tangential().iter().fold(0.0f64, |s, v| s.max(v.abs()));
    Ok(Diagnostics {
        area_error: (area(h) - PI).abs(),
        center_of_mass: [com.re, com.im],
        symmetry_defect: h.symmetry_defect(),
        injectivity_margin: injectivity_margin(h),
        pressure_jump_sup: jump,
        transverse_force: particle_force_vector(h, base.case, a, m)?.im,
        tangential_sup,
    })
}

/// Frozen-Jacobian iteration `x_{k+1} = x_k - D𝔽(base)⁻¹ 𝔽(x_k, m)` from the
/// first-order warm start.
pub fn quasi_newton_solve(
    op: &LinearizedOperator,
    map: &ResidualMap,
    mass: f64,
) -> Result<EquilibriumSolution> {
    let base = &map.base;
    let (h1, a1, l1) = op.first_order_response(mass)?;
    let mut h = h1;
    let mut a = base.a0 + a1;
    let mut lambda = base.lambda0 + l1;
    let mut history: Vec<IterateRecord> = Vec::new();
    let mut increases = 0;
    for it in 0..=map.opts.newton_max {
        let margin = injectivity_margin(&h);
        if !(margin > 0.0) {
            return Err(Error::NonInjective { margin });
        }
        let r = map.eval(&h, a, lambda, mass)?;
        let norm = r.norm();
        history.push(IterateRecord {
            iteration: it,
            residual: norm,
            a,
            lambda,
            coeff_norm: h.norm_inf(),
            injectivity_margin: margin,
        });
        if !norm.is_finite() {
            return Err(Error::Divergence { history: history.iter().map(|x| x.residual).collect() });
        }
        if norm < map.opts.newton_tol {
            let diagnostics = diagnostics(map, &h, a, lambda, mass, &r)?;
            return Ok(EquilibriumSolution {
                schema_version: SCHEMA_VERSION,
                m: mass,
                h,
                a,
                lambda,
                residual_norm: norm,
                iterations: it,
                diagnostics,
                history,
            });
        }
        if history.len() >= 2 && norm > history[history.len() - 2].residual {
            increases += 1;
            if increases >= 3 {
                return Err(Error::Divergence { history: history.iter().map(|x| x.residual).collect() });
            }
        } else {
            increases = 0;
        }
        let (dg, db, dmu) = op.solve(&r.spectrum, r.particle, r.mass)?;
        h = h.sub(&dg);
        a -= db;
        lambda -= dmu;
    }
    Err(Error::NonConvergence {
        what: "quasi-Newton continuation",
        iterations: map.opts.newton_max,
        last: history.last().map(|x| x.residual).unwrap_or(f64::NAN),
    })
}
