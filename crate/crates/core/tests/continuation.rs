//! Continuation in the particle mass at non-resonant base states.

use tidal_core::kernel::VorticityProfile;
use tidal_core::linop::{nonresonance_scan, LinearizedOperator};
use tidal_core::potential::{make_base_state, BaseState, InteractionCase};
use tidal_core::residual::{quasi_newton_solve, write_history_csv, ResidualMap, ResidualOptions};
use tidal_core::verify::{first_order_ratios, VerifyOptions};
use tidal_core::Error;

fn opts() -> ResidualOptions {
    ResidualOptions { radial_nodes: 64, angular: 128, ..Default::default() }
}

#[test]
fn residual_is_quadratic_in_mass() {
    let o = VerifyOptions { radial_nodes: 64, angular: 128, shape_order: 24, ..Default::default() };
    for r in first_order_ratios(InteractionCase::B, 3.0, &[1e-4, 5e-5], &o).unwrap() {
        assert!((3.2..=4.8).contains(&r), "{r}");
    }
}

#[test]
fn first_order_response_is_linear() {
    let base = BaseState::rigid(InteractionCase::B, 3.0, 64).unwrap();
    let op = LinearizedOperator::new(&base, 16).unwrap();
    let (g1, b1, l1) = op.first_order_response(1e-5).unwrap();
    let (g2, b2, l2) = op.first_order_response(2e-5).unwrap();
    assert!((b2 / b1 - 2.0).abs() < 1e-12);
    assert!((l2 / l1 - 2.0).abs() < 1e-12);
    assert!(g2.sub(&g1.scaled(2.0)).norm_inf() < 1e-20);
    assert!(g1.mode(2).re.abs() > 0.0);
}

#[test]
fn solution_departs_from_first_order_quadratically() {
    let base = BaseState::rigid(InteractionCase::B, 3.0, 64).unwrap();
    let op = LinearizedOperator::new(&base, 16).unwrap();
    let map = ResidualMap::new(&base, 16, opts()).unwrap();
    let gap = |m: f64| {
        let s = quasi_newton_solve(&op, &map, m).unwrap();
        let (g, b, _) = op.first_order_response(m).unwrap();
        s.h.sub(&g).norm_inf().max((s.a - base.a0 - b).abs())
    };
    let ratio = gap(2e-4) / gap(1e-4);
    assert!((3.2..=4.8).contains(&ratio), "{ratio}");
}

#[test]
fn rigid_gravitational_solution_has_physical_invariants() {
    let base = BaseState::rigid(InteractionCase::B, 3.0, 64).unwrap();
    let op = LinearizedOperator::new(&base, 24).unwrap();
    let map = ResidualMap::new(&base, 24, opts()).unwrap();
    let s = quasi_newton_solve(&op, &map, 1e-4).unwrap();
    let d = &s.diagnostics;
    assert!(s.residual_norm < 1e-8);
    assert!(d.area_error < 1e-8);
    assert!(d.symmetry_defect < 1e-10);
    assert!(d.center_of_mass[0].hypot(d.center_of_mass[1]) < 1e-6);
    assert!(d.transverse_force.abs() < 1e-12);
    assert!(d.pressure_jump_sup < 1e-8);
    // the body recoils away from the particle and stretches along the axis
    let recoil = -1e-4 * s.a / std::f64::consts::PI;
    assert!((s.h.mode(1).re - recoil).abs() < 1e-3 * recoil.abs());
    assert!(s.h.mode(2).re > 0.0);
    let mut buf = Vec::new();
    write_history_csv(&s.history, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), s.history.len() + 1);
}

#[test]
fn nonrigid_and_riesz_bases_converge() {
    let cases = [
        (InteractionCase::B, VorticityProfile::exponential(-2.0, 0.5, 1.0).unwrap()),
        (InteractionCase::A { nu: 1.0 }, VorticityProfile::linear(-1.0, 0.5).unwrap()),
    ];
    for (case, g) in cases {
        let base = make_base_state(case, 3.0, g, 64).unwrap();
        let op = LinearizedOperator::new(&base, 16).unwrap();
        let scan = nonresonance_scan(&op, 2.0);
        assert!(scan.resonances.is_empty(), "{case:?}: {scan:?}");
        let map = ResidualMap::new(&base, 16, opts()).unwrap();
        let s = quasi_newton_solve(&op, &map, 1e-4).unwrap();
        assert!(s.residual_norm < 1e-8, "{case:?}: {}", s.residual_norm);
        let c = s.diagnostics.center_of_mass;
        assert!(c[0].hypot(c[1]) < 1e-6, "{case:?}: {c:?}");
    }
}

#[test]
fn resonant_base_blocks_continuation() {
    let base = BaseState::rigid(InteractionCase::B, 2.0, 64).unwrap();
    let op = LinearizedOperator::new(&base, 8).unwrap();
    let map = ResidualMap::new(&base, 8, opts()).unwrap();
    match quasi_newton_solve(&op, &map, 1e-4) {
        Err(Error::Resonance { n, .. }) => assert_eq!(n, 2),
        other => panic!("{other:?}"),
    }
}
