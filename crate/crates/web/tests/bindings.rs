use tidal_web::{angular_speed, first_order_outline, multipliers};

#[test]
fn gravitational_speed_at_two() {
    let w = angular_speed(0.0, 2.0).unwrap();
    assert!((w - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
}

#[test]
fn rigid_multipliers_match_closed_form() {
    let w2 = std::f64::consts::PI / 9.0;
    let om = multipliers(0.0, 3.0, 16).unwrap();
    for (n, w) in om.iter().enumerate().skip(1) {
        let c = std::f64::consts::FRAC_PI_2 * (1.0 - 1.0 / n as f64);
        assert!((w - (-0.5 * n as f64 * w2 + c)).abs() < 1e-10, "n={n}");
    }
}

#[test]
fn outline_has_points_and_particle() {
    let v = first_order_outline(0.0, 3.0, 1e-2, 12, 64).unwrap();
    assert_eq!(v.len(), 2 * 64 + 2);
    // the body recoils away from the particle
    assert!(v[64] < -1.0 && v[v.len() - 2] > 2.9);
    assert!(first_order_outline(0.0, 2.0, 1e-2, 12, 64).unwrap_err().contains("resonant"));
}
