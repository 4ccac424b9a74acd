//! Independent oracles for the disk potential and the coefficients c_n.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use tidal_core::coeffs::{c_table_quadrature, gamma0};
use tidal_core::potential::{u0, InteractionCase};

/// Seeded Monte Carlo estimate of the disk potential and its standard error.
fn monte_carlo_u0(case: InteractionCase, r: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let rho = rng.gen::<f64>().sqrt();
        let t = rng.gen_range(0.0..2.0 * PI);
        let d = r * r + rho * rho - 2.0 * r * rho * t.cos();
        let v = PI * case.kernel(d);
        s += v;
        s2 += v * v;
    }
    let n = samples as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean) / n).sqrt())
}

#[test]
fn disk_potential_against_monte_carlo() {
    for (k, case) in [InteractionCase::A { nu: 0.5 }, InteractionCase::A { nu: 1.0 }, InteractionCase::B].into_iter().enumerate() {
        for r in [1.5, 3.0] {
            let (mc, se) = monte_carlo_u0(case, r, 400_000, 11 + k as u64);
            let q = u0(case, r).unwrap();
            assert!((mc - q).abs() < 5.0 * se, "{case:?} r={r}: {q} vs {mc} ± {se}");
        }
    }
}

/// `c_n` from the Pochhammer double series: with `a_l = (ν/2)_l / l!`,
/// `c̃_k = π Σ_l a_l a_{l+k} / (2k + 2l + 2)` and
/// `c_n = ν Σ_{k≤n} c̃_k - 2(n+1) c̃_n`.
fn pochhammer_cn(nu: f64, nmax: usize) -> Vec<f64> {
    let terms = 4_000_000;
    let mut a = vec![1.0; terms + nmax + 1];
    for l in 1..a.len() {
        a[l] = a[l - 1] * (0.5 * nu + l as f64 - 1.0) / l as f64;
    }
    let ct: Vec<f64> = (0..=nmax)
        .map(|k| {
            let mut s = 0.0;
            for l in 0..terms {
                s += a[l] * a[l + k] / (2.0 * (k + l) as f64 + 2.0);
            }
            // tail: a_l ~ l^{ν/2-1}/Γ(ν/2), summand ~ C l^{ν-3}
            let l = terms as f64;
            let c = a[terms - 1] * a[terms - 1 + k] / (2.0 * (k as f64 + l) + 2.0) * l.powf(3.0 - nu);
            PI * (s + c * l.powf(nu - 2.0) / (2.0 - nu))
        })
        .collect();
    let mut out = Vec::with_capacity(nmax + 1);
    let mut cum = 0.0;
    for n in 0..=nmax {
        cum += ct[n];
        out.push(nu * cum - 2.0 * (n as f64 + 1.0) * ct[n]);
    }
    out
}

#[test]
fn half_exponent_coefficients_against_series() {
    let q = c_table_quadrature(InteractionCase::A { nu: 0.5 }, 16).unwrap();
    let s = pochhammer_cn(0.5, 16);
    for n in 0..=16 {
        assert!((q.values[n] - s[n]).abs() < 1e-8, "n={n}: {} vs {}", q.values[n], s[n]);
    }
}

#[test]
fn frozen_half_exponent_values() {
    let q = c_table_quadrature(InteractionCase::A { nu: 0.5 }, 128).unwrap();
    let frozen = [
        (0, -2.472099569735),
        (2, 0.35315708139),
        (8, 0.79304422895),
        (16, 0.92274036236),
        (32, 1.01449643366),
        (64, 1.07938611533),
        (128, 1.12527152492),
    ];
    for (n, v) in frozen {
        assert!((q.values[n] - v).abs() < 1e-9, "n={n}: {}", q.values[n]);
    }
}

#[test]
fn half_exponent_growth_decelerates() {
    // for ν < 1 the increments over doublings shrink roughly like 2^{ν-1}
    let q = c_table_quadrature(InteractionCase::A { nu: 0.5 }, 256).unwrap();
    let inc: Vec<f64> = [16usize, 32, 64, 128]
        .iter()
        .map(|&n| q.values[2 * n] - q.values[n])
        .collect();
    for w in inc.windows(2) {
        let ratio = w[1] / w[0];
        assert!(ratio > 0.6 && ratio < 0.8, "{ratio}");
    }
}

#[test]
fn gamma0_frozen_values() {
    assert!((gamma0(1.0).unwrap() - 1.0).abs() < 1e-9);
    assert!((gamma0(0.5).unwrap() - 0.41777137910516693).abs() < 1e-9);
    assert!((gamma0(0.25).unwrap() - 0.20097714419009327).abs() < 1e-9);
}
