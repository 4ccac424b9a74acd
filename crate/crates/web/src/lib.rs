//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every export has a plain Rust counterpart returning `Result<_, String>`
//! so the logic can be exercised off the browser.

use tidal_core::coeffs::build_mode_table;
use tidal_core::linop::LinearizedOperator;
use tidal_core::potential::{omega_from_a0, BaseState, InteractionCase};
use tidal_core::spectral::eval_boundary;
use wasm_bindgen::prelude::*;

/// Radial resolution used by the page; coarser than the CLI default so
/// that slider drags stay interactive.
const RADIAL_NODES: usize = 64;

fn case_of(nu: f64) -> InteractionCase {
    if nu > 0.0 {
        InteractionCase::A { nu }
    } else {
        InteractionCase::B
    }
}

/// `Ω₀` for the particle at `a0`; `nu <= 0` selects the logarithmic kernel.
pub fn angular_speed(nu: f64, a0: f64) -> Result<f64, String> {
    omega_from_a0(case_of(nu), a0).map_err(|e| e.to_string())
}

/// `ω_0..=ω_N` for the rigid base state.
pub fn multipliers(nu: f64, a0: f64, n_max: usize) -> Result<Vec<f64>, String> {
    let base = BaseState::rigid(case_of(nu), a0, RADIAL_NODES).map_err(|e| e.to_string())?;
    Ok(build_mode_table(&base, n_max).map_err(|e| e.to_string())?.omega)
}

/// Boundary of the first-order shape as interleaved `x1, x2` pairs,
/// followed by the particle position.
pub fn first_order_outline(nu: f64, a0: f64, mass: f64, n_max: usize, points: usize) -> Result<Vec<f64>, String> {
    let base = BaseState::rigid(case_of(nu), a0, RADIAL_NODES).map_err(|e| e.to_string())?;
    let op = LinearizedOperator::new(&base, n_max).map_err(|e| e.to_string())?;
    let (h, b, _) = op.first_order_response(mass).map_err(|e| e.to_string())?;
    let (f, _) = eval_boundary(&h, points.max(2 * n_max + 2)).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = f.iter().flat_map(|z| [z.re, z.im]).collect();
    out.extend([base.a0 + b, 0.0]);
    Ok(out)
}

#[wasm_bindgen(js_name = angularSpeed)]
pub fn angular_speed_js(nu: f64, a0: f64) -> Result<f64, JsError> {
    angular_speed(nu, a0).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = multipliers)]
pub fn multipliers_js(nu: f64, a0: f64, n_max: usize) -> Result<Vec<f64>, JsError> {
    multipliers(nu, a0, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = firstOrderOutline)]
pub fn first_order_outline_js(nu: f64, a0: f64, mass: f64, n_max: usize, points: usize) -> Result<Vec<f64>, JsError> {
    first_order_outline(nu, a0, mass, n_max, points).map_err(|e| JsError::new(&e))
}
