//! WebAssembly bindings for the static page in `www/`.

pub mod api;

use wasm_bindgen::prelude::*;

fn finish(r: Result<serde_json::Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = equilibriumCurves)]
pub fn equilibrium_curves(scenario: &str, points: usize) -> Result<String, JsError> {
    finish(api::equilibrium_curves(scenario, points))
}

#[wasm_bindgen(js_name = poaSweep)]
pub fn poa_sweep(k: usize, mu: f64, tau_max: f64, steps: usize) -> Result<String, JsError> {
    finish(api::poa_sweep(k, mu, tau_max, steps))
}

#[wasm_bindgen(js_name = twoUserCurves)]
pub fn two_user_curves(mu1: f64, mu2: f64, alpha: f64, beta: f64, points: usize) -> Result<String, JsError> {
    finish(api::two_user_curves(mu1, mu2, alpha, beta, points))
}
