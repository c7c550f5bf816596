//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each export returns a flat `Float64Array`; the layout is documented on
//! the matching function in [`demo`].

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// Comma-separated labels for the blocks returned by [`msd_curves`].
#[wasm_bindgen]
pub fn filter_names() -> String {
    demo::CURVE_FILTERS.iter().map(|a| a.name()).collect::<Vec<_>>().join(",")
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn msd_curves(
    noise: &str,
    a: f64,
    b: f64,
    mu: f64,
    rho: f64,
    iterations: u32,
    trials: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    let model = demo::noise(noise, a, b).map_err(js)?;
    demo::msd_curves(model, mu, rho, iterations.into(), trials.into(), seed.into()).map_err(js)
}

#[wasm_bindgen]
pub fn cim_profile(sigma2: f64, half_range: f64, points: u32) -> Result<Vec<f64>, JsError> {
    demo::cim_profile(sigma2, half_range, points as usize).map_err(js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn noise_histogram(
    noise: &str,
    a: f64,
    b: f64,
    samples: u32,
    bins: u32,
    lo: f64,
    hi: f64,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    let model = demo::noise(noise, a, b).map_err(js)?;
    demo::noise_histogram(model, samples as usize, bins as usize, lo, hi, seed.into()).map_err(js)
}
