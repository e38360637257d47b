//! Browser bindings: three interactive views over `bellkit`.
//!
//! Every export returns a JSON string; errors become JavaScript exceptions.

use bellkit::optimize::{circle_angles, quantum_circle_boundary, scan_tilted, SeesawConfig};
use bellkit::quantum::NoiseModel;
use bellkit::simulate::{reproduce, Experiment, Overrides, ReproduceTable};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn noisy(visibility: f64, seed: u64) -> bellkit::Result<Overrides> {
    let noise = NoiseModel::new(visibility, 1.0, 0.1f64.to_radians())?;
    Ok(Overrides { noise: Some(noise), seed: Some(seed), ..Overrides::default() })
}

fn rows(t: &ReproduceTable) -> Value {
    json!({ "columns": t.columns, "rows": t.rows })
}

/// Ideal boundary and one simulated run of the CHSH/CHSH' circle.
pub fn circle_json(points: usize, visibility: f64, seed: u64) -> bellkit::Result<String> {
    let ideal = quantum_circle_boundary(&circle_angles(points));
    let run = reproduce(&Experiment::ChshCircle { points }, &noisy(visibility, seed)?)?;
    Ok(json!({ "ideal": ideal, "measured": rows(&run) }).to_string())
}

/// Qubit optimum of the tilted inequality with its state angle.
pub fn tilted_json(tau: f64, restarts: usize) -> bellkit::Result<String> {
    let cfg = SeesawConfig { restarts: restarts.max(1), ..SeesawConfig::default() };
    let row = scan_tilted(&[tau], &cfg)?.remove(0);
    Ok(serde_json::to_string(&row)?)
}

/// Simulated chained scan `n = 2..=n_max`.
pub fn chained_json(n_max: usize, visibility: f64, seed: u64) -> bellkit::Result<String> {
    let run = reproduce(&Experiment::ChainedScan { n_max }, &noisy(visibility, seed)?)?;
    Ok(rows(&run).to_string())
}

fn js<T>(r: bellkit::Result<T>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn circle(points: usize, visibility: f64, seed: u32) -> Result<String, JsValue> {
    js(circle_json(points, visibility, u64::from(seed)))
}

#[wasm_bindgen]
pub fn tilted_optimum(tau: f64, restarts: usize) -> Result<String, JsValue> {
    js(tilted_json(tau, restarts))
}

#[wasm_bindgen]
pub fn chained_scan(n_max: usize, visibility: f64, seed: u32) -> Result<String, JsValue> {
    js(chained_json(n_max, visibility, u64::from(seed)))
}
