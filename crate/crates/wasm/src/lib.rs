//! Browser bindings. Each export returns a JSON string; failures surface as
//! JavaScript exceptions carrying the error message.

use heatctl::modal::{min_modes, ModalSystem, PlantParams};
use heatctl::sim::{simulate_closed_loop, SimConfig};
use heatctl::synthesis::{gamma_curve as curve, synthesize as design};
use heatctl::GainMethod;
use nalgebra::DMatrix;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Plant modes of the demo simulation; keeps a 20 unit run interactive.
pub const DEMO_MODES: usize = 32;
pub const DEMO_DT: f64 = 5e-4;
/// Rows returned by `simulate`, apart from the initial one.
pub const DEMO_ROWS: usize = 400;

/// Row-major nested arrays, or null.
fn matrix(m: &Option<DMatrix<f64>>) -> Value {
    match m {
        Some(m) => m.row_iter().map(|row| row.iter().copied().collect::<Vec<_>>()).collect(),
        None => Value::Null,
    }
}

fn rows(m: &heatctl::sim::SimTrace, stride: usize) -> impl Iterator<Item = usize> + '_ {
    (0..m.len()).step_by(stride.max(1))
}

/// `n_min` is raised to the smallest admissible mode count.
pub fn gamma_curve_json(q: f64, sigma: f64, n_min: usize, n_max: usize) -> Result<String, String> {
    let params = PlantParams::new(q, sigma, 0.0).map_err(|e| e.to_string())?;
    let n_min = n_min.max(min_modes(&params));
    if n_min > n_max {
        return Err(format!("empty range {n_min}..={n_max}"));
    }
    let table = curve(q, sigma, n_min..=n_max).map_err(|e| e.to_string())?;
    let v: Vec<Value> = table
        .iter()
        .map(|r| json!({ "N": r.n, "harmonic": r.harmonic, "sobolev": r.sobolev, "ratio": r.ratio() }))
        .collect();
    Ok(Value::Array(v).to_string())
}

pub fn synthesize_json(q: f64, sigma: f64, n: usize, method: &str) -> Result<String, String> {
    let method: GainMethod = method.parse().map_err(|e: heatctl::Error| e.to_string())?;
    let params = PlantParams::new(q, sigma, 0.0).map_err(|e| e.to_string())?;
    let report = design(params, n, method).map_err(|e| e.to_string())?;
    let r = &report.result;
    Ok(json!({
        "feasible": report.feasible(),
        "reason": r.reason.as_ref().map(|x| x.code()),
        "gamma": report.gain.gamma,
        "rho_xz": r.rho_xz,
        "M_constant": report.stability_constant(),
        "K": matrix(&r.k),
        "L": matrix(&r.l),
    })
    .to_string())
}

pub fn simulate_json(q: f64, sigma: f64, n: usize, horizon: f64, h: f64) -> Result<String, String> {
    let params = PlantParams::new(q, sigma, 0.0).map_err(|e| e.to_string())?;
    let report = design(params, n, GainMethod::Harmonic).map_err(|e| e.to_string())?;
    if let Some(reason) = report.reason() {
        return Err(format!("design is infeasible ({})", reason.code()));
    }
    let sys = ModalSystem::new(params, n).map_err(|e| e.to_string())?;
    let cfg = SimConfig {
        modes: DEMO_MODES.max(4 * n),
        dt: DEMO_DT,
        horizon,
        h,
        ..SimConfig::default()
    };
    let trace = simulate_closed_loop(&sys, &report.result, &cfg).map_err(|e| e.to_string())?;
    let stride = trace.len().div_ceil(DEMO_ROWS + 1);
    let pick = |col: &Vec<f64>| -> Vec<f64> { rows(&trace, stride).map(|i| col[i]).collect() };
    Ok(json!({
        "t": pick(&trace.t),
        "state_norm": pick(&trace.state_norm),
        "err_norm": pick(&trace.err_norm),
        "u": pick(&trace.u),
    })
    .to_string())
}

/// `[{N, harmonic, sobolev, ratio}]` for admissible `N` in `n_min..=n_max`.
#[wasm_bindgen(js_name = gammaCurve)]
pub fn gamma_curve(q: f64, sigma: f64, n_min: usize, n_max: usize) -> Result<String, JsError> {
    gamma_curve_json(q, sigma, n_min, n_max).map_err(|e| JsError::new(&e))
}

/// Controller gains and feasibility verdict.
#[wasm_bindgen]
pub fn synthesize(q: f64, sigma: f64, n: usize, method: &str) -> Result<String, JsError> {
    synthesize_json(q, sigma, n, method).map_err(|e| JsError::new(&e))
}

/// Downsampled closed-loop trace from the cubic initial profile.
#[wasm_bindgen]
pub fn simulate(q: f64, sigma: f64, n: usize, horizon: f64, h: f64) -> Result<String, JsError> {
    simulate_json(q, sigma, n, horizon, h).map_err(|e| JsError::new(&e))
}
