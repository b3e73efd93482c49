//! Three library operations behind `wasm-bindgen`, each taking spec strings
//! and returning a JSON string. The `*_json` functions hold the logic and run
//! natively too; the exported wrappers only convert errors.

use orlicz_gauge::conditions::{hlp_check, ScanConfig};
use orlicz_gauge::gauge::gauge_norm;
use orlicz_gauge::harness::to_json;
use orlicz_gauge::spec::{parse_function, parse_gauge, parse_kernel};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Cells used when the page does not say otherwise.
pub const DEMO_CELLS: usize = 512;

#[derive(Serialize)]
struct Rearranged {
    /// `(t, f*(t))` at the left end of each cell, plus the right end.
    points: Vec<(f64, f64)>,
    integral: f64,
    sup: f64,
}

#[derive(Serialize)]
struct Norm {
    value: f64,
    rearranged: f64,
    modular_at_value: f64,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct Hlp {
    value: f64,
    window_values: Vec<f64>,
    verdict: String,
    warnings: Vec<String>,
}

fn window(lo: f64, hi: f64) -> Result<(f64, f64), String> {
    if lo > 0.0 && hi > lo && hi.is_finite() {
        Ok((lo, hi))
    } else {
        Err(format!("bad window [{lo}, {hi}]"))
    }
}

pub fn rearrange_json(f: &str, lo: f64, hi: f64, cells: usize) -> Result<String, String> {
    let w = window(lo, hi)?;
    let g = parse_function(f).and_then(|s| s.discretize(w, cells)).map_err(|e| e.to_string())?;
    let fs = g.rearrange();
    let mut points: Vec<(f64, f64)> = fs.edges().iter().zip(fs.values()).map(|(&t, &v)| (t, v)).collect();
    if let Some(&end) = fs.edges().last() {
        points.push((end, 0.0));
    }
    let sup = fs.values().first().copied().unwrap_or(0.0);
    to_json(&Rearranged { points, integral: fs.integrate(), sup }).map_err(|e| e.to_string())
}

pub fn gauge_norm_json(f: &str, gauge: &str, lo: f64, hi: f64, cells: usize) -> Result<String, String> {
    let w = window(lo, hi)?;
    let g = parse_function(f).and_then(|s| s.discretize(w, cells)).map_err(|e| e.to_string())?;
    let spec = parse_gauge(gauge, w, cells).map_err(|e| e.to_string())?;
    let v = gauge_norm(&g, &spec);
    let r = gauge_norm(&g.rearrange(), &spec);
    let mut warnings = v.warnings.clone();
    warnings.extend(r.warnings);
    to_json(&Norm { value: v.value, rearranged: r.value, modular_at_value: v.modular_at_value, warnings }).map_err(|e| e.to_string())
}

pub fn hlp_json(kernel: &str, p: f64, lo: f64, hi: f64) -> Result<String, String> {
    let w = window(lo, hi)?;
    let fam = parse_kernel(kernel, w, DEMO_CELLS).map_err(|e| e.to_string())?;
    let scan = ScanConfig { window: w, ..ScanConfig::default() };
    let r = hlp_check(&fam, p, &scan).map_err(|e| e.to_string())?;
    let out = Hlp { value: r.value, window_values: r.window_values, verdict: r.verdict.to_string(), warnings: r.warnings };
    to_json(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn rearrange(f: &str, lo: f64, hi: f64, cells: usize) -> Result<String, JsError> {
    rearrange_json(f, lo, hi, cells).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = gaugeNorm)]
pub fn gauge_norm_js(f: &str, gauge: &str, lo: f64, hi: f64, cells: usize) -> Result<String, JsError> {
    gauge_norm_json(f, gauge, lo, hi, cells).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn hlp(kernel: &str, p: f64, lo: f64, hi: f64) -> Result<String, JsError> {
    hlp_json(kernel, p, lo, hi).map_err(|e| JsError::new(&e))
}
