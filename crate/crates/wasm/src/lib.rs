//! Browser bindings: Werner dilation certificates, the CHSH maximum along
//! the Werner line, and the perfect-correlation violation search.
//!
//! Each binding returns a JSON string. The `*_json` functions hold the logic
//! and are plain Rust, so they also run (and are tested) natively.

use dso_core::bell::{bell_max_violation, chsh_max, Variant};
use dso_core::source_ops::{certify, qubit_werner_operator, werner_dso};
use dso_core::states::{is_separable_werner, werner_state};
use dso_core::theorems::phi_grid;
use dso_core::{Error, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper limits that keep a single call responsive in a browser tab.
const MAX_D: usize = 5;
const MAX_POINTS: usize = 101;
const MAX_RESTARTS: usize = 200;

fn check_inputs(d: usize, restarts: usize) -> Result<()> {
    if !(2..=MAX_D).contains(&d) {
        return Err(Error::Precondition(format!("d must be between 2 and {MAX_D}")));
    }
    if !(1..=MAX_RESTARTS).contains(&restarts) {
        return Err(Error::Precondition(format!(
            "restarts must be between 1 and {MAX_RESTARTS}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct DilationReport {
    d: usize,
    phi: f64,
    kind: &'static str,
    separable: bool,
    min_eigenvalue: f64,
    trace_norm: f64,
    marginal_residuals: Vec<f64>,
    is_dso: bool,
}

pub fn dilation_report_json(d: usize, phi: f64) -> Result<String> {
    check_inputs(d, 1)?;
    let rho = werner_state(d, phi)?;
    let (kind, t) = if d == 2 {
        ("qubit_operator", qubit_werner_operator(phi)?)
    } else {
        ("symmetric_dilation", werner_dso(d, phi)?)
    };
    let cert = certify(&t, &rho)?;
    let report = DilationReport {
        d,
        phi,
        kind,
        separable: is_separable_werner(d, phi),
        min_eigenvalue: cert.min_eigenvalue,
        trace_norm: t.trace_norm(),
        is_dso: cert.is_dso(),
        marginal_residuals: cert.marginal_residuals,
    };
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[derive(Serialize)]
struct Curve {
    d: usize,
    phi: Vec<f64>,
    chsh: Vec<f64>,
}

pub fn chsh_curve_json(d: usize, points: usize, restarts: usize, seed: u64) -> Result<String> {
    check_inputs(d, restarts)?;
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(Error::Precondition(format!(
            "points must be between 2 and {MAX_POINTS}"
        )));
    }
    let phi = phi_grid(points);
    let chsh = phi
        .iter()
        .map(|&p| Ok(chsh_max(&werner_state(d, p)?, restarts, seed).functional_value))
        .collect::<Result<Vec<f64>>>()?;
    Ok(serde_json::to_string(&Curve { d, phi, chsh }).expect("curve serializes"))
}

#[derive(Serialize)]
struct BellSearch {
    d: usize,
    phi: f64,
    variant: Variant,
    max_violation: f64,
    sweeps: usize,
}

pub fn bell_search_json(d: usize, phi: f64, variant: &str, restarts: usize, seed: u64) -> Result<String> {
    check_inputs(d, restarts)?;
    let variant: Variant = variant.parse()?;
    let r = bell_max_violation(&werner_state(d, phi)?, restarts, seed, variant);
    let out = BellSearch {
        d,
        phi,
        variant,
        max_violation: r.functional_value,
        sweeps: r.trajectory.len(),
    };
    Ok(serde_json::to_string(&out).expect("search serializes"))
}

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Certificate for the Werner source-operator at `(d, Φ)`.
#[wasm_bindgen]
pub fn dilation_report(d: usize, phi: f64) -> std::result::Result<String, JsError> {
    dilation_report_json(d, phi).map_err(js_err)
}

/// Maximum CHSH value over `points` equally spaced Φ in `[-1, 1]`.
#[wasm_bindgen]
pub fn chsh_curve(d: usize, points: usize, restarts: usize, seed: u64) -> std::result::Result<String, JsError> {
    chsh_curve_json(d, points, restarts, seed).map_err(js_err)
}

/// Largest violation of the perfect-correlation inequality found.
#[wasm_bindgen]
pub fn bell_search(
    d: usize,
    phi: f64,
    variant: &str,
    restarts: usize,
    seed: u64,
) -> std::result::Result<String, JsError> {
    bell_search_json(d, phi, variant, restarts, seed).map_err(js_err)
}
