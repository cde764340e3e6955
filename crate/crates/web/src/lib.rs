//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Each export takes and returns JSON strings. The plain `*_json` functions
//! carry the logic and are what the native tests call.

use biparsdp::certify::check_edge_system_nonpositive;
use biparsdp::io::parse_instance;
use biparsdp::relaxation::solve_relaxation;
use biparsdp::transform::{epsilon_sweep_validation, PerturbationMode};
use biparsdp::{certify, CertifyOptions, QcqpInstance, SymMatrix};
use serde::Deserialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn options(text: &str) -> Result<CertifyOptions, String> {
    let mut opts = if text.trim().is_empty() {
        CertifyOptions::default()
    } else {
        let patch: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut base = serde_json::to_value(CertifyOptions::default()).map_err(|e| e.to_string())?;
        if let (Some(b), Some(p)) = (base.as_object_mut(), patch.as_object()) {
            for (k, v) in p {
                if !b.contains_key(k) {
                    return Err(format!("unknown option '{k}'"));
                }
                b.insert(k.clone(), v.clone());
            }
        }
        serde_json::from_value(base).map_err(|e| e.to_string())?
    };
    opts.parallel = 1;
    opts.validate().map_err(|e| e.to_string())?;
    Ok(opts)
}

/// Certification report for an instance in the file format.
pub fn certify_json(instance: &str, opts: &str) -> Result<String, String> {
    let inst = parse_instance(instance).map_err(|e| e.to_string())?;
    let report = certify(&inst, &options(opts)?);
    Ok(report.to_json())
}

#[derive(Deserialize)]
struct Explorer {
    /// `[q11, q12, q22]`.
    q0: [f64; 3],
    q1: [f64; 3],
    b: f64,
}

fn sym2(q: [f64; 3]) -> SymMatrix {
    let mut m = SymMatrix::zeros(2);
    m.set(0, 0, q[0]);
    m.set(0, 1, q[1]);
    m.set(1, 1, q[2]);
    m
}

/// Two-variable, one-constraint explorer: verdict, edge value and the
/// relaxation optimum for `min x^T Q0 x s.t. x^T Q1 x <= b`.
pub fn explore_2x2_json(input: &str) -> Result<String, String> {
    let e: Explorer = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let inst = QcqpInstance::from_parts(sym2(e.q0), vec![(sym2(e.q1), e.b)]).map_err(|e| e.to_string())?;
    let opts = CertifyOptions::default();
    let report = certify(&inst, &opts);
    let edge = if inst.objective().get(0, 1) != 0.0 || inst.matrix(1).get(0, 1) != 0.0 {
        check_edge_system_nonpositive(&inst, 0, 1, &opts).ok()
    } else {
        None
    };
    let relaxation = match solve_relaxation(&inst, opts.solver_tol, opts.rank_tol) {
        Ok(r) => json!({
            "value": r.primal_value,
            "rank": r.numeric_rank,
            "x": r.x,
            "X": r.x_star.to_rows(),
            "y": r.y_star,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let out = json!({
        "verdict": report.verdict,
        "rule": report.applied_rule.map(|r| r.to_string()),
        "assumption": report.assumption_check,
        "mu": edge.as_ref().map(|s| s.mu),
        "mu_attained": edge.as_ref().map(|s| s.attained),
        "relaxation": relaxation,
        "notes": report.notes,
    });
    Ok(out.to_string())
}

#[derive(Deserialize)]
struct Sweep {
    instance: serde_json::Value,
    epsilons: Vec<f64>,
    #[serde(default = "connect")]
    mode: PerturbationMode,
}

fn connect() -> PerturbationMode {
    PerturbationMode::Connect
}

/// Epsilon-perturbation trajectory for an instance.
pub fn epsilon_sweep_json(input: &str) -> Result<String, String> {
    let s: Sweep = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let inst = parse_instance(&s.instance.to_string()).map_err(|e| e.to_string())?;
    let pts =
        epsilon_sweep_validation(&inst, &s.epsilons, s.mode, &options("")?).map_err(|e| e.to_string())?;
    serde_json::to_string(&pts).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = certify)]
pub fn certify_js(instance: &str, options: &str) -> Result<String, JsError> {
    js(certify_json(instance, options))
}

#[wasm_bindgen(js_name = explore2x2)]
pub fn explore_2x2_js(input: &str) -> Result<String, JsError> {
    js(explore_2x2_json(input))
}

#[wasm_bindgen(js_name = epsilonSweep)]
pub fn epsilon_sweep_js(input: &str) -> Result<String, JsError> {
    js(epsilon_sweep_json(input))
}
