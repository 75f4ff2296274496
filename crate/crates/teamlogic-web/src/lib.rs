//! Browser bindings for the demo page. Every call takes model JSON and text
//! and returns a JSON string, so the same functions are testable natively.

use std::collections::BTreeSet;

use serde_json::json;
use teamlogic::bisim::state_bisim;
use teamlogic::hintikka::theta_state;
use teamlogic::kripke::Model;
use teamlogic::parse;
use teamlogic::teameval::judge;
use wasm_bindgen::prelude::*;

fn model(text: &str) -> Result<Model, String> {
    Model::from_json(text).map_err(|e| format!("model: {e}"))
}

fn letters(csv: &str) -> BTreeSet<String> {
    csv.split(',').map(str::trim).filter(|p| !p.is_empty()).map(String::from).collect()
}

pub fn eval_json(model_json: &str, state: &str, formula: &str, anti: bool) -> Result<String, String> {
    let m = model(model_json)?;
    let s = m.resolve_state(state).map_err(|e| e.to_string())?;
    let f = parse(formula).map_err(|e| e.to_string())?;
    let verdict = judge(&m, s, &f, anti).map_err(|e| e.to_string())?;
    Ok(json!({
        "polarity": if anti { "anti-support" } else { "support" },
        "state": m.state_names(s),
        "formula": f.to_string(),
        "verdict": verdict,
    })
    .to_string())
}

pub fn bisim_json(left: &str, left_state: &str, right: &str, right_state: &str, k: usize) -> Result<String, String> {
    let (a, b) = (model(left)?, model(right)?);
    let s = a.resolve_state(left_state).map_err(|e| e.to_string())?;
    let t = b.resolve_state(right_state).map_err(|e| e.to_string())?;
    let same = state_bisim(&a, s, &b, t, k, None).map_err(|e| e.to_string())?;
    Ok(json!({ "k": k, "left": a.state_names(s), "right": b.state_names(t), "bisimilar": same }).to_string())
}

/// Characteristic formula of a state; an empty `sig` means the model's letters.
pub fn hintikka_json(model_json: &str, state: &str, k: usize, sig: &str) -> Result<String, String> {
    let m = model(model_json)?;
    let s = m.resolve_state(state).map_err(|e| e.to_string())?;
    let mut sig = letters(sig);
    if sig.is_empty() {
        sig = m.signature();
    }
    if let Some(p) = sig.iter().find(|p| !m.has_prop(p)) {
        return Err(format!("proposition `{p}` is not in the model"));
    }
    let f = theta_state(&m, s, k, &sig);
    Ok(json!({ "kind": "theta", "k": k, "signature": sig, "formula": f.to_string() }).to_string())
}

#[wasm_bindgen]
pub fn eval(model_json: &str, state: &str, formula: &str, anti: bool) -> Result<String, JsError> {
    eval_json(model_json, state, formula, anti).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bisim(left: &str, left_state: &str, right: &str, right_state: &str, k: usize) -> Result<String, JsError> {
    bisim_json(left, left_state, right, right_state, k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn hintikka(model_json: &str, state: &str, k: usize, sig: &str) -> Result<String, JsError> {
    hintikka_json(model_json, state, k, sig).map_err(|e| JsError::new(&e))
}
