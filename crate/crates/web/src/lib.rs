//! WebAssembly bindings for the static demo page in `www/`. Every export
//! takes plain arguments and returns a JSON string.

pub mod ops;

use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_js<T: Serialize>(result: ops::OpResult<T>) -> Result<String, JsError> {
    let value = result.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn instances() -> Result<String, JsError> {
    to_js(Ok(ops::instances()))
}

#[wasm_bindgen(js_name = buildAdg)]
pub fn build_adg(agents: usize, edges: &str, method: &str) -> Result<String, JsError> {
    to_js(ops::build_adg(agents, edges, method))
}

#[wasm_bindgen(js_name = restartStats)]
pub fn restart_stats(game: &str, variant: &str, seeds: u32) -> Result<String, JsError> {
    to_js(ops::restart_stats(game, variant, seeds))
}

#[wasm_bindgen(js_name = solveTrace)]
pub fn solve_trace(game: &str, variant: &str, seed: u64) -> Result<String, JsError> {
    to_js(ops::solve_trace(game, variant, seed))
}
