//! Browser bindings. Every export takes plain numbers or strings and returns
//! a JSON string; the page in `www/` does the drawing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use ttns::entropy::{
    alpha_threshold, error_lower_bound, error_upper_bound, extremal_spread, majorizing_extremal, renyi_entropy,
};
use ttns::network::exact_decompose;
use ttns::targets::{make_named, NamedState};
use ttns::truncation::{truncate_lazy, truncate_projector};
use ttns::{TreeGraph, TruncationPlan};
use wasm_bindgen::prelude::*;

/// α grid for the bound curves, skipping α = 1.
pub fn alpha_grid() -> Vec<f64> {
    (1..=100).map(|k| k as f64 * 0.05).filter(|a| (a - 1.0).abs() > 1e-9).collect()
}

fn normalize(weights: &[f64]) -> Result<Vec<f64>, String> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err("weights must be finite and nonnegative".into());
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err("weights sum to zero".into());
    }
    let mut p: Vec<f64> = weights.iter().map(|w| w / total).collect();
    p.sort_by(|a, b| b.total_cmp(a));
    Ok(p)
}

/// Rényi entropies of a spectrum and the error bounds they give at bond
/// dimension `m`, over [`alpha_grid`].
pub fn bounds_curves(weights: &[f64], m: usize) -> Result<Value, String> {
    let p = normalize(weights)?;
    if m < 1 {
        return Err("M must be at least 1".into());
    }
    let eps: f64 = p.iter().skip(m).sum();
    let rows: Vec<Value> = alpha_grid()
        .into_iter()
        .map(|a| {
            let s = renyi_entropy(&p, a).unwrap_or(f64::NAN);
            let (lower, upper) = if a > 1.0 {
                (error_lower_bound(s, m, a).ok(), None)
            } else {
                let up = error_upper_bound(s, m, a, eps);
                (None, up.value.filter(|_| up.valid))
            };
            json!({"alpha": a, "entropy": s, "lower": lower, "upper": upper})
        })
        .collect();
    Ok(json!({
        "weights": p,
        "m": m,
        "eps": eps,
        "alpha_threshold": alpha_threshold(eps, m),
        "rows": rows,
    }))
}

/// Builds a qubit state on a chain or a seeded random tree, truncates every
/// bond to `cap` both ways and reports the error ledger.
pub fn truncation_run(kind: &str, sites: usize, cap: usize, seed: u64, chain: bool) -> Result<Value, String> {
    if !(2..=12).contains(&sites) {
        return Err("sites must be between 2 and 12".into());
    }
    let dims = vec![2; sites];
    let tree = if chain {
        TreeGraph::chain(&dims)
    } else {
        TreeGraph::random(&dims, &mut ChaCha8Rng::seed_from_u64(seed))
    }
    .map_err(|e| e.to_string())?;
    let kind: NamedState = kind.parse().map_err(|e: ttns::Error| e.to_string())?;
    let state = make_named(kind, &dims, Some(seed)).map_err(|e| e.to_string())?;
    let exact = exact_decompose(&state, &tree).map_err(|e| e.to_string())?;
    let plan = TruncationPlan::uniform(sites - 1, cap.max(1));
    let proj = truncate_projector(&exact, &plan).map_err(|e| e.to_string())?;
    let lazy = truncate_lazy(&state, &tree, &plan).map_err(|e| e.to_string())?;
    Ok(json!({
        "edges": tree.edge_pairs(),
        "root": tree.root(),
        "exact_bond_dims": exact.bond_dims,
        "bond_dims": proj.bond_dims,
        "eps": proj.eps,
        "eps_prime": lazy.eps_prime,
        "delta": proj.delta,
        "delta_lazy": lazy.delta,
        "max_eps": proj.max_eps(),
        "sum_eps": proj.sum_eps(),
    }))
}

/// The two extremal distributions: the flat-tail one at truncation error
/// `delta` and the head-concentrated one with tail `eps` and M-th entry `p`.
pub fn extremal_pair(m: usize, delta: f64, d: usize, eps: f64, p: f64) -> Result<Value, String> {
    let spread = extremal_spread(m, delta, d).map_err(|e| e.to_string())?;
    let head = majorizing_extremal(m, eps, p).map_err(|e| e.to_string())?;
    let entropies = |q: &[f64]| -> Vec<f64> { alpha_grid().iter().map(|&a| renyi_entropy(q, a).unwrap_or(f64::NAN)).collect() };
    Ok(json!({
        "alphas": alpha_grid(),
        "spread": spread,
        "spread_entropy": entropies(&spread),
        "head": head,
        "head_entropy": entropies(&head),
        "alpha_threshold": alpha_threshold(eps, m),
    }))
}

fn respond(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bounds(weights: &[f64], m: usize) -> Result<String, JsValue> {
    respond(bounds_curves(weights, m))
}

#[wasm_bindgen]
pub fn truncate(kind: &str, sites: usize, cap: usize, seed: u64, chain: bool) -> Result<String, JsValue> {
    respond(truncation_run(kind, sites, cap, seed, chain))
}

#[wasm_bindgen]
pub fn extremal(m: usize, delta: f64, d: usize, eps: f64, p: f64) -> Result<String, JsValue> {
    respond(extremal_pair(m, delta, d, eps, p))
}
