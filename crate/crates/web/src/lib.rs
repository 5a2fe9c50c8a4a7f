//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes a kernel spec as JSON and returns a JSON document, so the
//! page needs no generated TypeScript types. The same functions are callable
//! from Rust through the `*_json` variants, which is how they are tested.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rkhs_paths::analysis::{decompose, rkhs_path_verdict_with, VerdictOptions};
use rkhs_paths::kernels::{Kernel, KernelSpec};
use rkhs_paths::quadrature::{circle_uniform, gauss_legendre, Domain, QuadratureRule};
use rkhs_paths::sampling::kl_sample;
use rkhs_paths::spectral::SpectralDecomposition;
use rkhs_paths::Error;

/// Node count the page may request at most; the dense eigensolve runs on the
/// main thread.
pub const MAX_DEMO_NODES: usize = 512;

fn kernel(spec: &str) -> Result<Kernel, Error> {
    let k = KernelSpec::from_json(spec)?.build()?;
    if k.dimension() != 1 {
        return Err(Error::Usage("the demo plots one-dimensional kernels only".into()));
    }
    Ok(k)
}

fn rule(k: &Kernel, n: usize) -> Result<QuadratureRule, Error> {
    if !(16..=MAX_DEMO_NODES).contains(&n) {
        return Err(Error::Usage(format!("node count must lie in [16, {MAX_DEMO_NODES}], got {n}")));
    }
    match k.domain() {
        Domain::Circle => circle_uniform(n.next_power_of_two().min(MAX_DEMO_NODES)),
        Domain::Interval { a, b } => gauss_legendre(n, *a, *b),
        Domain::Box { .. } => Err(Error::Usage("box domains are not plotted".into())),
    }
}

fn decomposed(spec: &str, n: usize) -> Result<SpectralDecomposition, Error> {
    let k = kernel(spec)?;
    decompose(&k, &rule(&k, n)?)
}

fn nodes(d: &SpectralDecomposition) -> Vec<f64> {
    d.rule().nodes().map(|x| x[0]).collect()
}

#[derive(Serialize)]
struct SpectrumView {
    eigenvalues: Vec<f64>,
    rho: f64,
    rho_ci: f64,
    window: (usize, usize),
    fit_c: f64,
    decision: String,
    beta_window: Option<(f64, f64)>,
    notes: Vec<String>,
}

/// Trusted eigenvalues, the decay fit and the verdict.
pub fn spectrum_json(spec: &str, n: usize) -> Result<String, Error> {
    let k = kernel(spec)?;
    let r = rule(&k, n)?;
    let d = decompose(&k, &r)?;
    let options = VerdictOptions {
        exact_limit: 1 << 16,
        ..VerdictOptions::default()
    };
    let v = rkhs_path_verdict_with(&k, &r, &options)?;
    let fit = rkhs_paths::analysis::estimate_decay(&d, None)?;
    let view = SpectrumView {
        eigenvalues: d.trusted().to_vec(),
        rho: fit.rho,
        rho_ci: fit.rho_ci,
        window: fit.window,
        fit_c: fit.c,
        decision: v.decision.as_str().to_string(),
        beta_window: v.beta_window,
        notes: v.notes,
    };
    Ok(serde_json::to_string(&view)?)
}

#[derive(Serialize)]
struct Curves {
    t: Vec<f64>,
    curves: Vec<Vec<f64>>,
}

/// The first `count` eigenfunctions at the nodes.
pub fn eigenfunctions_json(spec: &str, n: usize, count: usize) -> Result<String, Error> {
    let d = decomposed(spec, n)?;
    let count = count.clamp(1, d.floor_index());
    let curves = (1..=count).map(|i| d.node_values(i)).collect::<Result<Vec<_>, _>>()?;
    Ok(serde_json::to_string(&Curves { t: nodes(&d), curves })?)
}

/// `count` truncated Karhunen–Loève paths at the nodes.
pub fn paths_json(spec: &str, n: usize, n_terms: usize, seed: u64, count: usize) -> Result<String, Error> {
    let d = decomposed(spec, n)?;
    let n_terms = n_terms.clamp(1, d.floor_index());
    let samples = kl_sample(&d, n_terms, seed, count.clamp(1, 32))?;
    let curves = samples
        .iter()
        .map(|s| s.values_at_nodes(&d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(serde_json::to_string(&Curves { t: nodes(&d), curves })?)
}

fn js(r: Result<String, Error>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn spectrum(spec: &str, n: usize) -> Result<String, JsValue> {
    js(spectrum_json(spec, n))
}

#[wasm_bindgen]
pub fn eigenfunctions(spec: &str, n: usize, count: usize) -> Result<String, JsValue> {
    js(eigenfunctions_json(spec, n, count))
}

#[wasm_bindgen]
pub fn paths(spec: &str, n: usize, n_terms: usize, seed: u64, count: usize) -> Result<String, JsValue> {
    js(paths_json(spec, n, n_terms, seed, count))
}
