//! Bindings behind `web/index.html`. Each export takes plain numbers and
//! strings and returns a JSON string for the page to draw.

use causal_scope::env::{DistractorLevel, EnvConfig, Environment};
use causal_scope::experiments::{partial_base, partial_sweep, DiscoverySettings};
use causal_scope::metrics::score_mask;
use causal_scope::probe::{collect_pair, PolicyKind};
use causal_scope::seed;
use causal_scope::stats::{discover, TestConfig};
use rand::Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const PRESETS: [&str; 6] =
    ["point_mass_none", "point_mass_easy", "point_mass_medium", "point_mass_hard", "chain_3", "confounded_mimic"];

pub fn preset(name: &str, seed: u64) -> Result<EnvConfig, String> {
    let level = |l| Ok(EnvConfig::point_mass(l, seed));
    match name {
        "point_mass_none" => level(DistractorLevel::None),
        "point_mass_easy" => level(DistractorLevel::Easy),
        "point_mass_medium" => level(DistractorLevel::Medium),
        "point_mass_hard" => level(DistractorLevel::Hard),
        "chain_3" => Ok(EnvConfig::chain(3, seed)),
        "confounded_mimic" => Ok(EnvConfig::confounded_mimic(seed)),
        other => Err(format!("unknown preset `{other}`")),
    }
}

#[derive(Serialize)]
struct Trace {
    index: usize,
    label: &'static str,
    /// Under zero actions.
    still: Vec<f64>,
    /// Under uniform random actions, same episode seed.
    driven: Vec<f64>,
}

/// Rolls the same episode twice, once with zero actions and once with
/// random ones, and returns the first `max_dims` observation traces.
pub fn simulate_json(name: &str, steps: usize, env_seed: u64, max_dims: usize) -> Result<String, String> {
    let cfg = preset(name, env_seed)?;
    let run = |driven: bool| -> Result<Vec<Vec<f64>>, String> {
        let mut env = Environment::new(&cfg).map_err(|e| e.to_string())?;
        env.set_horizon(steps);
        let mut rows = vec![env.reset(env_seed)];
        let mut rng = seed::rng(env_seed ^ 0x5eed);
        let mut action = vec![0.0; env.action_dim()];
        for _ in 0..steps {
            if driven {
                action.iter_mut().for_each(|a| *a = rng.random_range(-1.0..=1.0));
            }
            rows.push(env.step(&action).map_err(|e| e.to_string())?.0);
        }
        Ok(rows)
    };
    let (still, driven) = (run(false)?, run(true)?);
    let labels = Environment::new(&cfg).map_err(|e| e.to_string())?.spec().labels.clone();
    let traces: Vec<Trace> = (0..labels.len().min(max_dims))
        .map(|i| Trace {
            index: i,
            label: labels[i].as_str(),
            still: still.iter().map(|r| r[i]).collect(),
            driven: driven.iter().map(|r| r[i]).collect(),
        })
        .collect();
    serde_json::to_string(&traces).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Boundary {
    labels: Vec<&'static str>,
    truth: Vec<bool>,
    mask: Vec<bool>,
    /// Smallest adjusted p over horizons, per dimension.
    min_adjusted_p: Vec<f64>,
    precision: f64,
    recall: f64,
    f1: f64,
}

pub fn discover_json(name: &str, n: usize, horizon: usize, seed: u64, alpha: f64) -> Result<String, String> {
    let cfg = preset(name, seed)?;
    let test = TestConfig { alpha, ..TestConfig::default() };
    let (b, i) = collect_pair(&cfg, n, horizon, seed, PolicyKind::StructuredRandom).map_err(|e| e.to_string())?;
    let result = discover(&b, &i, &test).map_err(|e| e.to_string())?;
    let truth = b.ground_truth_mask();
    let score = score_mask(&result.mask, &truth).map_err(|e| e.to_string())?;
    let out = Boundary {
        labels: b.labels.iter().map(|l| l.as_str()).collect(),
        min_adjusted_p: result.per_dim_min_adjusted_p.clone(),
        truth,
        mask: result.mask,
        precision: score.precision,
        recall: score.recall,
        f1: score.f1,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Partial-controllability sweep on the six-partial-dimension point mass.
pub fn partial_json(alphas: &[f64], seeds: u32, n: usize, horizon: usize) -> Result<String, String> {
    let seeds: Vec<u64> = (0..seeds as u64).collect();
    let settings = DiscoverySettings { n_trajectories: n, horizon, test: TestConfig::default() };
    let report = partial_sweep(&partial_base(0.0), alphas, &seeds, &settings).map_err(|e| e.to_string())?;
    serde_json::to_string(&report.rows).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn presets() -> String {
    PRESETS.join(",")
}

#[wasm_bindgen]
pub fn simulate(name: &str, steps: usize, env_seed: u32, max_dims: usize) -> Result<String, JsValue> {
    js(simulate_json(name, steps, env_seed as u64, max_dims))
}

#[wasm_bindgen]
pub fn discover_boundary(name: &str, n: usize, horizon: usize, seed: u32, alpha: f64) -> Result<String, JsValue> {
    js(discover_json(name, n, horizon, seed as u64, alpha))
}

#[wasm_bindgen]
pub fn sweep_partial(alphas: &[f64], seeds: u32, n: usize, horizon: usize) -> Result<String, JsValue> {
    js(partial_json(alphas, seeds, n, horizon))
}
