use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::LinearPolicy;
use crate::env::{EnvConfig, Environment};
use crate::seed::{self, tag};
use crate::{par, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CEMConfig {
    pub population: usize,
    pub elites: usize,
    pub iterations: usize,
    pub episodes_per_eval: usize,
    pub init_std: f64,
    pub seed: u64,
    /// Held-out episodes used for the reported return.
    pub eval_episodes: usize,
    pub horizon: usize,
}

impl Default for CEMConfig {
    fn default() -> Self {
        Self {
            population: 64,
            elites: 8,
            iterations: 30,
            episodes_per_eval: 3,
            init_std: 0.5,
            seed: 0,
            eval_episodes: 10,
            horizon: 200,
        }
    }
}

impl CEMConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 1 || self.elites < 1 || self.episodes_per_eval < 1 || self.eval_episodes < 1 {
            return Err(Error::config("CEM counts must be at least 1"));
        }
        if self.elites >= self.population {
            return Err(Error::config("CEM elites must be fewer than the population"));
        }
        if !(self.init_std > 0.0 && self.init_std.is_finite()) {
            return Err(Error::config("CEM init_std must be positive"));
        }
        if self.horizon < 1 {
            return Err(Error::config("CEM horizon must be at least 1"));
        }
        Ok(())
    }

    fn train_seeds(&self) -> Vec<u64> {
        (0..self.episodes_per_eval).map(|e| seed::derive(self.seed, &[tag::TRAIN, e as u64])).collect()
    }

    fn eval_seeds(&self) -> Vec<u64> {
        (0..self.eval_episodes).map(|e| seed::derive(self.seed, &[tag::EVAL, e as u64])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CemOutcome {
    pub policy: LinearPolicy,
    /// Mean return of the final policy on the held-out episodes.
    pub mean_return: f64,
    /// Best training fitness per iteration.
    pub history: Vec<f64>,
    /// The mask selected nothing, so the policy is bias-only.
    pub empty_mask: bool,
}

/// Mean return of `policy` over the given episode seeds.
pub fn evaluate_policy(env: &mut Environment, policy: &LinearPolicy, seeds: &[u64], horizon: usize) -> Result<f64> {
    env.set_horizon(horizon);
    let mut obs = vec![0.0; env.obs_dim()];
    let mut act = vec![0.0; env.action_dim()];
    let mut total = 0.0;
    for &s in seeds {
        obs.copy_from_slice(&env.reset(s));
        for _ in 0..horizon {
            policy.act_into(&obs, &mut act);
            total += env.step_into(&act, &mut obs)?;
        }
    }
    Ok(total / seeds.len() as f64)
}

/// Gaussian cross-entropy search over the flattened `(W, b)` of a linear
/// policy on the masked observation. Candidates are scored on the same
/// fixed training episodes; the final mean is scored on held-out ones.
pub fn cem_train(env_config: &EnvConfig, mask: &[bool], cfg: &CEMConfig) -> Result<CemOutcome> {
    cfg.validate()?;
    let env = Environment::new(env_config)?;
    if mask.len() != env.obs_dim() {
        return Err(Error::DimensionMismatch(format!(
            "mask has length {}, environment emits {}",
            mask.len(),
            env.obs_dim()
        )));
    }
    let d_a = env.action_dim();
    drop(env);
    let template = LinearPolicy::zeros(mask.to_vec(), d_a);
    let n = template.n_params();
    let mut mean = vec![0.0; n];
    let mut std = vec![cfg.init_std; n];
    let train = cfg.train_seeds();
    let mut rng = seed::derived_rng(cfg.seed, &[tag::CEM]);
    let mut history = Vec::with_capacity(cfg.iterations);

    for _ in 0..cfg.iterations {
        let candidates: Vec<Vec<f64>> = (0..cfg.population)
            .map(|_| {
                (0..n)
                    .map(|k| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        mean[k] + std[k] * z
                    })
                    .collect()
            })
            .collect();
        let fitness = par::map_indexed(cfg.population, |c| -> Result<f64> {
            let policy = LinearPolicy::from_flat(mask.to_vec(), d_a, &candidates[c])?;
            let mut env = Environment::new(env_config)?;
            evaluate_policy(&mut env, &policy, &train, cfg.horizon)
        });
        let fitness = fitness.into_iter().collect::<Result<Vec<f64>>>()?;
        let mut order: Vec<usize> = (0..cfg.population).collect();
        order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        let elites = &order[..cfg.elites];
        history.push(fitness[order[0]]);
        for k in 0..n {
            let m = elites.iter().map(|&e| candidates[e][k]).sum::<f64>() / cfg.elites as f64;
            let v = elites.iter().map(|&e| (candidates[e][k] - m).powi(2)).sum::<f64>() / cfg.elites as f64;
            mean[k] = m;
            std[k] = v.sqrt();
        }
    }

    let policy = LinearPolicy::from_flat(mask.to_vec(), d_a, &mean)?;
    let mut env = Environment::new(env_config)?;
    let mean_return = evaluate_policy(&mut env, &policy, &cfg.eval_seeds(), cfg.horizon)?;
    Ok(CemOutcome { empty_mask: !mask.iter().any(|&m| m), policy, mean_return, history })
}
