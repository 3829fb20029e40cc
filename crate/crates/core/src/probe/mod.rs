//! Probe policies and two-phase trajectory collection.
//!
//! Baseline trajectories follow a behaviour policy; intervention
//! trajectories replace every action by an i.i.d. draw from
//! `Uniform([-1, 1]^d_a)`. Trajectory `k` of a set is seeded from
//! `(seed, mode, k)`, so sets are reproducible, independent of thread
//! count, and baseline and intervention runs never share exogenous draws.

mod io;

pub use io::{read_binary, read_binary_file, write_binary, write_binary_file, write_csv};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::env::{DimLabel, EnvConfig, Environment};
use crate::seed::{self, tag, Rng};
use crate::{par, Error, Result};

pub const DEFAULT_N: usize = 80;
pub const DEFAULT_HORIZON: usize = 200;
/// Number of leading observation components fed to the feedback term.
pub const FEEDBACK_HEAD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    Baseline,
    Intervention,
}

impl ProbeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeMode::Baseline => "baseline",
            ProbeMode::Intervention => "intervention",
        }
    }

    fn tag(self) -> u64 {
        match self {
            ProbeMode::Baseline => tag::BASELINE,
            ProbeMode::Intervention => tag::INTERVENTION,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            ProbeMode::Baseline => 0,
            ProbeMode::Intervention => 1,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(ProbeMode::Baseline),
            1 => Some(ProbeMode::Intervention),
            _ => None,
        }
    }
}

impl std::str::FromStr for ProbeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(ProbeMode::Baseline),
            "intervention" => Ok(ProbeMode::Intervention),
            other => Err(Error::config(format!("unknown probe mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    StructuredRandom,
    UniformRandom,
    /// Actions come from a caller-supplied callback; see [`collect_with`].
    External,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::StructuredRandom => "structured_random",
            PolicyKind::UniformRandom => "uniform_random",
            PolicyKind::External => "external",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structured_random" => Ok(PolicyKind::StructuredRandom),
            "uniform_random" => Ok(PolicyKind::UniformRandom),
            "external" => Ok(PolicyKind::External),
            other => Err(Error::config(format!("unknown probe policy `{other}`"))),
        }
    }
}

/// Constants of the structured random policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StructuredParams {
    pub amplitude: [f64; 2],
    /// Angular frequency range in radians per step.
    pub frequency: [f64; 2],
    pub feedback_gain: f64,
    pub noise_std: f64,
}

impl Default for StructuredParams {
    fn default() -> Self {
        Self { amplitude: [0.5, 1.0], frequency: [0.05, 0.3], feedback_gain: 0.1, noise_std: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub n_trajectories: usize,
    pub horizon: usize,
    pub mode: ProbeMode,
    pub policy: PolicyKind,
    pub seed: u64,
    pub structured: StructuredParams,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            n_trajectories: DEFAULT_N,
            horizon: DEFAULT_HORIZON,
            mode: ProbeMode::Baseline,
            policy: PolicyKind::StructuredRandom,
            seed: 0,
            structured: StructuredParams::default(),
        }
    }
}

impl ProbeConfig {
    pub fn new(n_trajectories: usize, horizon: usize, mode: ProbeMode, seed: u64) -> Self {
        Self { n_trajectories, horizon, mode, seed, ..Self::default() }
    }

    pub fn with_mode(mut self, mode: ProbeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_policy(mut self, policy: PolicyKind) -> Self {
        self.policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories < 2 {
            return Err(Error::config("n_trajectories must be at least 2"));
        }
        if self.horizon < 1 {
            return Err(Error::config("horizon must be at least 1"));
        }
        let s = &self.structured;
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !ordered(s.amplitude) || !ordered(s.frequency) {
            return Err(Error::config("structured policy ranges must be finite and ordered"));
        }
        if !(s.noise_std >= 0.0 && s.feedback_gain.is_finite()) {
            return Err(Error::config("structured policy noise must be non-negative"));
        }
        Ok(())
    }

    /// Seed of trajectory `k` in this set.
    pub fn trajectory_seed(&self, k: usize) -> u64 {
        seed::derive(self.seed, &[self.mode.tag(), k as u64])
    }
}

/// State of the structured random policy for one trajectory: per-dimension
/// sinusoid, a fixed random feedback map, and an exploration-noise stream.
#[derive(Debug, Clone)]
pub struct PolicyState {
    pub amplitude: Vec<f64>,
    pub omega: Vec<f64>,
    pub phase: Vec<f64>,
    /// Row-major `d_a x head` feedback weights.
    pub feedback: Vec<f64>,
    pub head: usize,
    pub feedback_gain: f64,
    pub noise_std: f64,
    rng: Rng,
}

impl PolicyState {
    pub fn new(d_a: usize, d: usize, params: &StructuredParams, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let head = d.min(FEEDBACK_HEAD);
        let draw = |rng: &mut Rng, r: [f64; 2]| {
            if r[0] < r[1] {
                rng.random_range(r[0]..r[1])
            } else {
                r[0]
            }
        };
        let amplitude = (0..d_a).map(|_| draw(&mut rng, params.amplitude)).collect();
        let omega = (0..d_a).map(|_| draw(&mut rng, params.frequency)).collect();
        let phase = (0..d_a).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let scale = 1.0 / (head.max(1) as f64).sqrt();
        let feedback = (0..d_a * head)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
            .collect();
        Self {
            amplitude,
            omega,
            phase,
            feedback,
            head,
            feedback_gain: params.feedback_gain,
            noise_std: params.noise_std,
            rng,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.amplitude.len()
    }

    /// Writes one action into `out`. When `cue` is given, action 0 plays
    /// the cue as is and the remaining dimensions follow the usual rule.
    pub fn act_into(&mut self, t: usize, obs: &[f64], cue: Option<f64>, out: &mut [f64]) {
        let head = self.head.min(obs.len());
        for (j, a) in out.iter_mut().enumerate() {
            if let (0, Some(c)) = (j, cue) {
                *a = c.clamp(-1.0, 1.0);
                continue;
            }
            let carrier = self.amplitude[j] * (self.omega[j] * t as f64 + self.phase[j]).sin();
            let w = &self.feedback[j * self.head..j * self.head + head];
            let proj: f64 = w.iter().zip(obs).map(|(w, o)| w * o).sum();
            let noise = if self.noise_std > 0.0 {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                self.noise_std * z
            } else {
                0.0
            };
            *a = (carrier + self.feedback_gain * proj.tanh() + noise).clamp(-1.0, 1.0);
        }
    }
}

/// One structured random action:
/// `a_j = clip(A_j sin(w_j t + phi_j) + g tanh(w_j . obs_head) + eps_j, -1, 1)`.
pub fn structured_random_action(t: usize, obs: &[f64], state: &mut PolicyState) -> Vec<f64> {
    let mut out = vec![0.0; state.action_dim()];
    state.act_into(t, obs, None, &mut out);
    out
}

/// Fills `out` with i.i.d. `Uniform[-1, 1]` draws.
pub fn uniform_action_into(rng: &mut Rng, out: &mut [f64]) {
    for a in out {
        *a = rng.random_range(-1.0..=1.0);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: ProbeMode,
    pub seed: u64,
    pub d: usize,
    pub d_a: usize,
    /// Row-major `(T + 1) x d`; row 0 is the reset observation.
    pub observations: Vec<f64>,
    /// Row-major `T x d_a`.
    pub actions: Vec<f64>,
    pub rewards: Vec<f64>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.rewards.len()
    }

    pub fn obs(&self, t: usize) -> &[f64] {
        &self.observations[t * self.d..(t + 1) * self.d]
    }

    pub fn action(&self, t: usize) -> &[f64] {
        &self.actions[t * self.d_a..(t + 1) * self.d_a]
    }

    pub fn obs_at(&self, t: usize, i: usize) -> f64 {
        self.observations[t * self.d + i]
    }

    /// Column `i` of the observation matrix.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..=self.horizon()).map(|t| self.obs_at(t, i)).collect()
    }

    pub fn total_return(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub(crate) fn check(&self) -> Result<()> {
        let t = self.rewards.len();
        if self.observations.len() != (t + 1) * self.d || self.actions.len() != t * self.d_a {
            return Err(Error::DimensionMismatch("trajectory matrices disagree with T".into()));
        }
        if self.actions.iter().any(|a| !(-1.0..=1.0).contains(a)) {
            return Err(Error::input("trajectory action outside [-1, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub env_config: EnvConfig,
    pub env_hash: String,
    pub probe: ProbeConfig,
    pub labels: Vec<DimLabel>,
    pub d: usize,
    pub d_a: usize,
    pub trajectories: Vec<Trajectory>,
    /// Hash of the run manifest that produced this set, when written by a tool.
    pub manifest_hash: Option<String>,
}

impl TrajectorySet {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.probe.horizon
    }

    pub fn ground_truth_mask(&self) -> Vec<bool> {
        let alpha = self.env_config.alpha_mix;
        self.labels
            .iter()
            .map(|l| match l {
                DimLabel::Causal => true,
                DimLabel::Partial => alpha > 0.0,
                _ => false,
            })
            .collect()
    }

    pub fn total_steps(&self) -> usize {
        self.trajectories.iter().map(Trajectory::horizon).sum()
    }

    /// Concatenates two sets from the same environment.
    pub fn merged(&self, other: &TrajectorySet) -> Result<TrajectorySet> {
        if self.env_hash != other.env_hash || self.d != other.d || self.d_a != other.d_a {
            return Err(Error::DimensionMismatch("cannot merge sets from different environments".into()));
        }
        let mut out = self.clone();
        out.trajectories.extend(other.trajectories.iter().cloned());
        out.probe.n_trajectories = out.trajectories.len();
        Ok(out)
    }
}

/// Action source for one trajectory, called as `policy(t, obs, out)`.
pub type ExternalPolicy = Box<dyn FnMut(usize, &[f64], &mut [f64]) + Send>;

/// Collects `n_trajectories` rollouts of length `horizon`.
pub fn collect(env_config: &EnvConfig, probe: &ProbeConfig) -> Result<TrajectorySet> {
    if probe.policy == PolicyKind::External && probe.mode == ProbeMode::Baseline {
        return Err(Error::config("external policy requires collect_with"));
    }
    collect_impl(env_config, probe, None::<&fn(u64) -> ExternalPolicy>)
}

/// Like [`collect`], with baseline actions taken from `factory(trajectory_seed)`.
/// Intervention mode ignores the factory.
pub fn collect_with<F>(env_config: &EnvConfig, probe: &ProbeConfig, factory: &F) -> Result<TrajectorySet>
where
    F: Fn(u64) -> ExternalPolicy + Sync,
{
    collect_impl(env_config, probe, Some(factory))
}

fn collect_impl<F>(env_config: &EnvConfig, probe: &ProbeConfig, factory: Option<&F>) -> Result<TrajectorySet>
where
    F: Fn(u64) -> ExternalPolicy + Sync,
{
    env_config.validate()?;
    probe.validate()?;
    let template = Environment::new(env_config)?;
    let labels = template.spec().labels.clone();
    let d = template.obs_dim();
    let d_a = template.action_dim();
    drop(template);

    let results = par::map_indexed(probe.n_trajectories, |k| {
        rollout(env_config, probe, probe.trajectory_seed(k), factory)
    });
    let trajectories = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(TrajectorySet {
        env_config: env_config.clone(),
        env_hash: env_config.hash(),
        probe: probe.clone(),
        labels,
        d,
        d_a,
        trajectories,
        manifest_hash: None,
    })
}

fn rollout<F>(env_config: &EnvConfig, probe: &ProbeConfig, traj_seed: u64, factory: Option<&F>) -> Result<Trajectory>
where
    F: Fn(u64) -> ExternalPolicy,
{
    let mut env = Environment::new(env_config)?;
    env.set_horizon(probe.horizon);
    let d = env.obs_dim();
    let d_a = env.action_dim();
    let horizon = probe.horizon;

    let mut observations = Vec::with_capacity((horizon + 1) * d);
    let mut actions = vec![0.0; horizon * d_a];
    let mut rewards = Vec::with_capacity(horizon);
    observations.extend(env.reset(traj_seed));

    enum Source {
        Structured(PolicyState),
        Uniform(Rng),
        External(ExternalPolicy),
    }
    let mut source = match (probe.mode, probe.policy) {
        (ProbeMode::Intervention, _) | (ProbeMode::Baseline, PolicyKind::UniformRandom) => {
            Source::Uniform(seed::derived_rng(traj_seed, &[tag::ACTIONS]))
        }
        (ProbeMode::Baseline, PolicyKind::StructuredRandom) => Source::Structured(PolicyState::new(
            d_a,
            d,
            &probe.structured,
            seed::derive(traj_seed, &[tag::POLICY]),
        )),
        (ProbeMode::Baseline, PolicyKind::External) => match factory {
            Some(f) => Source::External(f(traj_seed)),
            None => return Err(Error::config("external policy requires collect_with")),
        },
    };

    let mut obs = vec![0.0; d];
    for t in 0..horizon {
        let prev = &observations[t * d..(t + 1) * d];
        let a = &mut actions[t * d_a..(t + 1) * d_a];
        match &mut source {
            Source::Structured(state) => state.act_into(t, prev, env.drive(), a),
            Source::Uniform(rng) => uniform_action_into(rng, a),
            Source::External(policy) => {
                policy(t, prev, a);
                for v in a.iter_mut() {
                    if !v.is_finite() {
                        return Err(Error::Numerical("external policy returned a non-finite action".into()));
                    }
                    *v = v.clamp(-1.0, 1.0);
                }
            }
        }
        let r = env.step_into(a, &mut obs)?;
        observations.extend_from_slice(&obs);
        rewards.push(r);
    }
    Ok(Trajectory { mode: probe.mode, seed: traj_seed, d, d_a, observations, actions, rewards })
}

/// Baseline and intervention sets for one discovery run, sharing `seed`.
pub fn collect_pair(
    env_config: &EnvConfig,
    n: usize,
    horizon: usize,
    seed: u64,
    policy: PolicyKind,
) -> Result<(TrajectorySet, TrajectorySet)> {
    let base = ProbeConfig::new(n, horizon, ProbeMode::Baseline, seed).with_policy(policy);
    let int = base.clone().with_mode(ProbeMode::Intervention);
    Ok((collect(env_config, &base)?, collect(env_config, &int)?))
}

