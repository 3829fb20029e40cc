//! Synthetic control environments whose observation vector concatenates a
//! causal core with exogenous distractor families, plus ground-truth labels.
//!
//! Internal layout is `[core | partial | autonomous | mimicking |
//! reward_correlated | oscillator]`; `shuffle_obs` applies a seed-derived
//! permutation on emission. Every exogenous component draws from its own
//! random stream, so distractor values never depend on the actions taken.

mod config;
mod process;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use config::{
    mimic_sigma_ref, short_digest, CoreKind, DistractorLevel, EnvConfig, FamilyCounts,
};
pub use process::{OUParams, OscillatorPair, OuProcess, PartialDimState, ProgressDrift};

use crate::seed::{self, tag, Rng};
use crate::{Error, Result};

pub const DEFAULT_HORIZON: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimLabel {
    Causal,
    Autonomous,
    Mimicking,
    RewardCorrelated,
    Oscillator,
    Partial,
    ConfoundedMimic,
}

impl DimLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            DimLabel::Causal => "causal",
            DimLabel::Autonomous => "autonomous",
            DimLabel::Mimicking => "mimicking",
            DimLabel::RewardCorrelated => "reward_correlated",
            DimLabel::Oscillator => "oscillator",
            DimLabel::Partial => "partial",
            DimLabel::ConfoundedMimic => "confounded_mimic",
        }
    }

    pub fn is_distractor(self) -> bool {
        !matches!(self, DimLabel::Causal | DimLabel::Partial)
    }
}

/// Layout and ground truth of the emitted observation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpec {
    pub d: usize,
    /// Label per emitted index.
    pub labels: Vec<DimLabel>,
    /// `permutation[internal] = emitted`.
    pub permutation: Vec<usize>,
    pub d_c: usize,
    pub d_d: usize,
    pub partial_dims: usize,
    pub partial_alpha: f64,
}

impl ObservationSpec {
    /// True at emitted indices inside the sphere of influence.
    pub fn ground_truth_mask(&self) -> Vec<bool> {
        self.labels
            .iter()
            .map(|l| match l {
                DimLabel::Causal => true,
                DimLabel::Partial => self.partial_alpha > 0.0,
                _ => false,
            })
            .collect()
    }

    pub fn emitted_index(&self, internal: usize) -> usize {
        self.permutation[internal]
    }

    pub fn indices_with(&self, label: DimLabel) -> Vec<usize> {
        (0..self.d).filter(|&i| self.labels[i] == label).collect()
    }
}

pub mod point_mass {
    //! Constants of the planar reaching task.
    pub const FORCE: f64 = 8.0;
    pub const DAMPING: f64 = 2.0;
    pub const TARGET: [f64; 2] = [0.5, -0.5];
    pub const START_RANGE: f64 = 1.0;
}

pub mod chain {
    pub const SELF_WEIGHT: f64 = 0.9;
    pub const LINK_WEIGHT: f64 = 0.5;
    pub const PROCESS_NOISE: f64 = 0.05;

    /// Sensor noise for node `j` (1-based). The first node is read directly;
    /// deeper nodes move slowly and carry sensor noise that grows with depth,
    /// so their action response shows over multi-step windows rather than in
    /// single-step increments.
    pub fn sensor_std(j: usize) -> f64 {
        if j <= 1 {
            0.0
        } else {
            4.0 * 3f64.powi(j as i32 - 2)
        }
    }
}

pub mod confounded {
    pub const SELF_WEIGHT: f64 = 0.9;
    pub const ACTION_WEIGHT: f64 = 0.5;
    pub const PROCESS_NOISE: f64 = 0.05;
    pub const MIMIC_NOISE: f64 = 0.01;
    pub const DRIVE_NOISE: f64 = 0.1;
}

/// Exogenous cue `clip(amp * sin(omega t + phase) + noise, -1, 1)` shared
/// by the behaviour policy and the mimic channel in `confounded_mimic`.
#[derive(Debug, Clone, Copy)]
struct Drive {
    amp: f64,
    omega: f64,
    phase: f64,
}

impl Drive {
    fn sample(rng: &mut Rng) -> Self {
        Self {
            amp: rng.random_range(0.5..1.0),
            omega: rng.random_range(0.05..0.3),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        }
    }

    fn value(&self, t: usize, rng: &mut Rng) -> f64 {
        let xi: f64 = StandardNormal.sample(rng);
        (self.amp * (self.omega * t as f64 + self.phase).sin() + confounded::DRIVE_NOISE * xi)
            .clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone)]
enum Core {
    PointMass { pos: [f64; 2], vel: [f64; 2] },
    Chain { x: Vec<f64> },
    Confounded { s1: f64, shadow: f64, mimic: f64, drive: Drive, cue: f64, channel: bool },
    Empty,
}

struct EpisodeRngs {
    core: Rng,
    sensor: Rng,
    drive: Rng,
    distractor: Rng,
    partial: Rng,
}

impl EpisodeRngs {
    fn new(episode_seed: u64) -> Self {
        let s = |t| seed::derived_rng(episode_seed, &[tag::EPISODE, t]);
        Self {
            core: s(tag::CORE),
            sensor: s(tag::SENSOR),
            drive: s(tag::DRIVE),
            distractor: s(tag::DISTRACTOR),
            partial: s(tag::PARTIAL),
        }
    }
}

pub struct Environment {
    config: EnvConfig,
    spec: ObservationSpec,
    horizon: usize,
    t: usize,
    core: Core,
    partials: Vec<PartialDimState>,
    autonomous: Vec<OuProcess>,
    mimicking: Vec<OuProcess>,
    drifts: Vec<ProgressDrift>,
    oscillators: Vec<OscillatorPair>,
    rngs: EpisodeRngs,
    internal: Vec<f64>,
    action_buf: Vec<f64>,
}

/// Builds an environment and resets it with the config seed.
pub fn make_env(config: &EnvConfig) -> Result<Environment> {
    Environment::new(config)
}

impl Environment {
    pub fn new(config: &EnvConfig) -> Result<Self> {
        config.validate()?;
        let counts = config.family_counts()?;
        let mut structure = seed::derived_rng(config.seed, &[tag::STRUCTURE]);
        let dt = config.dt;

        let (core, mut labels) = match config.core_kind {
            CoreKind::PointMass2d => (
                Core::PointMass { pos: [0.0; 2], vel: [0.0; 2] },
                vec![DimLabel::Causal; 6],
            ),
            CoreKind::ChainK => (
                Core::Chain { x: vec![0.0; config.chain_len] },
                vec![DimLabel::Causal; config.chain_len],
            ),
            CoreKind::ConfoundedMimic => {
                let mut labels = vec![DimLabel::Causal];
                if config.confounded_channel {
                    labels.push(DimLabel::ConfoundedMimic);
                }
                let drive = Drive { amp: 0.0, omega: 0.0, phase: 0.0 };
                (
                    Core::Confounded {
                        s1: 0.0,
                        shadow: 0.0,
                        mimic: 0.0,
                        drive,
                        cue: 0.0,
                        channel: config.confounded_channel,
                    },
                    labels,
                )
            }
            CoreKind::None => (Core::Empty, Vec::new()),
        };

        let partials: Vec<_> = (0..config.partial_dims)
            .map(|_| PartialDimState::sample(config.d_a, config.alpha_mix, dt, &mut structure))
            .collect();
        labels.extend(std::iter::repeat_n(DimLabel::Partial, partials.len()));

        let autonomous: Vec<_> = (0..counts.autonomous)
            .map(|_| {
                let params = OUParams {
                    tau: structure.random_range(0.02..0.2),
                    sigma: structure.random_range(0.1..3.0),
                    x0: 0.0,
                };
                OuProcess::new(params, dt)
            })
            .collect();
        labels.extend(std::iter::repeat_n(DimLabel::Autonomous, autonomous.len()));

        let sigma_ref = mimic_sigma_ref(config.causal_dims());
        let mimicking: Vec<_> = (0..counts.mimicking)
            .map(|_| {
                let params = OUParams {
                    tau: structure.random_range(1.0..4.0),
                    sigma: sigma_ref * structure.random_range(0.8..1.2),
                    x0: 0.0,
                };
                OuProcess::new(params, dt)
            })
            .collect();
        labels.extend(std::iter::repeat_n(DimLabel::Mimicking, mimicking.len()));

        let drifts: Vec<_> =
            (0..counts.reward_correlated).map(|_| ProgressDrift::sample(&mut structure)).collect();
        labels.extend(std::iter::repeat_n(DimLabel::RewardCorrelated, drifts.len()));

        let oscillators: Vec<_> =
            (0..counts.oscillator / 2).map(|_| OscillatorPair::sample(&mut structure)).collect();
        labels.extend(std::iter::repeat_n(DimLabel::Oscillator, 2 * oscillators.len()));

        let d = labels.len();
        let mut permutation: Vec<usize> = (0..d).collect();
        if config.shuffle_obs {
            let mut shuffle = seed::derived_rng(config.seed, &[tag::SHUFFLE]);
            permutation.shuffle(&mut shuffle);
        }
        let mut emitted_labels = vec![DimLabel::Causal; d];
        for (internal, &emitted) in permutation.iter().enumerate() {
            emitted_labels[emitted] = labels[internal];
        }
        let d_c = labels.iter().filter(|l| **l == DimLabel::Causal).count();
        let d_d = labels.iter().filter(|l| l.is_distractor()).count();

        let spec = ObservationSpec {
            d,
            labels: emitted_labels,
            permutation,
            d_c,
            d_d,
            partial_dims: config.partial_dims,
            partial_alpha: config.alpha_mix,
        };

        let mut env = Self {
            config: config.clone(),
            spec,
            horizon: DEFAULT_HORIZON,
            t: 0,
            core,
            partials,
            autonomous,
            mimicking,
            drifts,
            oscillators,
            rngs: EpisodeRngs::new(config.seed),
            internal: vec![0.0; d],
            action_buf: Vec::with_capacity(config.d_a),
        };
        env.reset(config.seed);
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn spec(&self) -> &ObservationSpec {
        &self.spec
    }

    pub fn obs_dim(&self) -> usize {
        self.spec.d
    }

    pub fn action_dim(&self) -> usize {
        self.config.d_a
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn set_horizon(&mut self, horizon: usize) {
        self.horizon = horizon;
    }

    /// Steps taken in the current episode.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn ground_truth_mask(&self) -> Vec<bool> {
        self.spec.ground_truth_mask()
    }

    /// The exogenous cue for the current step, if the core has one. The
    /// mimic channel integrates this cue with the same gain the causal
    /// state applies to action 0, so a behaviour policy that plays the cue
    /// makes the mimic track the state without any causal link.
    pub fn drive(&self) -> Option<f64> {
        match &self.core {
            Core::Confounded { cue, .. } => Some(*cue),
            _ => None,
        }
    }

    /// Starts a new episode. Structural parameters (time constants,
    /// frequencies, gains, layout) come from the config seed and are kept;
    /// initial states and noise streams come from `episode_seed`.
    pub fn reset(&mut self, episode_seed: u64) -> Vec<f64> {
        self.t = 0;
        self.rngs = EpisodeRngs::new(episode_seed);
        let rngs = &mut self.rngs;
        match &mut self.core {
            Core::PointMass { pos, vel } => {
                for p in pos.iter_mut() {
                    *p = rngs.core.random_range(-point_mass::START_RANGE..point_mass::START_RANGE);
                }
                *vel = [0.0; 2];
            }
            Core::Chain { x } => x.iter_mut().for_each(|v| *v = 0.0),
            Core::Confounded { s1, shadow, mimic, drive, cue, .. } => {
                *s1 = 0.0;
                *shadow = 0.0;
                *drive = Drive::sample(&mut rngs.drive);
                *cue = drive.value(0, &mut rngs.drive);
                let eps: f64 = StandardNormal.sample(&mut rngs.sensor);
                *mimic = confounded::MIMIC_NOISE * eps;
            }
            Core::Empty => {}
        }
        for p in &mut self.partials {
            p.reset(&mut rngs.partial);
        }
        for ou in self.autonomous.iter_mut().chain(self.mimicking.iter_mut()) {
            ou.reset_stationary(&mut rngs.distractor);
        }
        for drift in &mut self.drifts {
            drift.reset(&mut rngs.distractor);
        }
        for osc in &mut self.oscillators {
            osc.reset(&mut rngs.distractor);
        }
        self.fill_internal();
        self.observation()
    }

    pub fn observation(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.spec.d];
        self.observe_into(&mut out);
        out
    }

    fn fill_internal(&mut self) {
        let mut i = 0;
        let buf = &mut self.internal;
        let mut push = |v: f64| {
            buf[i] = v;
            i += 1;
        };
        match &self.core {
            Core::PointMass { pos, vel } => {
                push(pos[0]);
                push(pos[1]);
                push(vel[0]);
                push(vel[1]);
                push(point_mass::TARGET[0] - pos[0]);
                push(point_mass::TARGET[1] - pos[1]);
            }
            Core::Chain { x } => {
                for (j, v) in x.iter().enumerate() {
                    let std = chain::sensor_std(j + 1);
                    let noise = if std > 0.0 {
                        let xi: f64 = StandardNormal.sample(&mut self.rngs.sensor);
                        std * xi
                    } else {
                        0.0
                    };
                    push(v + noise);
                }
            }
            Core::Confounded { s1, mimic, channel, .. } => {
                push(*s1);
                if *channel {
                    push(*mimic);
                }
            }
            Core::Empty => {}
        }
        for p in &self.partials {
            push(p.x);
        }
        for ou in self.autonomous.iter().chain(self.mimicking.iter()) {
            push(ou.x);
        }
        for drift in &self.drifts {
            push(drift.x);
        }
        for osc in &self.oscillators {
            push(osc.pos[0]);
            push(osc.pos[1]);
        }
    }

    /// Writes the current emitted observation into `out`. Chain sensor
    /// noise is drawn once per step in [`Environment::step_into`], so this
    /// is a pure read.
    pub fn observe_into(&self, out: &mut [f64]) {
        for (internal, &emitted) in self.spec.permutation.iter().enumerate() {
            out[emitted] = self.internal[internal];
        }
    }

    /// Advances one step and returns `(observation, reward)`.
    pub fn step(&mut self, action: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut obs = vec![0.0; self.spec.d];
        let r = self.step_into(action, &mut obs)?;
        Ok((obs, r))
    }

    /// Allocation-free step. Actions are clipped to `[-1, 1]`.
    pub fn step_into(&mut self, action: &[f64], obs: &mut [f64]) -> Result<f64> {
        if self.t >= self.horizon {
            return Err(Error::EpisodeFinished { horizon: self.horizon });
        }
        if action.len() != self.config.d_a {
            return Err(Error::DimensionMismatch(format!(
                "action has length {}, expected {}",
                action.len(),
                self.config.d_a
            )));
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(Error::input("action contains a non-finite value"));
        }
        if obs.len() != self.spec.d {
            return Err(Error::DimensionMismatch(format!(
                "observation buffer has length {}, expected {}",
                obs.len(),
                self.spec.d
            )));
        }
        let mut a = std::mem::take(&mut self.action_buf);
        a.clear();
        a.extend(action.iter().map(|v| v.clamp(-1.0, 1.0)));
        let r = self.step_clipped(&a, obs);
        self.action_buf = a;
        Ok(r)
    }

    fn step_clipped(&mut self, a: &[f64], obs: &mut [f64]) -> f64 {
        let dt = self.config.dt;
        let t = self.t;
        let rngs = &mut self.rngs;
        let reward = match &mut self.core {
            Core::PointMass { pos, vel } => {
                for k in 0..2 {
                    vel[k] += dt * (point_mass::FORCE * a[k] - point_mass::DAMPING * vel[k]);
                    pos[k] += dt * vel[k];
                }
                let dx = pos[0] - point_mass::TARGET[0];
                let dy = pos[1] - point_mass::TARGET[1];
                -(dx * dx + dy * dy).sqrt()
            }
            Core::Chain { x } => {
                let eta: f64 = StandardNormal.sample(&mut rngs.core);
                let prev = x.clone();
                x[0] = chain::SELF_WEIGHT * prev[0]
                    + chain::LINK_WEIGHT * a[0]
                    + chain::PROCESS_NOISE * eta;
                for j in 1..x.len() {
                    x[j] = chain::SELF_WEIGHT * prev[j] + chain::LINK_WEIGHT * prev[j - 1];
                }
                -x[0].abs()
            }
            Core::Confounded { s1, shadow, mimic, drive, cue, .. } => {
                let eta: f64 = StandardNormal.sample(&mut rngs.core);
                *s1 = confounded::SELF_WEIGHT * *s1
                    + confounded::ACTION_WEIGHT * a[0]
                    + confounded::PROCESS_NOISE * eta;
                // The shadow integrates the cue the behaviour policy follows,
                // never the action actually taken.
                *shadow = confounded::SELF_WEIGHT * *shadow + confounded::ACTION_WEIGHT * *cue;
                let eps: f64 = StandardNormal.sample(&mut rngs.sensor);
                *mimic = *shadow + confounded::MIMIC_NOISE * eps;
                *cue = drive.value(t + 1, &mut rngs.drive);
                -s1.abs()
            }
            Core::Empty => 0.0,
        };
        for p in &mut self.partials {
            p.step(a, &mut rngs.partial);
        }
        for ou in self.autonomous.iter_mut().chain(self.mimicking.iter_mut()) {
            ou.step(&mut rngs.distractor);
        }
        for drift in &mut self.drifts {
            drift.step(t, dt, &mut rngs.distractor);
        }
        for osc in &mut self.oscillators {
            osc.step(dt);
        }
        self.t += 1;
        self.fill_internal();
        self.observe_into(obs);
        reward
    }
}
