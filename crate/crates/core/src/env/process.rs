//! Exogenous processes used for distractor and partially controllable
//! dimensions. None of these read the action vector except
//! [`PartialDimState`], whose action path is explicit.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::seed::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OUParams {
    /// Relaxation time in seconds.
    pub tau: f64,
    /// Stationary standard deviation.
    pub sigma: f64,
    pub x0: f64,
}

/// Zero-mean Ornstein-Uhlenbeck process with exact discretization:
/// `x' = x e^{-dt/tau} + sigma sqrt(1 - e^{-2 dt/tau}) xi`.
#[derive(Debug, Clone)]
pub struct OuProcess {
    pub params: OUParams,
    decay: f64,
    diffusion: f64,
    pub x: f64,
}

impl OuProcess {
    pub fn new(params: OUParams, dt: f64) -> Self {
        debug_assert!(params.tau > 0.0 && params.sigma >= 0.0);
        let decay = (-dt / params.tau).exp();
        let diffusion = params.sigma * (1.0 - decay * decay).sqrt();
        Self { params, decay, diffusion, x: params.x0 }
    }

    /// Draws the state from the stationary law `N(0, sigma^2)`.
    pub fn reset_stationary(&mut self, rng: &mut Rng) {
        let xi: f64 = StandardNormal.sample(rng);
        self.x = self.params.sigma * xi;
    }

    pub fn step(&mut self, rng: &mut Rng) -> f64 {
        let xi: f64 = StandardNormal.sample(rng);
        self.x = self.x * self.decay + self.diffusion * xi;
        self.x
    }

    pub fn autocorrelation(&self) -> f64 {
        self.decay
    }
}

/// Two harmonic oscillators with weak linear coupling, integrated with
/// semi-implicit Euler. Each oscillator emits its position.
#[derive(Debug, Clone)]
pub struct OscillatorPair {
    pub omega: [f64; 2],
    pub coupling: f64,
    pub pos: [f64; 2],
    pub vel: [f64; 2],
}

impl OscillatorPair {
    pub const COUPLING: f64 = 0.1;

    pub fn sample(rng: &mut Rng) -> Self {
        Self {
            omega: [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)],
            coupling: Self::COUPLING,
            pos: [0.0; 2],
            vel: [0.0; 2],
        }
    }

    pub fn reset(&mut self, rng: &mut Rng) {
        for k in 0..2 {
            let amp: f64 = rng.random_range(0.5..1.5);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            self.pos[k] = amp * phase.cos();
            self.vel[k] = -amp * self.omega[k] * phase.sin();
        }
    }

    pub fn step(&mut self, dt: f64) {
        let [x0, x1] = self.pos;
        let acc = [
            -self.omega[0] * self.omega[0] * x0 + self.coupling * (x1 - x0),
            -self.omega[1] * self.omega[1] * x1 + self.coupling * (x0 - x1),
        ];
        for k in 0..2 {
            self.vel[k] += dt * acc[k];
            self.pos[k] += dt * self.vel[k];
        }
    }
}

/// Drift whose rate follows an exogenous episode-progress schedule
/// `1 - exp(-t dt / PROGRESS_TAU)`, mirroring how task progress typically
/// rises over an episode without reading the agent's actual state.
#[derive(Debug, Clone)]
pub struct ProgressDrift {
    pub gain: f64,
    pub x0_std: f64,
    pub x: f64,
}

impl ProgressDrift {
    pub const RATE: f64 = 0.02;
    pub const NOISE_STD: f64 = 0.01;
    pub const PROGRESS_TAU: f64 = 0.5;

    pub fn sample(rng: &mut Rng) -> Self {
        let magnitude: f64 = rng.random_range(0.5..1.5);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        Self { gain: sign * magnitude, x0_std: 0.5, x: 0.0 }
    }

    pub fn progress(t: usize, dt: f64) -> f64 {
        1.0 - (-(t as f64) * dt / Self::PROGRESS_TAU).exp()
    }

    pub fn reset(&mut self, rng: &mut Rng) {
        let xi: f64 = StandardNormal.sample(rng);
        self.x = self.x0_std * xi;
    }

    pub fn step(&mut self, t: usize, dt: f64, rng: &mut Rng) -> f64 {
        let xi: f64 = StandardNormal.sample(rng);
        self.x += Self::RATE * self.gain * Self::progress(t, dt) + Self::NOISE_STD * xi;
        self.x
    }
}

/// A dimension mixing an action-driven signal with an exogenous OU process:
/// `x = alpha * g + (1 - alpha) * z`, where `g` leakily integrates
/// `tanh(gain * a[action_index] + bias)` at rate `leak_rate` per step.
#[derive(Debug, Clone)]
pub struct PartialDimState {
    pub action_index: usize,
    pub gain: f64,
    pub bias: f64,
    pub leak_rate: f64,
    pub alpha: f64,
    /// Leaky-integrated action signal.
    pub g: f64,
    pub z: OuProcess,
    pub x: f64,
}

impl PartialDimState {
    pub fn sample(d_a: usize, alpha: f64, dt: f64, rng: &mut Rng) -> Self {
        let action_index = rng.random_range(0..d_a);
        let gain = rng.random_range(0.5..2.0);
        let bias = rng.random_range(-0.5..0.5);
        let params = OUParams {
            tau: rng.random_range(1.0..4.0),
            sigma: rng.random_range(0.2..0.6),
            x0: 0.0,
        };
        Self {
            action_index,
            gain,
            bias,
            leak_rate: 50.0 * dt,
            alpha,
            g: 0.0,
            z: OuProcess::new(params, dt),
            x: 0.0,
        }
    }

    pub fn reset(&mut self, rng: &mut Rng) {
        self.g = 0.0;
        self.z.reset_stationary(rng);
        self.x = self.alpha * self.g + (1.0 - self.alpha) * self.z.x;
    }

    /// `rng` feeds only the exogenous component.
    pub fn step(&mut self, action: &[f64], rng: &mut Rng) -> f64 {
        let drive = (self.gain * action[self.action_index] + self.bias).tanh();
        self.g += self.leak_rate * (drive - self.g);
        let z = self.z.step(rng);
        self.x = self.alpha * self.g + (1.0 - self.alpha) * z;
        self.x
    }
}
