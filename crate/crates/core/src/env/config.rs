use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoreKind {
    /// Damped double integrator on the plane reaching for a fixed target.
    #[serde(rename = "point_mass_2d")]
    PointMass2d,
    /// Linear chain `a -> x1 -> ... -> xk` with one step of lag per link.
    #[serde(rename = "chain_k")]
    ChainK,
    /// One causal state and one exogenous channel that tracks it under the
    /// confounded behaviour policy.
    #[serde(rename = "confounded_mimic")]
    ConfoundedMimic,
    /// No causal core; every emitted dimension is exogenous.
    #[serde(rename = "none")]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistractorLevel {
    None,
    Easy,
    Medium,
    Hard,
    Custom,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyCounts {
    pub autonomous: usize,
    pub mimicking: usize,
    pub reward_correlated: usize,
    pub oscillator: usize,
}

impl FamilyCounts {
    pub const fn new(
        autonomous: usize,
        mimicking: usize,
        reward_correlated: usize,
        oscillator: usize,
    ) -> Self {
        Self { autonomous, mimicking, reward_correlated, oscillator }
    }

    pub fn total(&self) -> usize {
        self.autonomous + self.mimicking + self.reward_correlated + self.oscillator
    }
}

impl DistractorLevel {
    /// Family split for the preset levels; `None` for `Custom`.
    pub fn preset_counts(self) -> Option<FamilyCounts> {
        match self {
            DistractorLevel::None => Some(FamilyCounts::default()),
            DistractorLevel::Easy => Some(FamilyCounts::new(4, 0, 0, 2)),
            DistractorLevel::Medium => Some(FamilyCounts::new(12, 28, 6, 4)),
            DistractorLevel::Hard => Some(FamilyCounts::new(18, 60, 14, 8)),
            DistractorLevel::Custom => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DistractorLevel::None => "none",
            DistractorLevel::Easy => "easy",
            DistractorLevel::Medium => "medium",
            DistractorLevel::Hard => "hard",
            DistractorLevel::Custom => "custom",
        }
    }
}

impl std::str::FromStr for DistractorLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(DistractorLevel::None),
            "easy" => Ok(DistractorLevel::Easy),
            "medium" => Ok(DistractorLevel::Medium),
            "hard" => Ok(DistractorLevel::Hard),
            "custom" => Ok(DistractorLevel::Custom),
            other => Err(Error::config(format!("unknown distractor level `{other}`"))),
        }
    }
}

impl CoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CoreKind::PointMass2d => "point_mass_2d",
            CoreKind::ChainK => "chain_k",
            CoreKind::ConfoundedMimic => "confounded_mimic",
            CoreKind::None => "none",
        }
    }
}

impl std::str::FromStr for CoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point_mass_2d" => Ok(CoreKind::PointMass2d),
            "chain_k" => Ok(CoreKind::ChainK),
            "confounded_mimic" => Ok(CoreKind::ConfoundedMimic),
            "none" => Ok(CoreKind::None),
            other => Err(Error::config(format!("unknown core kind `{other}`"))),
        }
    }
}

const MAX_DISTRACTORS: usize = 4096;
const MAX_CHAIN_LEN: usize = 32;

fn default_dt() -> f64 {
    0.01
}

fn default_chain_len() -> usize {
    3
}

fn default_true() -> bool {
    true
}

/// Environment description. Serializes to a flat JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub core_kind: CoreKind,
    pub d_a: usize,
    pub distractor_level: DistractorLevel,
    #[serde(default)]
    pub custom_counts: Option<FamilyCounts>,
    #[serde(default)]
    pub partial_dims: usize,
    #[serde(default)]
    pub alpha_mix: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub shuffle_obs: bool,
    pub seed: u64,
    /// Chain depth for `chain_k`.
    #[serde(default = "default_chain_len")]
    pub chain_len: usize,
    /// Whether `confounded_mimic` emits its exogenous mimic channel.
    #[serde(default = "default_true")]
    pub confounded_channel: bool,
}

impl EnvConfig {
    pub fn new(core_kind: CoreKind, distractor_level: DistractorLevel, seed: u64) -> Self {
        let d_a = match core_kind {
            CoreKind::PointMass2d => 2,
            _ => 1,
        };
        Self {
            core_kind,
            d_a,
            distractor_level,
            custom_counts: None,
            partial_dims: 0,
            alpha_mix: 0.0,
            dt: default_dt(),
            shuffle_obs: false,
            seed,
            chain_len: default_chain_len(),
            confounded_channel: true,
        }
    }

    pub fn point_mass(level: DistractorLevel, seed: u64) -> Self {
        Self::new(CoreKind::PointMass2d, level, seed)
    }

    pub fn chain(k: usize, seed: u64) -> Self {
        Self { chain_len: k, ..Self::new(CoreKind::ChainK, DistractorLevel::None, seed) }
    }

    pub fn confounded_mimic(seed: u64) -> Self {
        Self::new(CoreKind::ConfoundedMimic, DistractorLevel::None, seed)
    }

    pub fn with_custom(mut self, counts: FamilyCounts) -> Self {
        self.distractor_level = DistractorLevel::Custom;
        self.custom_counts = Some(counts);
        self
    }

    pub fn with_partial(mut self, dims: usize, alpha: f64) -> Self {
        self.partial_dims = dims;
        self.alpha_mix = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_level(mut self, level: DistractorLevel) -> Self {
        self.distractor_level = level;
        self
    }

    /// Distractor family counts after resolving the level.
    pub fn family_counts(&self) -> Result<FamilyCounts> {
        match self.distractor_level.preset_counts() {
            Some(c) => Ok(c),
            None => self
                .custom_counts
                .ok_or_else(|| Error::config("custom distractor level requires custom_counts")),
        }
    }

    pub fn causal_dims(&self) -> usize {
        match self.core_kind {
            CoreKind::PointMass2d => 6,
            CoreKind::ChainK => self.chain_len,
            CoreKind::ConfoundedMimic => 1,
            CoreKind::None => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_a < 1 {
            return Err(Error::config("d_a must be at least 1"));
        }
        if !(self.alpha_mix.is_finite() && (0.0..=1.0).contains(&self.alpha_mix)) {
            return Err(Error::config(format!("alpha_mix {} outside [0, 1]", self.alpha_mix)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.partial_dims > 0 && 50.0 * self.dt > 1.0 {
            return Err(Error::config(format!(
                "leaky integration rate 50*dt = {} exceeds 1 and would be unstable",
                50.0 * self.dt
            )));
        }
        let counts = self.family_counts()?;
        if counts.oscillator % 2 != 0 {
            return Err(Error::config(format!(
                "oscillator distractors come in coupled pairs, got {}",
                counts.oscillator
            )));
        }
        if counts.total() > MAX_DISTRACTORS {
            return Err(Error::config(format!(
                "{} distractors exceeds the limit of {MAX_DISTRACTORS}",
                counts.total()
            )));
        }
        match self.core_kind {
            CoreKind::PointMass2d if self.d_a != 2 => {
                return Err(Error::config("point_mass_2d takes a 2-dimensional action"));
            }
            CoreKind::ChainK if !(1..=MAX_CHAIN_LEN).contains(&self.chain_len) => {
                return Err(Error::config(format!(
                    "chain_len must be in 1..={MAX_CHAIN_LEN}, got {}",
                    self.chain_len
                )));
            }
            _ => {}
        }
        Ok(())
    }

    /// Short stable digest of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("EnvConfig serializes");
        short_digest(&bytes)
    }
}

/// First 16 hex characters of the SHA-256 of `bytes`.
pub fn short_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Stationary standard deviation for mimicking distractors, scaled with the
/// number of true state dimensions.
pub fn mimic_sigma_ref(d_c: usize) -> f64 {
    0.5 + 0.05 * d_c as f64
}
