//! Discovery sweeps: recall on partially controllable dimensions across
//! mixing coefficients, and structured versus uniform probe policies.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::env::{DimLabel, EnvConfig, FamilyCounts};
use crate::metrics::{score_mask, BoundaryScore};
use crate::plot::{LineChart, Series};
use crate::probe::{self, PolicyKind};
use crate::stats::{self, TestConfig};
use crate::{Error, Result};

pub const PARTIAL_ALPHAS: [f64; 10] = [0.0, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0];
pub const PARTIAL_DIMS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoverySettings {
    pub n_trajectories: usize,
    pub horizon: usize,
    pub test: TestConfig,
}

impl Default for DiscoverySettings {
    fn default() -> Self {
        Self { n_trajectories: probe::DEFAULT_N, horizon: probe::DEFAULT_HORIZON, test: TestConfig::default() }
    }
}

/// Mask and truth of one discovery run with seed `seed` for both the
/// environment structure and the probe.
pub fn discover_once(
    env_config: &EnvConfig,
    seed: u64,
    policy: PolicyKind,
    settings: &DiscoverySettings,
) -> Result<(Vec<bool>, Vec<bool>, Vec<DimLabel>)> {
    let cfg = env_config.clone().with_seed(seed);
    let (b, i) = probe::collect_pair(&cfg, settings.n_trajectories, settings.horizon, seed, policy)?;
    let result = stats::discover(&b, &i, &settings.test)?;
    Ok((result.mask, b.ground_truth_mask(), b.labels))
}

/// Point mass with six partial dimensions and 20 exogenous distractors
/// (10 autonomous, 10 mimicking).
pub fn partial_base(alpha: f64) -> EnvConfig {
    EnvConfig::point_mass(crate::env::DistractorLevel::Custom, 0)
        .with_custom(FamilyCounts::new(10, 10, 0, 0))
        .with_partial(PARTIAL_DIMS, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialRow {
    pub alpha: f64,
    pub seed: u64,
    /// Fraction of partial dimensions selected.
    pub partial_recall: f64,
    /// Against the full ground truth.
    pub score: BoundaryScore,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PartialReport {
    pub rows: Vec<PartialRow>,
}

/// Runs discovery for every `(alpha, seed)` on `base` with its
/// `alpha_mix` replaced.
pub fn partial_sweep(
    base: &EnvConfig,
    alphas: &[f64],
    seeds: &[u64],
    settings: &DiscoverySettings,
) -> Result<PartialReport> {
    if base.partial_dims == 0 {
        return Err(Error::config("partial sweep needs partial_dims > 0"));
    }
    let mut rows = Vec::new();
    for &alpha in alphas {
        let cfg = base.clone().with_partial(base.partial_dims, alpha);
        for &seed in seeds {
            let (mask, truth, labels) = discover_once(&cfg, seed, PolicyKind::StructuredRandom, settings)?;
            let partial: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == DimLabel::Partial).collect();
            let hits = partial.iter().filter(|&&i| mask[i]).count();
            rows.push(PartialRow {
                alpha,
                seed,
                partial_recall: hits as f64 / partial.len() as f64,
                score: score_mask(&mask, &truth)?,
            });
        }
    }
    Ok(PartialReport { rows })
}

impl PartialReport {
    pub fn alphas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.alpha) {
                out.push(r.alpha);
            }
        }
        out
    }

    pub fn rows_at(&self, alpha: f64) -> Vec<&PartialRow> {
        self.rows.iter().filter(|r| r.alpha == alpha).collect()
    }

    /// `alpha,seed,partial_recall,precision,recall,f1`.
    pub fn write_csv<W: Write>(&self, mut w: W, manifest_hash: Option<&str>) -> Result<()> {
        if let Some(h) = manifest_hash {
            writeln!(w, "# manifest_hash={h}")?;
        }
        writeln!(w, "alpha,seed,partial_recall,precision,recall,f1")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:.6},{:.6},{:.6},{:.6}",
                r.alpha, r.seed, r.partial_recall, r.score.precision, r.score.recall, r.score.f1
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn chart(&self) -> LineChart {
        let mean = |alpha: f64, f: fn(&PartialRow) -> f64| {
            let rs = self.rows_at(alpha);
            rs.iter().map(|r| f(r)).sum::<f64>() / rs.len() as f64
        };
        let alphas = self.alphas();
        LineChart {
            title: "Partial controllability".into(),
            x_label: "mixing coefficient".into(),
            y_label: "mean over seeds".into(),
            series: vec![
                Series::line("partial recall", alphas.iter().map(|&a| (a, mean(a, |r| r.partial_recall))).collect()),
                Series::line("precision", alphas.iter().map(|&a| (a, mean(a, |r| r.score.precision))).collect()),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoutRow {
    pub env_hash: String,
    pub env: String,
    pub policy: PolicyKind,
    pub seed: u64,
    pub score: BoundaryScore,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoutReport {
    pub rows: Vec<ScoutRow>,
}

fn env_name(cfg: &EnvConfig) -> String {
    match cfg.core_kind {
        crate::env::CoreKind::ChainK => format!("chain_{}", cfg.chain_len),
        kind => format!("{}-{}", kind.as_str(), cfg.distractor_level.as_str()),
    }
}

/// Boundary scores of structured versus uniform baseline probes.
pub fn scout_sweep(envs: &[EnvConfig], seeds: &[u64], settings: &DiscoverySettings) -> Result<ScoutReport> {
    let mut rows = Vec::new();
    for env in envs {
        for &seed in seeds {
            for policy in [PolicyKind::StructuredRandom, PolicyKind::UniformRandom] {
                let (mask, truth, _) = discover_once(env, seed, policy, settings)?;
                rows.push(ScoutRow {
                    env_hash: env.clone().with_seed(seed).hash(),
                    env: env_name(env),
                    policy,
                    seed,
                    score: score_mask(&mask, &truth)?,
                });
            }
        }
    }
    Ok(ScoutReport { rows })
}

impl ScoutReport {
    pub fn f1(&self, env: &str, policy: PolicyKind, seed: u64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.env == env && r.policy == policy && r.seed == seed)
            .map(|r| r.score.f1)
    }

    /// `env,policy,seed,precision,recall,f1`.
    pub fn write_csv<W: Write>(&self, mut w: W, manifest_hash: Option<&str>) -> Result<()> {
        if let Some(h) = manifest_hash {
            writeln!(w, "# manifest_hash={h}")?;
        }
        writeln!(w, "env,policy,seed,precision,recall,f1")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{:.6},{:.6},{:.6}",
                r.env,
                r.policy.as_str(),
                r.seed,
                r.score.precision,
                r.score.recall,
                r.score.f1
            )?;
        }
        w.flush()?;
        Ok(())
    }
}
