//! Observational feature-selection baselines. Each scores every
//! observation dimension from passively collected transitions and keeps
//! the top `budget` dimensions.

mod forward;
mod mi;

pub use forward::{evaluate, FitQuality, ForwardModel, TransitionData, DEFAULT_FEATURES, DEFAULT_LAMBDA_SCALE};
pub use mi::{binned_mi, equal_frequency_bins, plug_in_mi, MI_BINS};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::env::{DimLabel, EnvConfig};
use crate::probe::{self, PolicyKind, ProbeConfig, ProbeMode, TrajectorySet};
use crate::seed::{self, tag};
use crate::{par, Error, Result};

pub const HOLDOUT_FRACTION: f64 = 0.25;
pub const FD_STEP: f64 = 1e-3;
/// Rows of held-out data used for finite-difference attribution.
pub const GRAD_ROWS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mi,
    Variance,
    CondMi,
    GradAttr,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mi, Method::Variance, Method::CondMi, Method::GradAttr];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mi => "mi",
            Method::Variance => "variance",
            Method::CondMi => "cond_mi",
            Method::GradAttr => "grad_attr",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mi" => Ok(Method::Mi),
            "variance" => Ok(Method::Variance),
            "cond_mi" => Ok(Method::CondMi),
            "grad_attr" => Ok(Method::GradAttr),
            other => Err(Error::config(format!("unknown baseline method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub scores: Vec<f64>,
    /// Dimensions by descending score; ties keep index order.
    pub ranking: Vec<usize>,
    pub mask: Vec<bool>,
    pub budget: usize,
}

impl SelectionResult {
    pub fn from_scores(method: Method, scores: Vec<f64>, budget: usize) -> Result<Self> {
        if budget < 1 {
            return Err(Error::input("selection budget must be at least 1"));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Numerical(format!("{} produced a non-finite score", method.as_str())));
        }
        let mut ranking: Vec<usize> = (0..scores.len()).collect();
        ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut mask = vec![false; scores.len()];
        for &i in ranking.iter().take(budget) {
            mask[i] = true;
        }
        Ok(Self { method, scores, ranking, mask, budget })
    }

    /// 1-based rank of dimension `i`.
    pub fn rank_of(&self, i: usize) -> usize {
        self.ranking.iter().position(|&r| r == i).map_or(0, |p| p + 1)
    }
}

/// Passive data for the baselines: `2n` behaviour-policy trajectories,
/// matching the transition count of an `n`-per-mode probe.
pub fn observational_set(env_config: &EnvConfig, n: usize, horizon: usize, seed: u64) -> Result<TrajectorySet> {
    let cfg = ProbeConfig::new(2 * n, horizon, ProbeMode::Baseline, seed::derive(seed, &[tag::OBSERVATIONAL]))
        .with_policy(PolicyKind::StructuredRandom);
    probe::collect(env_config, &cfg)
}

fn feature_rng(trajs: &TrajectorySet, stream: u64) -> crate::seed::Rng {
    seed::derived_rng(trajs.probe.seed, &[tag::FEATURES, stream])
}

/// `max_j MI(o_{i,t+1}; a_{j,t})` over pooled transitions.
pub fn mi_select(trajs: &TrajectorySet, budget: usize) -> Result<SelectionResult> {
    let (d, d_a) = (trajs.d, trajs.d_a);
    let mut next = vec![Vec::new(); d];
    let mut acts = vec![Vec::new(); d_a];
    for traj in &trajs.trajectories {
        for t in 0..traj.horizon() {
            for (i, v) in traj.obs(t + 1).iter().enumerate() {
                next[i].push(*v);
            }
            for (j, v) in traj.action(t).iter().enumerate() {
                acts[j].push(*v);
            }
        }
    }
    let n = acts.first().map_or(0, Vec::len);
    if n < 2 * MI_BINS {
        return Err(Error::input(format!("MI needs at least {} transitions, got {n}", 2 * MI_BINS)));
    }
    let act_bins: Vec<Vec<usize>> = acts.iter().map(|a| equal_frequency_bins(a, MI_BINS)).collect();
    let scores = par::map_indexed(d, |i| {
        let ob = equal_frequency_bins(&next[i], MI_BINS);
        act_bins.iter().map(|ab| plug_in_mi(&ob, ab, MI_BINS)).fold(0.0, f64::max)
    });
    SelectionResult::from_scores(Method::Mi, scores, budget)
}

fn fit_joint(trajs: &TrajectorySet, data: &TransitionData) -> Result<ForwardModel> {
    ForwardModel::fit(
        &data.train_x,
        &data.train_y,
        data.p(),
        data.d,
        DEFAULT_FEATURES,
        DEFAULT_LAMBDA_SCALE,
        &mut feature_rng(trajs, 0),
    )
}

/// Held-out residual variance of a forward model `(s, a) -> o'`; the
/// highest-variance dimensions are selected.
pub fn variance_select(trajs: &TrajectorySet, budget: usize) -> Result<SelectionResult> {
    let data = TransitionData::from_set(trajs, HOLDOUT_FRACTION)?;
    let model = fit_joint(trajs, &data)?;
    let quality = evaluate(&model, &data.test_x, &data.test_y);
    SelectionResult::from_scores(Method::Variance, quality.residual_variance, budget)
}

/// Held-out `R^2` gain from adding actions to a state-only forward model,
/// clipped at zero.
pub fn cond_mi_select(trajs: &TrajectorySet, budget: usize) -> Result<SelectionResult> {
    let data = TransitionData::from_set(trajs, HOLDOUT_FRACTION)?;
    let joint = fit_joint(trajs, &data)?;
    let (train_s, test_s) = data.state_only();
    let state = ForwardModel::fit(
        &train_s,
        &data.train_y,
        data.d,
        data.d,
        DEFAULT_FEATURES,
        DEFAULT_LAMBDA_SCALE,
        &mut feature_rng(trajs, 1),
    )?;
    let r2_sa = evaluate(&joint, &data.test_x, &data.test_y).r2;
    let r2_s = evaluate(&state, &test_s, &data.test_y).r2;
    let scores = r2_sa.iter().zip(&r2_s).map(|(a, b)| (a - b).max(0.0)).collect();
    SelectionResult::from_scores(Method::CondMi, scores, budget)
}

/// Mean absolute action sensitivity `sum_j |d f_i / d a_j|` of a joint
/// forward model, by central differences.
pub fn grad_attr_select(trajs: &TrajectorySet, budget: usize) -> Result<SelectionResult> {
    let data = TransitionData::from_set(trajs, HOLDOUT_FRACTION)?;
    let model = fit_joint(trajs, &data)?;
    let p = data.p();
    let rows = data.test_x.len() / p;
    let stride = (rows / GRAD_ROWS).max(1);
    let sample: Vec<f64> =
        data.test_x.chunks_exact(p).step_by(stride).take(GRAD_ROWS).flatten().copied().collect();
    let scores = model.sensitivity(&sample, data.d..p, FD_STEP);
    SelectionResult::from_scores(Method::GradAttr, scores, budget)
}

pub fn select(method: Method, trajs: &TrajectorySet, budget: usize) -> Result<SelectionResult> {
    match method {
        Method::Mi => mi_select(trajs, budget),
        Method::Variance => variance_select(trajs, budget),
        Method::CondMi => cond_mi_select(trajs, budget),
        Method::GradAttr => grad_attr_select(trajs, budget),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDim {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<DimLabel>,
    pub score: f64,
    pub rank: usize,
    pub selected: bool,
}

/// JSON form of a [`SelectionResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub method: Method,
    pub env_hash: String,
    pub budget: usize,
    pub per_dim: Vec<SelectionDim>,
    pub mask: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest_hash: Option<String>,
}

impl SelectionReport {
    pub fn new(result: &SelectionResult, env_hash: &str, labels: Option<&[DimLabel]>) -> Self {
        let per_dim = (0..result.scores.len())
            .map(|i| SelectionDim {
                index: i,
                label: labels.and_then(|l| l.get(i).copied()),
                score: result.scores[i],
                rank: result.rank_of(i),
                selected: result.mask[i],
            })
            .collect();
        Self {
            method: result.method,
            env_hash: env_hash.to_string(),
            budget: result.budget,
            per_dim,
            mask: result.mask.iter().map(|&m| m as u8).collect(),
            manifest_hash: None,
        }
    }

    /// `index,label,score,rank,selected`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if let Some(h) = &self.manifest_hash {
            writeln!(w, "# manifest_hash={h}")?;
        }
        writeln!(w, "index,label,score,rank,selected")?;
        for dim in &self.per_dim {
            let label = dim.label.map(DimLabel::as_str).unwrap_or("");
            writeln!(w, "{},{},{:e},{},{}", dim.index, label, dim.score, dim.rank, dim.selected as u8)?;
        }
        w.flush()?;
        Ok(())
    }
}
