use serde::{Deserialize, Serialize};

use crate::probe::{ProbeMode, TrajectorySet};
use crate::{par, Error, Result};

/// Mean absolute `h`-step difference of one column over non-overlapping
/// windows anchored at index 0: `(1/K) sum_k |x[kh] - x[(k-1)h]|`,
/// `K = floor(T / h)`, where `column.len() = T + 1`.
pub fn delta_of_column(column: &[f64], h: usize) -> Result<f64> {
    let t = column.len().saturating_sub(1);
    if h == 0 || h > t {
        return Err(Error::input(format!("horizon {h} outside 1..={t}")));
    }
    let k = t / h;
    let sum: f64 = (1..=k).map(|j| (column[j * h] - column[(j - 1) * h]).abs()).sum();
    Ok(sum / k as f64)
}

/// [`delta_of_column`] on column `dim` of a row-major `(T + 1) x d` matrix.
pub fn summary_delta(obs: &[f64], d: usize, dim: usize, h: usize) -> Result<f64> {
    if d == 0 || obs.len() % d != 0 || dim >= d {
        return Err(Error::DimensionMismatch(format!(
            "matrix of {} values is not (T+1) x {d}, or dim {dim} out of range",
            obs.len()
        )));
    }
    let column: Vec<f64> = obs.iter().skip(dim).step_by(d).copied().collect();
    delta_of_column(&column, h)
}

/// Delta statistics for every (dimension, horizon, trajectory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub d: usize,
    pub horizons: Vec<usize>,
    pub n: usize,
    /// Indexed `[(i * |H| + hi) * n + k]`.
    pub values: Vec<f64>,
    pub modes: Vec<ProbeMode>,
}

impl SummaryTable {
    pub fn build(set: &TrajectorySet, horizons: &[usize]) -> Result<Self> {
        let d = set.d;
        let t = set.horizon();
        if let Some(&h) = horizons.iter().find(|&&h| h == 0 || h > t) {
            return Err(Error::input(format!("horizon {h} outside 1..={t}")));
        }
        let n = set.trajectories.len();
        let nh = horizons.len();
        // Per trajectory: d * |H| values, dimension-major.
        let per_traj = par::map_indexed(n, |k| {
            let traj = &set.trajectories[k];
            let mut out = Vec::with_capacity(d * nh);
            let mut column = vec![0.0; t + 1];
            for i in 0..d {
                for (s, c) in column.iter_mut().enumerate() {
                    *c = traj.obs_at(s, i);
                }
                for &h in horizons {
                    let kk = t / h;
                    let sum: f64 = (1..=kk).map(|j| (column[j * h] - column[(j - 1) * h]).abs()).sum();
                    out.push(sum / kk as f64);
                }
            }
            out
        });
        let mut values = vec![0.0; d * nh * n];
        for (k, row) in per_traj.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                values[j * n + k] = *v;
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite summary statistic".into()));
        }
        Ok(Self {
            d,
            horizons: horizons.to_vec(),
            n,
            values,
            modes: set.trajectories.iter().map(|t| t.mode).collect(),
        })
    }

    /// The `n` per-trajectory values for dimension `i` at horizon index `hi`.
    pub fn sample(&self, i: usize, hi: usize) -> &[f64] {
        let start = (i * self.horizons.len() + hi) * self.n;
        &self.values[start..start + self.n]
    }
}
