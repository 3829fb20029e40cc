//! Summary statistics, two-sample tests, Benjamini-Hochberg correction and
//! assembly of the boundary mask from baseline and intervention sets.

mod bh;
mod report;
mod summary;

pub use bh::{bh_adjust, BhResult};
pub use report::{DimReport, MaskReport};
pub use summary::{delta_of_column, summary_delta, SummaryTable};
pub use tests::{
    binomial, for_each_combination, permutation_test, permutation_test_with, welch_t,
    PermutationStrategy, WelchResult, P_FLOOR,
};

use serde::{Deserialize, Serialize};

use crate::probe::TrajectorySet;
use crate::seed::{self, tag};
use crate::{par, Error, Result};

pub const DEFAULT_HORIZONS: [usize; 3] = [1, 5, 10];
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_PERMUTATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Welch,
    Permutation,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::Welch => "welch",
            TestKind::Permutation => "permutation",
        }
    }
}

impl std::str::FromStr for TestKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "welch" => Ok(TestKind::Welch),
            "permutation" => Ok(TestKind::Permutation),
            other => Err(Error::config(format!("unknown test kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestConfig {
    pub horizons: Vec<usize>,
    pub alpha: f64,
    pub test_kind: TestKind,
    pub n_permutations: usize,
    /// Seed of the relabeling streams in permutation mode.
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            horizons: DEFAULT_HORIZONS.to_vec(),
            alpha: DEFAULT_ALPHA,
            test_kind: TestKind::Welch,
            n_permutations: DEFAULT_PERMUTATIONS,
            seed: 0,
        }
    }
}

impl TestConfig {
    pub fn with_horizons(mut self, horizons: &[usize]) -> Self {
        self.horizons = horizons.to_vec();
        self
    }

    pub fn with_kind(mut self, kind: TestKind) -> Self {
        self.test_kind = kind;
        self
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.horizons.is_empty() {
            return Err(Error::config("at least one test horizon is required"));
        }
        if let Some(h) = self.horizons.iter().find(|&&h| h == 0 || h > horizon) {
            return Err(Error::config(format!("test horizon {h} outside 1..={horizon}")));
        }
        let mut sorted = self.horizons.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.horizons.len() {
            return Err(Error::config("test horizons must be distinct"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha must lie in (0, 1)"));
        }
        if self.test_kind == TestKind::Permutation && self.n_permutations < 99 {
            return Err(Error::config("permutation mode needs at least 99 permutations"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskResult {
    pub horizons: Vec<usize>,
    /// `d x |H|`.
    pub raw_p: Vec<Vec<f64>>,
    pub adjusted_p: Vec<Vec<f64>>,
    pub mask: Vec<bool>,
    pub per_dim_min_adjusted_p: Vec<f64>,
}

impl MaskResult {
    pub fn selected(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }
}

/// Tests every (dimension, horizon) for a shift of the Delta statistic
/// between the two sets, corrects all `d x |H|` p-values jointly with
/// BH, and selects dimension `i` when some horizon's adjusted p-value is
/// below `alpha`.
pub fn discover(baseline: &TrajectorySet, intervention: &TrajectorySet, cfg: &TestConfig) -> Result<MaskResult> {
    if baseline.is_empty() || intervention.is_empty() {
        return Err(Error::input("both trajectory sets must be non-empty"));
    }
    if baseline.d != intervention.d {
        return Err(Error::DimensionMismatch(format!(
            "baseline has d={}, intervention has d={}",
            baseline.d, intervention.d
        )));
    }
    if baseline.horizon() != intervention.horizon() {
        return Err(Error::DimensionMismatch(format!(
            "baseline has T={}, intervention has T={}",
            baseline.horizon(),
            intervention.horizon()
        )));
    }
    cfg.validate(baseline.horizon())?;
    let base = SummaryTable::build(baseline, &cfg.horizons)?;
    let int = SummaryTable::build(intervention, &cfg.horizons)?;
    discover_from_tables(&base, &int, cfg)
}

/// [`discover`] on precomputed summary tables.
pub fn discover_from_tables(base: &SummaryTable, int: &SummaryTable, cfg: &TestConfig) -> Result<MaskResult> {
    if base.d != int.d || base.horizons != int.horizons {
        return Err(Error::DimensionMismatch("summary tables differ in shape".into()));
    }
    let d = base.d;
    let nh = cfg.horizons.len();
    if base.horizons != cfg.horizons {
        return Err(Error::DimensionMismatch("summary horizons differ from test config".into()));
    }
    let flat = par::map_indexed(d * nh, |j| {
        let (i, hi) = (j / nh, j % nh);
        let xs = base.sample(i, hi);
        let ys = int.sample(i, hi);
        match cfg.test_kind {
            TestKind::Welch => welch_t(xs, ys).map(|w| w.p),
            TestKind::Permutation => {
                let mut rng = seed::derived_rng(cfg.seed, &[tag::PERMUTATION, i as u64, hi as u64]);
                permutation_test(xs, ys, cfg.n_permutations, &mut rng)
            }
        }
    });
    let flat = flat.into_iter().collect::<Result<Vec<f64>>>()?;
    let bh = bh_adjust(&flat, cfg.alpha)?;
    let rows = |v: &[f64]| v.chunks(nh).map(<[f64]>::to_vec).collect::<Vec<_>>();
    let adjusted_p = rows(&bh.adjusted);
    let per_dim_min_adjusted_p: Vec<f64> =
        adjusted_p.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let mask = per_dim_min_adjusted_p.iter().map(|&p| p < cfg.alpha).collect();
    Ok(MaskResult {
        horizons: cfg.horizons.clone(),
        raw_p: rows(&flat),
        adjusted_p,
        mask,
        per_dim_min_adjusted_p,
    })
}
