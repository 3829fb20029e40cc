use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use causal_scope::baselines::{self, SelectionReport};
use causal_scope::downstream::{scaling_sweep, ScalingReport};
use causal_scope::experiments::{partial_sweep, scout_sweep, DiscoverySettings, PartialReport, ScoutReport};
use causal_scope::plot::{LineChart, Series};
use causal_scope::probe::{self, read_binary_file, TrajectorySet};
use causal_scope::stats::{self, MaskReport};
use serde::{Deserialize, Serialize};

use crate::exit::{Coded, CONFIG};
use crate::manifest::{to_json, write_atomic, Job, Manifest, SweepKind};

/// JSON body of a sweep output.
#[derive(Debug, Serialize, Deserialize)]
pub struct SweepOutput<T> {
    pub kind: SweepKind,
    pub manifest_hash: String,
    #[serde(flatten)]
    pub report: T,
}

fn input<'a>(m: &'a Manifest, role: &str) -> Result<&'a Path> {
    m.inputs
        .iter()
        .find(|i| i.role == role)
        .map(|i| i.path.as_path())
        .ok_or_else(|| Coded::new(CONFIG, format!("manifest has no `{role}` input")).into())
}

fn output<'a>(m: &'a Manifest, role: &str) -> Result<&'a Path> {
    m.output(role).ok_or_else(|| Coded::new(CONFIG, format!("manifest has no `{role}` output")).into())
}

pub fn read_set(path: &Path) -> Result<TrajectorySet> {
    read_binary_file(path).with_context(|| format!("reading trajectories from {}", path.display()))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> causal_scope::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Tags an SVG with the manifest hash on its second line.
pub fn tagged_svg(chart: &LineChart, hash: &str) -> Vec<u8> {
    chart.to_svg().replacen('\n', &format!("\n<!-- manifest_hash={hash} -->\n"), 1).into_bytes()
}

/// Recomputes every output of `m` at the paths it lists and returns a
/// one-line summary.
pub fn execute(m: &Manifest) -> Result<String> {
    let hash = m.manifest_hash.as_str();
    match &m.job {
        Job::Probe { env, probe: cfg, csv } => {
            let mut set = probe::collect(env, cfg)?;
            set.manifest_hash = Some(hash.into());
            let mut bin = Vec::new();
            probe::write_binary(&set, &mut bin)?;
            write_atomic(output(m, "trajectories")?, &bin)?;
            if *csv {
                write_atomic(output(m, "csv")?, &csv_bytes(|b| probe::write_csv(&set, b))?)?;
            }
            Ok(format!("{} {} trajectories, T={}, d={}", set.len(), cfg.mode.as_str(), cfg.horizon, set.d))
        }
        Job::Discover { test } => {
            let base = read_set(input(m, "baseline")?)?;
            let int = read_set(input(m, "intervention")?)?;
            if base.env_hash != int.env_hash {
                bail!(Coded::new(
                    CONFIG,
                    format!("environment hash mismatch: baseline {} vs intervention {}", base.env_hash, int.env_hash)
                ));
            }
            let result = stats::discover(&base, &int, test)?;
            let mut report = MaskReport::new(&result, test, &base.env_hash, Some(&base.env_config), Some(&base.labels));
            report.manifest_hash = Some(hash.into());
            write_atomic(output(m, "json")?, &to_json(&report)?)?;
            write_atomic(output(m, "csv")?, &csv_bytes(|b| report.write_csv(b))?)?;
            Ok(format!("selected {} of {} dimensions", result.selected().len(), result.mask.len()))
        }
        Job::Baseline { method, budget, seed } => {
            let mut set = read_set(input(m, "trajectories")?)?;
            if let Some(s) = seed {
                set.probe.seed = *s;
            }
            let budget = budget.unwrap_or_else(|| set.ground_truth_mask().iter().filter(|&&t| t).count().max(1));
            let result = baselines::select(*method, &set, budget)?;
            let mut report = SelectionReport::new(&result, &set.env_hash, Some(&set.labels));
            report.manifest_hash = Some(hash.into());
            write_atomic(output(m, "json")?, &to_json(&report)?)?;
            write_atomic(output(m, "csv")?, &csv_bytes(|b| report.write_csv(b))?)?;
            Ok(format!("{} kept {} of {} dimensions", method.as_str(), budget, set.d))
        }
        Job::Sweep { kind, env, levels, methods, alphas, settings } => {
            let seeds = &m.seeds;
            let discovery = DiscoverySettings {
                n_trajectories: settings.n_trajectories,
                horizon: settings.probe_horizon,
                test: settings.test.clone(),
            };
            let (json, csv, chart, rows) = match kind {
                SweepKind::Scaling => {
                    let report = scaling_sweep(env, levels, methods, seeds, settings)?;
                    let csv = csv_bytes(|b| report.write_csv(b, Some(hash)))?;
                    let chart = report.chart();
                    let rows = report.rows.len();
                    (to_json(&SweepOutput::<ScalingReport> { kind: *kind, manifest_hash: hash.into(), report })?, csv, Some(chart), rows)
                }
                SweepKind::Partial => {
                    let report = partial_sweep(env, alphas, seeds, &discovery)?;
                    let csv = csv_bytes(|b| report.write_csv(b, Some(hash)))?;
                    let chart = report.chart();
                    let rows = report.rows.len();
                    (to_json(&SweepOutput::<PartialReport> { kind: *kind, manifest_hash: hash.into(), report })?, csv, Some(chart), rows)
                }
                SweepKind::Scout => {
                    let report = scout_sweep(std::slice::from_ref(env), seeds, &discovery)?;
                    let csv = csv_bytes(|b| report.write_csv(b, Some(hash)))?;
                    let rows = report.rows.len();
                    (to_json(&SweepOutput::<ScoutReport> { kind: *kind, manifest_hash: hash.into(), report })?, csv, None, rows)
                }
            };
            write_atomic(output(m, "json")?, &json)?;
            write_atomic(output(m, "csv")?, &csv)?;
            if let Some(chart) = chart {
                write_atomic(output(m, "svg")?, &tagged_svg(&chart, hash))?;
            }
            Ok(format!("{} sweep: {rows} rows", kind.as_str()))
        }
        Job::Report { plots } => crate::report::execute(m, *plots),
    }
}

/// `-log10` of each dimension's smallest adjusted p-value, ranked.
pub fn ranking_chart(report: &MaskReport) -> LineChart {
    let mut dims: Vec<(f64, bool)> = report
        .per_dim
        .iter()
        .map(|d| {
            let p = d.adjusted_p_by_horizon.iter().copied().fold(1.0, f64::min);
            (-(p.max(1e-300)).log10(), d.selected)
        })
        .collect();
    dims.sort_by(|a, b| b.0.total_cmp(&a.0));
    let pick = |sel: bool| -> Vec<(f64, f64)> {
        dims.iter().enumerate().filter(|(_, d)| d.1 == sel).map(|(k, d)| ((k + 1) as f64, d.0)).collect()
    };
    let cut = -report.config.alpha.log10();
    LineChart {
        title: "Dimension ranking".into(),
        x_label: "rank".into(),
        y_label: "-log10 adjusted p".into(),
        series: vec![
            Series::markers("selected", pick(true)),
            Series::markers("not selected", pick(false)),
            Series::line("alpha", vec![(1.0, cut), (dims.len().max(2) as f64, cut)]),
        ],
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
}
