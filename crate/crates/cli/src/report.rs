use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use causal_scope::downstream::ScalingReport;
use causal_scope::experiments::PartialReport;
use causal_scope::stats::MaskReport;

use crate::exit::{Coded, CONFIG};
use crate::manifest::{input_ref, write_atomic, InputRef, Job, Manifest, OutputRef, SweepKind};
use crate::run::{ranking_chart, read_json, tagged_svg, SweepOutput};

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

/// Run manifests under `dir` (one directory level deep), by path.
pub fn find_manifests(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let scan = |d: &Path, found: &mut Vec<PathBuf>, subdirs: &mut Vec<PathBuf>| -> Result<()> {
        for entry in fs::read_dir(d).with_context(|| format!("listing {}", d.display()))? {
            let path = entry?.path();
            if path.is_dir() {
                subdirs.push(path);
            } else if path.to_string_lossy().ends_with(MANIFEST_SUFFIX) {
                found.push(path);
            }
        }
        Ok(())
    };
    let mut subdirs = Vec::new();
    scan(dir, &mut found, &mut subdirs)?;
    for sub in subdirs {
        scan(&sub, &mut found, &mut Vec::new())?;
    }
    found.sort();
    Ok(found)
}

fn plot_name(m: &Manifest) -> Option<String> {
    match &m.job {
        Job::Discover { .. } => Some(format!("ranking-{}.svg", m.manifest_hash)),
        Job::Sweep { kind: SweepKind::Scaling, .. } => Some(format!("scaling-{}.svg", m.manifest_hash)),
        Job::Sweep { kind: SweepKind::Partial, .. } => Some(format!("partial-{}.svg", m.manifest_hash)),
        _ => None,
    }
}

/// Inputs and outputs of a report over the manifests in `in_dir`.
pub fn plan(in_dir: &Path, out_dir: &Path, plots: bool) -> Result<(Vec<InputRef>, Vec<OutputRef>)> {
    let mut inputs = Vec::new();
    let mut outputs = vec![OutputRef { role: "summary".into(), path: out_dir.join("summary.csv") }];
    for path in find_manifests(in_dir)? {
        let m = Manifest::read(&path)?;
        if matches!(m.job, Job::Report { .. }) {
            continue;
        }
        if plots {
            if let Some(name) = plot_name(&m) {
                outputs.push(OutputRef { role: format!("plot:{}", m.manifest_hash), path: out_dir.join(name) });
            }
        }
        inputs.push(input_ref("manifest", &path)?);
    }
    if inputs.is_empty() {
        return Err(Coded::new(CONFIG, format!("no run manifests found in {}", in_dir.display())).into());
    }
    Ok((inputs, outputs))
}

fn detail(m: &Manifest) -> Result<String> {
    let need = |role: &str| -> Result<&Path> {
        m.output(role).ok_or_else(|| Coded::new(CONFIG, format!("manifest lacks `{role}` output")).into())
    };
    Ok(match &m.job {
        Job::Probe { probe, .. } => {
            format!("mode={} n={} horizon={}", probe.mode.as_str(), probe.n_trajectories, probe.horizon)
        }
        Job::Discover { .. } => {
            let r: MaskReport = read_json(need("json")?)?;
            format!("selected={}/{}", r.mask.iter().filter(|&&v| v != 0).count(), r.mask.len())
        }
        Job::Baseline { method, .. } => {
            let r: causal_scope::baselines::SelectionReport = read_json(need("json")?)?;
            format!("method={} budget={}", method.as_str(), r.budget)
        }
        Job::Sweep { kind, .. } => {
            let v: serde_json::Value = read_json(need("json")?)?;
            let rows = v.get("rows").and_then(|r| r.as_array()).map_or(0, Vec::len);
            format!("kind={} rows={rows}", kind.as_str())
        }
        Job::Report { .. } => String::new(),
    })
}

pub fn execute(report: &Manifest, plots: bool) -> Result<String> {
    let mut csv = Vec::new();
    writeln!(csv, "# manifest_hash={}", report.manifest_hash)?;
    writeln!(csv, "command,manifest_hash,env_hash,seeds,detail")?;
    let mut n_plots = 0;
    for input in &report.inputs {
        let m = Manifest::read(&input.path)?;
        let seeds: Vec<String> = m.seeds.iter().map(u64::to_string).collect();
        writeln!(
            csv,
            "{},{},{},{},{}",
            m.job.name(),
            m.manifest_hash,
            m.env_hash.as_deref().unwrap_or(""),
            seeds.join(";"),
            detail(&m)?
        )?;
        if !plots {
            continue;
        }
        let Some(target) = report.output(&format!("plot:{}", m.manifest_hash)) else { continue };
        let json = m.output("json").ok_or_else(|| Coded::new(CONFIG, "manifest lacks `json` output"))?;
        let chart = match &m.job {
            Job::Discover { .. } => ranking_chart(&read_json::<MaskReport>(json)?),
            Job::Sweep { kind: SweepKind::Scaling, .. } => read_json::<SweepOutput<ScalingReport>>(json)?.report.chart(),
            Job::Sweep { kind: SweepKind::Partial, .. } => read_json::<SweepOutput<PartialReport>>(json)?.report.chart(),
            _ => continue,
        };
        write_atomic(target, &tagged_svg(&chart, &report.manifest_hash))?;
        n_plots += 1;
    }
    let summary = report.output("summary").ok_or_else(|| Coded::new(CONFIG, "manifest lacks `summary` output"))?;
    write_atomic(summary, &csv)?;
    Ok(format!("{} runs summarized, {n_plots} plots", report.inputs.len()))
}
