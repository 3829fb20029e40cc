mod config;
mod exit;
mod manifest;
mod report;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use causal_scope::baselines::Method;
use causal_scope::downstream::{MaskMethod, SweepSettings};
use causal_scope::env::DistractorLevel;
use causal_scope::experiments::PARTIAL_ALPHAS;
use causal_scope::probe::{PolicyKind, ProbeMode};
use causal_scope::stats::{TestConfig, TestKind};
use clap::{Args, Parser, Subcommand};

use crate::exit::{Coded, CONFIG, FAILURE};
use crate::manifest::{input_ref, sibling, to_json, write_atomic, Job, Manifest, OutputRef, SweepKind};
use crate::report::MANIFEST_SUFFIX;

#[derive(Parser)]
#[command(name = "causal-scope", version, about = "Find the observation dimensions an agent's actions actually reach")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EnvSource {
    /// JSON run config (`{"env": .., "probe": .., "test": .., "cem": ..}`) or a bare environment object.
    #[arg(long)]
    env_config: Option<PathBuf>,
    /// Built-in environment instead of a config file.
    #[arg(long, conflicts_with = "env_config")]
    preset: Option<String>,
    /// Overrides the environment's structure seed.
    #[arg(long)]
    env_seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Roll out baseline or intervention trajectories.
    Probe {
        #[command(flatten)]
        env: EnvSource,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<ProbeMode>,
        #[arg(long, value_parser = parse_policy)]
        policy: Option<PolicyKind>,
        #[arg(long)]
        seed: Option<u64>,
        /// Trajectory file to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write a CSV export next to the trajectory file.
        #[arg(long)]
        csv: bool,
    },
    /// Test every dimension for an interventional shift and write the mask.
    Discover {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        intervention: PathBuf,
        #[arg(long, default_value_t = causal_scope::stats::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_values_t = causal_scope::stats::DEFAULT_HORIZONS)]
        horizons: Vec<usize>,
        #[arg(long, default_value = "welch", value_parser = parse_test)]
        test: TestKind,
        #[arg(long, default_value_t = causal_scope::stats::DEFAULT_PERMUTATIONS)]
        permutations: usize,
        /// Seed of the permutation streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mask report (JSON); the CSV and manifest go next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Select dimensions with an observational baseline.
    Baseline {
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        trajs: PathBuf,
        /// Defaults to the number of truly causal dimensions.
        #[arg(long)]
        budget: Option<usize>,
        /// Seed of the random features; defaults to the file's probe seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scaling, partial-controllability or probe-policy sweep.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        #[command(flatten)]
        env: EnvSource,
        #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2])]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_level)]
        levels: Vec<DistractorLevel>,
        #[arg(long, value_delimiter = ',', value_parser = parse_mask_method)]
        methods: Vec<MaskMethod>,
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        /// Probe trajectories per mode.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        cem_iterations: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize run manifests into a CSV and optional SVG plots.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plots: bool,
    },
    /// Re-run a manifest into a fresh directory and compare outputs byte by byte.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print or write a run config for a preset environment.
    InitConfig {
        #[arg(long, default_value = "point_mass_medium")]
        preset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<ProbeMode, String> {
    s.parse().map_err(|e: causal_scope::Error| e.to_string())
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse().map_err(|e: causal_scope::Error| e.to_string())
}

fn parse_test(s: &str) -> Result<TestKind, String> {
    s.parse().map_err(|e: causal_scope::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: causal_scope::Error| e.to_string())
}

fn parse_level(s: &str) -> Result<DistractorLevel, String> {
    s.parse().map_err(|e: causal_scope::Error| e.to_string())
}

fn parse_mask_method(s: &str) -> Result<MaskMethod, String> {
    s.parse().map_err(|e: causal_scope::Error| e.to_string())
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).with_context(|| format!("resolving {}", p.display()))
}

fn out_ref(role: &str, path: &Path) -> Result<OutputRef> {
    Ok(OutputRef { role: role.into(), path: absolute(path)? })
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    out.with_file_name(format!("{stem}{MANIFEST_SUFFIX}"))
}

/// Runs a planned manifest and writes it next to its outputs.
fn commit(manifest: Manifest, manifest_path: &Path) -> Result<()> {
    let summary = run::execute(&manifest)?;
    manifest.write(manifest_path)?;
    println!("{summary}");
    println!("manifest {} -> {}", manifest.manifest_hash, manifest_path.display());
    Ok(())
}

fn threads_from_env() -> Result<()> {
    let Ok(raw) = std::env::var("CAUSAL_SCOPE_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Coded::new(CONFIG, format!("CAUSAL_SCOPE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match threads_from_env().and_then(|()| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code_of(&err))
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Probe { env, n, horizon, mode, policy, seed, out, csv } => {
            let mut cfg = config::resolve(env.env_config.as_deref(), env.preset.as_deref())?;
            if let Some(s) = env.env_seed {
                cfg.env.seed = s;
            }
            let mut probe = cfg.probe;
            probe.n_trajectories = n.unwrap_or(probe.n_trajectories);
            probe.horizon = horizon.unwrap_or(probe.horizon);
            probe.mode = mode.unwrap_or(probe.mode);
            probe.policy = policy.unwrap_or(probe.policy);
            probe.seed = seed.unwrap_or(probe.seed);
            let mut outputs = vec![out_ref("trajectories", &out)?];
            if csv {
                outputs.push(out_ref("csv", &sibling(&out, "csv"))?);
            }
            let env_hash = cfg.env.hash();
            let seeds = vec![probe.seed];
            let job = Job::Probe { env: cfg.env, probe, csv };
            commit(Manifest::new(job, seeds, Some(env_hash), vec![], outputs), &manifest_path_for(&out))
        }
        Command::Discover { baseline, intervention, alpha, horizons, test, permutations, seed, out } => {
            let test = TestConfig { horizons, alpha, test_kind: test, n_permutations: permutations, seed };
            let inputs = vec![input_ref("baseline", &baseline)?, input_ref("intervention", &intervention)?];
            let env_hash = run::read_set(&baseline)?.env_hash;
            let outputs = vec![out_ref("json", &out)?, out_ref("csv", &sibling(&out, "csv"))?];
            let job = Job::Discover { test };
            commit(Manifest::new(job, vec![seed], Some(env_hash), inputs, outputs), &manifest_path_for(&out))
        }
        Command::Baseline { method, trajs, budget, seed, out } => {
            let set = run::read_set(&trajs)?;
            let inputs = vec![input_ref("trajectories", &trajs)?];
            let outputs = vec![out_ref("json", &out)?, out_ref("csv", &sibling(&out, "csv"))?];
            let seeds = vec![seed.unwrap_or(set.probe.seed)];
            let job = Job::Baseline { method, budget, seed };
            commit(Manifest::new(job, seeds, Some(set.env_hash), inputs, outputs), &manifest_path_for(&out))
        }
        Command::Sweep { kind, env, seeds, levels, methods, alphas, n, horizon, cem_iterations, out } => {
            let mut cfg = config::resolve(env.env_config.as_deref(), env.preset.as_deref())?;
            if let Some(s) = env.env_seed {
                cfg.env.seed = s;
            }
            if seeds.is_empty() {
                bail!(Coded::new(CONFIG, "--seeds must list at least one seed"));
            }
            let mut settings = SweepSettings { test: cfg.test, cem: cfg.cem, ..SweepSettings::default() };
            settings.n_trajectories = n.unwrap_or(cfg.probe.n_trajectories);
            settings.probe_horizon = horizon.unwrap_or(cfg.probe.horizon);
            if let Some(it) = cem_iterations {
                settings.cem.iterations = it;
            }
            let levels = if levels.is_empty() {
                vec![DistractorLevel::None, DistractorLevel::Easy, DistractorLevel::Medium, DistractorLevel::Hard]
            } else {
                levels
            };
            let methods = if methods.is_empty() { MaskMethod::DEFAULT.to_vec() } else { methods };
            let alphas = if alphas.is_empty() { PARTIAL_ALPHAS.to_vec() } else { alphas };
            let name = kind.as_str();
            let mut outputs = vec![out_ref("json", &out.join(format!("{name}.json")))?, out_ref("csv", &out.join(format!("{name}.csv")))?];
            if kind != SweepKind::Scout {
                outputs.push(out_ref("svg", &out.join(format!("{name}.svg")))?);
            }
            let env_hash = cfg.env.hash();
            let job = Job::Sweep { kind, env: cfg.env, levels, methods, alphas, settings };
            let manifest_path = out.join(format!("{name}{MANIFEST_SUFFIX}"));
            commit(Manifest::new(job, seeds, Some(env_hash), vec![], outputs), &manifest_path)
        }
        Command::Report { input, out, plots } => {
            let (inputs, outputs) = report::plan(&input, &absolute(&out)?, plots)?;
            let manifest = Manifest::new(Job::Report { plots }, vec![], None, inputs, outputs);
            commit(manifest, &out.join(format!("report{MANIFEST_SUFFIX}")))
        }
        Command::Replay { manifest, out_dir } => replay(&manifest, &out_dir),
        Command::InitConfig { preset, out } => {
            let cfg = config::preset(&preset)?;
            let bytes = to_json(&cfg)?;
            match out {
                Some(path) => write_atomic(&path, &bytes),
                None => {
                    print!("{}", String::from_utf8_lossy(&bytes));
                    Ok(())
                }
            }
        }
    }
}

fn replay(path: &Path, out_dir: &Path) -> Result<()> {
    let original = Manifest::read(path)?;
    for input in &original.inputs {
        let now = input_ref(&input.role, &input.path)?;
        if now.digest != input.digest {
            bail!(Coded::new(CONFIG, format!("input {} changed since the run", input.path.display())));
        }
    }
    let out_dir = absolute(out_dir)?;
    let mut fresh = original.clone();
    for o in &mut fresh.outputs {
        let name = o.path.file_name().ok_or_else(|| Coded::new(CONFIG, "output path has no file name"))?;
        o.path = out_dir.join(name);
    }
    if fresh.identity_hash() != original.manifest_hash {
        bail!(Coded::new(CONFIG, "manifest hash does not match its contents"));
    }
    let manifest_name = path.file_name().map(PathBuf::from).unwrap_or_else(|| "replay.manifest.json".into());
    commit(fresh.clone(), &out_dir.join(manifest_name))?;

    let mut differing = 0;
    for (old, new) in original.outputs.iter().zip(&fresh.outputs) {
        let Ok(before) = std::fs::read(&old.path) else {
            println!("missing   {}", old.path.display());
            continue;
        };
        let after = std::fs::read(&new.path).with_context(|| format!("reading {}", new.path.display()))?;
        if before == after {
            println!("identical {}", new.path.display());
        } else {
            println!("differs   {}", new.path.display());
            differing += 1;
        }
    }
    if differing > 0 {
        bail!(Coded::new(FAILURE, format!("{differing} outputs differ from the recorded run")));
    }
    Ok(())
}
