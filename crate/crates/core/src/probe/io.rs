//! Trajectory-set files.
//!
//! Binary layout: the magic `CSTRAJ01`, a little-endian `u64` header
//! length, a JSON header, then per trajectory a `u64` seed, a `u8` mode
//! code and the row-major observation, action and reward arrays as
//! little-endian `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ProbeConfig, ProbeMode, Trajectory, TrajectorySet};
use crate::env::{DimLabel, EnvConfig};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"CSTRAJ01";

#[derive(Serialize, Deserialize)]
struct Header {
    env_config: EnvConfig,
    env_hash: String,
    probe: ProbeConfig,
    labels: Vec<DimLabel>,
    d: usize,
    d_a: usize,
    n: usize,
    horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manifest_hash: Option<String>,
}

pub fn write_binary<W: Write>(set: &TrajectorySet, mut w: W) -> Result<()> {
    let header = Header {
        env_config: set.env_config.clone(),
        env_hash: set.env_hash.clone(),
        probe: set.probe.clone(),
        labels: set.labels.clone(),
        d: set.d,
        d_a: set.d_a,
        n: set.trajectories.len(),
        horizon: set.probe.horizon,
        manifest_hash: set.manifest_hash.clone(),
    };
    let json = serde_json::to_vec(&header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for traj in &set.trajectories {
        if traj.horizon() != set.probe.horizon || traj.d != set.d || traj.d_a != set.d_a {
            return Err(Error::DimensionMismatch("trajectory shape differs from set header".into()));
        }
        w.write_all(&traj.seed.to_le_bytes())?;
        w.write_all(&[traj.mode.code()])?;
        for v in traj.observations.iter().chain(&traj.actions).chain(&traj.rewards) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

pub fn read_binary<R: Read>(mut r: R) -> Result<TrajectorySet> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a trajectory file".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len).map_err(truncated)?;
    let len = u64::from_le_bytes(len) as usize;
    if len > 64 << 20 {
        return Err(Error::Format("header too large".into()));
    }
    let mut json = vec![0u8; len];
    r.read_exact(&mut json).map_err(truncated)?;
    let h: Header = serde_json::from_slice(&json).map_err(|e| Error::Format(format!("header: {e}")))?;
    if h.labels.len() != h.d {
        return Err(Error::Format("label count differs from d".into()));
    }
    let mut trajectories = Vec::with_capacity(h.n);
    for _ in 0..h.n {
        let mut seed = [0u8; 8];
        r.read_exact(&mut seed).map_err(truncated)?;
        let mut mode = [0u8; 1];
        r.read_exact(&mut mode).map_err(truncated)?;
        let mode = ProbeMode::from_code(mode[0]).ok_or_else(|| Error::Format("bad mode code".into()))?;
        let observations = read_f64s(&mut r, (h.horizon + 1) * h.d)?;
        let actions = read_f64s(&mut r, h.horizon * h.d_a)?;
        let rewards = read_f64s(&mut r, h.horizon)?;
        let traj = Trajectory {
            mode,
            seed: u64::from_le_bytes(seed),
            d: h.d,
            d_a: h.d_a,
            observations,
            actions,
            rewards,
        };
        traj.check()?;
        trajectories.push(traj);
    }
    let mut probe = h.probe;
    probe.horizon = h.horizon;
    Ok(TrajectorySet {
        env_config: h.env_config,
        env_hash: h.env_hash,
        probe,
        labels: h.labels,
        d: h.d,
        d_a: h.d_a,
        trajectories,
        manifest_hash: h.manifest_hash,
    })
}

pub fn write_binary_file(set: &TrajectorySet, path: &Path) -> Result<()> {
    write_binary(set, BufWriter::new(File::create(path)?))
}

pub fn read_binary_file(path: &Path) -> Result<TrajectorySet> {
    read_binary(BufReader::new(File::open(path)?))
}

/// One row per step: `traj_id,mode,t,o_0..,a_0..,r`. Row `t` holds the
/// observation before action `t`; the final observation gets a row with
/// empty action and reward cells.
pub fn write_csv<W: Write>(set: &TrajectorySet, mut w: W) -> Result<()> {
    if let Some(h) = &set.manifest_hash {
        writeln!(w, "# manifest_hash={h}")?;
    }
    let mut header = vec!["traj_id".to_string(), "mode".into(), "t".into()];
    header.extend((0..set.d).map(|i| format!("o_{i}")));
    header.extend((0..set.d_a).map(|j| format!("a_{j}")));
    header.push("r".into());
    writeln!(w, "{}", header.join(","))?;
    for (k, traj) in set.trajectories.iter().enumerate() {
        for t in 0..=traj.horizon() {
            write!(w, "{k},{},{t}", traj.mode.as_str())?;
            for v in traj.obs(t) {
                write!(w, ",{v}")?;
            }
            if t < traj.horizon() {
                for v in traj.action(t) {
                    write!(w, ",{v}")?;
                }
                write!(w, ",{}", traj.rewards[t])?;
            } else {
                for _ in 0..=set.d_a {
                    write!(w, ",")?;
                }
            }
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}
