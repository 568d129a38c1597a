//! Artifact serialization: run directories, trajectory and dataset files,
//! model checkpoints, and closed-loop traces.
//!
//! Every run directory is content-addressed by the configuration hash, and
//! writes never silently overwrite differing bytes. CSV floats use Rust's
//! shortest round-trip formatting, so identical numbers serialize to
//! identical bytes.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::control::{ClosedLoopSummary, ClosedLoopTrace};
use crate::datagen::{Dataset, DatasetManifest, NormStats, SplitIndices};
use crate::integrator::Trajectory;
use crate::neural::{EpochStats, MlpModel};
use crate::plant::{AlgebraicState, ControlInput, PlantState, N_ALG, N_DIFF, N_INPUT};
use crate::{Error, Result};

const TRAJ_MAGIC: &[u8; 4] = b"SCTJ";
const DATASET_MAGIC: &[u8; 4] = b"SCDS";
const MODEL_MAGIC: &[u8; 4] = b"SCMM";
const FORMAT_VERSION: u32 = 1;

/// Hex-encoded SHA-256 prefix used to content-address run directories.
pub fn config_hash(config_text: &str) -> String {
    let digest = Sha256::digest(config_text.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..12].to_string()
}

/// A content-addressed run directory.
pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
}

impl RunDir {
    /// Create (or reopen) `base/<name>-<hash>` for the given config text.
    pub fn create(base: &Path, name: &str, config_text: &str) -> Result<Self> {
        let hash = config_hash(config_text);
        let path = base.join(format!("{name}-{hash}"));
        std::fs::create_dir_all(&path)?;
        let dir = RunDir { path, hash };
        dir.write_text("config.echo.toml", config_text)?;
        Ok(dir)
    }

    /// Write bytes, refusing to overwrite a file whose contents differ.
    pub fn write_bytes(&self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        if path.exists() {
            let existing = std::fs::read(&path)?;
            if existing == bytes {
                return Ok(path);
            }
            return Err(Error::ArtifactConflict {
                path: path.display().to_string(),
            });
        }
        std::fs::write(&path, bytes)?;
        Ok(path)
    }

    pub fn write_text(&self, rel: &str, text: &str) -> Result<PathBuf> {
        self.write_bytes(rel, text.as_bytes())
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
        self.write_text(rel, &text)
    }
}

fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_f64::<LittleEndian>(*v)?;
    }
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n];
    for v in &mut out {
        *v = r.read_f64::<LittleEndian>()?;
    }
    Ok(out)
}

fn check_magic<R: Read>(r: &mut R, expected: &[u8; 4], what: &str) -> Result<()> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != expected {
        return Err(Error::Format(format!("{what}: bad magic")));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "{what}: unsupported version {version}"
        )));
    }
    Ok(())
}

/// Columnar binary trajectory file.
pub fn write_trajectory_bin(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(TRAJ_MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u64::<LittleEndian>(traj.len() as u64)?;
    write_f64s(&mut w, &traj.t)?;
    for x in &traj.x {
        write_f64s(&mut w, &x.0)?;
    }
    for z in &traj.z {
        write_f64s(&mut w, &z.0)?;
    }
    for y in &traj.y {
        write_f64s(&mut w, &y.to_array())?;
    }
    for u in &traj.u {
        write_f64s(&mut w, &u.to_array())?;
    }
    write_f64s(&mut w, &traj.p)?;
    Ok(())
}

pub fn read_trajectory_bin(path: &Path) -> Result<Trajectory> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    check_magic(&mut r, TRAJ_MAGIC, "trajectory")?;
    let n = r.read_u64::<LittleEndian>()? as usize;
    let t = read_f64s(&mut r, n + 1)?;
    let mut x = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        x.push(PlantState::from_slice(&read_f64s(&mut r, N_DIFF)?)?);
    }
    let mut z = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        z.push(AlgebraicState::from_slice(&read_f64s(&mut r, N_ALG)?)?);
    }
    let mut y = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let vals = read_f64s(&mut r, 2)?;
        y.push(crate::plant::PlantOutput {
            f_co2_out: vals[0],
            t_reb: vals[1],
        });
    }
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        let vals = read_f64s(&mut r, N_INPUT)?;
        u.push(ControlInput::new(vals[0], vals[1], vals[2]));
    }
    let p = read_f64s(&mut r, n)?;
    Ok(Trajectory { t, x, z, y, u, p })
}

/// Trajectory CSV: one row per sample
/// `t, x1..x103, z1..z7, u1..u3, p, y1, y2`; the final row repeats the last
/// held input.
pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend((1..=N_DIFF).map(|i| format!("x{i}")));
    header.extend((1..=N_ALG).map(|i| format!("z{i}")));
    header.extend(["u1", "u2", "u3", "p", "y1", "y2"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    let n = traj.len();
    for k in 0..=n {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        row.push(traj.t[k].to_string());
        row.extend(traj.x[k].0.iter().map(|v| v.to_string()));
        row.extend(traj.z[k].0.iter().map(|v| v.to_string()));
        let uk = traj.u[k.min(n - 1)];
        row.extend(uk.to_array().iter().map(|v| v.to_string()));
        row.push(traj.p[k.min(n - 1)].to_string());
        row.push(traj.y[k].f_co2_out.to_string());
        row.push(traj.y[k].t_reb.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Dataset binary plus its JSON manifest (stats included).
pub fn write_dataset_bin(path: &Path, ds: &Dataset) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(DATASET_MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    let n = ds.x.nrows() as u64;
    w.write_u64::<LittleEndian>(n)?;
    w.write_u8(ds.mismatch.is_some() as u8)?;
    for arr in [&ds.x, &ds.z, &ds.u, &ds.p, &ds.x_next, &ds.z_next] {
        write_f64s(&mut w, arr.as_slice().expect("contiguous"))?;
    }
    if let Some(m) = &ds.mismatch {
        write_f64s(&mut w, m.as_slice().expect("contiguous"))?;
    }
    let manifest = serde_json::to_vec(&(&ds.manifest, &ds.stats))
        .map_err(|e| Error::Format(e.to_string()))?;
    w.write_u64::<LittleEndian>(manifest.len() as u64)?;
    w.write_all(&manifest)?;
    Ok(())
}

pub fn read_dataset_bin(path: &Path) -> Result<Dataset> {
    use ndarray::Array2;
    let mut r = BufReader::new(std::fs::File::open(path)?);
    check_magic(&mut r, DATASET_MAGIC, "dataset")?;
    let n = r.read_u64::<LittleEndian>()? as usize;
    let has_mismatch = r.read_u8()? != 0;
    let mut read_arr = |cols: usize| -> Result<Array2<f64>> {
        let data = read_f64s(&mut r, n * cols)?;
        Array2::from_shape_vec((n, cols), data).map_err(|e| Error::Format(e.to_string()))
    };
    let x = read_arr(N_DIFF)?;
    let z = read_arr(N_ALG)?;
    let u = read_arr(N_INPUT)?;
    let p = read_arr(1)?;
    let x_next = read_arr(N_DIFF)?;
    let z_next = read_arr(N_ALG)?;
    let mismatch = if has_mismatch {
        Some(read_arr(N_DIFF)?)
    } else {
        None
    };
    let len = r.read_u64::<LittleEndian>()? as usize;
    let mut manifest_bytes = vec![0u8; len];
    r.read_exact(&mut manifest_bytes)?;
    let (manifest, stats): (DatasetManifest, Option<NormStats>) =
        serde_json::from_slice(&manifest_bytes).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Dataset {
        x,
        z,
        u,
        p,
        x_next,
        z_next,
        mismatch,
        split: SplitIndices::new(n),
        stats,
        manifest,
    })
}

/// Checkpoint metadata saved with each trained model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub role: String,
    pub seed: u64,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub epochs_run: usize,
    pub train_config: crate::neural::TrainConfig,
}

/// Versioned binary model checkpoint: layer sizes, parameters,
/// normalization statistics, and the training manifest.
pub fn write_checkpoint(
    path: &Path,
    model: &MlpModel,
    stats: &NormStats,
    manifest: &CheckpointManifest,
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MODEL_MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u32::<LittleEndian>(model.sizes.len() as u32)?;
    for s in &model.sizes {
        w.write_u32::<LittleEndian>(*s as u32)?;
    }
    for weight in &model.weights {
        write_f64s(&mut w, weight.as_slice().expect("contiguous"))?;
    }
    for bias in &model.biases {
        write_f64s(&mut w, bias.as_slice().expect("contiguous"))?;
    }
    let meta = serde_json::to_vec(&(stats, manifest)).map_err(|e| Error::Format(e.to_string()))?;
    w.write_u64::<LittleEndian>(meta.len() as u64)?;
    w.write_all(&meta)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(MlpModel, NormStats, CheckpointManifest)> {
    use ndarray::{Array1, Array2};
    let mut r = BufReader::new(std::fs::File::open(path)?);
    check_magic(&mut r, MODEL_MAGIC, "checkpoint")?;
    let n_sizes = r.read_u32::<LittleEndian>()? as usize;
    let mut sizes = Vec::with_capacity(n_sizes);
    for _ in 0..n_sizes {
        sizes.push(r.read_u32::<LittleEndian>()? as usize);
    }
    let mut weights = Vec::new();
    for pair in sizes.windows(2) {
        let data = read_f64s(&mut r, pair[0] * pair[1])?;
        weights.push(
            Array2::from_shape_vec((pair[0], pair[1]), data)
                .map_err(|e| Error::Format(e.to_string()))?,
        );
    }
    let mut biases = Vec::new();
    for pair in sizes.windows(2) {
        biases.push(Array1::from_vec(read_f64s(&mut r, pair[1])?));
    }
    let len = r.read_u64::<LittleEndian>()? as usize;
    let mut meta = vec![0u8; len];
    r.read_exact(&mut meta)?;
    let (stats, manifest): (NormStats, CheckpointManifest) =
        serde_json::from_slice(&meta).map_err(|e| Error::Format(e.to_string()))?;
    Ok((
        MlpModel {
            sizes,
            weights,
            biases,
        },
        stats,
        manifest,
    ))
}

/// Per-epoch loss curves as CSV.
pub fn curves_csv(curves: &[EpochStats]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epoch", "train_mse", "val_mse"]).map_err(csv_err)?;
    for c in curves {
        w.write_record(&[
            c.epoch.to_string(),
            c.train_mse.to_string(),
            c.val_mse.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

/// Closed-loop trace CSV (per-sample rows; solver wall times excluded so
/// re-runs are byte-identical).
pub fn closed_loop_csv(trace: &ClosedLoopTrace) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "t",
        "y1_co2_out",
        "y2_t_reb",
        "capture",
        "cost_rate",
        "u1_f_l",
        "u2_f_fuel",
        "u3_f_sw",
        "p",
        "treb_in_box",
    ])
    .map_err(csv_err)?;
    for s in &trace.samples {
        w.write_record(&[
            s.t.to_string(),
            s.y[0].to_string(),
            s.y[1].to_string(),
            s.capture.to_string(),
            s.cost_rate.to_string(),
            s.u[0].to_string(),
            s.u[1].to_string(),
            s.u[2].to_string(),
            s.p.to_string(),
            (s.treb_in_box as u8).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

/// Summary serialized to JSON (includes wall-clock timing, so this file is
/// informational rather than determinism-checked).
pub fn summary_json(summary: &ClosedLoopSummary) -> Result<Vec<u8>> {
    serde_json::to_vec_pretty(summary).map_err(|e| Error::Format(e.to_string()))
}

/// Rollout comparison CSV: per-step normalized state rows for ground truth
/// and each model.
pub fn rollout_comparison_csv(
    names: &[&str],
    series: &[&[PlantState]],
    t: &[f64],
) -> Result<Vec<u8>> {
    if names.len() != series.len() {
        return Err(Error::Shape("one name per series".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for name in names {
        for i in 1..=N_DIFF {
            header.push(format!("{name}_x{i}"));
        }
    }
    w.write_record(&header).map_err(csv_err)?;
    let len = series.iter().map(|s| s.len()).min().unwrap_or(0);
    for k in 0..len {
        let mut row = vec![t.get(k).copied().unwrap_or(k as f64).to_string()];
        for s in series {
            row.extend(s[k].0.iter().map(|v| v.to_string()));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::PlantOutput;

    fn tiny_trajectory() -> Trajectory {
        let mut x = PlantState::zeros();
        x.0[0] = 1.25;
        x.0[102] = 390.0;
        Trajectory {
            t: vec![0.0, 40.0],
            x: vec![x.clone(), x],
            z: vec![AlgebraicState::zeros(), AlgebraicState::zeros()],
            y: vec![
                PlantOutput {
                    f_co2_out: 0.5,
                    t_reb: 390.0,
                },
                PlantOutput {
                    f_co2_out: 0.6,
                    t_reb: 391.0,
                },
            ],
            u: vec![ControlInput::box_midpoint()],
            p: vec![0.55],
        }
    }

    #[test]
    fn trajectory_roundtrips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.traj");
        let traj = tiny_trajectory();
        write_trajectory_bin(&path, &traj).unwrap();
        let back = read_trajectory_bin(&path).unwrap();
        assert_eq!(traj, back);
    }

    #[test]
    fn csv_row_count_is_samples_plus_one() {
        let traj = tiny_trajectory();
        let csv = trajectory_csv(&traj).unwrap();
        let text = String::from_utf8(csv).unwrap();
        // header + n + 1 state rows
        assert_eq!(text.lines().count(), 1 + traj.len() + 1);
    }

    #[test]
    fn conflicting_writes_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::create(dir.path(), "trial", "[run]\nseed = 1\n").unwrap();
        run.write_bytes("a.bin", b"hello").unwrap();
        // Identical rewrite is fine.
        run.write_bytes("a.bin", b"hello").unwrap();
        // Different bytes are refused.
        assert!(matches!(
            run.write_bytes("a.bin", b"world"),
            Err(Error::ArtifactConflict { .. })
        ));
    }

    #[test]
    fn config_hash_is_stable_and_content_sensitive() {
        let a = config_hash("x = 1");
        let b = config_hash("x = 1");
        let c = config_hash("x = 2");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 12);
    }

    #[test]
    fn checkpoint_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mlp");
        let model = MlpModel::init(&[4, 6, 2], 3).unwrap();
        let stats = NormStats {
            x: crate::datagen::ColumnStats {
                mean: vec![0.0; N_DIFF],
                std: vec![1.0; N_DIFF],
            },
            z: crate::datagen::ColumnStats {
                mean: vec![0.0; N_ALG],
                std: vec![1.0; N_ALG],
            },
            u: crate::datagen::ColumnStats {
                mean: vec![0.0; N_INPUT],
                std: vec![1.0; N_INPUT],
            },
            p: crate::datagen::ColumnStats {
                mean: vec![0.0],
                std: vec![1.0],
            },
            mismatch: crate::datagen::ColumnStats {
                mean: vec![0.0; N_DIFF],
                std: vec![1.0; N_DIFF],
            },
        };
        let manifest = CheckpointManifest {
            role: "inference".into(),
            seed: 7,
            best_epoch: 12,
            best_val_mse: 1e-4,
            epochs_run: 40,
            train_config: crate::neural::TrainConfig::default(),
        };
        write_checkpoint(&path, &model, &stats, &manifest).unwrap();
        let (back, back_stats, back_manifest) = read_checkpoint(&path).unwrap();
        assert_eq!(model, back);
        assert_eq!(stats.x.mean, back_stats.x.mean);
        assert_eq!(manifest.best_epoch, back_manifest.best_epoch);
    }
}
