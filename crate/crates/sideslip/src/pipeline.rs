//! Simulate, train, evaluate and infer on files in directories.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sideslip_core::ekf::{run_ekf, EkfConfig};
use sideslip_core::eval::{
    build_report, classify_maneuver, reference_lateral_accel, EvalReport, ManeuverClass, ObserverKind, TrajectoryEval,
};
use sideslip_core::hybrid::{run_hybrid, run_kinematic, train_hybrid, HybridModel};
use sideslip_core::mlp::{ConcatPoint, TrainConfig};
use sideslip_core::seed::derive_seed;
use sideslip_core::simulator::{
    benchmark_suite, friction_circle_histogram, harsh_suite, normal_suite, sideslip_histogram, simulate, split_dataset,
    ManeuverSpec, ReferenceFrame, SensorFrame, SensorNoiseSpec, SuiteEntry,
};
use sideslip_core::vehicle::VehicleParams;

use crate::dataio::{
    format_f64, read_json, read_model, read_trajectory, training_fingerprint, write_json, write_model,
    write_trajectory, ModelFile, TrajectoryFile, TrajectoryMeta, TRAJECTORY_SCHEMA_VERSION,
};
use crate::report::write_report;
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const FRICTION_CIRCLE_BINS: usize = 22;
pub const SIDESLIP_BIN_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Benchmark,
    Normal,
    Harsh,
    Custom,
}

/// One run of a user-supplied suite file. Without `noise` the default
/// sensor noise is used with a seed derived from the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomEntry {
    pub name: String,
    pub maneuver: ManeuverSpec,
    #[serde(default)]
    pub noise: Option<SensorNoiseSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub suite: SuiteKind,
    /// Suite file for [`SuiteKind::Custom`].
    pub custom: Option<PathBuf>,
    pub seed: u64,
    pub split_ratio: f64,
    pub params: VehicleParams,
    /// Replaces the noise sigmas and biases of every run; seeds stay per run.
    pub noise: Option<SensorNoiseSpec>,
}

impl SimulateConfig {
    pub fn new(suite: SuiteKind, seed: u64) -> Self {
        Self { suite, custom: None, seed, split_ratio: 0.8, params: VehicleParams::default(), noise: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub label: ManeuverClass,
    pub max_lateral_accel_g: f64,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub suite: SuiteKind,
    pub seed: u64,
    pub split_ratio: f64,
    pub params: VehicleParams,
    pub trajectories: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn entries(&self, split: Option<Split>) -> impl Iterator<Item = &ManifestEntry> {
        self.trajectories.iter().filter(move |e| split.is_none_or(|s| e.split == s))
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let manifest: Manifest = read_json(&path)?;
    if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(Error::UnsupportedVersion {
            path,
            found: manifest.schema_version.into(),
            expected: MANIFEST_SCHEMA_VERSION.into(),
        });
    }
    Ok(manifest)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn suite_entries(config: &SimulateConfig) -> Result<Vec<SuiteEntry>> {
    let mut entries = match config.suite {
        SuiteKind::Benchmark => benchmark_suite(config.seed, &config.params)?,
        SuiteKind::Normal => normal_suite(config.seed, &config.params)?,
        SuiteKind::Harsh => harsh_suite(config.seed, &config.params)?,
        SuiteKind::Custom => {
            let path = config.custom.as_ref().ok_or_else(|| Error::Usage("custom suite needs a suite file".into()))?;
            let custom: Vec<CustomEntry> = read_json(path)?;
            custom
                .into_iter()
                .enumerate()
                .map(|(i, c)| SuiteEntry {
                    noise: c.noise.unwrap_or_else(|| {
                        SensorNoiseSpec::default().with_seed(derive_seed(config.seed, &format!("simulate/{i}")))
                    }),
                    name: c.name,
                    maneuver: c.maneuver,
                })
                .collect()
        }
    };
    if let Some(noise) = config.noise {
        for e in &mut entries {
            e.noise = noise.with_seed(e.noise.seed);
        }
    }
    for e in &entries {
        if e.name.is_empty() || e.name.contains(['/', '\\']) || e.name.starts_with('.') {
            return Err(Error::Schema(format!("invalid trajectory name `{}`", e.name)));
        }
    }
    Ok(entries)
}

/// Generate a suite into `out`: one CSV and sidecar per run, the manifest
/// with labels and the train/test split, and dataset histograms.
pub fn simulate_suite(config: &SimulateConfig, out: &Path) -> Result<Manifest> {
    config.params.validate()?;
    let entries = suite_entries(config)?;
    if entries.is_empty() {
        return Err(sideslip_core::Error::Empty("suite").into());
    }
    create_dir(out)?;
    write_json(&out.join("simulate_config.json"), config)?;

    let mut labels = Vec::with_capacity(entries.len());
    let mut manifest_entries = Vec::with_capacity(entries.len());
    let mut all_sensor = Vec::new();
    let mut all_reference = Vec::new();
    for entry in &entries {
        let log = simulate(&entry.maneuver, &config.params, &entry.noise)?;
        let class = classify_maneuver(&log.reference);
        let file = format!("{}.csv", entry.name);
        let traj = TrajectoryFile {
            meta: Some(TrajectoryMeta {
                schema_version: TRAJECTORY_SCHEMA_VERSION,
                name: entry.name.clone(),
                label: class.class,
                max_lateral_accel_g: class.max_lateral_accel_g,
                maneuver: Some(entry.maneuver.clone()),
                noise: Some(entry.noise),
                params: config.params,
            }),
            sensor: log.sensor,
            reference: log.reference,
        };
        write_trajectory(&out.join(&file), &traj)?;
        all_sensor.extend_from_slice(&traj.sensor);
        all_reference.extend_from_slice(&traj.reference);
        labels.push(class.class);
        manifest_entries.push(ManifestEntry {
            name: entry.name.clone(),
            file,
            label: class.class,
            max_lateral_accel_g: class.max_lateral_accel_g,
            split: Split::Test,
        });
    }

    let split = split_dataset(&labels, config.split_ratio, derive_seed(config.seed, "split"))?;
    for &i in &split.train {
        manifest_entries[i].split = Split::Train;
    }
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        suite: config.suite,
        seed: config.seed,
        split_ratio: config.split_ratio,
        params: config.params,
        trajectories: manifest_entries,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    write_histograms(out, &all_sensor, &all_reference)?;
    Ok(manifest)
}

fn write_histograms(out: &Path, sensor: &[SensorFrame], reference: &[ReferenceFrame]) -> Result<()> {
    let fc = friction_circle_histogram(sensor, FRICTION_CIRCLE_BINS)?;
    let mut s = String::from("ax_g,ay_g,count\n");
    for i in 0..fc.bins {
        for j in 0..fc.bins {
            let _ =
                writeln!(s, "{},{},{}", format_f64(fc.bin_center_g(i)), format_f64(fc.bin_center_g(j)), fc.count(i, j));
        }
    }
    let path = out.join("friction_circle.csv");
    fs::write(&path, s).map_err(|e| Error::io(&path, e))?;

    let hist = sideslip_histogram(reference, SIDESLIP_BIN_WIDTH)?;
    let mut s = String::from("beta_rad,count\n");
    for (i, c) in hist.counts.iter().enumerate() {
        let _ = writeln!(s, "{},{}", format_f64(hist.bin_center(i)), c);
    }
    let path = out.join("sideslip_histogram.csv");
    fs::write(&path, s).map_err(|e| Error::io(&path, e))
}

/// Resolved settings of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRunConfig {
    pub data: PathBuf,
    pub concat_point: ConcatPoint,
    pub train: TrainConfig,
    /// Vehicle used by the kinematic feature; the manifest's when absent.
    pub params: Option<VehicleParams>,
}

pub struct TrainResult {
    pub model: ModelFile,
    pub history: Vec<f64>,
}

fn load_logs<'a>(
    data: &Path,
    entries: impl Iterator<Item = &'a ManifestEntry>,
) -> Result<Vec<(String, TrajectoryFile)>> {
    entries.map(|e| Ok((e.name.clone(), read_trajectory(&data.join(&e.file))?))).collect()
}

/// Train on the manifest's training split.
pub fn train_from_dir(config: &TrainRunConfig) -> Result<TrainResult> {
    let manifest = read_manifest(&config.data)?;
    let params = config.params.unwrap_or(manifest.params);
    let logs = load_logs(&config.data, manifest.entries(Some(Split::Train)))?;
    if logs.is_empty() {
        return Err(sideslip_core::Error::Empty("training split").into());
    }
    let pairs: Vec<(&[SensorFrame], &[ReferenceFrame])> =
        logs.iter().map(|(_, t)| (t.sensor.as_slice(), t.reference.as_slice())).collect();
    let (model, history) = train_hybrid(&pairs, &config.train, config.concat_point, &params)?;
    let fingerprint =
        training_fingerprint(logs.iter().map(|(n, t)| (n.as_str(), t.sensor.as_slice(), t.reference.as_slice())));
    Ok(TrainResult { model: ModelFile::new(&model, &config.train, fingerprint), history })
}

pub fn loss_history_csv(history: &[f64]) -> String {
    let mut s = String::from("epoch,loss\n");
    for (i, l) in history.iter().enumerate() {
        let _ = writeln!(s, "{},{}", i + 1, format_f64(*l));
    }
    s
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Train and write the model, `<model>.loss.csv` and `train_config.json`.
pub fn train_to_file(config: &TrainRunConfig, out: &Path) -> Result<TrainResult> {
    let result = train_from_dir(config)?;
    let dir = parent_dir(out);
    create_dir(&dir)?;
    write_json(&dir.join("train_config.json"), config)?;
    write_model(out, &result.model)?;
    let loss = out.with_extension("loss.csv");
    fs::write(&loss, loss_history_csv(&result.history)).map_err(|e| Error::io(&loss, e))?;
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    Test,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub model: Option<PathBuf>,
    pub data: PathBuf,
    pub observers: Vec<ObserverKind>,
    pub split: EvalSplit,
    pub params: Option<VehicleParams>,
    pub ekf: EkfConfig,
}

fn load_model(path: Option<&Path>) -> Result<Option<HybridModel>> {
    path.map(|p| read_model(p).map(|m| m.model())).transpose()
}

/// Run the requested observers over the evaluation split.
pub fn evaluate(config: &EvalConfig) -> Result<(EvalReport, Vec<TrajectoryEval>)> {
    if config.observers.is_empty() {
        return Err(Error::Usage("no observers requested".into()));
    }
    let mut observers = config.observers.clone();
    observers.dedup();
    if observers.contains(&ObserverKind::Hybrid) && config.model.is_none() {
        return Err(Error::Usage("the hybrid observer needs --model".into()));
    }
    let model = if observers.contains(&ObserverKind::Hybrid) { load_model(config.model.as_deref())? } else { None };
    let manifest = read_manifest(&config.data)?;
    let params = config.params.unwrap_or(manifest.params);
    let split = match config.split {
        EvalSplit::Test => Some(Split::Test),
        EvalSplit::All => None,
    };
    let logs = load_logs(&config.data, manifest.entries(split))?;
    if logs.is_empty() {
        return Err(sideslip_core::Error::Empty("evaluation split").into());
    }

    let mut trajectories = Vec::with_capacity(logs.len());
    for (name, traj) in logs {
        let mut estimates = Vec::with_capacity(observers.len());
        for &kind in &observers {
            let series = match kind {
                ObserverKind::Kinematic => run_kinematic(&traj.sensor, &params)?.into_iter().map(Some).collect(),
                ObserverKind::Ekf => run_ekf(&traj.sensor, &params, &config.ekf)?,
                ObserverKind::Hybrid => {
                    let model = model.as_ref().expect("model loaded when hybrid is requested");
                    run_hybrid(&traj.sensor, model, &params)?.into_iter().map(Some).collect()
                }
            };
            estimates.push((kind, series));
        }
        trajectories.push(TrajectoryEval {
            name,
            t: traj.reference.iter().map(|r| r.t).collect(),
            beta_ref: traj.reference.iter().map(|r| r.beta).collect(),
            lateral_accel: reference_lateral_accel(&traj.reference),
            classification: classify_maneuver(&traj.reference),
            estimates,
        });
    }
    let report = build_report(&trajectories)?;
    Ok((report, trajectories))
}

/// Evaluate and write the report directory, including `eval_config.json`.
pub fn evaluate_to_dir(config: &EvalConfig, report_dir: &Path) -> Result<EvalReport> {
    let (report, trajectories) = evaluate(config)?;
    create_dir(report_dir)?;
    write_json(&report_dir.join("eval_config.json"), config)?;
    write_report(report_dir, &report, &trajectories)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferConfig {
    pub model: PathBuf,
    pub input: PathBuf,
    /// Vehicle for the kinematic feature; the log sidecar's, else the default.
    pub params: Option<VehicleParams>,
}

/// Hybrid estimates for one trajectory log.
pub fn infer(config: &InferConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let model = read_model(&config.model)?.model();
    let traj = read_trajectory(&config.input)?;
    let params = config.params.or(traj.meta.as_ref().map(|m| m.params)).unwrap_or_default();
    let t = traj.sensor.iter().map(|s| s.t).collect();
    let beta = run_hybrid(&traj.sensor, &model, &params)?;
    Ok((t, beta))
}

pub fn beta_csv(t: &[f64], beta: &[f64]) -> String {
    let mut s = String::from("t,beta_hat\n");
    for (t, b) in t.iter().zip(beta) {
        let _ = writeln!(s, "{},{}", format_f64(*t), format_f64(*b));
    }
    s
}

/// Infer and write `t,beta_hat` to `out`, plus `infer_config.json` beside it.
pub fn infer_to_file(config: &InferConfig, out: &Path) -> Result<Vec<f64>> {
    let (t, beta) = infer(config)?;
    let dir = parent_dir(out);
    create_dir(&dir)?;
    write_json(&dir.join("infer_config.json"), config)?;
    fs::write(out, beta_csv(&t, &beta)).map_err(|e| Error::io(out, e))?;
    Ok(beta)
}
