//! Trajectory logs: one CSV per run plus an optional `.meta.json` sidecar.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sideslip_core::eval::ManeuverClass;
use sideslip_core::simulator::{ManeuverSpec, ReferenceFrame, SensorFrame, SensorNoiseSpec};
use sideslip_core::vehicle::VehicleParams;
use sideslip_core::SAMPLE_PERIOD;

use super::{format_f64, read_json, write_json};
use crate::{Error, Result};

pub const TRAJECTORY_COLUMNS: [&str; 20] = [
    "t",
    "ax",
    "ay",
    "yaw_rate",
    "w_fl",
    "w_fr",
    "w_rl",
    "w_rr",
    "delta",
    "beta_ref",
    "vx_ref",
    "vy_ref",
    "psi_ref",
    "x_ref",
    "y_ref",
    "theta_ref",
    "phi_ref",
    "psi_rate_ref",
    "theta_rate_ref",
    "phi_rate_ref",
];

pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

/// Spacing tolerance when checking the sample grid.
const SPACING_TOL: f64 = 1e-9;

/// Provenance written next to a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub schema_version: u32,
    pub name: String,
    pub label: ManeuverClass,
    pub max_lateral_accel_g: f64,
    pub maneuver: Option<ManeuverSpec>,
    pub noise: Option<SensorNoiseSpec>,
    pub params: VehicleParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub sensor: Vec<SensorFrame>,
    pub reference: Vec<ReferenceFrame>,
    pub meta: Option<TrajectoryMeta>,
}

/// `run.csv` -> `run.meta.json`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

fn row(s: &SensorFrame, r: &ReferenceFrame) -> [f64; 20] {
    [
        s.t,
        s.a_x,
        s.a_y,
        s.yaw_rate,
        s.w_fl,
        s.w_fr,
        s.w_rl,
        s.w_rr,
        s.delta,
        r.beta,
        r.v_x,
        r.v_y,
        r.psi,
        r.x,
        r.y,
        r.theta,
        r.phi,
        r.psi_rate,
        r.theta_rate,
        r.phi_rate,
    ]
}

fn frames(t: f64, v: &[f64; 20]) -> (SensorFrame, ReferenceFrame) {
    let sensor = SensorFrame {
        t,
        a_x: v[1],
        a_y: v[2],
        yaw_rate: v[3],
        w_fl: v[4],
        w_fr: v[5],
        w_rl: v[6],
        w_rr: v[7],
        delta: v[8],
    };
    let reference = ReferenceFrame {
        t,
        beta: v[9],
        v_x: v[10],
        v_y: v[11],
        psi: v[12],
        x: v[13],
        y: v[14],
        theta: v[15],
        phi: v[16],
        psi_rate: v[17],
        theta_rate: v[18],
        phi_rate: v[19],
    };
    (sensor, reference)
}

pub fn write_trajectory(path: &Path, traj: &TrajectoryFile) -> Result<()> {
    if traj.sensor.len() != traj.reference.len() {
        return Err(
            sideslip_core::Error::LengthMismatch { left: traj.sensor.len(), right: traj.reference.len() }.into()
        );
    }
    let csv_err = |source| Error::Csv { path: path.into(), source };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(TRAJECTORY_COLUMNS).map_err(csv_err)?;
    for (s, r) in traj.sensor.iter().zip(&traj.reference) {
        w.write_record(row(s, r).iter().map(|v| format_f64(*v))).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    if let Some(meta) = &traj.meta {
        write_json(&meta_path(path), meta)?;
    }
    Ok(())
}

/// Read and validate a trajectory CSV. The sidecar is loaded when present.
pub fn read_trajectory(path: &Path) -> Result<TrajectoryFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|source| Error::Csv { path: path.into(), source })?,
        None => return Err(Error::MalformedHeader { path: path.into(), found: Vec::new() }),
    };
    if header.iter().map(str::trim).ne(TRAJECTORY_COLUMNS) {
        return Err(Error::MalformedHeader { path: path.into(), found: header.iter().map(String::from).collect() });
    }

    let mut sensor = Vec::new();
    let mut reference = Vec::new();
    let mut prev_t: Option<f64> = None;
    for rec in records {
        let rec = rec.map_err(|source| Error::Csv { path: path.into(), source })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != TRAJECTORY_COLUMNS.len() {
            return Err(Error::RowArity {
                path: path.into(),
                line,
                expected: TRAJECTORY_COLUMNS.len(),
                found: rec.len(),
            });
        }
        let mut values = [0.0; 20];
        for (i, field) in rec.iter().enumerate() {
            values[i] = field.trim().parse().map_err(|_| Error::Parse {
                path: path.into(),
                line,
                column: TRAJECTORY_COLUMNS[i].into(),
                value: field.into(),
            })?;
        }
        let t = values[0];
        if let Some(p) = prev_t {
            let dt = t - p;
            if !(dt > 0.0) {
                return Err(Error::NonMonotoneTime { path: path.into(), line });
            }
            if (dt - SAMPLE_PERIOD).abs() > SPACING_TOL {
                return Err(Error::IrregularSpacing { path: path.into(), line, dt });
            }
        }
        prev_t = Some(t);
        let (s, r) = frames(t, &values);
        sensor.push(s);
        reference.push(r);
    }

    let sidecar = meta_path(path);
    let meta = if sidecar.exists() {
        let meta: TrajectoryMeta = read_json(&sidecar)?;
        if meta.schema_version != TRAJECTORY_SCHEMA_VERSION {
            return Err(Error::UnsupportedVersion {
                path: sidecar,
                found: meta.schema_version.into(),
                expected: TRAJECTORY_SCHEMA_VERSION.into(),
            });
        }
        Some(meta)
    } else {
        None
    };
    Ok(TrajectoryFile { sensor, reference, meta })
}
