//! Error metrics and the comparison report.
//!
//! Errors are absolute side-slip differences; MAE values are reported in
//! milliradians. Frames that any observer flags invalid are dropped for
//! every observer on that trajectory.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::simulator::ReferenceFrame;
use crate::{Error, Result, GRAVITY};

/// Peak lateral acceleration (in g) at or above which a trajectory is dynamic.
pub const DYNAMIC_THRESHOLD_G: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManeuverClass {
    Normal,
    Dynamic,
}

impl ManeuverClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ManeuverClass::Normal => "normal",
            ManeuverClass::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: ManeuverClass,
    pub max_lateral_accel_g: f64,
}

/// Ground-truth lateral specific acceleration `dVy/dt + yaw_rate·Vx`.
///
/// `dVy/dt` uses central differences inside the log and one-sided
/// differences at its ends; a single frame has no `Vy` rate.
pub fn reference_lateral_accel(reference: &[ReferenceFrame]) -> Vec<f64> {
    let n = reference.len();
    (0..n)
        .map(|k| {
            let (a, b) = match n {
                1 => (k, k),
                _ if k == 0 => (0, 1),
                _ if k == n - 1 => (n - 2, n - 1),
                _ => (k - 1, k + 1),
            };
            let dt = reference[b].t - reference[a].t;
            let vy_dot = if dt > 0.0 { (reference[b].v_y - reference[a].v_y) / dt } else { 0.0 };
            vy_dot + reference[k].psi_rate * reference[k].v_x
        })
        .collect()
}

/// Normal/dynamic label from the ground-truth lateral acceleration peak.
pub fn classify_maneuver(reference: &[ReferenceFrame]) -> Classification {
    let peak = reference_lateral_accel(reference).iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let ratio = peak / GRAVITY;
    let class = if ratio >= DYNAMIC_THRESHOLD_G { ManeuverClass::Dynamic } else { ManeuverClass::Normal };
    Classification { class, max_lateral_accel_g: ratio }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: a, right: b })
    }
}

/// Per-frame absolute error `|estimate - reference|` (rad).
pub fn error_series(estimates: &[f64], references: &[f64]) -> Result<Vec<f64>> {
    check_lengths(estimates.len(), references.len())?;
    Ok(estimates.iter().zip(references).map(|(e, r)| (e - r).abs()).collect())
}

/// Mean absolute error in milliradians.
pub fn mae(estimates: &[f64], references: &[f64]) -> Result<f64> {
    check_lengths(estimates.len(), references.len())?;
    if estimates.is_empty() {
        return Err(Error::Empty("mae needs at least one frame"));
    }
    let sum: f64 = estimates.iter().zip(references).map(|(e, r)| (e - r).abs()).sum();
    Ok(1000.0 * sum / estimates.len() as f64)
}

/// [`mae`] over the frames where an estimate is present.
pub fn mae_masked(estimates: &[Option<f64>], references: &[f64]) -> Result<f64> {
    check_lengths(estimates.len(), references.len())?;
    let (est, refs): (Vec<f64>, Vec<f64>) =
        estimates.iter().zip(references).filter_map(|(e, r)| e.map(|e| (e, *r))).unzip();
    mae(&est, &refs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObserverKind {
    Kinematic,
    Ekf,
    Hybrid,
}

impl ObserverKind {
    pub const ALL: [ObserverKind; 3] = [ObserverKind::Kinematic, ObserverKind::Ekf, ObserverKind::Hybrid];

    pub fn as_str(self) -> &'static str {
        match self {
            ObserverKind::Kinematic => "kinematic",
            ObserverKind::Ekf => "ekf",
            ObserverKind::Hybrid => "hybrid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// Everything the report needs about one test trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEval {
    pub name: String,
    pub t: Vec<f64>,
    pub beta_ref: Vec<f64>,
    pub lateral_accel: Vec<f64>,
    pub classification: Classification,
    /// One series per observer; `None` marks a frame the observer flagged.
    pub estimates: Vec<(ObserverKind, Vec<Option<f64>>)>,
}

/// Sum and count of absolute errors; the building block of every MAE cell.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorTally {
    pub abs_error_sum: f64,
    pub frames: usize,
    pub max_error: f64,
}

impl ErrorTally {
    fn add(&mut self, e: f64) {
        self.abs_error_sum += e;
        self.frames += 1;
        self.max_error = self.max_error.max(e);
    }

    fn merge(&mut self, other: &ErrorTally) {
        self.abs_error_sum += other.abs_error_sum;
        self.frames += other.frames;
        self.max_error = self.max_error.max(other.max_error);
    }

    /// MAE in mrad, `None` without frames.
    pub fn mae_mrad(&self) -> Option<f64> {
        (self.frames > 0).then(|| 1000.0 * self.abs_error_sum / self.frames as f64)
    }

    pub fn max_error_mrad(&self) -> f64 {
        1000.0 * self.max_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryScore {
    pub name: String,
    pub class: ManeuverClass,
    pub max_lateral_accel_g: f64,
    pub tally: ErrorTally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverSummary {
    pub observer: ObserverKind,
    pub whole: ErrorTally,
    pub normal: ErrorTally,
    pub dynamic: ErrorTally,
    pub per_trajectory: Vec<TrajectoryScore>,
}

impl ObserverSummary {
    pub fn regime(&self, class: ManeuverClass) -> &ErrorTally {
        match class {
            ManeuverClass::Normal => &self.normal,
            ManeuverClass::Dynamic => &self.dynamic,
        }
    }
}

/// Per-frame validity across every observer of a trajectory.
pub fn joint_mask(traj: &TrajectoryEval) -> Vec<bool> {
    (0..traj.beta_ref.len())
        .map(|k| traj.estimates.iter().all(|(_, s)| s.get(k).is_some_and(Option::is_some)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub observers: Vec<ObserverSummary>,
}

impl EvalReport {
    pub fn observer(&self, kind: ObserverKind) -> Option<&ObserverSummary> {
        self.observers.iter().find(|o| o.observer == kind)
    }
}

/// Aggregate per-trajectory, per-regime and whole-set errors.
///
/// Every trajectory must carry the same observers, in the same order, with
/// one estimate per reference frame.
pub fn build_report(trajectories: &[TrajectoryEval]) -> Result<EvalReport> {
    let Some(first) = trajectories.first() else {
        return Err(Error::Empty("report needs at least one trajectory"));
    };
    let kinds: Vec<ObserverKind> = first.estimates.iter().map(|(k, _)| *k).collect();
    if kinds.is_empty() {
        return Err(Error::Empty("report needs at least one observer"));
    }
    let mut observers: Vec<ObserverSummary> = kinds
        .iter()
        .map(|&observer| ObserverSummary {
            observer,
            whole: ErrorTally::default(),
            normal: ErrorTally::default(),
            dynamic: ErrorTally::default(),
            per_trajectory: Vec::new(),
        })
        .collect();

    for traj in trajectories {
        let n = traj.beta_ref.len();
        let observed: Vec<ObserverKind> = traj.estimates.iter().map(|(k, _)| *k).collect();
        if observed != kinds {
            return Err(Error::Shape(alloc::format!(
                "trajectory {} has observers {observed:?}, expected {kinds:?}",
                traj.name
            )));
        }
        for (_, series) in &traj.estimates {
            check_lengths(series.len(), n)?;
        }
        let mask = joint_mask(traj);
        for (summary, (_, series)) in observers.iter_mut().zip(&traj.estimates) {
            let mut tally = ErrorTally::default();
            for k in (0..n).filter(|&k| mask[k]) {
                let estimate = series[k].expect("masked frames carry estimates");
                tally.add((estimate - traj.beta_ref[k]).abs());
            }
            summary.whole.merge(&tally);
            match traj.classification.class {
                ManeuverClass::Normal => summary.normal.merge(&tally),
                ManeuverClass::Dynamic => summary.dynamic.merge(&tally),
            }
            summary.per_trajectory.push(TrajectoryScore {
                name: traj.name.clone(),
                class: traj.classification.class,
                max_lateral_accel_g: traj.classification.max_lateral_accel_g,
                tally,
            });
        }
    }
    Ok(EvalReport { observers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[0.1, -0.2], &[0.1, -0.2]).unwrap(), 0.0);
        assert!((mae(&[0.001, 0.002], &[0.002, 0.000]).unwrap() - 1.5).abs() < 1e-12);
        assert!(matches!(mae(&[1.0], &[]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(mae(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn masked_mae_skips_gaps() {
        let m = mae_masked(&[Some(0.001), None, Some(0.003)], &[0.0, 5.0, 0.0]).unwrap();
        assert!((m - 2.0).abs() < 1e-12);
    }

    #[test]
    fn error_series_examples() {
        assert_eq!(error_series(&[0.01], &[-0.01]).unwrap(), vec![0.02]);
        assert_eq!(error_series(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
        assert!(error_series(&[0.3], &[0.3, 0.4]).is_err());
        let est = [0.01, 0.02, -0.03];
        let refs = [0.0, 0.025, 0.01];
        let e = error_series(&est, &refs).unwrap();
        let mean = e.iter().sum::<f64>() / 3.0;
        assert!((mean - mae(&est, &refs).unwrap() / 1000.0).abs() < 1e-15);
    }

    fn frame_with_ay(ay: f64) -> ReferenceFrame {
        ReferenceFrame { v_x: 20.0, psi_rate: ay / 20.0, ..Default::default() }
    }

    #[test]
    fn classification() {
        let c = classify_maneuver(&[ReferenceFrame { v_x: 10.0, ..Default::default() }; 3]);
        assert_eq!(c.class, ManeuverClass::Normal);
        assert_eq!(c.max_lateral_accel_g, 0.0);

        let c = classify_maneuver(&[frame_with_ay(0.85 * GRAVITY)]);
        assert_eq!(c.class, ManeuverClass::Dynamic);
        assert!((c.max_lateral_accel_g - 0.85).abs() < 1e-12);

        let c = classify_maneuver(&[frame_with_ay(0.5 * GRAVITY)]);
        assert_eq!(c.class, ManeuverClass::Dynamic);
        let c = classify_maneuver(&[frame_with_ay(0.49 * GRAVITY)]);
        assert_eq!(c.class, ManeuverClass::Normal);
    }

    #[test]
    fn vy_rate_enters_lateral_accel() {
        let frames: Vec<ReferenceFrame> = (0..5)
            .map(|k| ReferenceFrame { t: 0.02 * k as f64, v_x: 10.0, v_y: 0.1 * k as f64, ..Default::default() })
            .collect();
        for a in reference_lateral_accel(&frames) {
            assert!((a - 5.0).abs() < 1e-9);
        }
    }

    fn traj(name: &str, class: ManeuverClass, errors: &[(ObserverKind, Vec<Option<f64>>)]) -> TrajectoryEval {
        let n = errors[0].1.len();
        TrajectoryEval {
            name: name.into(),
            t: (0..n).map(|k| k as f64 * 0.02).collect(),
            beta_ref: vec![0.0; n],
            lateral_accel: vec![0.0; n],
            classification: Classification { class, max_lateral_accel_g: 0.1 },
            estimates: errors.to_vec(),
        }
    }

    #[test]
    fn single_observer_single_trajectory() {
        let t = traj("a", ManeuverClass::Normal, &[(ObserverKind::Kinematic, vec![Some(0.001), Some(-0.003)])]);
        let r = build_report(&[t]).unwrap();
        assert_eq!(r.observers.len(), 1);
        assert_eq!(r.observers[0].per_trajectory.len(), 1);
        assert!((r.observers[0].whole.mae_mrad().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.observers[0].dynamic.mae_mrad(), None);
    }

    #[test]
    fn aggregation_identity_and_joint_mask() {
        let a = traj(
            "a",
            ManeuverClass::Normal,
            &[
                (ObserverKind::Kinematic, vec![Some(0.001), Some(0.002), Some(0.004)]),
                (ObserverKind::Ekf, vec![Some(0.001), None, Some(0.001)]),
            ],
        );
        let b = traj(
            "b",
            ManeuverClass::Dynamic,
            &[
                (ObserverKind::Kinematic, vec![Some(0.01), Some(0.03)]),
                (ObserverKind::Ekf, vec![Some(-0.02), Some(0.0)]),
            ],
        );
        let r = build_report(&[a, b]).unwrap();
        for s in &r.observers {
            let weighted: f64 =
                s.per_trajectory.iter().map(|p| p.tally.mae_mrad().unwrap() * p.tally.frames as f64).sum();
            let frames: usize = s.per_trajectory.iter().map(|p| p.tally.frames).sum();
            assert!((weighted / frames as f64 - s.whole.mae_mrad().unwrap()).abs() < 1e-9);
            assert_eq!(s.per_trajectory[0].tally.frames, 2);
        }
        let kin = r.observer(ObserverKind::Kinematic).unwrap();
        assert!((kin.per_trajectory[0].tally.mae_mrad().unwrap() - 2.5).abs() < 1e-12);
        assert!((kin.dynamic.mae_mrad().unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_series_rejected() {
        let mut t = traj("a", ManeuverClass::Normal, &[(ObserverKind::Hybrid, vec![Some(0.0); 3])]);
        t.estimates[0].1.pop();
        assert!(build_report(&[t]).is_err());
    }
}
