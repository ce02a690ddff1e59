//! Report files: MAE tables as CSV and text, plus per-trajectory series for
//! plotting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sideslip_core::eval::{ErrorTally, EvalReport, ManeuverClass, TrajectoryEval};
use sideslip_core::GRAVITY;

use crate::dataio::{format_f64, write_json};
use crate::{Error, Result};

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn mae_field(t: &ErrorTally) -> String {
    t.mae_mrad().map(format_f64).unwrap_or_default()
}

fn opt_field(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

pub fn whole_set_csv(report: &EvalReport) -> String {
    let mut s = String::from("observer,mae_mrad,max_error_mrad,frames\n");
    for o in &report.observers {
        let t = &o.whole;
        let _ = writeln!(s, "{},{},{},{}", o.observer.as_str(), mae_field(t), format_f64(t.max_error_mrad()), t.frames);
    }
    s
}

pub fn per_regime_csv(report: &EvalReport) -> String {
    let mut s = String::from("observer,regime,mae_mrad,max_error_mrad,frames\n");
    for o in &report.observers {
        for class in [ManeuverClass::Normal, ManeuverClass::Dynamic] {
            let t = o.regime(class);
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                o.observer.as_str(),
                class.as_str(),
                mae_field(t),
                format_f64(t.max_error_mrad()),
                t.frames
            );
        }
    }
    s
}

pub fn per_trajectory_csv(report: &EvalReport) -> String {
    let mut s = String::from("trajectory,label,max_ay_g,observer,mae_mrad,max_error_mrad,frames\n");
    for o in &report.observers {
        for p in &o.per_trajectory {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                p.name,
                p.class.as_str(),
                format_f64(p.max_lateral_accel_g),
                o.observer.as_str(),
                mae_field(&p.tally),
                format_f64(p.tally.max_error_mrad()),
                p.tally.frames
            );
        }
    }
    s
}

fn cell(t: &ErrorTally) -> String {
    t.mae_mrad().map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

/// Human-readable MAE tables in mrad.
pub fn text_tables(report: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "MAE [mrad]");
    let _ = writeln!(s, "{:<10} {:>10} {:>10} {:>10}", "observer", "whole", "normal", "dynamic");
    for o in &report.observers {
        let _ = writeln!(
            s,
            "{:<10} {:>10} {:>10} {:>10}",
            o.observer.as_str(),
            cell(&o.whole),
            cell(&o.normal),
            cell(&o.dynamic)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Per trajectory MAE [mrad]");
    let mut header = format!("{:<16} {:<8} {:>7}", "trajectory", "label", "max|ay|");
    for o in &report.observers {
        let _ = write!(header, " {:>10}", o.observer.as_str());
    }
    let _ = writeln!(s, "{header}");
    if let Some(first) = report.observers.first() {
        for (i, p) in first.per_trajectory.iter().enumerate() {
            let _ = write!(s, "{:<16} {:<8} {:>7.3}", p.name, p.class.as_str(), p.max_lateral_accel_g);
            for o in &report.observers {
                let _ = write!(s, " {:>10}", cell(&o.per_trajectory[i].tally));
            }
            let _ = writeln!(s);
        }
    }
    s
}

/// Absolute error per observer next to |a_y| in g.
pub fn error_series_csv(traj: &TrajectoryEval) -> String {
    let mut s = String::from("t,abs_ay_g");
    for (kind, _) in &traj.estimates {
        let _ = write!(s, ",err_{}", kind.as_str());
    }
    s.push('\n');
    for k in 0..traj.t.len() {
        let _ = write!(s, "{},{}", format_f64(traj.t[k]), format_f64(traj.lateral_accel[k].abs() / GRAVITY));
        for (_, series) in &traj.estimates {
            let e = series[k].map(|v| (v - traj.beta_ref[k]).abs());
            let _ = write!(s, ",{}", opt_field(e));
        }
        s.push('\n');
    }
    s
}

/// Reference and estimated side-slip angle per frame.
pub fn overlay_csv(traj: &TrajectoryEval) -> String {
    let mut s = String::from("t,beta_ref");
    for (kind, _) in &traj.estimates {
        let _ = write!(s, ",beta_{}", kind.as_str());
    }
    s.push('\n');
    for k in 0..traj.t.len() {
        let _ = write!(s, "{},{}", format_f64(traj.t[k]), format_f64(traj.beta_ref[k]));
        for (_, series) in &traj.estimates {
            let _ = write!(s, ",{}", opt_field(series[k]));
        }
        s.push('\n');
    }
    s
}

/// Write every report file under `dir`.
pub fn write_report(dir: &Path, report: &EvalReport, trajectories: &[TrajectoryEval]) -> Result<()> {
    for sub in ["errors", "overlay"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    write_text(&dir.join("whole_set.csv"), &whole_set_csv(report))?;
    write_text(&dir.join("per_regime.csv"), &per_regime_csv(report))?;
    write_text(&dir.join("per_trajectory.csv"), &per_trajectory_csv(report))?;
    write_text(&dir.join("tables.txt"), &text_tables(report))?;
    write_json(&dir.join("report.json"), report)?;
    for traj in trajectories {
        write_text(&dir.join("errors").join(format!("{}.csv", traj.name)), &error_series_csv(traj))?;
        write_text(&dir.join("overlay").join(format!("{}.csv", traj.name)), &overlay_csv(traj))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sideslip_core::eval::{build_report, Classification, ObserverKind};

    fn traj() -> TrajectoryEval {
        TrajectoryEval {
            name: "traj_000".into(),
            t: vec![0.0, 0.02, 0.04],
            beta_ref: vec![0.0, 0.01, 0.02],
            lateral_accel: vec![0.0, -GRAVITY, 0.5 * GRAVITY],
            classification: Classification { class: ManeuverClass::Dynamic, max_lateral_accel_g: 1.0 },
            estimates: vec![
                (ObserverKind::Kinematic, vec![Some(0.0), Some(0.0), Some(0.0)]),
                (ObserverKind::Ekf, vec![None, Some(0.012), Some(0.02)]),
            ],
        }
    }

    #[test]
    fn series_files() {
        let t = traj();
        let errors = error_series_csv(&t);
        let lines: Vec<&str> = errors.lines().collect();
        assert_eq!(lines[0], "t,abs_ay_g,err_kinematic,err_ekf");
        assert_eq!(lines[1], "0.0,0.0,0.0,");
        assert_eq!(lines[2], "0.02,1.0,0.01,0.002");
        let overlay = overlay_csv(&t);
        assert_eq!(overlay.lines().next().unwrap(), "t,beta_ref,beta_kinematic,beta_ekf");
        assert_eq!(overlay.lines().count(), 4);
    }

    #[test]
    fn tables_cover_observers() {
        let t = traj();
        let report = build_report(std::slice::from_ref(&t)).unwrap();
        let whole = whole_set_csv(&report);
        assert_eq!(whole.lines().count(), 3);
        // The joint mask drops frame 0, so kinematic scores frames 1 and 2.
        assert!(whole.lines().nth(1).unwrap().starts_with("kinematic,15.0"), "{whole}");
        let regime = per_regime_csv(&report);
        assert!(regime.contains("ekf,normal,,0.0,0"));
        let text = text_tables(&report);
        assert!(text.contains("traj_000"));
        assert!(text.contains("15.000"));
    }
}
