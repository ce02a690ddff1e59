use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{simulate, ManeuverKind, ManeuverSpec, SensorNoiseSpec};
use crate::seed::{derive_seed, rng_from_seed};
use crate::vehicle::VehicleParams;
use crate::{Error, Result, GRAVITY};

/// Trajectory length used by the generated suites (s).
pub const SUITE_DURATION: f64 = 60.0;

/// Largest steering amplitude the tuner will try (rad).
const MAX_TUNED_AMPLITUDE: f64 = 0.6;

/// One trajectory of a generated suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub maneuver: ManeuverSpec,
    pub noise: SensorNoiseSpec,
}

/// Find the steering amplitude whose noise-free run peaks at
/// `target_peak_g` lateral acceleration (bisection, peak from below).
pub fn tune_steer_amplitude(
    template: &ManeuverSpec,
    params: &VehicleParams,
    target_peak_g: f64,
) -> Result<ManeuverSpec> {
    let target = target_peak_g * GRAVITY;
    let quiet = SensorNoiseSpec::noise_free(0);
    // None when the run is infeasible (the vehicle slows below V_MIN).
    let peak = |amplitude: f64| {
        let m = ManeuverSpec { steer_amplitude: amplitude, ..template.clone() };
        simulate(&m, params, &quiet).ok().map(|log| log.max_abs_lateral_accel())
    };

    let mut lo = 0.0;
    let mut hi = 0.02;
    loop {
        match peak(hi) {
            Some(p) if p < target => {
                lo = hi;
                hi *= 2.0;
                if hi > MAX_TUNED_AMPLITUDE {
                    return Err(Error::InvalidParameter(format!(
                        "cannot reach {target_peak_g} g lateral acceleration with steering below {MAX_TUNED_AMPLITUDE} rad"
                    )));
                }
            }
            _ => break,
        }
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        match peak(mid) {
            Some(p) if p < target => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(ManeuverSpec { steer_amplitude: lo, ..template.clone() })
}

fn template(kind: ManeuverKind, frequency: f64, speed: f64) -> ManeuverSpec {
    ManeuverSpec {
        kind,
        steer_amplitude: 0.0,
        steer_frequency: frequency,
        target_speed: speed,
        speed_profile: Vec::new(),
        duration: SUITE_DURATION,
    }
}

fn city_template(rng: &mut ChaCha8Rng) -> ManeuverSpec {
    let base = rng.random_range(8.0..16.0);
    let mut m = template(ManeuverKind::CityProfile, rng.random_range(0.15..0.35), base);
    let mut t = 0.0;
    while t <= SUITE_DURATION {
        let factor: f64 = if t == 0.0 { 1.0 } else { rng.random_range(0.7..1.2) };
        m.speed_profile.push((t, base * factor));
        t += 10.0;
    }
    m
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// (kind, count, speed range, frequency range, peak range in g)
type Recipe = (ManeuverKind, usize, (f64, f64), (f64, f64), (f64, f64));

fn build(seed: u64, params: &VehicleParams, recipes: &[Recipe]) -> Result<Vec<SuiteEntry>> {
    let mut rng = rng_from_seed(derive_seed(seed, "suite"));
    let mut entries = Vec::new();
    for &(kind, count, speed, freq, peak) in recipes {
        for _ in 0..count {
            let base = match kind {
                ManeuverKind::CityProfile => city_template(&mut rng),
                _ => template(kind, draw(&mut rng, freq), draw(&mut rng, speed)),
            };
            let target = draw(&mut rng, peak);
            let maneuver = tune_steer_amplitude(&base, params, target)?;
            let i = entries.len();
            entries.push(SuiteEntry {
                name: format!("traj_{i:03}"),
                maneuver,
                noise: SensorNoiseSpec::default().with_seed(derive_seed(seed, &format!("simulate/{i}"))),
            });
        }
    }
    Ok(entries)
}

/// Default benchmark: 60 one-minute trajectories, 48 normal and 12 dynamic.
pub fn benchmark_suite(seed: u64, params: &VehicleParams) -> Result<Vec<SuiteEntry>> {
    use ManeuverKind::*;
    build(
        seed,
        params,
        &[
            (CityProfile, 16, (8.0, 16.0), (0.15, 0.35), (0.10, 0.40)),
            (Slalom, 12, (10.0, 25.0), (0.2, 0.5), (0.15, 0.40)),
            (RampSteer, 10, (8.0, 20.0), (0.0, 0.0), (0.20, 0.40)),
            (StepSteer, 10, (8.0, 20.0), (0.0, 0.0), (0.10, 0.40)),
            (Slalom, 8, (10.0, 22.0), (0.25, 0.5), (0.60, 0.88)),
            (RampSteer, 4, (10.0, 20.0), (0.0, 0.0), (0.60, 0.85)),
        ],
    )
}

/// Ten low-excitation trajectories (peak below 0.4 g).
pub fn normal_suite(seed: u64, params: &VehicleParams) -> Result<Vec<SuiteEntry>> {
    use ManeuverKind::*;
    build(
        seed,
        params,
        &[
            (CityProfile, 4, (8.0, 16.0), (0.15, 0.35), (0.10, 0.35)),
            (Slalom, 3, (10.0, 25.0), (0.2, 0.5), (0.15, 0.35)),
            (RampSteer, 2, (8.0, 20.0), (0.0, 0.0), (0.20, 0.35)),
            (StepSteer, 1, (8.0, 20.0), (0.0, 0.0), (0.10, 0.35)),
        ],
    )
}

/// Eight near-limit trajectories (peak 0.80–0.88 g).
pub fn harsh_suite(seed: u64, params: &VehicleParams) -> Result<Vec<SuiteEntry>> {
    use ManeuverKind::*;
    build(
        seed,
        params,
        &[(Slalom, 6, (14.0, 22.0), (0.25, 0.5), (0.81, 0.88)), (RampSteer, 2, (12.0, 20.0), (0.0, 0.0), (0.81, 0.86))],
    )
}
