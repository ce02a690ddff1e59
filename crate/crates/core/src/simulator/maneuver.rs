use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::vehicle::{Inputs, VehicleParams, VehicleState};
use crate::{Error, Result, V_MIN};

/// Speed-tracking gain of the drive-force controller (1/s).
pub const SPEED_GAIN: f64 = 5.0;

/// Start of the steering step for [`ManeuverKind::StepSteer`] (s).
const STEP_START: f64 = 1.0;
/// Rise time of the steering step (s).
const STEP_RISE: f64 = 0.2;
/// Steering fade-in of [`ManeuverKind::CityProfile`] (s).
const CITY_FADE_IN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverKind {
    StepSteer,
    Slalom,
    CityProfile,
    RampSteer,
}

/// Steering and speed programme for one synthetic trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverSpec {
    pub kind: ManeuverKind,
    /// Road-wheel steering amplitude (rad).
    pub steer_amplitude: f64,
    /// Hz
    pub steer_frequency: f64,
    /// Speed used when `speed_profile` is empty (m/s).
    pub target_speed: f64,
    /// Piecewise-linear (t [s], speed [m/s]) breakpoints.
    #[serde(default)]
    pub speed_profile: Vec<(f64, f64)>,
    /// s
    pub duration: f64,
}

impl ManeuverSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg| Err(Error::InvalidParameter(msg));
        if !(self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.target_speed >= V_MIN) {
            return bad(format!("target_speed {} below {V_MIN} m/s", self.target_speed));
        }
        if !(self.steer_amplitude.abs() < FRAC_PI_2) {
            return bad(format!("steer_amplitude {} outside (-pi/2, pi/2)", self.steer_amplitude));
        }
        if !(self.steer_frequency >= 0.0) {
            return bad(format!("steer_frequency {} must be non-negative", self.steer_frequency));
        }
        for w in self.speed_profile.windows(2) {
            if !(w[1].0 >= w[0].0) {
                return bad(format!("speed_profile times must be nondecreasing at t={}", w[1].0));
            }
        }
        if let Some(&(t, v)) = self.speed_profile.iter().find(|(_, v)| !(*v >= V_MIN)) {
            return bad(format!("speed_profile speed {v} at t={t} below {V_MIN} m/s"));
        }
        Ok(())
    }

    /// Commanded road-wheel angle at time `t`.
    pub fn steer_at(&self, t: f64) -> f64 {
        let a = self.steer_amplitude;
        let w = 2.0 * PI * self.steer_frequency;
        match self.kind {
            ManeuverKind::StepSteer => {
                let s = ((t - STEP_START) / STEP_RISE).clamp(0.0, 1.0);
                a * s * s * (3.0 - 2.0 * s)
            }
            ManeuverKind::Slalom => a * libm::sin(w * t),
            ManeuverKind::CityProfile => {
                let fade = (t / CITY_FADE_IN).clamp(0.0, 1.0);
                let shape = 0.6 * libm::sin(w * t) + 0.4 * libm::sin(0.43 * w * t + 1.3);
                a * fade * fade * (3.0 - 2.0 * fade) * shape
            }
            ManeuverKind::RampSteer => a * (t / self.duration).clamp(0.0, 1.0),
        }
    }

    /// Reference speed and its time derivative at `t`.
    pub fn speed_at(&self, t: f64) -> (f64, f64) {
        let p = &self.speed_profile;
        match p.len() {
            0 => (self.target_speed, 0.0),
            1 => (p[0].1, 0.0),
            _ => {
                if t <= p[0].0 {
                    return (p[0].1, 0.0);
                }
                for w in p.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if t <= t1 {
                        if t1 - t0 <= 0.0 {
                            return (v1, 0.0);
                        }
                        let slope = (v1 - v0) / (t1 - t0);
                        return (v0 + slope * (t - t0), slope);
                    }
                }
                (p[p.len() - 1].1, 0.0)
            }
        }
    }

    /// Steering plus proportional speed control with slope feed-forward.
    pub fn inputs(&self, t: f64, state: &VehicleState, params: &VehicleParams) -> Inputs {
        let (v_ref, dv_ref) = self.speed_at(t);
        Inputs { steer: self.steer_at(t), drive_force: params.mass * (SPEED_GAIN * (v_ref - state.vx) + dv_ref) }
    }

    pub fn initial_speed(&self) -> f64 {
        self.speed_at(0.0).0
    }

    pub fn sample_count(&self) -> usize {
        libm::round(self.duration / crate::SAMPLE_PERIOD) as usize + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ManeuverKind) -> ManeuverSpec {
        ManeuverSpec {
            kind,
            steer_amplitude: 0.05,
            steer_frequency: 0.5,
            target_speed: 10.0,
            speed_profile: Vec::new(),
            duration: 10.0,
        }
    }

    #[test]
    fn speed_profile_interpolates() {
        let mut m = spec(ManeuverKind::CityProfile);
        m.speed_profile = alloc::vec![(0.0, 10.0), (10.0, 20.0), (20.0, 20.0)];
        assert_eq!(m.speed_at(-1.0), (10.0, 0.0));
        assert_eq!(m.speed_at(5.0), (15.0, 1.0));
        assert_eq!(m.speed_at(15.0), (20.0, 0.0));
        assert_eq!(m.speed_at(25.0), (20.0, 0.0));
    }

    #[test]
    fn steering_shapes() {
        let step = spec(ManeuverKind::StepSteer);
        assert_eq!(step.steer_at(0.5), 0.0);
        assert_eq!(step.steer_at(2.0), 0.05);
        let ramp = spec(ManeuverKind::RampSteer);
        assert!((ramp.steer_at(5.0) - 0.025).abs() < 1e-15);
        let slalom = spec(ManeuverKind::Slalom);
        assert!((slalom.steer_at(0.5) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(spec(ManeuverKind::Slalom).validate().is_ok());
        let mut m = spec(ManeuverKind::Slalom);
        m.duration = 0.0;
        assert!(m.validate().is_err());
        let mut m = spec(ManeuverKind::Slalom);
        m.target_speed = 0.5;
        assert!(m.validate().is_err());
        let mut m = spec(ManeuverKind::Slalom);
        m.speed_profile = alloc::vec![(0.0, 10.0), (5.0, 0.2)];
        assert!(m.validate().is_err());
    }

    #[test]
    fn sample_count_matches_rate() {
        assert_eq!(spec(ManeuverKind::Slalom).sample_count(), 501);
    }
}
