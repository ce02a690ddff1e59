//! Synthetic 50 Hz driving data: ground-truth trajectories from the
//! single-track model with magic-formula tires, and the noisy in-car sensor
//! log an observer would see.

mod histogram;
mod maneuver;
mod split;
mod suite;

pub use histogram::{friction_circle_histogram, sideslip_histogram, FrictionCircleHistogram, SideslipHistogram};
pub use maneuver::{ManeuverKind, ManeuverSpec, SPEED_GAIN};
pub use split::{split_dataset, DatasetSplit};
pub use suite::{benchmark_suite, harsh_suite, normal_suite, tune_steer_amplitude, SuiteEntry};

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::seed::rng_from_seed;
use crate::vehicle::{
    dynamic_bicycle_derivative, ensure_speed, rk4_step_driven, TireModel, VehicleParams, VehicleState,
};
use crate::{Error, Result, SAMPLE_PERIOD};

/// Integration substeps per 20 ms sample.
const SUBSTEPS: usize = 4;

/// One 50 Hz sample of the in-car sensors.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorFrame {
    pub t: f64,
    /// Body-frame specific accelerations (m/s²).
    pub a_x: f64,
    pub a_y: f64,
    pub yaw_rate: f64,
    /// Wheel angular speeds (rad/s).
    pub w_fl: f64,
    pub w_fr: f64,
    pub w_rl: f64,
    pub w_rr: f64,
    /// Road-wheel steering angle (rad).
    pub delta: f64,
}

/// One sample of the ground-truth channels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReferenceFrame {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub psi: f64,
    /// Pitch; always zero on the flat road.
    pub theta: f64,
    /// Roll; always zero on the flat road.
    pub phi: f64,
    pub psi_rate: f64,
    pub theta_rate: f64,
    pub phi_rate: f64,
    pub beta: f64,
}

/// Gaussian noise and constant bias per sensor channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorNoiseSpec {
    pub sigma_ax: f64,
    pub sigma_ay: f64,
    pub sigma_yaw_rate: f64,
    pub sigma_wheel_speed: f64,
    pub sigma_delta: f64,
    pub bias_ax: f64,
    pub bias_ay: f64,
    pub bias_yaw_rate: f64,
    pub bias_wheel_speed: f64,
    pub bias_delta: f64,
    pub seed: u64,
}

impl Default for SensorNoiseSpec {
    fn default() -> Self {
        Self {
            sigma_ax: 0.05,
            sigma_ay: 0.05,
            sigma_yaw_rate: 0.002,
            sigma_wheel_speed: 0.05,
            sigma_delta: 0.001,
            ..Self::noise_free(0)
        }
    }
}

impl SensorNoiseSpec {
    pub fn noise_free(seed: u64) -> Self {
        Self {
            sigma_ax: 0.0,
            sigma_ay: 0.0,
            sigma_yaw_rate: 0.0,
            sigma_wheel_speed: 0.0,
            sigma_delta: 0.0,
            bias_ax: 0.0,
            bias_ay: 0.0,
            bias_yaw_rate: 0.0,
            bias_wheel_speed: 0.0,
            bias_delta: 0.0,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [self.sigma_ax, self.sigma_ay, self.sigma_yaw_rate, self.sigma_wheel_speed, self.sigma_delta];
        if sigmas.iter().all(|s| *s >= 0.0 && s.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!("noise sigmas must be finite and >= 0: {sigmas:?}")))
        }
    }
}

/// Angular speeds of the four wheels (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelSpeeds {
    pub fl: f64,
    pub fr: f64,
    pub rl: f64,
    pub rr: f64,
}

/// Rigid-body wheel-centre velocity projected on each wheel's heading, with
/// no longitudinal slip.
pub fn wheel_speeds_from_state(state: &VehicleState, delta: f64, params: &VehicleParams) -> Result<WheelSpeeds> {
    ensure_speed(state.vx)?;
    let half_track = 0.5 * params.track;
    let (sin_d, cos_d) = libm::sincos(delta);
    let rolling = |x_pos: f64, y_pos: f64, steered: bool| {
        let vx = state.vx - state.yaw_rate * y_pos;
        let vy = state.vy + state.yaw_rate * x_pos;
        let along = if steered { vx * cos_d + vy * sin_d } else { vx };
        along / params.wheel_radius
    };
    Ok(WheelSpeeds {
        fl: rolling(params.lf, half_track, true),
        fr: rolling(params.lf, -half_track, true),
        rl: rolling(-params.lr, half_track, false),
        rr: rolling(-params.lr, -half_track, false),
    })
}

/// Output of [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedLog {
    pub sensor: Vec<SensorFrame>,
    pub reference: Vec<ReferenceFrame>,
    /// Noise-free lateral specific acceleration per sample (m/s²).
    pub true_lateral_accel: Vec<f64>,
}

impl SimulatedLog {
    pub fn len(&self) -> usize {
        self.sensor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensor.is_empty()
    }

    pub fn max_abs_lateral_accel(&self) -> f64 {
        self.true_lateral_accel.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

/// Run one maneuver on the magic-formula vehicle and sample it at 50 Hz.
pub fn simulate(maneuver: &ManeuverSpec, params: &VehicleParams, noise: &SensorNoiseSpec) -> Result<SimulatedLog> {
    simulate_with_tire(maneuver, params, noise, TireModel::Pacejka)
}

/// [`simulate`] with a chosen tire model for the ground truth.
pub fn simulate_with_tire(
    maneuver: &ManeuverSpec,
    params: &VehicleParams,
    noise: &SensorNoiseSpec,
    tire: TireModel,
) -> Result<SimulatedLog> {
    maneuver.validate()?;
    params.validate()?;
    noise.validate()?;

    let n = maneuver.sample_count();
    let h = SAMPLE_PERIOD / SUBSTEPS as f64;
    let mut rng = rng_from_seed(noise.seed);
    let mut gauss = |sigma: f64| {
        let z: f64 = StandardNormal.sample(&mut rng);
        sigma * z
    };
    let control = |t: f64, s: &VehicleState| maneuver.inputs(t, s, params);

    let mut state = VehicleState::straight(maneuver.initial_speed());
    let mut log = SimulatedLog {
        sensor: Vec::with_capacity(n),
        reference: Vec::with_capacity(n),
        true_lateral_accel: Vec::with_capacity(n),
    };

    for k in 0..n {
        let t = k as f64 * SAMPLE_PERIOD;
        let inputs = control(t, &state);
        let d = dynamic_bicycle_derivative(&state, inputs, params, tire)?;
        let a_x = d.vx - state.yaw_rate * state.vy;
        let a_y = d.vy + state.yaw_rate * state.vx;
        let wheels = wheel_speeds_from_state(&state, inputs.steer, params)?;

        log.reference.push(ReferenceFrame {
            t,
            x: state.x,
            y: state.y,
            v_x: state.vx,
            v_y: state.vy,
            psi: state.yaw,
            theta: 0.0,
            phi: 0.0,
            psi_rate: state.yaw_rate,
            theta_rate: 0.0,
            phi_rate: 0.0,
            beta: state.sideslip()?,
        });
        log.true_lateral_accel.push(a_y);
        log.sensor.push(SensorFrame {
            t,
            a_x: a_x + noise.bias_ax + gauss(noise.sigma_ax),
            a_y: a_y + noise.bias_ay + gauss(noise.sigma_ay),
            yaw_rate: state.yaw_rate + noise.bias_yaw_rate + gauss(noise.sigma_yaw_rate),
            w_fl: wheels.fl + noise.bias_wheel_speed + gauss(noise.sigma_wheel_speed),
            w_fr: wheels.fr + noise.bias_wheel_speed + gauss(noise.sigma_wheel_speed),
            w_rl: wheels.rl + noise.bias_wheel_speed + gauss(noise.sigma_wheel_speed),
            w_rr: wheels.rr + noise.bias_wheel_speed + gauss(noise.sigma_wheel_speed),
            delta: inputs.steer + noise.bias_delta + gauss(noise.sigma_delta),
        });

        if k + 1 < n {
            for j in 0..SUBSTEPS {
                state = rk4_step_driven(&state, t + j as f64 * h, h, control, params, tire)?;
            }
        }
    }
    Ok(log)
}
