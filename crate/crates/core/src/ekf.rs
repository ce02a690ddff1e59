//! Extended Kalman filter baseline over the dynamic single-track model.
//!
//! The state is `[Vx, Vy, yaw_rate]`. Prediction runs one RK4 step of the
//! velocity subsystem and linearises that step map by central differences;
//! the update fuses both accelerometer axes, the yaw-rate gyro and the
//! rear-axle wheel speed.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Matrix4, Matrix4x3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::simulator::SensorFrame;
use crate::vehicle::{dynamic_bicycle_derivative, rk4_step, Inputs, TireModel, VehicleParams, VehicleState};
use crate::{Error, Result, V_MIN};

/// Noise tuning and model choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EkfConfig {
    /// Diagonal of Q (per second).
    pub process_noise: [f64; 3],
    /// Diagonal of R for `[a_x, a_y, yaw_rate, Vx_wheel]`.
    pub measurement_noise: [f64; 4],
    /// Diagonal of the initial covariance.
    pub initial_covariance: [f64; 3],
    pub tire: TireModel,
}

impl Default for EkfConfig {
    fn default() -> Self {
        Self {
            process_noise: [0.05, 0.05, 0.01],
            measurement_noise: [0.0025, 0.0025, 4e-6, 0.01],
            initial_covariance: [0.25, 0.25, 0.01],
            tire: TireModel::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EkfState {
    /// `[Vx, Vy, yaw_rate]`
    pub mean: Vector3<f64>,
    pub covariance: Matrix3<f64>,
    pub process_noise: Matrix3<f64>,
    pub measurement_noise: Matrix4<f64>,
    /// Innovation of the most recent update.
    pub innovation: Option<Vector4<f64>>,
}

impl EkfState {
    pub fn new(mean: Vector3<f64>, config: &EkfConfig) -> Self {
        Self {
            mean,
            covariance: Matrix3::from_diagonal(&Vector3::from(config.initial_covariance)),
            process_noise: Matrix3::from_diagonal(&Vector3::from(config.process_noise)),
            measurement_noise: Matrix4::from_diagonal(&Vector4::from(config.measurement_noise)),
            innovation: None,
        }
    }

    fn clamp_speed(&mut self) {
        if self.mean[0] < V_MIN {
            self.mean[0] = V_MIN;
        }
    }
}

fn as_vehicle(mean: &Vector3<f64>) -> VehicleState {
    VehicleState { vx: mean[0], vy: mean[1], yaw_rate: mean[2], ..VehicleState::default() }
}

/// One RK4 step of the velocity states with inputs held.
pub fn velocity_step(
    mean: &Vector3<f64>,
    inputs: Inputs,
    dt: f64,
    params: &VehicleParams,
    tire: TireModel,
) -> Result<Vector3<f64>> {
    let next = rk4_step(&as_vehicle(mean), inputs, dt, params, tire)?;
    Ok(Vector3::new(next.vx, next.vy, next.yaw_rate))
}

/// Predicted `[a_x, a_y, yaw_rate, Vx]` for a state.
pub fn measurement_model(
    mean: &Vector3<f64>,
    inputs: Inputs,
    params: &VehicleParams,
    tire: TireModel,
) -> Result<Vector4<f64>> {
    let s = as_vehicle(mean);
    let d = dynamic_bicycle_derivative(&s, inputs, params, tire)?;
    Ok(Vector4::new(d.vx - s.yaw_rate * s.vy, d.vy + s.yaw_rate * s.vx, s.yaw_rate, s.vx))
}

fn fd_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

/// Central-difference Jacobian of [`velocity_step`].
pub fn step_jacobian(
    mean: &Vector3<f64>,
    inputs: Inputs,
    dt: f64,
    params: &VehicleParams,
    tire: TireModel,
) -> Result<Matrix3<f64>> {
    let mut jac = Matrix3::zeros();
    for j in 0..3 {
        let h = fd_step(mean[j]);
        let (mut plus, mut minus) = (*mean, *mean);
        plus[j] += h;
        minus[j] -= h;
        let col = (velocity_step(&plus, inputs, dt, params, tire)? - velocity_step(&minus, inputs, dt, params, tire)?)
            / (2.0 * h);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Central-difference Jacobian of [`measurement_model`].
pub fn measurement_jacobian(
    mean: &Vector3<f64>,
    inputs: Inputs,
    params: &VehicleParams,
    tire: TireModel,
) -> Result<Matrix4x3<f64>> {
    let mut jac = Matrix4x3::zeros();
    for j in 0..3 {
        let h = fd_step(mean[j]);
        let (mut plus, mut minus) = (*mean, *mean);
        plus[j] += h;
        minus[j] -= h;
        let col = (measurement_model(&plus, inputs, params, tire)? - measurement_model(&minus, inputs, params, tire)?)
            / (2.0 * h);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

fn symmetrize<const N: usize>(m: &nalgebra::SMatrix<f64, N, N>) -> nalgebra::SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}

/// Propagate mean and covariance over `dt`: `P <- F P F^T + Q dt`.
pub fn ekf_predict(
    state: &EkfState,
    inputs: Inputs,
    dt: f64,
    params: &VehicleParams,
    tire: TireModel,
) -> Result<EkfState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("prediction step must be positive, got {dt}")));
    }
    let f = step_jacobian(&state.mean, inputs, dt, params, tire)?;
    let mut next = state.clone();
    next.mean = velocity_step(&state.mean, inputs, dt, params, tire)?;
    next.covariance = symmetrize(&(f * state.covariance * f.transpose() + state.process_noise * dt));
    next.clamp_speed();
    Ok(next)
}

/// Kalman correction with measurement `[a_x, a_y, yaw_rate, Vx_wheel]`.
///
/// Uses the Joseph form so the covariance stays positive semidefinite. A
/// singular innovation covariance leaves the caller's state untouched.
pub fn ekf_update(
    state: &EkfState,
    z: &Vector4<f64>,
    inputs: Inputs,
    params: &VehicleParams,
    tire: TireModel,
) -> Result<EkfState> {
    let predicted = measurement_model(&state.mean, inputs, params, tire)?;
    let h = measurement_jacobian(&state.mean, inputs, params, tire)?;
    let p = &state.covariance;
    let r = &state.measurement_noise;
    let s = symmetrize(&(h * p * h.transpose() + r));
    let s_inv = s.cholesky().ok_or(Error::SingularInnovation)?.inverse();
    let gain = p * h.transpose() * s_inv;
    let innovation = z - predicted;

    let mut next = state.clone();
    next.mean = state.mean + gain * innovation;
    let i_kh = Matrix3::identity() - gain * h;
    next.covariance = symmetrize(&(i_kh * p * i_kh.transpose() + gain * r * gain.transpose()));
    next.innovation = Some(innovation);
    next.clamp_speed();
    Ok(next)
}

/// Side-slip angle of the filter mean.
pub fn ekf_sideslip(state: &EkfState) -> Result<f64> {
    as_vehicle(&state.mean).sideslip()
}

/// Longitudinal speed from the mean rear wheel speed.
pub fn rear_axle_speed(frame: &SensorFrame, params: &VehicleParams) -> f64 {
    0.5 * (frame.w_rl + frame.w_rr) * params.wheel_radius
}

fn frame_inputs(frame: &SensorFrame, params: &VehicleParams) -> Inputs {
    Inputs { steer: frame.delta, drive_force: params.mass * frame.a_x }
}

/// Filter a whole log; `None` marks frames below the speed limit.
///
/// The filter starts (and restarts after a gap) from the wheel speed, zero
/// lateral velocity and the measured yaw rate.
pub fn run_ekf(log: &[SensorFrame], params: &VehicleParams, config: &EkfConfig) -> Result<Vec<Option<f64>>> {
    if log.is_empty() {
        return Err(Error::Empty("ekf log"));
    }
    let mut out = Vec::with_capacity(log.len());
    let mut filter: Option<EkfState> = None;
    for (k, frame) in log.iter().enumerate() {
        let speed = rear_axle_speed(frame, params);
        if speed < V_MIN {
            filter = None;
            out.push(None);
            continue;
        }
        let prior = match filter.take() {
            None => Ok(EkfState::new(Vector3::new(speed, 0.0, frame.yaw_rate), config)),
            Some(s) => {
                let prev = &log[k - 1];
                ekf_predict(&s, frame_inputs(prev, params), frame.t - prev.t, params, config.tire)
            }
        };
        let prior = match prior {
            Ok(p) => p,
            Err(Error::LowSpeed { .. }) => {
                out.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let z = Vector4::new(frame.a_x, frame.a_y, frame.yaw_rate, speed);
        let posterior = ekf_update(&prior, &z, frame_inputs(frame, params), params, config.tire)?;
        out.push(Some(ekf_sideslip(&posterior)?));
        filter = Some(posterior);
    }
    Ok(out)
}
