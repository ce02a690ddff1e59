//! Single-track vehicle models shared by the simulator and the observers.

mod dynamics;
mod integrator;
mod tire;

pub use dynamics::{dynamic_bicycle_derivative, kinematic_sideslip, slip_angles, StateDerivative};
pub use integrator::{rk4_step, rk4_step_driven};
pub use tire::{linear_tire_lateral_force, pacejka_lateral_force, PacejkaCoeffs, TireModel};

use alloc::format;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, GRAVITY, V_MIN};

/// Physical constants of the vehicle.
///
/// Mass, axle distances, track width and yaw inertia default to the test
/// vehicle (an Audi A6 Avant). Tire and wheel values are simulator choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// CoG to front axle (m).
    pub lf: f64,
    /// CoG to rear axle (m).
    pub lr: f64,
    /// Track width (m).
    pub track: f64,
    /// Yaw moment of inertia (kg·m²).
    pub inertia_z: f64,
    /// Linear front cornering stiffness (N/rad).
    pub cornering_stiffness_front: f64,
    /// Linear rear cornering stiffness (N/rad).
    pub cornering_stiffness_rear: f64,
    pub pacejka_front: PacejkaCoeffs,
    pub pacejka_rear: PacejkaCoeffs,
    /// m
    pub wheel_radius: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::with_friction(1.0)
    }
}

impl VehicleParams {
    /// Default vehicle with Pacejka peak forces set to `mu` times the static
    /// axle loads.
    pub fn with_friction(mu: f64) -> Self {
        let mass = 1578.0;
        let lf = 1.134;
        let lr = 1.578;
        let wheelbase = lf + lr;
        let front_load = mass * GRAVITY * lr / wheelbase;
        let rear_load = mass * GRAVITY * lf / wheelbase;
        let curve = |load: f64| PacejkaCoeffs { b: 10.0, c: 1.9, d: mu * load, e: 0.97 };
        Self {
            mass,
            lf,
            lr,
            track: 1.513,
            inertia_z: 2924.0,
            cornering_stiffness_front: 80_000.0,
            cornering_stiffness_rear: 80_000.0,
            pacejka_front: curve(front_load),
            pacejka_rear: curve(rear_load),
            wheel_radius: 0.316,
        }
    }

    pub fn wheelbase(&self) -> f64 {
        self.lf + self.lr
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("lf", self.lf),
            ("lr", self.lr),
            ("track", self.track),
            ("inertia_z", self.inertia_z),
            ("cornering_stiffness_front", self.cornering_stiffness_front),
            ("cornering_stiffness_rear", self.cornering_stiffness_rear),
            ("wheel_radius", self.wheel_radius),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        self.pacejka_front.validate("pacejka_front")?;
        self.pacejka_rear.validate("pacejka_rear")?;
        Ok(())
    }
}

/// Planar rigid-body state of the single-track model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Yaw angle in (-pi, pi].
    pub yaw: f64,
    /// Body-frame longitudinal velocity (m/s).
    pub vx: f64,
    /// Body-frame lateral velocity (m/s).
    pub vy: f64,
    pub yaw_rate: f64,
}

impl VehicleState {
    pub fn straight(vx: f64) -> Self {
        Self { vx, ..Self::default() }
    }

    /// Side-slip angle at the centre of gravity.
    pub fn sideslip(&self) -> Result<f64> {
        ensure_speed(self.vx)?;
        Ok(libm::atan2(self.vy, self.vx))
    }
}

/// Steering and drive inputs held by the integrator over a step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Inputs {
    /// Road-wheel steering angle (rad).
    pub steer: f64,
    /// Total longitudinal force, applied at the rear axle (N).
    pub drive_force: f64,
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let wrapped = angle - two_pi * libm::floor((angle + PI) / two_pi);
    if wrapped <= -PI {
        wrapped + two_pi
    } else {
        wrapped
    }
}

pub(crate) fn ensure_speed(vx: f64) -> Result<()> {
    if vx >= V_MIN {
        Ok(())
    } else {
        Err(Error::LowSpeed { vx, min: V_MIN })
    }
}
