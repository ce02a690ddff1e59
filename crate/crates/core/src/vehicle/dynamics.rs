use core::f64::consts::FRAC_PI_2;

use super::{
    ensure_speed, linear_tire_lateral_force, pacejka_lateral_force, Inputs, TireModel, VehicleParams, VehicleState,
};
use crate::{Error, Result};

/// Kinematic single-track side-slip: `atan(lr·tan(delta) / (lf + lr))`.
pub fn kinematic_sideslip(delta: f64, params: &VehicleParams) -> Result<f64> {
    if !(delta.abs() < FRAC_PI_2) {
        return Err(Error::SteeringDomain(delta));
    }
    Ok(libm::atan(params.lr * libm::tan(delta) / params.wheelbase()))
}

/// Time derivative of every [`VehicleState`] component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub vx: f64,
    pub vy: f64,
    pub yaw_rate: f64,
}

/// Front and rear tire slip angles.
///
/// A slip angle is the direction of the tire's velocity relative to its
/// heading, so a lateral force of `-C·alpha` pushes back against it.
pub fn slip_angles(state: &VehicleState, steer: f64, params: &VehicleParams) -> Result<(f64, f64)> {
    ensure_speed(state.vx)?;
    let front = libm::atan((state.vy + params.lf * state.yaw_rate) / state.vx) - steer;
    let rear = libm::atan((state.vy - params.lr * state.yaw_rate) / state.vx);
    Ok((front, rear))
}

fn lateral_forces(alpha_f: f64, alpha_r: f64, params: &VehicleParams, tire: TireModel) -> (f64, f64) {
    match tire {
        TireModel::Linear => (
            linear_tire_lateral_force(alpha_f, params.cornering_stiffness_front),
            linear_tire_lateral_force(alpha_r, params.cornering_stiffness_rear),
        ),
        TireModel::Pacejka => (
            pacejka_lateral_force(alpha_f, &params.pacejka_front),
            pacejka_lateral_force(alpha_r, &params.pacejka_rear),
        ),
    }
}

/// CoG-referenced single-track dynamics with rear-axle drive and no drag.
pub fn dynamic_bicycle_derivative(
    state: &VehicleState,
    inputs: Inputs,
    params: &VehicleParams,
    tire: TireModel,
) -> Result<StateDerivative> {
    let (alpha_f, alpha_r) = slip_angles(state, inputs.steer, params)?;
    let (fyf, fyr) = lateral_forces(alpha_f, alpha_r, params, tire);
    let (sin_d, cos_d) = libm::sincos(inputs.steer);
    let (sin_psi, cos_psi) = libm::sincos(state.yaw);
    let VehicleState { vx, vy, yaw_rate, .. } = *state;

    Ok(StateDerivative {
        x: vx * cos_psi - vy * sin_psi,
        y: vx * sin_psi + vy * cos_psi,
        yaw: yaw_rate,
        vx: yaw_rate * vy + (inputs.drive_force - fyf * sin_d) / params.mass,
        vy: -yaw_rate * vx + (fyf * cos_d + fyr) / params.mass,
        yaw_rate: (params.lf * fyf * cos_d - params.lr * fyr) / params.inertia_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinematic_examples() {
        let p = VehicleParams::default();
        assert_eq!(kinematic_sideslip(0.0, &p).unwrap(), 0.0);
        // Multiprecision: 0.0583143817821953578...
        let b = kinematic_sideslip(0.1, &p).unwrap();
        assert!((b - 0.058_314_381_782_195_36).abs() < 1e-12);
        assert_eq!(kinematic_sideslip(-0.1, &p).unwrap(), -b);
        assert!(kinematic_sideslip(FRAC_PI_2, &p).is_err());
        assert!(kinematic_sideslip(-2.0, &p).is_err());
    }

    #[test]
    fn straight_line_is_equilibrium() {
        let p = VehicleParams::default();
        for tire in [TireModel::Linear, TireModel::Pacejka] {
            let d = dynamic_bicycle_derivative(&VehicleState::straight(15.0), Inputs::default(), &p, tire).unwrap();
            assert_eq!(d.vy, 0.0);
            assert_eq!(d.yaw_rate, 0.0);
            assert_eq!(d.vx, 0.0);
            assert_eq!(d.x, 15.0);
        }
    }

    #[test]
    fn left_steer_turns_left() {
        let p = VehicleParams::default();
        let inputs = Inputs { steer: 0.05, drive_force: 0.0 };
        let d = dynamic_bicycle_derivative(&VehicleState::straight(15.0), inputs, &p, TireModel::Linear).unwrap();
        assert!(d.yaw_rate > 0.0);
        assert!(d.vy > 0.0);
    }

    #[test]
    fn low_speed_error() {
        let p = VehicleParams::default();
        let r = dynamic_bicycle_derivative(&VehicleState::straight(0.5), Inputs::default(), &p, TireModel::Linear);
        assert!(matches!(r, Err(Error::LowSpeed { .. })));
    }
}
