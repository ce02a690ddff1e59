use super::{dynamic_bicycle_derivative, wrap_angle, Inputs, StateDerivative, TireModel, VehicleParams, VehicleState};
use crate::Result;

fn axpy(state: &VehicleState, h: f64, d: &StateDerivative) -> VehicleState {
    VehicleState {
        x: state.x + h * d.x,
        y: state.y + h * d.y,
        yaw: state.yaw + h * d.yaw,
        vx: state.vx + h * d.vx,
        vy: state.vy + h * d.vy,
        yaw_rate: state.yaw_rate + h * d.yaw_rate,
    }
}

/// Classical RK4 step with inputs held constant over `dt`.
pub fn rk4_step(
    state: &VehicleState,
    inputs: Inputs,
    dt: f64,
    params: &VehicleParams,
    tire: TireModel,
) -> Result<VehicleState> {
    rk4_step_driven(state, 0.0, dt, |_, _| inputs, params, tire)
}

/// RK4 step where the inputs are re-evaluated at every stage from the stage
/// time and state, e.g. for time-varying steering or speed feedback.
pub fn rk4_step_driven<F>(
    state: &VehicleState,
    t: f64,
    dt: f64,
    mut inputs: F,
    params: &VehicleParams,
    tire: TireModel,
) -> Result<VehicleState>
where
    F: FnMut(f64, &VehicleState) -> Inputs,
{
    debug_assert!(dt > 0.0);
    let mut f = |t: f64, s: &VehicleState| dynamic_bicycle_derivative(s, inputs(t, s), params, tire);
    let half = 0.5 * dt;
    let k1 = f(t, state)?;
    let s2 = axpy(state, half, &k1);
    let k2 = f(t + half, &s2)?;
    let s3 = axpy(state, half, &k2);
    let k3 = f(t + half, &s3)?;
    let s4 = axpy(state, dt, &k3);
    let k4 = f(t + dt, &s4)?;

    let w = dt / 6.0;
    let comb = |a: f64, b: f64, c: f64, d: f64| w * (a + 2.0 * b + 2.0 * c + d);
    let mut next = VehicleState {
        x: state.x + comb(k1.x, k2.x, k3.x, k4.x),
        y: state.y + comb(k1.y, k2.y, k3.y, k4.y),
        yaw: state.yaw + comb(k1.yaw, k2.yaw, k3.yaw, k4.yaw),
        vx: state.vx + comb(k1.vx, k2.vx, k3.vx, k4.vx),
        vy: state.vy + comb(k1.vy, k2.vy, k3.vy, k4.vy),
        yaw_rate: state.yaw_rate + comb(k1.yaw_rate, k2.yaw_rate, k3.yaw_rate, k4.yaw_rate),
    };
    next.yaw = wrap_angle(next.yaw);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_advance() {
        let p = VehicleParams::default();
        let s = VehicleState::straight(12.0);
        let n = rk4_step(&s, Inputs::default(), 0.02, &p, TireModel::Pacejka).unwrap();
        assert!((n.x - 12.0 * 0.02).abs() < 1e-14);
        assert_eq!(n, VehicleState { x: n.x, ..s });
    }

    #[test]
    fn yaw_stays_wrapped() {
        let p = VehicleParams::default();
        let mut s = VehicleState { yaw: 3.1, yaw_rate: 1.0, ..VehicleState::straight(10.0) };
        let inputs = Inputs { steer: 0.2, drive_force: 0.0 };
        for _ in 0..500 {
            s = rk4_step(&s, inputs, 0.02, &p, TireModel::Linear).unwrap();
            assert!(s.yaw > -core::f64::consts::PI && s.yaw <= core::f64::consts::PI);
        }
    }
}
