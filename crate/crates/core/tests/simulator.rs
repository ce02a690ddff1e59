use sideslip_core::eval::{classify_maneuver, ManeuverClass};
use sideslip_core::simulator::{
    friction_circle_histogram, sideslip_histogram, simulate, tune_steer_amplitude, wheel_speeds_from_state,
    ManeuverKind, ManeuverSpec, SensorNoiseSpec,
};
use sideslip_core::vehicle::{VehicleParams, VehicleState};
use sideslip_core::GRAVITY;

fn maneuver(kind: ManeuverKind, amplitude: f64, frequency: f64, speed: f64, duration: f64) -> ManeuverSpec {
    ManeuverSpec {
        kind,
        steer_amplitude: amplitude,
        steer_frequency: frequency,
        target_speed: speed,
        speed_profile: Vec::new(),
        duration,
    }
}

#[test]
fn zero_amplitude_step_has_no_lateral_motion() {
    let p = VehicleParams::default();
    let log =
        simulate(&maneuver(ManeuverKind::StepSteer, 0.0, 0.0, 15.0, 10.0), &p, &SensorNoiseSpec::default()).unwrap();
    assert_eq!(log.len(), 501);
    for (r, ay) in log.reference.iter().zip(&log.true_lateral_accel) {
        assert_eq!(r.beta, 0.0);
        assert_eq!(*ay, 0.0);
    }
}

#[test]
fn same_inputs_same_log() {
    let p = VehicleParams::default();
    let m = maneuver(ManeuverKind::Slalom, 0.05, 0.4, 18.0, 8.0);
    let noise = SensorNoiseSpec::default().with_seed(99);
    let a = simulate(&m, &p, &noise).unwrap();
    let b = simulate(&m, &p, &noise).unwrap();
    assert_eq!(a, b);
    let c = simulate(&m, &p, &noise.with_seed(100)).unwrap();
    assert_ne!(a.sensor, c.sensor);
    assert_eq!(a.reference, c.reference);
}

#[test]
fn harsh_slalom_reaches_the_dynamic_band() {
    let p = VehicleParams::default();
    let template = maneuver(ManeuverKind::Slalom, 0.0, 0.4, 18.0, 20.0);
    let tuned = tune_steer_amplitude(&template, &p, 0.85).unwrap();
    let log = simulate(&tuned, &p, &SensorNoiseSpec::default()).unwrap();
    let peak = log.max_abs_lateral_accel() / GRAVITY;
    assert!((0.80..=0.90).contains(&peak), "peak {peak} g");
    let class = classify_maneuver(&log.reference);
    assert_eq!(class.class, ManeuverClass::Dynamic);
    assert!((0.80..=0.90).contains(&class.max_lateral_accel_g), "{class:?}");
}

#[test]
fn noise_free_channels_are_exact() {
    let p = VehicleParams::default();
    let m = maneuver(ManeuverKind::CityProfile, 0.04, 0.25, 12.0, 20.0);
    let log = simulate(&m, &p, &SensorNoiseSpec::noise_free(1)).unwrap();
    for ((s, r), ay) in log.sensor.iter().zip(&log.reference).zip(&log.true_lateral_accel) {
        assert_eq!(s.t, r.t);
        assert_eq!(s.yaw_rate, r.psi_rate);
        assert_eq!(s.a_y, *ay);
        assert_eq!(s.delta, m.steer_at(s.t));
        let state = VehicleState { x: r.x, y: r.y, yaw: r.psi, vx: r.v_x, vy: r.v_y, yaw_rate: r.psi_rate };
        let w = wheel_speeds_from_state(&state, s.delta, &p).unwrap();
        assert_eq!([s.w_fl, s.w_fr, s.w_rl, s.w_rr], [w.fl, w.fr, w.rl, w.rr]);
        assert_eq!(r.beta, libm::atan2(r.v_y, r.v_x));
        assert_eq!((r.theta, r.phi, r.theta_rate, r.phi_rate), (0.0, 0.0, 0.0, 0.0));
    }
}

#[test]
fn histograms_conserve_counts() {
    let p = VehicleParams::default();
    let log =
        simulate(&maneuver(ManeuverKind::Slalom, 0.08, 0.5, 16.0, 20.0), &p, &SensorNoiseSpec::default()).unwrap();
    for bins in [1, 2, 7, 22, 101] {
        assert_eq!(friction_circle_histogram(&log.sensor, bins).unwrap().total(), log.len() as u64);
    }
    for width in [1e-4, 1e-3, 0.01, 1.0] {
        assert_eq!(sideslip_histogram(&log.reference, width).unwrap().total(), log.len() as u64);
    }
}

#[test]
fn straight_driving_stays_at_the_origin() {
    let p = VehicleParams::default();
    let log =
        simulate(&maneuver(ManeuverKind::StepSteer, 0.0, 0.0, 20.0, 30.0), &p, &SensorNoiseSpec::default()).unwrap();
    let h = friction_circle_histogram(&log.sensor, 22).unwrap();
    let width = 2.2 / 22.0;
    for i in 0..h.bins {
        for j in 0..h.bins {
            if h.count(i, j) > 0 {
                assert!(h.bin_center_g(i).abs() < width && h.bin_center_g(j).abs() < width, "mass in cell ({i}, {j})");
            }
        }
    }
}

#[test]
fn slalom_sideslip_is_near_symmetric() {
    let p = VehicleParams::default();
    let log =
        simulate(&maneuver(ManeuverKind::Slalom, 0.06, 0.5, 16.0, 60.0), &p, &SensorNoiseSpec::default()).unwrap();
    let h = sideslip_histogram(&log.reference, 1e-4).unwrap();
    let n = h.total() as f64;
    let moment = |k: i32, mean: f64| {
        h.counts.iter().enumerate().map(|(i, &c)| c as f64 * (h.bin_center(i) - mean).powi(k)).sum::<f64>() / n
    };
    let mean = moment(1, 0.0);
    let skew = moment(3, mean) / moment(2, mean).powf(1.5);
    assert!(skew.abs() < 0.2, "skewness {skew}");
}
