use kresling_airship::energy::{
    drag_force, energy_curve, mission_energy, speed_grid, ForwardBookkeeping, PowerModel,
};
use kresling_airship::par::Execution;

/// Spreadsheet-style evaluation written out term by term.
fn hand_energy_wh(v: f64, split: bool) -> f64 {
    let motor = |f: f64| 3.347 * f * f + 25.857 * f + 1.69;
    let drag = 0.5 * 1.2 * 1.231 * v * v * 0.41;
    let forward = if split { 2.0 * motor(drag / 2.0) } else { motor(drag) };
    let power = 4.515 + motor(0.02 * 9.80665) + forward;
    power * (300.0 / v) / 3600.0
}

#[test]
fn matches_hand_evaluation() {
    for v in [0.05, 0.08, 0.15, 0.4, 1.0, 1.7] {
        let c = mission_energy(v, &PowerModel::default()).unwrap();
        assert!((c.energy_wh - hand_energy_wh(v, false)).abs() < 1e-9);
        let split = PowerModel {
            forward: ForwardBookkeeping::SplitWithIdle,
            ..PowerModel::default()
        };
        let s = mission_energy(v, &split).unwrap();
        assert!((s.energy_wh - hand_energy_wh(v, true)).abs() < 1e-9);
    }
}

#[test]
fn crossing_brackets_the_battery_line() {
    let model = PowerModel::default();
    let c = energy_curve(&speed_grid(0.01, 2.0, 0.01), &model, Execution::Sequential).unwrap();
    let min = c.min_feasible_speed.unwrap();
    assert!(hand_energy_wh(min.v_m_s - 1e-3, false) > 14.8);
    assert!(hand_energy_wh(min.v_m_s + 1e-3, false) < 14.8);
}

#[test]
fn single_slope_sign_change_on_unit_interval() {
    let grid = speed_grid(0.002, 2.0, 0.002);
    let c = energy_curve(&grid, &PowerModel::default(), Execution::Parallel).unwrap();
    let e: Vec<f64> = c.points.iter().map(|p| p.energy_wh).collect();
    let turns = e
        .windows(3)
        .filter(|w| (w[1] - w[0]).signum() != (w[2] - w[1]).signum())
        .count();
    assert_eq!(turns, 1);
    let opt = c.optimum.unwrap().v_m_s;
    assert!((0.8..1.8).contains(&opt), "{opt}");
}

#[test]
fn propulsion_only_grows_with_speed() {
    let model = PowerModel {
        electronics_w: 0.0,
        hover_thrust_n: 0.0,
        motor: kresling_airship::energy::MotorRegression { a: 3.347, b: 25.857, c: 0.0 },
        ..PowerModel::default()
    };
    let mut last = 0.0;
    for v in speed_grid(0.1, 3.0, 0.1) {
        let e = mission_energy(v, &model).unwrap().energy_wh;
        assert!(e > last);
        last = e;
    }
}

#[test]
fn parallel_and_sequential_curves_agree() {
    let grid = speed_grid(0.01, 2.0, 0.01);
    let a = energy_curve(&grid, &PowerModel::default(), Execution::Parallel).unwrap();
    let b = energy_curve(&grid, &PowerModel::default(), Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn drag_quadratic() {
    for v in [0.1, 0.5, 2.0] {
        let r = drag_force(2.0 * v, 1.2, 1.231, 0.41) / drag_force(v, 1.2, 1.231, 0.41);
        assert!((r - 4.0).abs() < 1e-12);
    }
}
