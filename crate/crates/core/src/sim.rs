//! Fixed-step point-mass flight simulation with per-axis added mass,
//! quadratic drag and net weight, driven by [`AxisController`]s at a
//! lower control rate with zero-order hold.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{AxisController, AxisGains, ControllerError, DampingMode};
use crate::energy::{EnergyError, PowerModel, GRAVITY};
use crate::geometry::{derive_segment, GeometryError, KreslingParams, Stability};
use crate::mesh::{build_mesh, enclosed_volume, MeshError};
use crate::par::{map_collect, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("simulation config: {0}")]
    Config(String),
    #[error("non-finite {axis} state at t = {t} s")]
    NonFinite { t: f64, axis: Axis },
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
    Yaw,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::X, Axis::Y, Axis::Z, Axis::Yaw];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::Yaw => "yaw",
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Optional value per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerAxis<T> {
    pub x: Option<T>,
    pub y: Option<T>,
    pub z: Option<T>,
    pub yaw: Option<T>,
}

impl<T> Default for PerAxis<T> {
    fn default() -> Self {
        Self {
            x: None,
            y: None,
            z: None,
            yaw: None,
        }
    }
}

impl<T: Copy> PerAxis<T> {
    pub fn get(&self, axis: Axis) -> Option<T> {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
            Axis::Yaw => self.yaw,
        }
    }

    pub fn set(&mut self, axis: Axis, value: Option<T>) {
        match axis {
            Axis::X => self.x = value,
            Axis::Y => self.y = value,
            Axis::Z => self.z = value,
            Axis::Yaw => self.yaw = value,
        }
    }

    pub fn axes(&self) -> impl Iterator<Item = Axis> + '_ {
        Axis::ALL.into_iter().filter(|&a| self.get(a).is_some())
    }
}

/// Added mass and drag of one axis. For yaw the same numbers are read as
/// inertia and rotational drag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisPlant {
    pub added_mass_kg: f64,
    pub drag_coefficient: f64,
    pub reference_area_m2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// Displaced air plus net-weight mass, kg.
    pub base_mass_kg: f64,
    /// Downward force on z, N.
    pub net_weight_n: f64,
    pub rho_air_kg_m3: f64,
    pub x: AxisPlant,
    pub z: AxisPlant,
    /// Defaults to the x values.
    pub y: Option<AxisPlant>,
    /// Defaults to the x values.
    pub yaw: Option<AxisPlant>,
    /// Keeps z >= 0.
    pub ground_floor: bool,
}

impl Default for PlantParams {
    fn default() -> Self {
        let params = KreslingParams::new(7, 4, 0.9, 360.0, 80.0).expect("reference design");
        Self::for_design(&params, 1.231, 0.02).expect("reference design")
    }
}

impl PlantParams {
    /// Plant for the deployed shape of `params` with a net weight of
    /// `net_weight_kg` kilogram-force.
    pub fn for_design(params: &KreslingParams, rho_air: f64, net_weight_kg: f64) -> Result<Self, SimError> {
        let geom = derive_segment(params, Stability::Any)?;
        let volume = enclosed_volume(&build_mesh(params, geom.alpha_deployed)?)?;
        let cap_area_m2 = geom.cap_area(params.sides) * 1e-6;
        Ok(Self {
            base_mass_kg: rho_air * volume + net_weight_kg,
            net_weight_n: net_weight_kg * GRAVITY,
            rho_air_kg_m3: rho_air,
            x: AxisPlant {
                added_mass_kg: 1.165,
                drag_coefficient: 1.2,
                reference_area_m2: 0.41,
            },
            z: AxisPlant {
                added_mass_kg: 0.29,
                drag_coefficient: 0.9,
                reference_area_m2: cap_area_m2,
            },
            y: None,
            yaw: None,
            ground_floor: true,
        })
    }

    pub fn axis(&self, axis: Axis) -> AxisPlant {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y.unwrap_or(self.x),
            Axis::Z => self.z,
            Axis::Yaw => self.yaw.unwrap_or(self.x),
        }
    }

    pub fn inertia(&self, axis: Axis) -> f64 {
        self.base_mass_kg + self.axis(axis).added_mass_kg
    }

    pub fn drag(&self, axis: Axis, v: f64) -> f64 {
        let p = self.axis(axis);
        0.5 * p.drag_coefficient * self.rho_air_kg_m3 * v * v.abs() * p.reference_area_m2
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_owned()));
        if !(self.base_mass_kg.is_finite() && self.base_mass_kg > 0.0) {
            return bad("base_mass_kg must be positive");
        }
        if !(self.net_weight_n.is_finite() && self.rho_air_kg_m3.is_finite() && self.rho_air_kg_m3 >= 0.0) {
            return bad("net_weight_n and rho_air_kg_m3 must be finite");
        }
        for a in Axis::ALL {
            let p = self.axis(a);
            let ok = [p.added_mass_kg, p.drag_coefficient, p.reference_area_m2]
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0);
            if !ok {
                return bad("added mass, drag coefficient and area must be non-negative");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SimState {
    pub t: f64,
    pub pos: [f64; 4],
    pub vel: [f64; 4],
    pub applied: [f64; 4],
    pub energy_j: f64,
    pub step: u64,
}

/// Advances one physics step with forces held constant. Drag is taken at
/// the step-start velocity; the update is exact for constant acceleration.
pub fn step_physics(state: &SimState, plant: &PlantParams, forces: [f64; 4], dt: f64) -> Result<SimState, SimError> {
    let mut next = *state;
    for axis in Axis::ALL {
        let i = axis.index();
        let v = state.vel[i];
        let mut f = forces[i] - plant.drag(axis, v);
        if axis == Axis::Z {
            f -= plant.net_weight_n;
        }
        let a = f / plant.inertia(axis);
        next.pos[i] = state.pos[i] + v * dt + 0.5 * a * dt * dt;
        next.vel[i] = v + a * dt;
        if !(next.pos[i].is_finite() && next.vel[i].is_finite()) {
            return Err(SimError::NonFinite { t: state.t, axis });
        }
    }
    let z = Axis::Z.index();
    if plant.ground_floor && next.pos[z] < 0.0 {
        next.pos[z] = 0.0;
        next.vel[z] = next.vel[z].max(0.0);
    }
    next.applied = forces;
    next.step = state.step + 1;
    next.t = next.step as f64 * dt;
    Ok(next)
}

/// One leg of a scenario: hold the given targets for `duration_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub duration_s: f64,
    #[serde(default)]
    pub targets: PerAxis<f64>,
    /// Overrides `v_max` for this leg; axes left out use their configured gains.
    #[serde(default)]
    pub cruise_speeds: PerAxis<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub initial: PerAxis<f64>,
    pub phases: Vec<Phase>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::cave_test()
    }
}

impl Scenario {
    /// Lift off to 1 m, hold, then advance 2 m at 0.15 m/s.
    pub fn cave_test() -> Self {
        let climb = PerAxis {
            x: Some(0.0),
            z: Some(1.0),
            ..PerAxis::default()
        };
        let advance = PerAxis {
            x: Some(2.0),
            z: Some(1.0),
            ..PerAxis::default()
        };
        Self {
            initial: PerAxis::default(),
            phases: vec![
                Phase {
                    duration_s: 40.0,
                    targets: climb,
                    cruise_speeds: PerAxis::default(),
                },
                Phase {
                    duration_s: 50.0,
                    targets: advance,
                    cruise_speeds: PerAxis {
                        x: Some(0.15),
                        ..PerAxis::default()
                    },
                },
            ],
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.phases.iter().map(|p| p.duration_s).sum()
    }

    pub fn axes(&self) -> Vec<Axis> {
        Axis::ALL
            .into_iter()
            .filter(|&a| {
                self.phases
                    .iter()
                    .any(|p| p.targets.get(a).is_some() || p.cruise_speeds.get(a).is_some())
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub physics_hz: u32,
    pub control_hz: u32,
    pub sma_window_s: f64,
    pub damping: DampingMode,
    pub gains: PerAxis<AxisGains>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            physics_hz: 500,
            control_hz: 40,
            sma_window_s: 0.0,
            damping: DampingMode::Velocity,
            gains: PerAxis {
                x: Some(AxisGains {
                    force_max: 1.25,
                    v_max: 0.15,
                    tol: 0.1,
                }),
                z: Some(AxisGains {
                    force_max: 1.25,
                    v_max: 1.0,
                    tol: 0.1,
                }),
                ..PerAxis::default()
            },
        }
    }
}

impl SimConfig {
    pub fn with_window(&self, sma_window_s: f64) -> Self {
        Self {
            sma_window_s,
            ..self.clone()
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.physics_hz as f64
    }

    /// Physics step `k` starts a control tick when `floor(k fc / fp)` changes.
    pub fn is_tick(&self, k: u64) -> bool {
        let (fc, fp) = (self.control_hz as u64, self.physics_hz as u64);
        k == 0 || (k * fc) / fp != ((k - 1) * fc) / fp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceLogRow {
    pub t: f64,
    pub axis: Axis,
    pub s: f64,
    pub tau: f64,
    pub tau_sma: f64,
    pub tau_applied: f64,
}

/// Per-phase, per-axis response figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseMetrics {
    pub phase: usize,
    pub axis: Axis,
    pub target: f64,
    pub start: f64,
    pub final_position: f64,
    /// `|mean(pos) - target|` over the last quarter of the phase, capped at 5 s.
    pub steady_state_error: f64,
    /// First time after which `|pos - target|` stays within 2 % of the step.
    pub settling_time_s: Option<f64>,
    pub peak_speed: f64,
    /// Mean speed while between 25 % and 75 % of the step.
    pub cruise_speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub sma_window_s: f64,
    pub duration_s: f64,
    pub steps: u64,
    pub total_energy_j: f64,
    pub total_energy_wh: f64,
    pub final_position: PerAxis<f64>,
    pub phases: Vec<PhaseMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub axes: Vec<Axis>,
    /// Every physics step including the initial state.
    pub trajectory: Vec<SimState>,
    /// One row per axis per control tick.
    pub forces: Vec<ForceLogRow>,
    pub summary: SimSummary,
}

impl SimLog {
    pub fn final_state(&self) -> &SimState {
        self.trajectory.last().expect("trajectory holds the initial state")
    }

    pub fn metrics(&self, phase: usize, axis: Axis) -> Option<&PhaseMetrics> {
        self.summary
            .phases
            .iter()
            .find(|m| m.phase == phase && m.axis == axis)
    }

    /// Columns `t`, positions, velocities and applied forces of the
    /// configured axes, then `energy_j`. Every `stride`-th step.
    pub fn write_trajectory_csv<W: Write>(&self, mut w: W, header: &[String], stride: usize) -> io::Result<()> {
        for h in header {
            writeln!(w, "# {h}")?;
        }
        let mut cols = vec!["t".to_owned()];
        cols.extend(self.axes.iter().map(|a| a.name().to_owned()));
        cols.extend(self.axes.iter().map(|a| format!("v{a}")));
        cols.extend(self.axes.iter().map(|a| format!("tau_{a}")));
        cols.push("energy_j".to_owned());
        writeln!(w, "{}", cols.join(","))?;
        let stride = stride.max(1);
        let last = self.trajectory.len().saturating_sub(1);
        for (k, s) in self.trajectory.iter().enumerate() {
            if k % stride != 0 && k != last {
                continue;
            }
            write!(w, "{:.4}", s.t)?;
            for a in &self.axes {
                write!(w, ",{:.9}", s.pos[a.index()])?;
            }
            for a in &self.axes {
                write!(w, ",{:.9}", s.vel[a.index()])?;
            }
            for a in &self.axes {
                write!(w, ",{:.9}", s.applied[a.index()])?;
            }
            writeln!(w, ",{:.6}", s.energy_j)?;
        }
        Ok(())
    }

    pub fn write_force_csv<W: Write>(&self, mut w: W, header: &[String]) -> io::Result<()> {
        for h in header {
            writeln!(w, "# {h}")?;
        }
        writeln!(w, "t,axis,s,tau,tau_sma,tau_applied")?;
        for r in &self.forces {
            writeln!(
                w,
                "{:.4},{},{:.9},{:.9},{:.9},{:.9}",
                r.t, r.axis, r.s, r.tau, r.tau_sma, r.tau_applied
            )?;
        }
        Ok(())
    }
}

/// Runs the scenario from rest. Axes with gains are actuated and draw
/// motor power; a scenario naming an axis without gains is rejected.
pub fn run_scenario(
    scenario: &Scenario,
    plant: &PlantParams,
    config: &SimConfig,
    power: &PowerModel,
) -> Result<SimLog, SimError> {
    plant.validate()?;
    power.validate()?;
    if config.physics_hz == 0 || config.control_hz == 0 || config.control_hz > config.physics_hz {
        return Err(SimError::Config(
            "need 0 < control_hz <= physics_hz".to_owned(),
        ));
    }
    if scenario.phases.is_empty() {
        return Err(SimError::Config("scenario has no phases".to_owned()));
    }
    if scenario
        .phases
        .iter()
        .any(|p| !(p.duration_s.is_finite() && p.duration_s > 0.0))
    {
        return Err(SimError::Config("phase durations must be positive".to_owned()));
    }
    for axis in scenario.axes() {
        if config.gains.get(axis).is_none() {
            return Err(SimError::Config(format!(
                "scenario drives axis {axis} but no gains are configured for it"
            )));
        }
    }

    let axes: Vec<Axis> = config.gains.axes().collect();
    let mut controllers: Vec<(Axis, AxisController)> = axes
        .iter()
        .map(|&a| {
            let g = config.gains.get(a).expect("configured axis");
            AxisController::new(g, config.damping, config.sma_window_s, config.control_hz as f64)
                .map(|c| (a, c))
        })
        .collect::<Result<_, _>>()?;

    let dt = config.dt();
    let mut state = SimState::default();
    for &a in &axes {
        let p0 = scenario.initial.get(a).unwrap_or(0.0);
        state.pos[a.index()] = p0;
    }
    for (a, c) in controllers.iter_mut() {
        c.set_target(state.pos[a.index()]);
    }

    // step index at which each phase ends
    let mut ends = Vec::with_capacity(scenario.phases.len());
    let mut acc = 0.0;
    for p in &scenario.phases {
        acc += p.duration_s;
        ends.push((acc * config.physics_hz as f64).round() as u64);
    }
    let total_steps = *ends.last().expect("non-empty");

    let mut trajectory = Vec::with_capacity(total_steps as usize + 1);
    trajectory.push(state);
    let mut forces_log = Vec::new();
    let mut forces = [0.0; 4];
    let mut power_w = 0.0;
    let mut phase = usize::MAX;

    for k in 0..total_steps {
        let current = ends.iter().position(|&e| k < e).expect("k below total");
        if current != phase {
            phase = current;
            let p = &scenario.phases[phase];
            for (a, c) in controllers.iter_mut() {
                if let Some(t) = p.targets.get(*a) {
                    c.set_target(t);
                }
                let base = config.gains.get(*a).expect("configured axis");
                c.set_cruise_speed(p.cruise_speeds.get(*a).unwrap_or(base.v_max))?;
            }
        }
        if config.is_tick(k) {
            power_w = power.electronics_w;
            for (a, c) in controllers.iter_mut() {
                let i = a.index();
                let out = c.compute(state.pos[i], state.vel[i])?;
                if !out.tau_applied.is_finite() {
                    return Err(SimError::NonFinite { t: state.t, axis: *a });
                }
                forces[i] = out.tau_applied;
                power_w += power.motor_power(out.tau_applied.abs())?;
                forces_log.push(ForceLogRow {
                    t: state.t,
                    axis: *a,
                    s: out.s,
                    tau: out.tau,
                    tau_sma: out.tau_sma,
                    tau_applied: out.tau_applied,
                });
            }
        }
        let mut next = step_physics(&state, plant, forces, dt)?;
        next.energy_j = state.energy_j + power_w * dt;
        trajectory.push(next);
        state = next;
    }

    let summary = summarize(scenario, config, &axes, &trajectory, &ends);
    Ok(SimLog {
        axes,
        trajectory,
        forces: forces_log,
        summary,
    })
}

fn summarize(
    scenario: &Scenario,
    config: &SimConfig,
    axes: &[Axis],
    trajectory: &[SimState],
    ends: &[u64],
) -> SimSummary {
    let dt = config.dt();
    let last = trajectory.last().copied().unwrap_or_default();
    let mut phases = Vec::new();
    let mut begin = 0usize;
    for (pi, (p, &end)) in scenario.phases.iter().zip(ends).enumerate() {
        let end = end as usize;
        let slice = &trajectory[begin..=end];
        for &a in axes {
            let Some(target) = p.targets.get(a) else {
                continue;
            };
            let i = a.index();
            let start = slice[0].pos[i];
            let step = target - start;

            let tail_steps = ((p.duration_s / 4.0).min(5.0) / dt).round().max(1.0) as usize;
            let tail = &slice[slice.len().saturating_sub(tail_steps)..];
            let mean = tail.iter().map(|s| s.pos[i]).sum::<f64>() / tail.len() as f64;

            let band = (0.02 * step.abs()).max(1e-3);
            let settled_from = slice
                .iter()
                .rposition(|s| (s.pos[i] - target).abs() > band)
                .map_or(Some(0), |j| (j + 1 < slice.len()).then_some(j + 1));

            let peak_speed = slice.iter().map(|s| s.vel[i].abs()).fold(0.0, f64::max);
            let cruise: Vec<f64> = if step.abs() > 1e-9 {
                slice
                    .iter()
                    .filter(|s| {
                        let frac = (s.pos[i] - start) / step;
                        (0.25..=0.75).contains(&frac)
                    })
                    .map(|s| s.vel[i].abs())
                    .collect()
            } else {
                Vec::new()
            };
            phases.push(PhaseMetrics {
                phase: pi,
                axis: a,
                target,
                start,
                final_position: slice[slice.len() - 1].pos[i],
                steady_state_error: (mean - target).abs(),
                settling_time_s: settled_from.map(|j| j as f64 * dt),
                peak_speed,
                cruise_speed: (!cruise.is_empty()).then(|| cruise.iter().sum::<f64>() / cruise.len() as f64),
            });
        }
        begin = end;
    }
    let mut final_position = PerAxis::default();
    for &a in axes {
        final_position.set(a, Some(last.pos[a.index()]));
    }
    SimSummary {
        sma_window_s: config.sma_window_s,
        duration_s: last.t,
        steps: last.step,
        total_energy_j: last.energy_j,
        total_energy_wh: last.energy_j / 3600.0,
        final_position,
        phases,
    }
}

/// Runs independent configurations, one result per entry in input order.
pub fn run_batch(
    scenario: &Scenario,
    plant: &PlantParams,
    configs: &[SimConfig],
    power: &PowerModel,
    exec: Execution,
) -> Vec<Result<SimLog, SimError>> {
    map_collect(configs, exec, |c| run_scenario(scenario, plant, c, power))
}
