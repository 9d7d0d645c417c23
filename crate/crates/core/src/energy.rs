//! Mission energy budget versus cruise speed.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::{map_collect, Execution};

/// Standard gravity, m/s^2.
pub const GRAVITY: f64 = 9.80665;

/// Bisection stops once the bracket is narrower than this, m/s.
const SPEED_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("thrust must be non-negative, got {0} N")]
    NegativeThrust(f64),
    #[error("cruise speed must be positive and finite, got {0} m/s")]
    BadSpeed(f64),
    #[error("invalid power model: {0}")]
    Model(&'static str),
    #[error("speed grid must be non-empty, positive and strictly increasing")]
    BadGrid,
}

/// Electrical power of one motor as a quadratic in thrust.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorRegression {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for MotorRegression {
    fn default() -> Self {
        Self {
            a: 3.347,
            b: 25.857,
            c: 1.69,
        }
    }
}

impl MotorRegression {
    /// Watts for `thrust` newtons; never below the idle draw `c`.
    pub fn power(&self, thrust: f64) -> Result<f64, EnergyError> {
        if !(thrust >= 0.0) {
            return Err(EnergyError::NegativeThrust(thrust));
        }
        Ok((self.a * thrust * thrust + self.b * thrust + self.c).max(self.c))
    }
}

/// How the forward drag thrust is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardBookkeeping {
    /// One evaluation of the regression on the whole drag force.
    #[default]
    Combined,
    /// Two forward motors, each carrying half the drag.
    SplitWithIdle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModel {
    pub motor: MotorRegression,
    pub electronics_w: f64,
    pub hover_thrust_n: f64,
    pub battery_wh: f64,
    pub mission_distance_m: f64,
    pub drag_coefficient: f64,
    pub rho_air_kg_m3: f64,
    pub reference_area_m2: f64,
    pub forward: ForwardBookkeeping,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            motor: MotorRegression::default(),
            electronics_w: 4.515,
            hover_thrust_n: 0.02 * GRAVITY,
            battery_wh: 14.8,
            mission_distance_m: 300.0,
            drag_coefficient: 1.2,
            rho_air_kg_m3: 1.231,
            reference_area_m2: 0.41,
            forward: ForwardBookkeeping::Combined,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<(), EnergyError> {
        let finite = [
            self.motor.a,
            self.motor.b,
            self.motor.c,
            self.electronics_w,
            self.hover_thrust_n,
            self.battery_wh,
            self.mission_distance_m,
            self.drag_coefficient,
            self.rho_air_kg_m3,
            self.reference_area_m2,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(EnergyError::Model("all values must be finite"));
        }
        if self.battery_wh < 0.0 {
            return Err(EnergyError::Model("battery_wh must be non-negative"));
        }
        if self.mission_distance_m <= 0.0 {
            return Err(EnergyError::Model("mission_distance_m must be positive"));
        }
        if self.electronics_w < 0.0 || self.hover_thrust_n < 0.0 {
            return Err(EnergyError::Model("electronics_w and hover_thrust_n must be non-negative"));
        }
        if self.drag_coefficient < 0.0 || self.rho_air_kg_m3 < 0.0 || self.reference_area_m2 < 0.0 {
            return Err(EnergyError::Model("drag terms must be non-negative"));
        }
        Ok(())
    }

    pub fn motor_power(&self, thrust: f64) -> Result<f64, EnergyError> {
        self.motor.power(thrust)
    }

    pub fn drag(&self, v: f64) -> f64 {
        drag_force(v, self.drag_coefficient, self.rho_air_kg_m3, self.reference_area_m2)
    }

    /// Forward propulsion power at cruise speed `v`, W.
    pub fn forward_power(&self, v: f64) -> Result<f64, EnergyError> {
        let fd = self.drag(v);
        match self.forward {
            ForwardBookkeeping::Combined => self.motor_power(fd),
            ForwardBookkeeping::SplitWithIdle => Ok(2.0 * self.motor_power(fd / 2.0)?),
        }
    }
}

/// Quadratic drag `0.5 C_D rho v^2 A`, N.
pub fn drag_force(v: f64, drag_coefficient: f64, rho: f64, area: f64) -> f64 {
    0.5 * drag_coefficient * rho * v * v * area
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MissionEnergy {
    pub v_m_s: f64,
    pub duration_min: f64,
    pub power_w: f64,
    pub energy_wh: f64,
    pub feasible: bool,
}

pub fn mission_energy(v: f64, model: &PowerModel) -> Result<MissionEnergy, EnergyError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(EnergyError::BadSpeed(v));
    }
    let hover = model.motor_power(model.hover_thrust_n)?;
    let power_w = model.electronics_w + hover + model.forward_power(v)?;
    let duration_s = model.mission_distance_m / v;
    let energy_wh = power_w * duration_s / 3600.0;
    Ok(MissionEnergy {
        v_m_s: v,
        duration_min: duration_s / 60.0,
        power_w,
        energy_wh,
        feasible: energy_wh <= model.battery_wh,
    })
}

/// Speed where the energy curve meets the battery line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub v_m_s: f64,
    pub duration_min: f64,
    /// `true` when the curve enters the feasible region with rising speed.
    pub entering: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCurve {
    pub points: Vec<MissionEnergy>,
    pub crossings: Vec<Crossing>,
    /// Lowest feasible speed on the grid span, refined by bisection.
    pub min_feasible_speed: Option<Crossing>,
    /// Grid point with the least energy.
    pub optimum: Option<MissionEnergy>,
}

impl EnergyCurve {
    pub fn write_csv<W: Write>(&self, mut w: W, header: &[String]) -> io::Result<()> {
        for h in header {
            writeln!(w, "# {h}")?;
        }
        writeln!(w, "v_m_s,energy_wh,duration_min,power_w,feasible")?;
        for p in &self.points {
            writeln!(
                w,
                "{:.6},{:.6},{:.4},{:.6},{}",
                p.v_m_s, p.energy_wh, p.duration_min, p.power_w, p.feasible
            )?;
        }
        Ok(())
    }
}

/// Evenly spaced speeds `start, start + step, ..` up to `stop` inclusive.
pub fn speed_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return vec![start];
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + i as f64 * step).collect()
}

pub fn energy_curve(grid: &[f64], model: &PowerModel, exec: Execution) -> Result<EnergyCurve, EnergyError> {
    model.validate()?;
    if grid.is_empty()
        || grid.iter().any(|v| !(v.is_finite() && *v > 0.0))
        || grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(EnergyError::BadGrid);
    }
    let points = map_collect(grid, exec, |&v| mission_energy(v, model))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let mut crossings = Vec::new();
    for pair in points.windows(2) {
        if pair[0].feasible != pair[1].feasible {
            let v = bisect_battery(model, pair[0].v_m_s, pair[1].v_m_s)?;
            crossings.push(Crossing {
                v_m_s: v,
                duration_min: model.mission_distance_m / v / 60.0,
                entering: pair[1].feasible,
            });
        }
    }
    let min_feasible_speed = match points.first() {
        Some(p) if p.feasible => Some(Crossing {
            v_m_s: p.v_m_s,
            duration_min: p.duration_min,
            entering: false,
        }),
        _ => crossings.iter().find(|c| c.entering).copied(),
    };
    let optimum = points
        .iter()
        .copied()
        .min_by(|a, b| a.energy_wh.total_cmp(&b.energy_wh));
    Ok(EnergyCurve {
        points,
        crossings,
        min_feasible_speed,
        optimum,
    })
}

/// Root of `energy(v) - battery` inside a bracket with a sign change.
fn bisect_battery(model: &PowerModel, mut lo: f64, mut hi: f64) -> Result<f64, EnergyError> {
    let excess = |v: f64| mission_energy(v, model).map(|e| e.energy_wh - model.battery_wh);
    let lo_positive = excess(lo)? > 0.0;
    while hi - lo > SPEED_TOL {
        let mid = 0.5 * (lo + hi);
        if (excess(mid)? > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySummary {
    pub forward: ForwardBookkeeping,
    pub battery_wh: f64,
    pub mission_distance_m: f64,
    pub hover_power_w: f64,
    pub grid_points: usize,
    pub min_feasible_speed_m_s: Option<f64>,
    pub duration_at_min_speed_min: Option<f64>,
    pub optimum_speed_m_s: Option<f64>,
    pub optimum_energy_wh: Option<f64>,
    pub crossings: Vec<Crossing>,
}

pub fn summarize(curve: &EnergyCurve, model: &PowerModel) -> Result<EnergySummary, EnergyError> {
    Ok(EnergySummary {
        forward: model.forward,
        battery_wh: model.battery_wh,
        mission_distance_m: model.mission_distance_m,
        hover_power_w: model.motor_power(model.hover_thrust_n)?,
        grid_points: curve.points.len(),
        min_feasible_speed_m_s: curve.min_feasible_speed.map(|c| c.v_m_s),
        duration_at_min_speed_min: curve.min_feasible_speed.map(|c| c.duration_min),
        optimum_speed_m_s: curve.optimum.map(|p| p.v_m_s),
        optimum_energy_wh: curve.optimum.map(|p| p.energy_wh),
        crossings: curve.crossings.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hover_power() {
        let m = PowerModel::default();
        let p = m.motor_power(0.196).unwrap();
        assert!((p - 6.9).abs() < 0.05, "{p}");
        assert_eq!(m.motor_power(0.0).unwrap(), 1.69);
        assert!(m.motor_power(-0.1).is_err());
    }

    #[test]
    fn power_increasing() {
        let m = MotorRegression::default();
        let mut last = m.power(0.0).unwrap();
        for i in 1..=2000 {
            let p = m.power(i as f64 * 1e-3).unwrap();
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn drag_examples() {
        assert_eq!(drag_force(0.0, 1.2, 1.231, 0.41), 0.0);
        assert!((drag_force(0.15, 1.2, 1.231, 0.41) - 0.00681).abs() < 1e-5);
        let r = drag_force(0.3, 1.2, 1.231, 0.41) / drag_force(0.15, 1.2, 1.231, 0.41);
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cruise_energy_both_modes() {
        let combined = mission_energy(0.15, &PowerModel::default()).unwrap();
        assert!((combined.duration_min - 33.333).abs() < 1e-2);
        assert!((combined.energy_wh - 7.373).abs() < 5e-3, "{}", combined.energy_wh);
        assert!(combined.feasible);
        let split = PowerModel {
            forward: ForwardBookkeeping::SplitWithIdle,
            ..PowerModel::default()
        };
        let e = mission_energy(0.15, &split).unwrap();
        assert!((e.energy_wh - 8.31).abs() < 0.01, "{}", e.energy_wh);
    }

    #[test]
    fn single_point_grid() {
        let c = energy_curve(&[0.2], &PowerModel::default(), Execution::Sequential).unwrap();
        assert_eq!(c.points.len(), 1);
        assert!(c.crossings.is_empty());
    }

    #[test]
    fn no_battery_nothing_feasible() {
        let m = PowerModel {
            battery_wh: 0.0,
            ..PowerModel::default()
        };
        let c = energy_curve(&speed_grid(0.01, 2.0, 0.01), &m, Execution::Sequential).unwrap();
        assert!(c.points.iter().all(|p| !p.feasible));
        assert!(c.min_feasible_speed.is_none());
    }

    #[test]
    fn bad_grids_rejected() {
        let m = PowerModel::default();
        assert!(energy_curve(&[], &m, Execution::Sequential).is_err());
        assert!(energy_curve(&[0.2, 0.1], &m, Execution::Sequential).is_err());
        assert!(energy_curve(&[0.0, 0.1], &m, Execution::Sequential).is_err());
    }
}
