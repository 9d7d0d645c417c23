//! Saturated sliding-mode axis controller with a sliding-moving-average
//! correction of the applied force.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Steps between exact recomputations of the running SMA sum.
const SMA_REFRESH_STEPS: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("invalid gains: {0}")]
    Gains(&'static str),
    #[error("invalid SMA window {0} s")]
    Window(f64),
    #[error("non-finite measurement (pos {pos}, vel {vel})")]
    NonFinite { pos: f64, vel: f64 },
}

/// Per-axis limits. Units are N, m/s and m for translations and N m,
/// rad/s and rad for yaw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisGains {
    pub force_max: f64,
    pub v_max: f64,
    pub tol: f64,
}

impl AxisGains {
    pub fn new(force_max: f64, v_max: f64, tol: f64) -> Result<Self, ControllerError> {
        let g = Self {
            force_max,
            v_max,
            tol,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.force_max) {
            return Err(ControllerError::Gains("force_max must be positive"));
        }
        if !pos(self.v_max) {
            return Err(ControllerError::Gains("v_max must be positive"));
        }
        if !pos(self.tol) {
            return Err(ControllerError::Gains("tol must be positive"));
        }
        Ok(())
    }

    /// Surface slope, 1/s.
    pub fn xi(&self) -> f64 {
        self.force_max / self.v_max
    }
}

/// Extra velocity damping on top of the saturated term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingMode {
    /// `- xi * vel`
    #[default]
    Velocity,
    None,
}

/// `s = xi * err + err_rate` with `err = pos - target`.
pub fn sliding_surface(err: f64, err_rate: f64, xi: f64) -> f64 {
    xi * err + err_rate
}

pub fn saturate(u: f64) -> f64 {
    u.clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlOutput {
    pub s: f64,
    /// Uncorrected law.
    pub tau: f64,
    pub tau_sma: f64,
    /// Clamped force sent to the actuator.
    pub tau_applied: f64,
}

/// Mean of the last `window` samples, kept as a running sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingAverage {
    window: usize,
    buffer: VecDeque<f64>,
    sum: f64,
    pushes: u64,
}

impl SlidingAverage {
    pub fn new(window: usize) -> Self {
        Self {
            window,
            buffer: VecDeque::with_capacity(window),
            sum: 0.0,
            pushes: 0,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Mean of the stored samples (fewer than `window` while filling), 0
    /// when empty.
    pub fn mean(&self) -> f64 {
        if self.buffer.is_empty() {
            0.0
        } else {
            self.sum / self.buffer.len() as f64
        }
    }

    /// No-op for a zero window.
    pub fn push(&mut self, value: f64) {
        if self.window == 0 {
            return;
        }
        if self.buffer.len() == self.window {
            if let Some(old) = self.buffer.pop_front() {
                self.sum -= old;
            }
        }
        self.buffer.push_back(value);
        self.sum += value;
        self.pushes += 1;
        if self.pushes.is_multiple_of(SMA_REFRESH_STEPS) {
            self.sum = self.buffer.iter().sum();
        }
    }

    pub fn clear(&mut self) {
        self.buffer.clear();
        self.sum = 0.0;
        self.pushes = 0;
    }
}

#[derive(Debug, Clone)]
pub struct AxisController {
    gains: AxisGains,
    damping: DampingMode,
    target: f64,
    sma: SlidingAverage,
    last_tau: f64,
}

impl AxisController {
    /// `window_s` is converted to a sample count at `control_rate_hz`.
    pub fn new(
        gains: AxisGains,
        damping: DampingMode,
        window_s: f64,
        control_rate_hz: f64,
    ) -> Result<Self, ControllerError> {
        gains.validate()?;
        if !(window_s.is_finite() && window_s >= 0.0) || !(control_rate_hz > 0.0) {
            return Err(ControllerError::Window(window_s));
        }
        let window = (window_s * control_rate_hz).round() as usize;
        Ok(Self {
            gains,
            damping,
            target: 0.0,
            sma: SlidingAverage::new(window),
            last_tau: 0.0,
        })
    }

    pub fn gains(&self) -> &AxisGains {
        &self.gains
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn window_len(&self) -> usize {
        self.sma.window()
    }

    pub fn last_tau(&self) -> f64 {
        self.last_tau
    }

    pub fn set_target(&mut self, target: f64) {
        self.target = target;
    }

    /// Changes `v_max` (and with it `xi`) for the next segment.
    pub fn set_cruise_speed(&mut self, v_max: f64) -> Result<(), ControllerError> {
        let g = AxisGains::new(self.gains.force_max, v_max, self.gains.tol)?;
        self.gains = g;
        Ok(())
    }

    /// Clears the SMA history; the next call behaves like the first one.
    pub fn reset(&mut self) {
        self.sma.clear();
        self.last_tau = 0.0;
    }

    /// Mean of the stored applied forces.
    pub fn sma(&self) -> f64 {
        self.sma.mean()
    }

    pub fn compute(&mut self, pos: f64, vel: f64) -> Result<ControlOutput, ControllerError> {
        if !(pos.is_finite() && vel.is_finite()) {
            return Err(ControllerError::NonFinite { pos, vel });
        }
        let xi = self.gains.xi();
        let f = self.gains.force_max;
        let s = sliding_surface(pos - self.target, vel, xi);
        let mut tau = -f * saturate(s / (xi * self.gains.tol));
        if self.damping == DampingMode::Velocity {
            tau -= xi * vel;
        }
        let tau_sma = self.sma();
        let tau_applied = (tau + tau_sma).clamp(-f, f);
        self.sma.push(tau_applied);
        self.last_tau = tau_applied;
        Ok(ControlOutput {
            s,
            tau,
            tau_sma,
            tau_applied,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gains() -> AxisGains {
        AxisGains::new(1.25, 0.15, 0.1).unwrap()
    }

    #[test]
    fn surface_examples() {
        assert_eq!(sliding_surface(0.0, 0.0, 3.0), 0.0);
        let xi = gains().xi();
        assert!((sliding_surface(1.0, 0.0, xi) - 8.3333).abs() < 1e-3);
        assert_eq!(sliding_surface(0.4, -xi * 0.4, xi), 0.0);
    }

    #[test]
    fn saturation_branches() {
        assert_eq!(saturate(0.5), 0.5);
        assert_eq!(saturate(7.0), 1.0);
        assert_eq!(saturate(-7.0), -1.0);
        assert_eq!(saturate(1.0), 1.0);
        assert_eq!(saturate(-1.0), -1.0);
    }

    #[test]
    fn at_rest_on_target() {
        let mut c = AxisController::new(gains(), DampingMode::Velocity, 1.0, 40.0).unwrap();
        c.set_target(2.0);
        assert_eq!(c.compute(2.0, 0.0).unwrap().tau_applied, 0.0);
    }

    #[test]
    fn far_below_target_pushes_full_force() {
        let mut c = AxisController::new(gains(), DampingMode::Velocity, 0.0, 40.0).unwrap();
        c.set_target(1.0);
        assert_eq!(c.compute(0.0, 0.0).unwrap().tau_applied, 1.25);
    }

    #[test]
    fn window_length_rounds() {
        let c = AxisController::new(gains(), DampingMode::Velocity, 1.0, 40.0).unwrap();
        assert_eq!(c.window_len(), 40);
        let c = AxisController::new(gains(), DampingMode::Velocity, 0.26, 40.0).unwrap();
        assert_eq!(c.window_len(), 10);
    }

    #[test]
    fn reset_reproduces_first_call() {
        let mut c = AxisController::new(gains(), DampingMode::Velocity, 0.5, 40.0).unwrap();
        c.set_target(1.0);
        let first = c.compute(0.3, 0.02).unwrap();
        for _ in 0..50 {
            c.compute(0.5, 0.01).unwrap();
        }
        c.reset();
        assert_eq!(c.compute(0.3, 0.02).unwrap(), first);
    }

    #[test]
    fn average_of_constant() {
        let mut a = SlidingAverage::new(40);
        for _ in 0..40 {
            a.push(0.37);
        }
        assert!((a.mean() - 0.37).abs() < 1e-15);
        let mut z = SlidingAverage::new(0);
        z.push(1.0);
        assert!(z.is_empty());
        assert_eq!(z.mean(), 0.0);
    }

    #[test]
    fn partial_fill_mean() {
        let mut a = SlidingAverage::new(4);
        a.push(1.0);
        a.push(3.0);
        assert_eq!(a.mean(), 2.0);
        for v in [5.0, 7.0, 9.0] {
            a.push(v);
        }
        assert_eq!(a.mean(), 6.0);
    }

    #[test]
    fn nan_rejected() {
        let mut c = AxisController::new(gains(), DampingMode::Velocity, 0.0, 40.0).unwrap();
        assert!(c.compute(f64::NAN, 0.0).is_err());
        assert!(c.compute(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn running_sum_survives_refresh() {
        let mut c = AxisController::new(gains(), DampingMode::Velocity, 0.25, 40.0).unwrap();
        c.set_target(0.5);
        for k in 0..25_000 {
            c.compute((k as f64 * 0.01).sin(), 0.0).unwrap();
        }
        let exact: f64 = c.sma.buffer.iter().sum::<f64>() / c.sma.len() as f64;
        assert!((c.sma() - exact).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn applied_force_bounded(
            f in 0.01f64..10.0, v in 0.01f64..5.0, tol in 0.001f64..1.0, w in 0.0f64..3.0,
            steps in proptest::collection::vec((-100f64..100.0, -50f64..50.0), 1..200),
        ) {
            let g = AxisGains::new(f, v, tol).unwrap();
            let mut c = AxisController::new(g, DampingMode::Velocity, w, 40.0).unwrap();
            for (p, vel) in steps {
                let out = c.compute(p, vel).unwrap();
                prop_assert!(out.tau_applied.abs() <= f);
            }
        }

        #[test]
        fn zero_window_is_plain_law(p in -5f64..5.0, vel in -2f64..2.0, target in -5f64..5.0) {
            let g = gains();
            let mut c = AxisController::new(g, DampingMode::Velocity, 0.0, 40.0).unwrap();
            c.set_target(target);
            for _ in 0..3 {
                c.compute(p + 0.1, vel).unwrap();
            }
            let out = c.compute(p, vel).unwrap();
            let s = g.xi() * (p - target) + vel;
            let plain = (-g.force_max * saturate(s / (g.xi() * g.tol)) - g.xi() * vel)
                .clamp(-g.force_max, g.force_max);
            prop_assert_eq!(out.tau_sma, 0.0);
            prop_assert_eq!(out.tau_applied, plain);
        }
    }
}
