//! Grid/bisection search for a spike shape that meets spike-pair targets.
//!
//! Amplitudes are scanned on a fixed grid. For every amplitude pair whose
//! peak can cross `v_tp`, the tail constant is solved by bisection so the
//! over-threshold window at `delta_t` hits the target. Among candidates that
//! keep lone spikes at least `headroom` below both thresholds and stay under
//! the peak bound, the search prefers the largest positive amplitude, then
//! the smallest residual of the truncated tail.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::{
    over_threshold_window, pair_overdrive, PlasticityThresholds, Quadrature, SpikeShape,
    FALL_SLEW_RATE, RISE_SLEW_RATE,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationTargets {
    pub v_tp: f64,
    pub v_tm: f64,
    /// Pair offset the window is measured at, s.
    pub delta_t: f64,
    /// Target over-threshold window, s.
    pub window: f64,
    /// Accepted relative deviation of the window.
    pub window_tolerance: f64,
    /// Upper bound on the pair's peak net potential `v_a_plus + v_a_minus`, V.
    pub peak_max: f64,
    /// Minimum gap between a lone spike's excursion and either threshold, V.
    pub headroom: f64,
    /// Smallest positive amplitude worth considering, V.
    pub v_a_plus_min: f64,
    /// Amplitude grid spacing, V.
    pub amplitude_step: f64,
    pub v_refr: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    pub rise_slew: f64,
    pub fall_slew: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            v_tp: 0.34,
            v_tm: 0.34,
            delta_t: 0.5e-6,
            window: 0.4e-6,
            window_tolerance: 0.2,
            peak_max: 0.4,
            headroom: 0.04,
            v_a_plus_min: 0.05,
            amplitude_step: 0.005,
            v_refr: 0.0,
            t_plus: 0.5e-6,
            t_minus: 2.5e-6,
            rise_slew: RISE_SLEW_RATE,
            fall_slew: FALL_SLEW_RATE,
        }
    }
}

impl CalibrationTargets {
    pub fn thresholds(&self) -> PlasticityThresholds {
        PlasticityThresholds {
            v_tp: self.v_tp,
            v_tm: self.v_tm,
        }
    }

    fn shape(&self, v_a_plus: f64, v_a_minus: f64, tau_decay: f64) -> SpikeShape {
        SpikeShape {
            v_refr: self.v_refr,
            v_a_plus,
            v_a_minus,
            t_plus: self.t_plus,
            t_minus: self.t_minus,
            tau_decay,
            t_rise: v_a_plus / self.rise_slew,
            t_fall: (v_a_plus + v_a_minus) / self.fall_slew,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("v_tp", self.v_tp),
            ("v_tm", self.v_tm),
            ("window", self.window),
            ("window_tolerance", self.window_tolerance),
            ("peak_max", self.peak_max),
            ("amplitude_step", self.amplitude_step),
            ("t_plus", self.t_plus),
            ("rise_slew", self.rise_slew),
            ("fall_slew", self.fall_slew),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(field, "must be finite and > 0"));
            }
        }
        for (field, v) in [
            ("headroom", self.headroom),
            ("v_a_plus_min", self.v_a_plus_min),
            ("t_minus", self.t_minus),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(field, "must be finite and >= 0"));
            }
        }
        if !self.delta_t.is_finite() {
            return Err(Error::param("delta_t", "must be finite"));
        }
        Ok(())
    }
}

/// The constraint that rules out every candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingConstraint {
    /// The window cannot exceed the positive pulse width.
    WindowExceedsPulse,
    /// The window cannot exceed the pair offset.
    WindowExceedsOffset,
    /// No positive amplitude fits below `v_tp - headroom`.
    SubThreshold,
    /// No amplitude pair within the peak bound reaches `v_tp`.
    PeakBound,
    /// Crossing pairs exist but none reaches the window within tolerance.
    WindowUnreachable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Infeasible {
    pub constraint: BindingConstraint,
    pub detail: String,
}

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "infeasible ({:?}): {}", self.constraint, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLog {
    pub v_a_plus: f64,
    pub v_a_minus: f64,
    /// Solved tail constant; `None` when the window is out of reach.
    pub tau_decay: Option<f64>,
    pub window: Option<f64>,
    pub tail_residual: Option<f64>,
    pub accepted: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub targets: CalibrationTargets,
    pub shape: SpikeShape,
    pub window: f64,
    pub peak: f64,
    pub log: Vec<CandidateLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CalibrationOutcome {
    Calibrated(Calibration),
    Infeasible(Infeasible),
}

const BISECTION_STEPS: usize = 80;

/// Smallest and largest tail constants the bisection brackets.
fn tau_bracket(targets: &CalibrationTargets) -> (f64, f64) {
    (1e-12, 20.0 * (targets.t_plus + targets.t_minus))
}

/// Runs the search. Deterministic for identical targets.
pub fn calibrate_shape(targets: &CalibrationTargets, quad: &Quadrature) -> Result<CalibrationOutcome> {
    targets.validate()?;
    quad.validate()?;
    let infeasible = |constraint, detail: String| {
        Ok(CalibrationOutcome::Infeasible(Infeasible { constraint, detail }))
    };

    if targets.window > targets.t_plus {
        return infeasible(
            BindingConstraint::WindowExceedsPulse,
            format!(
                "window {} s exceeds the positive pulse width {} s",
                targets.window, targets.t_plus
            ),
        );
    }
    if targets.window > targets.delta_t.abs() {
        return infeasible(
            BindingConstraint::WindowExceedsOffset,
            format!(
                "window {} s exceeds the pair offset {} s",
                targets.window,
                targets.delta_t.abs()
            ),
        );
    }
    let step = targets.amplitude_step;
    let a_plus_max = targets.v_tp - targets.headroom;
    let a_minus_max = targets.v_tm - targets.headroom;
    if a_plus_max < targets.v_a_plus_min || a_plus_max <= 0.0 {
        return infeasible(
            BindingConstraint::SubThreshold,
            format!(
                "v_tp - headroom = {a_plus_max} V leaves no room above the minimum amplitude {} V",
                targets.v_a_plus_min
            ),
        );
    }

    let thr = targets.thresholds();
    let grid = |lo: f64, hi: f64| -> Vec<f64> {
        let first = (lo / step - 1e-9).ceil().max(1.0) as i64;
        let last = (hi / step + 1e-9).floor() as i64;
        (first..=last).map(|i| i as f64 * step).collect()
    };

    let mut log = Vec::new();
    let mut any_crossing = false;
    // Descending positive amplitude: the first level with a feasible
    // candidate wins.
    for &a_plus in grid(targets.v_a_plus_min, a_plus_max).iter().rev() {
        let mut best: Option<(f64, f64, f64, f64)> = None;
        for &a_minus in &grid(step, a_minus_max.min(targets.peak_max - a_plus)) {
            if a_plus + a_minus <= targets.v_tp {
                continue;
            }
            any_crossing = true;
            let window_at = |tau: f64| -> Result<f64> {
                over_threshold_window(&targets.shape(a_plus, a_minus, tau), &thr, targets.delta_t, quad)
            };
            let (mut lo, mut hi) = tau_bracket(targets);
            let w_hi = window_at(hi)?;
            if w_hi < targets.window {
                let ok = (w_hi - targets.window).abs() <= targets.window_tolerance * targets.window;
                let residual = a_minus * (-targets.t_minus / hi).exp();
                log.push(CandidateLog {
                    v_a_plus: a_plus,
                    v_a_minus: a_minus,
                    tau_decay: ok.then_some(hi),
                    window: Some(w_hi),
                    tail_residual: ok.then_some(residual),
                    accepted: false,
                    note: format!("window saturates at {w_hi} s"),
                });
                if ok && best.is_none_or(|b| residual < b.3) {
                    best = Some((a_minus, hi, w_hi, residual));
                }
                continue;
            }
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if window_at(mid)? < targets.window {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = hi;
            let w = window_at(tau)?;
            let residual = a_minus * (-targets.t_minus / tau).exp();
            log.push(CandidateLog {
                v_a_plus: a_plus,
                v_a_minus: a_minus,
                tau_decay: Some(tau),
                window: Some(w),
                tail_residual: Some(residual),
                accepted: false,
                note: String::new(),
            });
            if best.is_none_or(|b| residual < b.3) {
                best = Some((a_minus, tau, w, residual));
            }
        }
        if let Some((a_minus, tau, window, _)) = best {
            for entry in log.iter_mut() {
                if entry.v_a_plus == a_plus && entry.v_a_minus == a_minus {
                    entry.accepted = true;
                }
            }
            let shape = targets.shape(a_plus, a_minus, tau);
            let peak = pair_overdrive(&shape, &thr, targets.delta_t, quad)?.peak;
            return Ok(CalibrationOutcome::Calibrated(Calibration {
                targets: *targets,
                shape,
                window,
                peak,
                log,
            }));
        }
    }
    if !any_crossing {
        return infeasible(
            BindingConstraint::PeakBound,
            format!(
                "no amplitude pair within peak bound {} V and headroom {} V exceeds v_tp = {} V",
                targets.peak_max, targets.headroom, targets.v_tp
            ),
        );
    }
    infeasible(
        BindingConstraint::WindowUnreachable,
        format!(
            "no crossing candidate reaches a {} s window within {}%",
            targets.window,
            targets.window_tolerance * 100.0
        ),
    )
}
