//! Dual-mode leaky integrate-and-fire neuron.
//!
//! In integration mode the opamp is an inverting leaky integrator: current
//! injected into the summing node pulls `v_mem` down from `v_refr`, and both
//! ports sit at `v_refr`. Once `v_mem` reaches `v_thr` (below `v_refr`) the
//! neuron switches to firing mode for exactly one spike duration. While
//! firing, both ports carry the spike waveform, the membrane capacitor is
//! held at `v_refr`, and any incoming current is discarded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::SpikeShape;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuronParams {
    pub c_mem: f64,
    pub r_leaky: f64,
    pub v_thr: f64,
    pub v_refr: f64,
    pub hysteresis: f64,
    pub shape: SpikeShape,
}

impl Default for NeuronParams {
    fn default() -> Self {
        NeuronParams {
            c_mem: 10e-12,
            r_leaky: 10e6,
            v_thr: -0.1,
            v_refr: 0.0,
            hysteresis: 0.0,
            shape: SpikeShape::default(),
        }
    }
}

impl NeuronParams {
    /// Leak time constant `r_leaky * c_mem`.
    pub fn tau_m(&self) -> f64 {
        self.r_leaky * self.c_mem
    }

    /// Checks parameter ranges; with `dt` also requires `tau_m > dt`.
    pub fn validate(&self, dt: Option<f64>) -> Result<()> {
        if !(self.c_mem > 0.0 && self.c_mem.is_finite()) {
            return Err(Error::param("c_mem", "must be finite and > 0"));
        }
        // r_leaky may be infinite: an ideal integrator without leak.
        if !(self.r_leaky > 0.0) {
            return Err(Error::param("r_leaky", "must be > 0"));
        }
        if !(self.v_thr.is_finite() && self.v_refr.is_finite()) {
            return Err(Error::param("v_thr", "thresholds must be finite"));
        }
        if !(self.v_refr - self.v_thr > 0.0) {
            return Err(Error::param(
                "v_thr",
                format!(
                    "must lie below v_refr ({} >= {}); the integrator fires on a downward crossing",
                    self.v_thr, self.v_refr
                ),
            ));
        }
        if !(self.hysteresis >= 0.0 && self.hysteresis.is_finite()) {
            return Err(Error::param("hysteresis", "must be finite and >= 0"));
        }
        if self.shape.v_refr != self.v_refr {
            return Err(Error::param(
                "shape.v_refr",
                format!("{} differs from neuron v_refr {}", self.shape.v_refr, self.v_refr),
            ));
        }
        self.shape.validate()?;
        if let Some(dt) = dt {
            if !(self.tau_m() > dt) {
                return Err(Error::param(
                    "r_leaky",
                    format!("leak time constant {} must exceed dt {dt}", self.tau_m()),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Integration,
    Firing,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Integration => "integration",
            Mode::Firing => "firing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FireDecision {
    Stay,
    Fire,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    pub mode: Mode,
    pub v_mem: f64,
    /// Onset of the current firing phase; meaningful only in firing mode.
    pub t_fire_onset: f64,
    /// Comparator armed. Cleared by a fire, set again once `v_mem` climbs
    /// back to `v_thr + hysteresis`.
    pub armed: bool,
}

impl NeuronState {
    pub fn resting(params: &NeuronParams) -> Self {
        NeuronState {
            mode: Mode::Integration,
            v_mem: params.v_refr,
            t_fire_onset: 0.0,
            armed: true,
        }
    }

    /// One exponential-Euler step of
    /// `dv/dt = -i_in / c_mem - (v - v_refr) / (r_leaky c_mem)`,
    /// exact for current held constant over the step.
    pub fn integrate_step(&mut self, params: &NeuronParams, i_in: f64, dt: f64) -> Result<()> {
        if self.mode != Mode::Integration {
            return Err(Error::Contract(
                "integrate_step called while firing".to_string(),
            ));
        }
        if params.r_leaky.is_infinite() {
            self.v_mem -= i_in * dt / params.c_mem;
        } else {
            let target = params.v_refr - i_in * params.r_leaky;
            let blend = -(-dt / params.tau_m()).exp_m1();
            self.v_mem += (target - self.v_mem) * blend;
        }
        if !self.armed && self.v_mem >= params.v_thr + params.hysteresis {
            self.armed = true;
        }
        Ok(())
    }

    /// Fires on `v_mem <= v_thr` (inclusive) when armed.
    pub fn check_fire(&self, params: &NeuronParams) -> FireDecision {
        if self.mode == Mode::Integration && self.armed && self.v_mem <= params.v_thr {
            FireDecision::Fire
        } else {
            FireDecision::Stay
        }
    }

    pub fn begin_fire(&mut self, params: &NeuronParams, t_now: f64) -> Result<()> {
        if self.check_fire(params) != FireDecision::Fire {
            return Err(Error::Contract(format!(
                "begin_fire at t = {t_now} without a threshold crossing (mode {}, v_mem {})",
                self.mode.as_str(),
                self.v_mem
            )));
        }
        self.enter_firing(params, t_now);
        Ok(())
    }

    /// Starts a firing phase on external command, bypassing the comparator.
    pub fn force_fire(&mut self, params: &NeuronParams, t_now: f64) -> Result<()> {
        if self.mode != Mode::Integration {
            return Err(Error::Contract(format!(
                "force_fire at t = {t_now} while already firing"
            )));
        }
        self.enter_firing(params, t_now);
        Ok(())
    }

    fn enter_firing(&mut self, params: &NeuronParams, t_now: f64) {
        self.mode = Mode::Firing;
        self.v_mem = params.v_refr;
        self.t_fire_onset = t_now;
        self.armed = false;
    }

    /// True once the spike started at `t_fire_onset` has run its full length.
    pub fn fire_elapsed(&self, params: &NeuronParams, t_now: f64) -> bool {
        let duration = params.shape.duration();
        self.mode == Mode::Firing && t_now - self.t_fire_onset >= duration * (1.0 - 1e-9)
    }

    pub fn end_fire(&mut self, params: &NeuronParams, t_now: f64) -> Result<()> {
        if !self.fire_elapsed(params, t_now) {
            return Err(Error::Contract(format!(
                "end_fire at t = {t_now} before the spike started at {} has elapsed",
                self.t_fire_onset
            )));
        }
        self.mode = Mode::Integration;
        self.v_mem = params.v_refr;
        self.armed = self.v_mem >= params.v_thr + params.hysteresis;
        Ok(())
    }

    /// Voltage this neuron presents to every attached synapse, on both the
    /// input and output port.
    pub fn port_voltage(&self, params: &NeuronParams, t_now: f64) -> f64 {
        match self.mode {
            Mode::Integration => params.v_refr,
            Mode::Firing => params.shape.voltage(t_now - self.t_fire_onset),
        }
    }
}
