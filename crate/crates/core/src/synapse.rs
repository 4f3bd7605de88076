//! Two-terminal resistive synapse: conductance-weighted current and
//! threshold-gated plasticity driven by the instantaneous net potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::{pair_overdrive, PlasticityThresholds, Quadrature, SpikeShape};

/// Default potentiation/depression rate, S/(V·s).
pub const DEFAULT_RATE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynapseParams {
    pub g_min: f64,
    pub g_max: f64,
    pub thr: PlasticityThresholds,
    pub eta_p: f64,
    pub eta_d: f64,
}

impl Default for SynapseParams {
    fn default() -> Self {
        SynapseParams {
            g_min: 1e-9,
            g_max: 1e-4,
            thr: PlasticityThresholds::default(),
            eta_p: DEFAULT_RATE,
            eta_d: DEFAULT_RATE,
        }
    }
}

impl SynapseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_min > 0.0 && self.g_min.is_finite()) {
            return Err(Error::param("g_min", "must be finite and > 0"));
        }
        if !(self.g_max >= self.g_min && self.g_max.is_finite()) {
            return Err(Error::param("g_max", "must be finite and >= g_min"));
        }
        for (field, v) in [
            ("thr.v_tp", self.thr.v_tp),
            ("thr.v_tm", self.thr.v_tm),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(field, "must be finite and > 0"));
            }
        }
        for (field, v) in [("eta_p", self.eta_p), ("eta_d", self.eta_d)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(field, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// Instantaneous `dg/dt` for net potential `v_net`. Exactly zero inside
    /// the dead zone `[-v_tm, v_tp]`.
    pub fn conductance_rate(&self, v_net: f64) -> f64 {
        if v_net > self.thr.v_tp {
            self.eta_p * (v_net - self.thr.v_tp)
        } else if v_net < -self.thr.v_tm {
            -self.eta_d * (-v_net - self.thr.v_tm)
        } else {
            0.0
        }
    }
}

/// Conductance of one synapse plus the neuron indices it connects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynapseState {
    pub g: f64,
    pub pre: usize,
    pub post: usize,
}

impl SynapseState {
    pub fn resistance(&self) -> f64 {
        1.0 / self.g
    }

    /// Advances the conductance by one step of length `dt` under `v_net`
    /// (`v_post_port - v_pre_port`), clamped to `[g_min, g_max]`.
    pub fn apply_plasticity_step(&mut self, params: &SynapseParams, v_net: f64, dt: f64) {
        let rate = params.conductance_rate(v_net);
        if rate != 0.0 {
            self.g = (self.g + rate * dt).clamp(params.g_min, params.g_max);
        }
    }
}

/// Current through the device; positive flows into the post-synaptic side.
pub fn synapse_current(g: f64, v_pre_port: f64, v_post_port: f64) -> f64 {
    g * (v_pre_port - v_post_port)
}

/// Unclamped conductance change produced by one spike pair offset by
/// `delta_t` (post onset minus pre onset).
pub fn pair_weight_change(
    params: &SynapseParams,
    shape: &SpikeShape,
    delta_t: f64,
    quad: &Quadrature,
) -> Result<f64> {
    params.validate()?;
    let o = pair_overdrive(shape, &params.thr, delta_t, quad)?;
    Ok(params.eta_p * o.pot - params.eta_d * o.dep)
}
