//! The single JSON configuration document shared by every command, plus
//! `key.path=value` overrides.
//!
//! All quantities are SI (volts, seconds, ohms, siemens, farads, amperes).
//! Every section is optional; omitted fields take their defaults.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::{Network, NeuronSpec, SimConfig, Stimulus, SynapseSpec};
use crate::error::{Error, Result};
use crate::neuron::NeuronParams;
use crate::scenarios::{CalibrationTargets, PavlovConfig, StdpSweep};
use crate::synapse::{SynapseParams, DEFAULT_RATE};
use crate::waveform::{validate_shape, PlasticityThresholds, Quadrature, SpikeShape};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuronSection {
    pub c_mem: f64,
    pub r_leaky: f64,
    pub v_thr: f64,
    pub hysteresis: f64,
}

impl Default for NeuronSection {
    fn default() -> Self {
        let p = NeuronParams::default();
        NeuronSection {
            c_mem: p.c_mem,
            r_leaky: p.r_leaky,
            v_thr: p.v_thr,
            hysteresis: p.hysteresis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynapseSection {
    pub g_min: f64,
    pub g_max: f64,
    pub eta_p: f64,
    pub eta_d: f64,
}

impl Default for SynapseSection {
    fn default() -> Self {
        let p = SynapseParams::default();
        SynapseSection {
            g_min: p.g_min,
            g_max: p.g_max,
            eta_p: DEFAULT_RATE,
            eta_d: DEFAULT_RATE,
        }
    }
}

/// Sampling of the `waveform` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformSection {
    pub t_start: f64,
    pub t_stop: f64,
    pub t_step: f64,
    /// Offset of the spike pair written alongside the single spike.
    pub pair_delta_t: f64,
}

impl Default for WaveformSection {
    fn default() -> Self {
        WaveformSection {
            t_start: -0.5e-6,
            t_stop: 4e-6,
            t_step: 1e-9,
            pair_delta_t: 0.5e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PavlovSection {
    pub r1_init: f64,
    pub r2_init: f64,
    pub first_onset: f64,
    pub interval: f64,
    pub max_trials: u32,
}

impl Default for PavlovSection {
    fn default() -> Self {
        let p = PavlovConfig::default();
        PavlovSection {
            r1_init: p.r1_init,
            r2_init: p.r2_init,
            first_onset: p.first_onset,
            interval: p.interval,
            max_trials: p.max_trials,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub r_load: f64,
    pub n_synapses: u64,
}

impl Default for EnergySection {
    fn default() -> Self {
        EnergySection {
            r_load: 1e6,
            n_synapses: 1000,
        }
    }
}

/// Network as written in JSON: per-element parameters may be omitted and
/// then come from the document's `shape`/`neuron`/`thresholds`/`synapse`
/// sections. Synapse weights are given as `g_init` (S) or `r_init` (Ω).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub neurons: Vec<NeuronDoc>,
    #[serde(default)]
    pub synapses: Vec<SynapseDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<NeuronParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynapseDoc {
    pub id: String,
    pub pre: String,
    pub post: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SynapseParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_init: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_init: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatorConfig {
    pub shape: SpikeShape,
    pub thresholds: PlasticityThresholds,
    pub neuron: NeuronSection,
    pub synapse: SynapseSection,
    pub sim: SimConfig,
    pub quadrature: Quadrature,
    pub waveform: WaveformSection,
    pub stdp: StdpSweep,
    pub pavlov: PavlovSection,
    pub energy: EnergySection,
    pub calibrate: CalibrationTargets,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stimulus: Option<Stimulus>,
}

impl SimulatorConfig {
    /// Parses a config document. A run manifest (an object carrying
    /// `command` and `config`) is accepted too and yields its resolved config.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_value(unwrap_manifest(value))
    }

    fn from_value(value: Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses `base` (or starts from defaults), applies `overrides` in order,
    /// and validates the result.
    pub fn resolve(base: Option<&str>, overrides: &[String]) -> Result<Self> {
        let config = match base {
            Some(text) => Self::from_json_str(text)?,
            None => Self::default(),
        };
        let mut value = serde_json::to_value(&config)?;
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        let config = Self::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn neuron_params(&self) -> NeuronParams {
        NeuronParams {
            c_mem: self.neuron.c_mem,
            r_leaky: self.neuron.r_leaky,
            v_thr: self.neuron.v_thr,
            v_refr: self.shape.v_refr,
            hysteresis: self.neuron.hysteresis,
            shape: self.shape,
        }
    }

    pub fn synapse_params(&self) -> SynapseParams {
        SynapseParams {
            g_min: self.synapse.g_min,
            g_max: self.synapse.g_max,
            thr: self.thresholds,
            eta_p: self.synapse.eta_p,
            eta_d: self.synapse.eta_d,
        }
    }

    pub fn pavlov_config(&self) -> PavlovConfig {
        PavlovConfig {
            neuron: self.neuron_params(),
            synapse: self.synapse_params(),
            r1_init: self.pavlov.r1_init,
            r2_init: self.pavlov.r2_init,
            dt: self.sim.dt,
            port_samples: self.sim.port_samples,
            first_onset: self.pavlov.first_onset,
            interval: self.pavlov.interval,
            max_trials: self.pavlov.max_trials,
            trace_decimation: self.sim.trace_decimation,
            record: self.sim.record,
        }
    }

    /// The `network` section with defaults filled in.
    pub fn network(&self) -> Result<Network> {
        let doc = self
            .network
            .as_ref()
            .ok_or_else(|| Error::Config("no `network` section".to_string()))?;
        let mut problems = Vec::new();
        let neurons = doc
            .neurons
            .iter()
            .map(|n| NeuronSpec {
                id: n.id.clone(),
                params: n.params.unwrap_or_else(|| self.neuron_params()),
            })
            .collect();
        let synapses = doc
            .synapses
            .iter()
            .map(|s| {
                let g_init = match (s.g_init, s.r_init) {
                    (Some(g), None) => g,
                    (None, Some(r)) => 1.0 / r,
                    _ => {
                        problems.push(format!(
                            "synapse `{}`: give exactly one of g_init or r_init",
                            s.id
                        ));
                        f64::NAN
                    }
                };
                SynapseSpec {
                    id: s.id.clone(),
                    pre: s.pre.clone(),
                    post: s.post.clone(),
                    params: s.params.unwrap_or_else(|| self.synapse_params()),
                    g_init,
                }
            })
            .collect();
        if !problems.is_empty() {
            return Err(Error::Network(problems));
        }
        Ok(Network { neurons, synapses })
    }

    pub fn stimulus(&self) -> Stimulus {
        self.stimulus.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        validate_shape(&self.shape, &self.thresholds).map_err(Error::InvalidShape)?;
        self.neuron_params().validate(Some(self.sim.dt))?;
        self.synapse_params().validate()?;
        self.sim.validate()?;
        self.quadrature.validate()?;
        let w = &self.waveform;
        if !(w.t_step > 0.0 && w.t_stop >= w.t_start && w.pair_delta_t.is_finite()) {
            return Err(Error::param("waveform", "need t_step > 0 and t_stop >= t_start"));
        }
        if !(self.energy.r_load > 0.0) || self.energy.n_synapses == 0 {
            return Err(Error::param("energy", "need r_load > 0 and n_synapses >= 1"));
        }
        if !(self.pavlov.r1_init > 0.0 && self.pavlov.r2_init > 0.0) {
            return Err(Error::param("pavlov", "initial resistances must be > 0"));
        }
        self.stdp.grid()?;
        Ok(())
    }
}

fn unwrap_manifest(value: Value) -> Value {
    match value {
        Value::Object(mut map) if map.contains_key("command") && map.contains_key("config") => {
            map.remove("config").expect("checked")
        }
        other => other,
    }
}

/// Applies one `dotted.path=value` override. The value is parsed as JSON
/// when possible and taken as a string otherwise. Every path segment must
/// already exist; array elements are addressed by index.
pub fn apply_override(root: &mut Value, item: &str) -> Result<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
    let new: Value =
        serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cursor = root;
    for key in path.split('.') {
        cursor = match cursor {
            Value::Object(map) => map.get_mut(key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| Error::Config(format!("override `{path}`: no such key `{key}`")))?;
    }
    *cursor = new;
    Ok(())
}
