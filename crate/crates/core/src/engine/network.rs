use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuron::NeuronParams;
use crate::synapse::SynapseParams;
use crate::waveform::validate_shape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronSpec {
    pub id: String,
    #[serde(default)]
    pub params: NeuronParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynapseSpec {
    pub id: String,
    pub pre: String,
    pub post: String,
    #[serde(default)]
    pub params: SynapseParams,
    /// Initial conductance, S.
    pub g_init: f64,
}

/// Neurons plus directed pre→post synapses.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub neurons: Vec<NeuronSpec>,
    #[serde(default)]
    pub synapses: Vec<SynapseSpec>,
}

impl Network {
    pub fn add_neuron(&mut self, id: impl Into<String>, params: NeuronParams) -> &mut Self {
        self.neurons.push(NeuronSpec {
            id: id.into(),
            params,
        });
        self
    }

    pub fn add_synapse(
        &mut self,
        id: impl Into<String>,
        pre: impl Into<String>,
        post: impl Into<String>,
        params: SynapseParams,
        g_init: f64,
    ) -> &mut Self {
        self.synapses.push(SynapseSpec {
            id: id.into(),
            pre: pre.into(),
            post: post.into(),
            params,
            g_init,
        });
        self
    }

    pub fn neuron_index(&self, id: &str) -> Option<usize> {
        self.neurons.iter().position(|n| n.id == id)
    }

    /// Collects every structural and parameter problem, each tagged with
    /// the offending id.
    pub fn validate(&self, dt: f64) -> Result<()> {
        let mut problems = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, n) in self.neurons.iter().enumerate() {
            if index.insert(n.id.as_str(), i).is_some() {
                problems.push(format!("neuron `{}`: duplicate id", n.id));
            }
            if let Err(e) = n.params.validate(Some(dt)) {
                problems.push(format!("neuron `{}`: {e}", n.id));
            }
        }
        let mut syn_ids = HashSet::new();
        for s in &self.synapses {
            if !syn_ids.insert(s.id.as_str()) {
                problems.push(format!("synapse `{}`: duplicate id", s.id));
            }
            let pre = index.get(s.pre.as_str()).copied();
            let post = index.get(s.post.as_str()).copied();
            if pre.is_none() {
                problems.push(format!("synapse `{}`: unknown pre neuron `{}`", s.id, s.pre));
            }
            if post.is_none() {
                problems.push(format!("synapse `{}`: unknown post neuron `{}`", s.id, s.post));
            }
            if s.pre == s.post {
                problems.push(format!("synapse `{}`: self-loop on `{}`", s.id, s.pre));
            }
            if let Err(e) = s.params.validate() {
                problems.push(format!("synapse `{}`: {e}", s.id));
                continue;
            }
            if !(s.g_init >= s.params.g_min && s.g_init <= s.params.g_max) {
                problems.push(format!(
                    "synapse `{}`: g_init {} outside [{}, {}]",
                    s.id, s.g_init, s.params.g_min, s.params.g_max
                ));
            }
            for end in [pre, post].into_iter().flatten() {
                let neuron = &self.neurons[end];
                if let Err(v) = validate_shape(&neuron.params.shape, &s.params.thr) {
                    let reasons: Vec<String> = v.iter().map(ToString::to_string).collect();
                    problems.push(format!(
                        "synapse `{}`: spike of `{}` does not suit its thresholds: {}",
                        s.id,
                        neuron.id,
                        reasons.join(", ")
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Network(problems))
        }
    }
}

/// Constant current injected into a neuron's summing node over `[t0, t1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentSegment {
    pub t0: f64,
    pub t1: f64,
    pub amps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronStimulus {
    pub neuron: String,
    /// Forced firing onsets, s.
    #[serde(default)]
    pub spikes: Vec<f64>,
    #[serde(default)]
    pub currents: Vec<CurrentSegment>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stimulus {
    #[serde(default)]
    pub neurons: Vec<NeuronStimulus>,
}

impl Stimulus {
    pub fn spike(&mut self, neuron: impl Into<String>, t: f64) -> &mut Self {
        let neuron = neuron.into();
        match self.neurons.iter_mut().find(|n| n.neuron == neuron) {
            Some(n) => n.spikes.push(t),
            None => self.neurons.push(NeuronStimulus {
                neuron,
                spikes: vec![t],
                currents: Vec::new(),
            }),
        }
        self
    }

    pub fn current(&mut self, neuron: impl Into<String>, seg: CurrentSegment) -> &mut Self {
        let neuron = neuron.into();
        match self.neurons.iter_mut().find(|n| n.neuron == neuron) {
            Some(n) => n.currents.push(seg),
            None => self.neurons.push(NeuronStimulus {
                neuron,
                spikes: Vec::new(),
                currents: vec![seg],
            }),
        }
        self
    }

    pub fn validate(&self, network: &Network) -> Result<()> {
        let mut problems = Vec::new();
        for entry in &self.neurons {
            if network.neuron_index(&entry.neuron).is_none() {
                problems.push(format!("unknown neuron `{}`", entry.neuron));
            }
            for &t in &entry.spikes {
                if !(t >= 0.0 && t.is_finite()) {
                    problems.push(format!("neuron `{}`: spike time {t} must be >= 0", entry.neuron));
                }
            }
            let mut segs = entry.currents.clone();
            for s in &segs {
                if !(s.t0 >= 0.0 && s.t1 > s.t0 && s.t1.is_finite() && s.amps.is_finite()) {
                    problems.push(format!(
                        "neuron `{}`: bad current segment [{}, {}) {} A",
                        entry.neuron, s.t0, s.t1, s.amps
                    ));
                }
            }
            segs.sort_by(|a, b| a.t0.total_cmp(&b.t0));
            for w in segs.windows(2) {
                if w[1].t0 < w[0].t1 {
                    problems.push(format!(
                        "neuron `{}`: current segments [{}, {}) and [{}, {}) overlap",
                        entry.neuron, w[0].t0, w[0].t1, w[1].t0, w[1].t1
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Stimulus(problems))
        }
    }
}
