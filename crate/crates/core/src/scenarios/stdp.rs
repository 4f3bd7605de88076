use serde::{Deserialize, Serialize};

use crate::engine::{Network, SimConfig, Simulator};
use crate::error::{Error, Result};
use crate::neuron::NeuronParams;
use crate::synapse::{pair_weight_change, SynapseParams};
use crate::waveform::{Quadrature, SpikeShape};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StdpSweep {
    pub delta_t_min: f64,
    pub delta_t_max: f64,
    pub delta_t_step: f64,
    /// Conductance the relative change is expressed against, S.
    pub g_ref: f64,
    /// Offsets cross-checked with full engine runs, s.
    pub probes: Vec<f64>,
    /// Engine step for the probe runs, s.
    pub probe_dt: f64,
}

impl Default for StdpSweep {
    fn default() -> Self {
        StdpSweep {
            delta_t_min: -6e-6,
            delta_t_max: 6e-6,
            delta_t_step: 0.1e-6,
            g_ref: 1e-6,
            probes: vec![-0.5e-6, 0.2e-6, 0.5e-6],
            probe_dt: 10e-9,
        }
    }
}

impl StdpSweep {
    /// Grid points `delta_t_min + i * delta_t_step` up to `delta_t_max`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.delta_t_step > 0.0 && self.delta_t_max >= self.delta_t_min) {
            return Err(Error::param("stdp", "need delta_t_step > 0 and max >= min"));
        }
        let n = ((self.delta_t_max - self.delta_t_min) / self.delta_t_step + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|i| self.delta_t_min + i as f64 * self.delta_t_step)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdpPoint {
    pub delta_t: f64,
    /// Conductance change, S.
    pub delta_g: f64,
    /// `delta_g / g_ref`.
    pub delta_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdpCurve {
    pub g_ref: f64,
    pub points: Vec<StdpPoint>,
}

impl StdpCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta_t_s,delta_g_S,delta_w\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.delta_t, p.delta_g, p.delta_w));
        }
        out
    }
}

pub fn stdp_curve(
    shape: &SpikeShape,
    params: &SynapseParams,
    grid: &[f64],
    g_ref: f64,
    quad: &Quadrature,
) -> Result<StdpCurve> {
    if !(g_ref > 0.0) {
        return Err(Error::param("g_ref", "must be > 0"));
    }
    let points = grid
        .iter()
        .map(|&dt| {
            let delta_g = pair_weight_change(params, shape, dt, quad)?;
            Ok(StdpPoint {
                delta_t: dt,
                delta_g,
                delta_w: delta_g / g_ref,
            })
        })
        .collect::<Result<_>>()?;
    Ok(StdpCurve { g_ref, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeComparison {
    pub delta_t: f64,
    pub curve_delta_g: f64,
    pub simulated_delta_g: f64,
    pub relative_error: f64,
}

/// Conductance change of one forced spike pair run through the engine.
pub fn simulate_pair(
    neuron: &NeuronParams,
    params: &SynapseParams,
    g_init: f64,
    delta_t: f64,
    dt: f64,
) -> Result<f64> {
    let mut net = Network::default();
    net.add_neuron("pre", *neuron)
        .add_neuron("post", *neuron)
        .add_synapse("s", "pre", "post", *params, g_init);
    let config = SimConfig {
        dt,
        t_end: 0.0,
        ..SimConfig::default()
    };
    let mut sim = Simulator::new(&net, &config)?;
    let lead = 1e-6;
    let t_pre = lead + (-delta_t).max(0.0);
    let t_post = t_pre + delta_t;
    sim.schedule_spike(0, t_pre)?;
    sim.schedule_spike(1, t_post)?;
    sim.run_until(t_pre.max(t_post) + neuron.shape.duration() + lead);
    let fired: Vec<_> = sim.fires().iter().filter(|f| !f.forced).collect();
    if !fired.is_empty() {
        return Err(Error::Contract(format!(
            "pair probe at delta_t = {delta_t} evoked an unforced fire"
        )));
    }
    Ok(sim.synapses()[0].g - g_init)
}

/// Compares the closed-form curve with engine runs at the sweep's probe offsets.
pub fn cross_validate(
    neuron: &NeuronParams,
    params: &SynapseParams,
    sweep: &StdpSweep,
    quad: &Quadrature,
) -> Result<Vec<ProbeComparison>> {
    sweep
        .probes
        .iter()
        .map(|&dt| {
            let curve = pair_weight_change(params, &neuron.shape, dt, quad)?;
            let sim = simulate_pair(neuron, params, sweep.g_ref, dt, sweep.probe_dt)?;
            let relative_error = if curve == 0.0 {
                sim.abs()
            } else {
                ((sim - curve) / curve).abs()
            };
            Ok(ProbeComparison {
                delta_t: dt,
                curve_delta_g: curve,
                simulated_delta_g: sim,
                relative_error,
            })
        })
        .collect()
}
