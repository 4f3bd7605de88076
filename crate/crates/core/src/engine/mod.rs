//! Fixed-step network simulation.
//!
//! Each step of length `dt` starting at `t` runs, in order:
//!
//! 0. forced onsets scheduled for `t` start their firing phases;
//! 1. every neuron's port voltage is resolved at the step midpoint `t + dt/2`;
//! 2. every synapse's current `g (v_pre - v_post)` and net potential
//!    `v_post - v_pre` are computed from those ports;
//! 3. plasticity is applied to every synapse;
//! 4. each integrating neuron integrates the currents of its in-synapses plus
//!    any injected stimulus current (currents into firing neurons are
//!    discarded);
//! 5. neurons whose membrane reached threshold begin firing at `t + dt`, so
//!    their drive reaches the network on the following step;
//! 6. neurons whose spike has run its full length return to integration.
//!
//! Rows of the trace are the state at the start of a step, after forced
//! onsets, so a fire event always coincides with the first row in firing mode.
//! Simultaneous events are processed in ascending neuron id.

mod network;
mod trace;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::neuron::{FireDecision, Mode, NeuronParams, NeuronState};
use crate::synapse::{synapse_current, SynapseParams, SynapseState};

pub use network::{CurrentSegment, Network, NeuronSpec, NeuronStimulus, Stimulus, SynapseSpec};
pub use trace::{FireEvent, RecordFlags, Trace, TraceRow};

/// Sub-step port samples per step. Spike edges are shorter than a
/// nanosecond, so a single midpoint sample misplaces the plasticity they
/// gate by up to a full step.
pub const DEFAULT_PORT_SAMPLES: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Port voltages are sampled at this many evenly spaced sub-step
    /// midpoints. Plasticity is applied once per sample with `dt / n`;
    /// synaptic currents use the mean port voltage over the step.
    pub port_samples: u32,
    pub trace_decimation: u64,
    pub record: RecordFlags,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 10e-9,
            t_end: 100e-6,
            port_samples: DEFAULT_PORT_SAMPLES,
            trace_decimation: 1,
            record: RecordFlags::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("sim.dt", "must be finite and > 0"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("sim.t_end", "must be finite and >= 0"));
        }
        if self.port_samples == 0 {
            return Err(Error::param("sim.port_samples", "must be >= 1"));
        }
        if self.trace_decimation == 0 {
            return Err(Error::param("sim.trace_decimation", "must be >= 1"));
        }
        Ok(())
    }

    /// Number of grid steps covering `[0, t_end]`.
    pub fn n_steps(&self) -> u64 {
        steps_until(self.t_end, self.dt)
    }
}

/// Index of the first grid point at or after `t`, tolerating round-off.
pub fn steps_until(t: f64, dt: f64) -> u64 {
    let x = t / dt;
    let r = x.round();
    if (x - r).abs() <= 1e-6 {
        r.max(0.0) as u64
    } else {
        x.ceil().max(0.0) as u64
    }
}

/// Per-step current bookkeeping, all in amperes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepCurrents {
    /// Current through each synapse, positive into its post side.
    pub synapse: Vec<f64>,
    /// Net current each neuron's port drives out into the network.
    pub port_outflow: Vec<f64>,
    /// Summing-node current each integrating neuron integrated.
    pub integrated: Vec<f64>,
    /// Synaptic current arriving at neurons that were firing.
    pub discarded: Vec<f64>,
}

/// Hex SHA-256 of the JSON serialization of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

pub struct Simulator {
    neuron_ids: Vec<String>,
    synapse_ids: Vec<String>,
    neuron_params: Vec<NeuronParams>,
    synapse_params: Vec<SynapseParams>,
    neurons: Vec<NeuronState>,
    synapses: Vec<SynapseState>,
    /// Neuron indices in ascending id order.
    id_order: Vec<usize>,
    dt: f64,
    samples: usize,
    step: u64,
    forced: BTreeMap<u64, Vec<usize>>,
    currents: Vec<Vec<CurrentSegment>>,
    ports: Vec<f64>,
    /// `samples` consecutive port voltages per neuron for the current step.
    sub_ports: Vec<f64>,
    bookkeeping: StepCurrents,
    record: RecordFlags,
    decimation: u64,
    rows: Vec<TraceRow>,
    fires: Vec<FireEvent>,
    skipped_forced: u64,
    config_hash: String,
}

impl Simulator {
    pub fn new(network: &Network, config: &SimConfig) -> Result<Self> {
        config.validate()?;
        network.validate(config.dt)?;
        let n = network.neurons.len();
        let mut id_order: Vec<usize> = (0..n).collect();
        id_order.sort_by(|&a, &b| network.neurons[a].id.cmp(&network.neurons[b].id));
        let synapses = network
            .synapses
            .iter()
            .map(|s| SynapseState {
                g: s.g_init,
                pre: network.neuron_index(&s.pre).expect("validated"),
                post: network.neuron_index(&s.post).expect("validated"),
            })
            .collect();
        let neuron_params: Vec<NeuronParams> =
            network.neurons.iter().map(|n| n.params).collect();
        Ok(Simulator {
            neuron_ids: network.neurons.iter().map(|n| n.id.clone()).collect(),
            synapse_ids: network.synapses.iter().map(|s| s.id.clone()).collect(),
            neurons: neuron_params.iter().map(NeuronState::resting).collect(),
            neuron_params,
            synapse_params: network.synapses.iter().map(|s| s.params).collect(),
            synapses,
            id_order,
            dt: config.dt,
            samples: config.port_samples as usize,
            step: 0,
            forced: BTreeMap::new(),
            currents: vec![Vec::new(); n],
            ports: vec![0.0; n],
            sub_ports: vec![0.0; n * config.port_samples as usize],
            bookkeeping: StepCurrents {
                synapse: vec![0.0; network.synapses.len()],
                port_outflow: vec![0.0; n],
                integrated: vec![0.0; n],
                discarded: vec![0.0; n],
            },
            record: config.record,
            decimation: config.trace_decimation,
            rows: Vec::new(),
            fires: Vec::new(),
            skipped_forced: 0,
            config_hash: String::new(),
        })
    }

    /// Builds a simulator with every stimulus entry scheduled.
    pub fn with_stimulus(network: &Network, stimulus: &Stimulus, config: &SimConfig) -> Result<Self> {
        let mut sim = Simulator::new(network, config)?;
        stimulus.validate(network)?;
        for entry in &stimulus.neurons {
            let idx = network.neuron_index(&entry.neuron).expect("validated");
            for &t in &entry.spikes {
                sim.schedule_spike(idx, t)?;
            }
            for seg in &entry.currents {
                sim.inject_current(idx, *seg)?;
            }
        }
        sim.config_hash = config_hash(&(network, stimulus, config))?;
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of completed steps.
    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn neuron_index(&self, id: &str) -> Option<usize> {
        self.neuron_ids.iter().position(|n| n == id)
    }

    pub fn synapse_index(&self, id: &str) -> Option<usize> {
        self.synapse_ids.iter().position(|n| n == id)
    }

    pub fn neurons(&self) -> &[NeuronState] {
        &self.neurons
    }

    pub fn synapses(&self) -> &[SynapseState] {
        &self.synapses
    }

    pub fn fires(&self) -> &[FireEvent] {
        &self.fires
    }

    /// Currents of the most recent step.
    pub fn last_currents(&self) -> &StepCurrents {
        &self.bookkeeping
    }

    /// Mean port voltages of the most recent step.
    pub fn last_ports(&self) -> &[f64] {
        &self.ports
    }

    /// Forced onsets dropped because the neuron was already firing.
    pub fn skipped_forced(&self) -> u64 {
        self.skipped_forced
    }

    /// Schedules a forced firing phase at the first grid point at or after `t`.
    pub fn schedule_spike(&mut self, neuron: usize, t: f64) -> Result<()> {
        if neuron >= self.neurons.len() {
            return Err(Error::Stimulus(vec![format!("no neuron with index {neuron}")]));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Stimulus(vec![format!("spike time {t} must be >= 0")]));
        }
        let k = steps_until(t, self.dt);
        if k < self.step {
            return Err(Error::Stimulus(vec![format!(
                "spike at {t} s lies before the current time {} s",
                self.time()
            )]));
        }
        let list = self.forced.entry(k).or_default();
        if !list.contains(&neuron) {
            list.push(neuron);
        }
        Ok(())
    }

    pub fn inject_current(&mut self, neuron: usize, seg: CurrentSegment) -> Result<()> {
        let list = self
            .currents
            .get_mut(neuron)
            .ok_or_else(|| Error::Stimulus(vec![format!("no neuron with index {neuron}")]))?;
        list.push(seg);
        list.sort_by(|a, b| a.t0.total_cmp(&b.t0));
        Ok(())
    }

    fn injected(&self, neuron: usize, t: f64) -> f64 {
        self.currents[neuron]
            .iter()
            .filter(|s| t >= s.t0 && t < s.t1)
            .map(|s| s.amps)
            .sum()
    }

    fn apply_forced_onsets(&mut self) {
        let Some(mut list) = self.forced.remove(&self.step) else {
            return;
        };
        let t = self.time();
        list.sort_by(|&a, &b| self.neuron_ids[a].cmp(&self.neuron_ids[b]));
        for n in list {
            if self.neurons[n].force_fire(&self.neuron_params[n], t).is_ok() {
                self.fires.push(FireEvent {
                    neuron: n,
                    t_onset: t,
                    forced: true,
                });
            } else {
                self.skipped_forced += 1;
            }
        }
    }

    fn record_row(&mut self) {
        let t = self.time();
        if self.rows.last().is_some_and(|r| r.t == t) {
            return;
        }
        let mut row = TraceRow {
            t,
            ..TraceRow::default()
        };
        if self.record.v_mem {
            row.v_mem = self.neurons.iter().map(|n| n.v_mem).collect();
            row.mode = self.neurons.iter().map(|n| n.mode).collect();
        }
        if self.record.ports {
            row.ports = self
                .neurons
                .iter()
                .zip(&self.neuron_params)
                .map(|(n, p)| n.port_voltage(p, t))
                .collect();
        }
        if self.record.g {
            row.g = self.synapses.iter().map(|s| s.g).collect();
        }
        self.rows.push(row);
    }

    /// Advances one `dt`.
    pub fn step(&mut self) {
        self.apply_forced_onsets();
        if self.step.is_multiple_of(self.decimation) {
            self.record_row();
        }

        let dt = self.dt;
        let t = self.time();
        let t_mid = t + 0.5 * dt;
        let t_next = (self.step + 1) as f64 * dt;

        let m = self.samples;
        let h = dt / m as f64;
        for (i, (n, p)) in self.neurons.iter().zip(&self.neuron_params).enumerate() {
            let samples = &mut self.sub_ports[i * m..(i + 1) * m];
            if n.mode == Mode::Integration {
                samples.fill(p.v_refr);
                self.ports[i] = p.v_refr;
            } else {
                for (j, v) in samples.iter_mut().enumerate() {
                    *v = n.port_voltage(p, t + (j as f64 + 0.5) * h);
                }
                self.ports[i] = samples.iter().sum::<f64>() / m as f64;
            }
        }

        let book = &mut self.bookkeeping;
        book.port_outflow.iter_mut().for_each(|x| *x = 0.0);
        book.integrated.iter_mut().for_each(|x| *x = 0.0);
        book.discarded.iter_mut().for_each(|x| *x = 0.0);
        for (k, (syn, params)) in self
            .synapses
            .iter_mut()
            .zip(&self.synapse_params)
            .enumerate()
        {
            let v_pre = self.ports[syn.pre];
            let v_post = self.ports[syn.post];
            let i = synapse_current(syn.g, v_pre, v_post);
            book.synapse[k] = i;
            book.port_outflow[syn.pre] += i;
            book.port_outflow[syn.post] -= i;
            if self.neurons[syn.post].mode == Mode::Integration {
                book.integrated[syn.post] += i;
            } else {
                book.discarded[syn.post] += i;
            }
            let both_idle = self.neurons[syn.pre].mode == Mode::Integration
                && self.neurons[syn.post].mode == Mode::Integration;
            if both_idle {
                // Constant over the step.
                syn.apply_plasticity_step(params, v_post - v_pre, dt);
            } else {
                let pre = &self.sub_ports[syn.pre * m..(syn.pre + 1) * m];
                let post = &self.sub_ports[syn.post * m..(syn.post + 1) * m];
                for (a, b) in pre.iter().zip(post) {
                    syn.apply_plasticity_step(params, b - a, h);
                }
            }
        }

        for n in 0..self.neurons.len() {
            if self.neurons[n].mode != Mode::Integration {
                continue;
            }
            let injected = if self.currents[n].is_empty() {
                0.0
            } else {
                self.injected(n, t_mid)
            };
            self.bookkeeping.integrated[n] += injected;
            let i_in = self.bookkeeping.integrated[n];
            self.neurons[n]
                .integrate_step(&self.neuron_params[n], i_in, dt)
                .expect("integration mode checked");
        }

        for idx in 0..self.id_order.len() {
            let n = self.id_order[idx];
            let p = &self.neuron_params[n];
            if self.neurons[n].check_fire(p) == FireDecision::Fire {
                self.neurons[n].begin_fire(p, t_next).expect("threshold checked");
                self.fires.push(FireEvent {
                    neuron: n,
                    t_onset: t_next,
                    forced: false,
                });
            }
        }

        for (n, p) in self.neurons.iter_mut().zip(&self.neuron_params) {
            if n.fire_elapsed(p, t_next) {
                n.end_fire(p, t_next).expect("elapsed checked");
            }
        }

        self.step += 1;
    }

    /// Steps until the clock reaches the grid point at or after `t`.
    pub fn run_until(&mut self, t: f64) {
        let target = steps_until(t, self.dt);
        while self.step < target {
            self.step();
        }
    }

    /// Applies pending onsets at the current time, records the final row,
    /// and hands back the trace.
    pub fn finish(mut self) -> Trace {
        self.apply_forced_onsets();
        self.record_row();
        Trace {
            neuron_ids: self.neuron_ids,
            synapse_ids: self.synapse_ids,
            record: self.record,
            rows: self.rows,
            fires: if self.record.fires { self.fires } else { Vec::new() },
            config_hash: self.config_hash,
        }
    }
}

/// Runs `network` under `stimulus` from 0 to `config.t_end`.
pub fn run(network: &Network, stimulus: &Stimulus, config: &SimConfig) -> Result<Trace> {
    let mut sim = Simulator::with_stimulus(network, stimulus, config)?;
    sim.run_until(config.t_end);
    Ok(sim.finish())
}
