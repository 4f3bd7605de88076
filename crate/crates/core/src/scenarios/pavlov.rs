//! Three-neuron associative learning.
//!
//! `ifn1` ("sight of food") reaches the output neuron `ifn3` through a strong
//! synapse `syn1`; `ifn2` ("sound of bell") reaches it through a weak
//! synapse `syn2`. Before training only `ifn1` drives `ifn3`. Co-stimulating
//! both inputs makes `ifn3` fire inside their positive pulses, so `syn2`
//! sees a pre-before-post pair on every trial and is potentiated until
//! `ifn2` alone can drive `ifn3`.

use serde::{Deserialize, Serialize};

use crate::engine::{steps_until, Network, RecordFlags, SimConfig, Simulator, Trace};
use crate::error::{Error, Result};
use crate::neuron::NeuronParams;
use crate::synapse::SynapseParams;

pub const INPUT_FOOD: &str = "ifn1";
pub const INPUT_BELL: &str = "ifn2";
pub const OUTPUT: &str = "ifn3";
pub const SYN_FOOD: &str = "syn1";
pub const SYN_BELL: &str = "syn2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PavlovConfig {
    pub neuron: NeuronParams,
    pub synapse: SynapseParams,
    /// Initial resistance of `syn1`, Ω.
    pub r1_init: f64,
    /// Initial resistance of `syn2`, Ω.
    pub r2_init: f64,
    pub dt: f64,
    pub port_samples: u32,
    /// Onset of the first stimulus, s.
    pub first_onset: f64,
    /// Spacing between consecutive stimuli, s.
    pub interval: f64,
    pub max_trials: u32,
    pub trace_decimation: u64,
    pub record: RecordFlags,
}

impl Default for PavlovConfig {
    fn default() -> Self {
        PavlovConfig {
            neuron: NeuronParams::default(),
            synapse: SynapseParams::default(),
            r1_init: 51e3,
            r2_init: 1e6,
            dt: 10e-9,
            port_samples: SimConfig::default().port_samples,
            first_onset: 10e-6,
            interval: 100e-6,
            max_trials: 30,
            trace_decimation: 10,
            record: RecordFlags::default(),
        }
    }
}

impl PavlovConfig {
    pub fn network(&self) -> Network {
        let mut net = Network::default();
        net.add_neuron(INPUT_FOOD, self.neuron)
            .add_neuron(INPUT_BELL, self.neuron)
            .add_neuron(OUTPUT, self.neuron)
            .add_synapse(SYN_FOOD, INPUT_FOOD, OUTPUT, self.synapse, 1.0 / self.r1_init)
            .add_synapse(SYN_BELL, INPUT_BELL, OUTPUT, self.synapse, 1.0 / self.r2_init);
        net
    }

    fn validate(&self) -> Result<()> {
        if !(self.interval > self.neuron.shape.duration()) {
            return Err(Error::param(
                "pavlov.interval",
                "must be longer than one spike so stimuli do not overlap",
            ));
        }
        if !(self.first_onset >= 0.0) {
            return Err(Error::param("pavlov.first_onset", "must be >= 0"));
        }
        if self.max_trials == 0 {
            return Err(Error::param("pavlov.max_trials", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Before,
    Training,
    After,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusResponse {
    pub label: String,
    pub onset_s: f64,
    pub stimulated: Vec<String>,
    pub output_fire_times_s: Vec<f64>,
    pub output_fired: bool,
    /// `syn2` resistance once the response has settled, Ω.
    pub r2_after_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub phase: Phase,
    pub stimuli: Vec<StimulusResponse>,
    pub output_fire_count: usize,
    /// `(t, R)` samples of `syn2`, one at phase start and one per stimulus.
    pub r2_trajectory: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PavlovReport {
    pub phases: Vec<PhaseReport>,
    /// Co-stimulation trials run.
    pub trials_used: u32,
    pub max_trials: u32,
    pub r1_initial_ohm: f64,
    pub r1_final_ohm: f64,
    pub r2_initial_ohm: f64,
    pub r2_final_ohm: f64,
    /// No step of the training phase raised `syn2`'s resistance.
    pub training_monotone: bool,
    /// (a) output fires for food alone and not for bell alone.
    pub before_ok: bool,
    /// (b) every co-stimulation trial strictly lowered `syn2`'s resistance.
    pub training_ok: bool,
    /// (c) bell alone fires the output after at most `max_trials` trials.
    pub after_ok: bool,
    pub passed: bool,
}

pub struct PavlovRun {
    pub report: PavlovReport,
    pub trace: Trace,
}

struct Driver {
    sim: Simulator,
    dt: f64,
    interval: f64,
    output: usize,
    bell_syn: usize,
    ids: [usize; 2],
    monotone: bool,
}

impl Driver {
    fn r2(&self) -> f64 {
        self.sim.synapses()[self.bell_syn].resistance()
    }

    /// Steps to `t`; in training also checks `syn2` never weakens.
    fn advance(&mut self, t: f64, watch: bool) {
        let target = steps_until(t, self.dt);
        while self.sim.step_index() < target {
            let before = self.sim.synapses()[self.bell_syn].g;
            self.sim.step();
            if watch && self.sim.synapses()[self.bell_syn].g < before {
                self.monotone = false;
            }
        }
    }

    fn stimulate(
        &mut self,
        label: &str,
        inputs: &[usize],
        onset: f64,
        watch: bool,
    ) -> Result<StimulusResponse> {
        for &n in inputs {
            self.sim.schedule_spike(self.ids[n], onset)?;
        }
        let seen = self.sim.fires().len();
        self.advance(onset + self.interval, watch);
        let output_fire_times_s: Vec<f64> = self.sim.fires()[seen..]
            .iter()
            .filter(|f| f.neuron == self.output && !f.forced)
            .map(|f| f.t_onset)
            .collect();
        Ok(StimulusResponse {
            label: label.to_string(),
            onset_s: onset,
            stimulated: inputs
                .iter()
                .map(|&n| [INPUT_FOOD, INPUT_BELL][n].to_string())
                .collect(),
            output_fired: !output_fire_times_s.is_empty(),
            output_fire_times_s,
            r2_after_ohm: self.r2(),
        })
    }
}

fn phase_report(phase: Phase, start: (f64, f64), stimuli: Vec<StimulusResponse>) -> PhaseReport {
    let mut r2_trajectory = vec![start];
    r2_trajectory.extend(stimuli.iter().map(|s| (s.onset_s, s.r2_after_ohm)));
    PhaseReport {
        phase,
        output_fire_count: stimuli.iter().map(|s| s.output_fire_times_s.len()).sum(),
        stimuli,
        r2_trajectory,
    }
}

pub fn run_pavlov(config: &PavlovConfig) -> Result<PavlovRun> {
    config.validate()?;
    let net = config.network();
    let sim_config = SimConfig {
        dt: config.dt,
        t_end: 0.0,
        port_samples: config.port_samples,
        trace_decimation: config.trace_decimation,
        record: config.record,
    };
    let sim = Simulator::new(&net, &sim_config)?;
    let ids = [
        sim.neuron_index(INPUT_FOOD).expect("built"),
        sim.neuron_index(INPUT_BELL).expect("built"),
    ];
    let mut d = Driver {
        output: sim.neuron_index(OUTPUT).expect("built"),
        bell_syn: sim.synapse_index(SYN_BELL).expect("built"),
        sim,
        dt: config.dt,
        interval: config.interval,
        ids,
        monotone: true,
    };
    let r2_initial = d.r2();
    let r1_initial = config.r1_init;
    let mut t = config.first_onset;
    d.advance(t, false);

    let start = (d.sim.time(), d.r2());
    let food = d.stimulate("food alone", &[0], t, false)?;
    t += config.interval;
    let bell = d.stimulate("bell alone", &[1], t, false)?;
    t += config.interval;
    let before_ok = food.output_fired && !bell.output_fired;
    let before = phase_report(Phase::Before, start, vec![food, bell]);

    let start = (d.sim.time(), d.r2());
    let mut training = Vec::new();
    let mut trials_used = 0;
    let mut every_trial_potentiates = true;
    let mut learned = false;
    while trials_used < config.max_trials {
        let r_before = d.r2();
        let trial = d.stimulate(&format!("pairing {}", trials_used + 1), &[0, 1], t, true)?;
        t += config.interval;
        trials_used += 1;
        if !(trial.r2_after_ohm < r_before) {
            every_trial_potentiates = false;
        }
        training.push(trial);
        let probe = d.stimulate(&format!("probe {trials_used}"), &[1], t, true)?;
        t += config.interval;
        learned = probe.output_fired;
        training.push(probe);
        if learned {
            break;
        }
    }
    let training_ok = trials_used > 0 && every_trial_potentiates && d.monotone;
    let training = phase_report(Phase::Training, start, training);

    let start = (d.sim.time(), d.r2());
    let bell_after = d.stimulate("bell alone", &[1], t, false)?;
    t += config.interval;
    let after_ok = bell_after.output_fired && learned && trials_used <= config.max_trials;
    let after = phase_report(Phase::After, start, vec![bell_after]);
    d.advance(t, false);

    let r1_final = d.sim.synapses()[d.sim.synapse_index(SYN_FOOD).expect("built")].resistance();
    let r2_final = d.r2();
    let report = PavlovReport {
        phases: vec![before, training, after],
        trials_used,
        max_trials: config.max_trials,
        r1_initial_ohm: r1_initial,
        r1_final_ohm: r1_final,
        r2_initial_ohm: r2_initial,
        r2_final_ohm: r2_final,
        training_monotone: d.monotone,
        before_ok,
        training_ok,
        after_ok,
        passed: before_ok && training_ok && after_ok,
    };
    Ok(PavlovRun {
        report,
        trace: d.sim.finish(),
    })
}
