//! Checks shared by the acceptance runner and the integration tests. Each
//! returns `Ok(detail)` on success and `Err(detail)` on failure.

#![allow(dead_code)]

use proptest::prelude::*;
use snn_core::engine::{
    CurrentSegment, Network, RecordFlags, SimConfig, Simulator, Stimulus, Trace,
};
use snn_core::neuron::{NeuronParams, NeuronState};
use snn_core::scenarios::{run_pavlov, simulate_pair, PavlovConfig, Phase, StdpSweep};
use snn_core::synapse::{pair_weight_change, synapse_current, SynapseParams};
use snn_core::waveform::{pair_overdrive, PlasticityThresholds, Quadrature, SpikeShape};

pub type Check = Result<String, String>;

fn verdict(pass: bool, detail: String) -> Check {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Over-threshold time of the default pair by midpoint counting on a
/// uniform 0.01 ns grid, independent of the library quadrature.
pub fn brute_force_window(shape: &SpikeShape, v_tp: f64, delta_t: f64) -> f64 {
    let h = 1e-11;
    let start = delta_t.min(0.0);
    let end = delta_t.max(0.0) + shape.duration();
    let n = ((end - start) / h).ceil() as usize;
    (0..n)
        .filter(|&i| {
            let t = start + (i as f64 + 0.5) * h;
            shape.voltage(t - delta_t) - shape.voltage(t) > v_tp
        })
        .count() as f64
        * h
}

pub fn window() -> Check {
    let shape = SpikeShape::default();
    let thr = PlasticityThresholds::default();
    let o = pair_overdrive(&shape, &thr, 0.5e-6, &Quadrature::default())
        .map_err(|e| e.to_string())?;
    let oracle = brute_force_window(&shape, thr.v_tp, 0.5e-6);
    let target = 0.4e-6;
    let pass = thr.v_tp == 0.34
        && (o.pot_window - target).abs() <= 0.2 * target
        && (oracle - target).abs() <= 0.2 * target
        && o.peak > 0.34;
    verdict(
        pass,
        format!(
            "window {:.4} us (grid oracle {:.4} us, target 0.4 us +-20%), peak {:.1} mV > 340 mV",
            o.pot_window * 1e6,
            oracle * 1e6,
            o.peak * 1e3
        ),
    )
}

pub fn pavlov() -> Check {
    let run = run_pavlov(&PavlovConfig::default()).map_err(|e| e.to_string())?;
    let r = &run.report;
    let training = r
        .phases
        .iter()
        .find(|p| p.phase == Phase::Training)
        .ok_or("no training phase")?;
    // Resistance after each co-stimulation trial, read back from the report.
    let mut r2 = vec![r.r2_initial_ohm];
    r2.extend(
        training
            .stimuli
            .iter()
            .filter(|s| s.stimulated.len() == 2)
            .map(|s| s.r2_after_ohm),
    );
    let strictly_decreasing = r2.windows(2).all(|w| w[1] < w[0]);
    let pass = r.before_ok
        && r.training_ok
        && r.after_ok
        && strictly_decreasing
        && r.trials_used <= 30
        && r.r1_initial_ohm == 51e3
        && r.r2_initial_ohm == 1e6;
    verdict(
        pass,
        format!(
            "(a) before {} (b) training {} (c) after {}; {} trials (<= 30), R2 {:.0} -> {:.0} ohm",
            r.before_ok,
            r.training_ok && strictly_decreasing,
            r.after_ok,
            r.trials_used,
            r.r2_initial_ohm,
            r.r2_final_ohm
        ),
    )
}

/// Energy of the default spike into 1 MΩ by midpoint sampling on a
/// 1 ps grid, independent of the library quadrature.
pub fn energy_grid_oracle(shape: &SpikeShape, r_load: f64) -> f64 {
    let h = 1e-12;
    let n = (shape.duration() / h).round() as usize;
    (0..n)
        .map(|i| {
            let v = shape.voltage((i as f64 + 0.5) * h) - shape.v_refr;
            v * v * h
        })
        .sum::<f64>()
        / r_load
}

pub fn energy() -> Check {
    let shape = SpikeShape::default();
    let report = snn_core::scenarios::energy_report(&shape, 1e6, 1000, &Quadrature::default())
        .map_err(|e| e.to_string())?;
    let oracle = energy_grid_oracle(&shape, 1e6);
    let oracle_err = ((report.per_synapse_j - oracle) / oracle).abs();
    let pass = report.relative_disagreement < 5e-3
        && oracle_err < 5e-3
        && report.per_synapse_j < 9.3e-12
        && report.per_synapse_quadrature_j < 9.3e-12
        && report.caveat.contains("opamp");
    verdict(
        pass,
        format!(
            "{:.4} fJ closed form vs {:.4} fJ quadrature ({:.1e} rel, grid oracle {:.1e}); < 9.3 pJ; caveat: {}",
            report.per_synapse_j * 1e15,
            report.per_synapse_quadrature_j * 1e15,
            report.relative_disagreement,
            oracle_err,
            report.caveat
        ),
    )
}

/// Zero-input decay from `v0` against `exp(-t / tau_m)`.
pub fn leak(params: &NeuronParams, v0: f64, dt: f64, steps: usize) -> Check {
    let mut s = NeuronState::resting(params);
    s.v_mem = v0;
    let mut worst: f64 = 0.0;
    for k in 1..=steps {
        s.integrate_step(params, 0.0, dt).map_err(|e| e.to_string())?;
        let expected = (v0 - params.v_refr).abs() * (-(k as f64) * dt / params.tau_m()).exp();
        let got = (s.v_mem - params.v_refr).abs();
        worst = worst.max(((got - expected) / expected).abs());
    }
    verdict(worst < 1e-4, format!("leak worst relative error {worst:.2e} (< 1e-4)"))
}

pub fn default_leak() -> Check {
    let p = NeuronParams::default();
    let a = leak(&p, -0.08, p.tau_m() / 1000.0, 5000)?;
    let b = leak(&p, -0.08, 10e-9, 30_000)?;
    Ok(format!("{a} at dt = tau_m/1000; {b} at dt = 10 ns"))
}

/// `|dw(dt) + dw(-dt)| <= 0.5% |dw(dt)|` over the sweep grid.
pub fn antisymmetry(shape: &SpikeShape, params: &SynapseParams, grid: &[f64]) -> Check {
    let q = Quadrature::default();
    let mut worst: f64 = 0.0;
    let mut nonzero = 0;
    for &dt in grid.iter().filter(|&&d| d > 0.0) {
        let a = pair_weight_change(params, shape, dt, &q).map_err(|e| e.to_string())?;
        let b = pair_weight_change(params, shape, -dt, &q).map_err(|e| e.to_string())?;
        if a == 0.0 && b == 0.0 {
            continue;
        }
        nonzero += 1;
        let rel = if a == 0.0 { f64::INFINITY } else { ((a + b) / a).abs() };
        worst = worst.max(rel);
    }
    verdict(
        worst < 5e-3,
        format!("antisymmetry worst {worst:.2e} over {nonzero} nonzero offsets (< 5e-3)"),
    )
}

pub fn default_antisymmetry() -> Check {
    let grid = StdpSweep::default().grid().map_err(|e| e.to_string())?;
    antisymmetry(&SpikeShape::default(), &SynapseParams::default(), &grid)
}

/// Closed-form pair law against engine accumulation at dt = 1 ns on the
/// 0.1 µs grid over `[-2 T_spk, 2 T_spk]`.
pub fn oracle_equivalence() -> Check {
    let neuron = NeuronParams::default();
    let params = SynapseParams::default();
    let q = Quadrature::default();
    let span = 2.0 * neuron.shape.duration();
    let n = (span / 0.1e-6).round() as i64;
    let mut worst: f64 = 0.0;
    let mut worst_at = 0.0;
    let mut nonzero = 0;
    for i in -n..=n {
        let dt = i as f64 * 0.1e-6;
        let closed = pair_weight_change(&params, &neuron.shape, dt, &q).map_err(|e| e.to_string())?;
        let stepped = simulate_pair(&neuron, &params, 1e-6, dt, 1e-9).map_err(|e| e.to_string())?;
        let rel = if closed == 0.0 {
            if stepped == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            nonzero += 1;
            ((stepped - closed) / closed).abs()
        };
        if rel > worst {
            worst = rel;
            worst_at = dt;
        }
    }
    verdict(
        worst < 5e-3,
        format!(
            "closed form vs stepped worst {worst:.2e} at {:.1} us over {} offsets ({nonzero} nonzero) (< 5e-3)",
            worst_at * 1e6,
            2 * n + 1
        ),
    )
}

/// A small random network with forced spikes, injected currents and
/// aggressive plasticity rates.
#[derive(Debug, Clone)]
pub struct RandomRun {
    pub n: usize,
    pub synapses: Vec<(usize, usize, f64)>,
    pub spikes: Vec<(usize, f64)>,
    pub currents: Vec<(usize, f64, f64, f64)>,
    pub eta: f64,
}

impl RandomRun {
    pub fn params(&self) -> SynapseParams {
        SynapseParams {
            eta_p: self.eta,
            eta_d: self.eta,
            ..SynapseParams::default()
        }
    }

    pub fn network(&self) -> Network {
        let mut net = Network::default();
        for i in 0..self.n {
            net.add_neuron(format!("n{i}"), NeuronParams::default());
        }
        for (k, &(pre, post, g)) in self.synapses.iter().enumerate() {
            net.add_synapse(
                format!("s{k}"),
                format!("n{pre}"),
                format!("n{post}"),
                self.params(),
                g,
            );
        }
        net
    }

    pub fn stimulus(&self) -> Stimulus {
        let mut stim = Stimulus::default();
        for &(n, t) in &self.spikes {
            stim.spike(format!("n{n}"), t);
        }
        for &(n, t0, len, amps) in &self.currents {
            stim.current(
                format!("n{n}"),
                CurrentSegment {
                    t0,
                    t1: t0 + len,
                    amps,
                },
            );
        }
        stim
    }
}

pub fn random_run() -> impl Strategy<Value = RandomRun> {
    (2usize..=5).prop_flat_map(|n| {
        let synapses = prop::collection::vec((0..n, 1..n, -9.0f64..-4.0), 1..8).prop_map(
            move |v| {
                v.into_iter()
                    .map(|(pre, k, lg)| (pre, (pre + k) % n, 10f64.powf(lg)))
                    .collect::<Vec<_>>()
            },
        );
        let spikes = prop::collection::vec((0..n, 0.0f64..95e-6), 0..40);
        // At most one segment per neuron so segments never overlap.
        let currents = prop::collection::vec(
            (0.0f64..90e-6, 0.1e-6f64..10e-6, -2e-6f64..2e-6),
            0..=n,
        )
        .prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (t0, len, amps))| (i, t0, len, amps))
                .collect::<Vec<_>>()
        });
        (Just(n), synapses, spikes, currents, 0.0f64..5.0).prop_map(
            |(n, synapses, spikes, currents, log_eta)| RandomRun {
                n,
                synapses,
                spikes,
                currents,
                eta: 10f64.powf(log_eta),
            },
        )
    })
}

/// Steps `run` 10⁴ times at 10 ns and checks every conductance after every step.
pub fn bounds_hold(run: &RandomRun) -> Check {
    let config = SimConfig {
        dt: 10e-9,
        t_end: 100e-6,
        ..SimConfig::default()
    };
    let p = run.params();
    let mut sim = Simulator::with_stimulus(&run.network(), &run.stimulus(), &config)
        .map_err(|e| e.to_string())?;
    let mut moved = 0;
    let mut on_bound = false;
    for step in 0..10_000 {
        sim.step();
        for (k, s) in sim.synapses().iter().enumerate() {
            if !(s.g >= p.g_min && s.g <= p.g_max) {
                return Err(format!("synapse {k} left bounds at step {step}: g = {}", s.g));
            }
            if s.g != run.synapses[k].2 {
                moved += 1;
            }
            on_bound |= s.g == p.g_min || s.g == p.g_max;
        }
    }
    Ok(format!("{moved} synapse-steps away from g_init, touched a bound: {on_bound}"))
}

pub fn random_bounds(cases: usize) -> Check {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let strategy = random_run();
    let mut clamped = 0;
    for _ in 0..cases {
        let run = strategy
            .new_tree(&mut runner)
            .map_err(|e| e.to_string())?
            .current();
        if bounds_hold(&run)?.ends_with("true") {
            clamped += 1;
        }
    }
    verdict(
        true,
        format!("{cases} random 10^4-step runs within [g_min, g_max] ({clamped} touched a bound)"),
    )
}

/// Three neurons wired as in the associative-learning scenario, five
/// co-stimulations then one bell-alone stimulus.
pub fn refinement_scenario(dt: f64) -> (Network, Stimulus, SimConfig) {
    let net = PavlovConfig::default().network();
    let mut stim = Stimulus::default();
    for k in 0..5 {
        let t = 10e-6 + k as f64 * 100e-6;
        stim.spike("ifn1", t).spike("ifn2", t);
    }
    stim.spike("ifn2", 510e-6);
    stim.current(
        "ifn3",
        CurrentSegment {
            t0: 560e-6,
            t1: 575e-6,
            amps: 0.9e-6,
        },
    );
    let config = SimConfig {
        dt,
        t_end: 600e-6,
        trace_decimation: 1,
        record: RecordFlags::default(),
        ..SimConfig::default()
    };
    (net, stim, config)
}

pub fn run_scenario(dt: f64) -> Result<Trace, String> {
    let (net, stim, config) = refinement_scenario(dt);
    snn_core::engine::run(&net, &stim, &config).map_err(|e| e.to_string())
}

pub fn dt_halving() -> Check {
    let dt = 10e-9;
    let coarse = run_scenario(dt)?;
    let fine = run_scenario(dt / 2.0)?;
    let own = |t: &Trace| -> Vec<(usize, f64)> {
        t.fires
            .iter()
            .filter(|f| !f.forced)
            .map(|f| (f.neuron, f.t_onset))
            .collect()
    };
    let (a, b) = (own(&coarse), own(&fine));
    if a.len() != b.len() || a.is_empty() {
        return Err(format!("fire counts differ or empty: {} vs {}", a.len(), b.len()));
    }
    let mut shift: f64 = 0.0;
    for (x, y) in a.iter().zip(&b) {
        if x.0 != y.0 {
            return Err("fire order differs".to_string());
        }
        shift = shift.max((x.1 - y.1).abs());
    }
    let ga = &coarse.rows.last().ok_or("empty trace")?.g;
    let gb = &fine.rows.last().ok_or("empty trace")?.g;
    let dg = ga
        .iter()
        .zip(gb)
        .map(|(x, y)| ((x - y) / y).abs())
        .fold(0.0, f64::max);
    verdict(
        shift < dt && dg < 0.01,
        format!(
            "{} own fires, max shift {:.2} ns (< {:.0} ns), max conductance change {:.2e} (< 1e-2)",
            a.len(),
            shift * 1e9,
            dt * 1e9,
            dg
        ),
    )
}

pub fn trace_bytes(trace: &Trace) -> Vec<u8> {
    let mut out = Vec::new();
    trace.write_csv(&mut out).unwrap();
    trace.write_fires_csv(&mut out).unwrap();
    out
}

pub fn determinism() -> Check {
    let a = run_scenario(10e-9)?;
    let b = run_scenario(10e-9)?;
    let (x, y) = (trace_bytes(&a), trace_bytes(&b));
    verdict(
        x == y && a.config_hash == b.config_hash,
        format!("two runs, {} bytes of CSV each, identical: {}", x.len(), x == y),
    )
}

/// One pre neuron driving `fan_out` post neurons through 1 MΩ each for
/// 1 ms; checks linear summation at a mid-spike step.
pub fn fan_out(fan_out: usize) -> Check {
    let params = NeuronParams::default();
    let syn = SynapseParams::default();
    let mut net = Network::default();
    net.add_neuron("pre", params);
    for k in 0..fan_out {
        let id = format!("post{k:04}");
        net.add_neuron(id.clone(), params);
        net.add_synapse(format!("s{k:04}"), "pre", id, syn, 1e-6);
    }
    let config = SimConfig {
        dt: 10e-9,
        t_end: 1e-3,
        trace_decimation: 1000,
        ..SimConfig::default()
    };
    let mut sim = Simulator::new(&net, &config).map_err(|e| e.to_string())?;
    for k in 0..100 {
        sim.schedule_spike(0, 1e-6 + k as f64 * 10e-6)
            .map_err(|e| e.to_string())?;
    }
    // Step into the plateau of the first spike.
    sim.run_until(1.2e-6);
    sim.step();
    let ports = sim.last_ports().to_vec();
    let cur = sim.last_currents();
    let single = synapse_current(1e-6, ports[0], ports[1]);
    let identical = cur.synapse.iter().all(|&i| i == single);
    let total: f64 = cur.synapse.iter().sum();
    let expected = fan_out as f64 * single;
    let rel = ((total - expected) / expected).abs();
    let machine = fan_out as f64 * f64::EPSILON;
    let outflow_ok = cur.port_outflow[0] == total;
    sim.run_until(1e-3);
    let neurons = sim.neurons();
    let same_state = neurons[1..].iter().all(|n| n == &neurons[1]);
    let fired = sim.fires().iter().filter(|f| !f.forced).count();
    verdict(
        single > 0.0 && identical && rel <= machine && outflow_ok && same_state,
        format!(
            "sum {total:.6e} A vs {fan_out} x {single:.6e} A (rel {rel:.1e} <= {machine:.1e}); \
             {fired} unforced fires; posts identical: {same_state}"
        ),
    )
}

/// Convenience for tests that only need the pass/fail bit.
pub fn require(check: Check) {
    if let Err(detail) = check {
        panic!("{detail}");
    }
}
