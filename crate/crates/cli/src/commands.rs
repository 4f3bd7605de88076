use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use snn_core::config::{NetworkDoc, SimulatorConfig};
use snn_core::engine::{self, Stimulus, Trace};
use snn_core::scenarios::{
    calibrate_shape, cross_validate, energy_report, run_pavlov, stdp_curve, CalibrationOutcome,
};
use snn_core::waveform::{energy_into_load, pair_overdrive, PairOverdrive, SpikeShape};

use crate::output::{read_text, OutputSet};
use crate::{Common, Failure, RunArgs};

struct Loaded {
    config: SimulatorConfig,
    inputs: Vec<String>,
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

/// Reads the config (plus optional network/stimulus files), applies the
/// overrides in order (`--set`, then `--dt`, then `--decimate`) and validates.
fn load(c: &Common, network: Option<&Path>, stimulus: Option<&Path>) -> Result<Loaded, Failure> {
    let mut inputs = Vec::new();
    let mut base = match &c.config {
        Some(path) => {
            inputs.push(path.display().to_string());
            SimulatorConfig::from_json_str(&read_text(path)?)?
        }
        None => SimulatorConfig::default(),
    };
    if let Some(path) = network {
        inputs.push(path.display().to_string());
        base.network = Some(parse::<NetworkDoc>(path, &read_text(path)?)?);
    }
    if let Some(path) = stimulus {
        inputs.push(path.display().to_string());
        base.stimulus = Some(parse::<Stimulus>(path, &read_text(path)?)?);
    }
    let mut overrides = c.overrides.clone();
    if let Some(dt) = c.dt {
        overrides.push(format!("sim.dt={dt:e}"));
    }
    if let Some(n) = c.decimate {
        overrides.push(format!("sim.trace_decimation={n}"));
    }
    let text = serde_json::to_string(&base).map_err(|e| Failure::Validation(e.to_string()))?;
    let config = SimulatorConfig::resolve(Some(&text), &overrides)?;
    Ok(Loaded { config, inputs })
}

fn out_dir(c: &Common) -> Result<&Path, Failure> {
    c.out
        .as_deref()
        .ok_or_else(|| Failure::Validation("--out DIR is required for this command".to_string()))
}

fn grid(start: f64, stop: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(move |i| start + i as f64 * step)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Validation(e.to_string()))
}

/// Writes one line to stdout. A closed pipe (`| head`) is not an error.
fn emit(line: &str) -> Result<(), Failure> {
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{line}").and_then(|()| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure::Io(format!("stdout: {e}")))
        }
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct WaveformSummary {
    shape: SpikeShape,
    duration_s: f64,
    v_tp: f64,
    v_tm: f64,
    sample_step_s: f64,
    pair: PairOverdrive,
    /// Over-threshold window of the pair, s.
    window_s: f64,
    r_load_ohm: f64,
    energy_per_spike_j: f64,
}

pub fn waveform(c: &Common) -> Result<(), Failure> {
    let dir = out_dir(c)?;
    let Loaded { config, inputs } = load(c, None, None)?;
    let shape = config.shape;
    let w = config.waveform;

    let mut single = String::from("t_s,v_spk_V\n");
    for t in grid(w.t_start, w.t_stop, w.t_step) {
        let _ = writeln!(single, "{},{}", t, shape.voltage(t));
    }

    let d = w.pair_delta_t;
    let mut pair = String::from("t_s,v_pre_V,v_post_V,v_net_V\n");
    for t in grid(w.t_start + d.min(0.0), w.t_stop + d.max(0.0), w.t_step) {
        let pre = shape.voltage(t);
        let post = shape.voltage(t - d);
        let _ = writeln!(pair, "{},{},{},{}", t, pre, post, post - pre);
    }

    let o = pair_overdrive(&shape, &config.thresholds, d, &config.quadrature)?;
    let summary = WaveformSummary {
        shape,
        duration_s: shape.duration(),
        v_tp: config.thresholds.v_tp,
        v_tm: config.thresholds.v_tm,
        sample_step_s: w.t_step,
        pair: o,
        window_s: o.pot_window + o.dep_window,
        r_load_ohm: config.energy.r_load,
        energy_per_spike_j: energy_into_load(&shape, config.energy.r_load)?,
    };

    let mut out = OutputSet::create(dir)?;
    out.write("waveform.csv", single.as_bytes())?;
    out.write("pair.csv", pair.as_bytes())?;
    out.write_json("waveform_summary.json", &summary)?;
    out.finish("waveform", &config, inputs)?;
    emit(&format!(
        "waveform: window_s={} peak_V={} trough_V={}",
        summary.window_s, o.peak, o.trough
    ))?;
    Ok(())
}

pub fn stdp(c: &Common) -> Result<(), Failure> {
    let dir = out_dir(c)?;
    let Loaded { config, inputs } = load(c, None, None)?;
    let sweep = &config.stdp;
    let params = config.synapse_params();
    let curve = stdp_curve(
        &config.shape,
        &params,
        &sweep.grid()?,
        sweep.g_ref,
        &config.quadrature,
    )?;
    let probes = cross_validate(&config.neuron_params(), &params, sweep, &config.quadrature)?;

    let mut out = OutputSet::create(dir)?;
    out.write("stdp.csv", curve.to_csv().as_bytes())?;
    out.write_json("stdp_probes.json", &probes)?;
    out.finish("stdp", &config, inputs)?;
    let worst = probes.iter().map(|p| p.relative_error).fold(0.0, f64::max);
    emit(&format!(
        "stdp: points={} probes={} worst_probe_relative_error={worst}",
        curve.points.len(),
        probes.len()
    ))?;
    Ok(())
}

fn write_trace(out: &mut OutputSet, trace: &Trace) -> Result<(), Failure> {
    let mut rows = Vec::new();
    trace
        .write_csv(&mut rows)
        .map_err(|e| Failure::Io(e.to_string()))?;
    out.write("trace.csv", &rows)?;
    let mut fires = Vec::new();
    trace
        .write_fires_csv(&mut fires)
        .map_err(|e| Failure::Io(e.to_string()))?;
    out.write("fires.csv", &fires)
}

pub fn run(r: &RunArgs) -> Result<(), Failure> {
    let dir = out_dir(&r.common)?;
    let Loaded { config, inputs } = load(&r.common, r.network.as_deref(), r.stimulus.as_deref())?;
    let network = config.network()?;
    let trace = engine::run(&network, &config.stimulus(), &config.sim)?;

    let mut out = OutputSet::create(dir)?;
    write_trace(&mut out, &trace)?;
    out.finish("run", &config, inputs)?;
    emit(&format!(
        "run: rows={} fires={} config_hash={}",
        trace.rows.len(),
        trace.fires.len(),
        trace.config_hash
    ))?;
    Ok(())
}

pub fn pavlov(c: &Common) -> Result<(), Failure> {
    let dir = out_dir(c)?;
    let Loaded { config, inputs } = load(c, None, None)?;
    let run = run_pavlov(&config.pavlov_config())?;

    let mut out = OutputSet::create(dir)?;
    out.write_json("pavlov_report.json", &run.report)?;
    write_trace(&mut out, &run.trace)?;
    out.finish("pavlov", &config, inputs)?;
    let r = &run.report;
    emit(&format!(
        "pavlov: passed={} before_ok={} training_ok={} after_ok={} trials_used={} r2_final_ohm={}",
        r.passed, r.before_ok, r.training_ok, r.after_ok, r.trials_used, r.r2_final_ohm
    ))?;
    Ok(())
}

pub fn energy(c: &Common) -> Result<(), Failure> {
    let Loaded { config, inputs } = load(c, None, None)?;
    let e = &config.energy;
    let report = energy_report(&config.shape, e.r_load, e.n_synapses, &config.quadrature)?;
    if let Some(dir) = &c.out {
        let mut out = OutputSet::create(dir)?;
        out.write_json("energy_report.json", &report)?;
        out.finish("energy", &config, inputs)?;
    }
    emit(&to_json(&report)?)?;
    Ok(())
}

pub fn calibrate(c: &Common) -> Result<(), Failure> {
    let Loaded { config, inputs } = load(c, None, None)?;
    let outcome = calibrate_shape(&config.calibrate, &config.quadrature)?;
    if let Some(dir) = &c.out {
        let mut out = OutputSet::create(dir)?;
        out.write_json("calibration.json", &outcome)?;
        out.finish("calibrate", &config, inputs)?;
    }
    emit(&to_json(&outcome)?)?;
    match outcome {
        CalibrationOutcome::Calibrated(_) => Ok(()),
        CalibrationOutcome::Infeasible(i) => Err(Failure::Validation(i.to_string())),
    }
}
