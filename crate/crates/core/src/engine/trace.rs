use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::neuron::Mode;

/// Which per-row columns a run records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordFlags {
    /// Membrane voltage and mode per neuron.
    pub v_mem: bool,
    /// Port voltage per neuron.
    pub ports: bool,
    /// Conductance (and resistance) per synapse.
    pub g: bool,
    /// Fire events.
    pub fires: bool,
}

impl Default for RecordFlags {
    fn default() -> Self {
        RecordFlags {
            v_mem: true,
            ports: false,
            g: true,
            fires: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FireEvent {
    pub neuron: usize,
    pub t_onset: f64,
    /// Started by the stimulus rather than by a threshold crossing.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceRow {
    pub t: f64,
    pub v_mem: Vec<f64>,
    pub mode: Vec<Mode>,
    pub ports: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub neuron_ids: Vec<String>,
    pub synapse_ids: Vec<String>,
    pub record: RecordFlags,
    pub rows: Vec<TraceRow>,
    pub fires: Vec<FireEvent>,
    /// SHA-256 of the serialized run inputs.
    pub config_hash: String,
}

impl Trace {
    pub fn header(&self) -> Vec<String> {
        let mut cols = vec!["t_s".to_string()];
        if self.record.v_mem {
            for id in &self.neuron_ids {
                cols.push(format!("v_mem_{id}"));
                cols.push(format!("mode_{id}"));
            }
        }
        if self.record.ports {
            for id in &self.neuron_ids {
                cols.push(format!("v_port_{id}"));
            }
        }
        if self.record.g {
            for id in &self.synapse_ids {
                cols.push(format!("g_S_{id}"));
            }
            for id in &self.synapse_ids {
                cols.push(format!("r_ohm_{id}"));
            }
        }
        cols
    }

    /// Row CSV: comma separated, LF line endings, shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header().join(","))?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            push_f64(&mut line, row.t);
            for (v, m) in row.v_mem.iter().zip(&row.mode) {
                line.push(',');
                push_f64(&mut line, *v);
                line.push(',');
                line.push_str(m.as_str());
            }
            for v in &row.ports {
                line.push(',');
                push_f64(&mut line, *v);
            }
            for g in &row.g {
                line.push(',');
                push_f64(&mut line, *g);
            }
            for g in &row.g {
                line.push(',');
                push_f64(&mut line, 1.0 / g);
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Fire-event CSV with columns `neuron_id,t_onset_s`.
    pub fn write_fires_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "neuron_id,t_onset_s")?;
        for f in &self.fires {
            writeln!(w, "{},{}", self.neuron_ids[f.neuron], f.t_onset)?;
        }
        Ok(())
    }

    pub fn fires_of(&self, neuron: usize) -> impl Iterator<Item = &FireEvent> {
        self.fires.iter().filter(move |f| f.neuron == neuron)
    }
}

fn push_f64(buf: &mut String, v: f64) {
    use std::fmt::Write as _;
    let _ = write!(buf, "{v}");
}
