use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::{energy_into_load, energy_into_load_quadrature, Quadrature, SpikeShape};

/// Measured chip figure for neuron energy per spike per synapse, J, taken at
/// 1,000 synapses of about 1 MΩ each.
pub const MEASURED_ENERGY_PER_SYNAPSE: f64 = 9.3e-12;

pub const OVERHEAD_CAVEAT: &str = "the measured 9.3 pJ/spike/synapse includes opamp, \
comparator and bias power of the neuron circuit; this model accounts only for the \
energy dissipated in the resistive load";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub r_load_ohm: f64,
    pub n_synapses: u64,
    /// Closed-form load energy per spike per synapse, J.
    pub per_synapse_j: f64,
    /// Quadrature cross-check of `per_synapse_j`, J.
    pub per_synapse_quadrature_j: f64,
    pub relative_disagreement: f64,
    /// Total for all `n_synapses`, J.
    pub total_j: f64,
    pub measured_per_synapse_j: f64,
    pub below_measured: bool,
    pub caveat: String,
}

pub fn energy_report(
    shape: &SpikeShape,
    r_load: f64,
    n_synapses: u64,
    quad: &Quadrature,
) -> Result<EnergyReport> {
    if n_synapses == 0 {
        return Err(Error::param("n_synapses", "must be >= 1"));
    }
    let closed = energy_into_load(shape, r_load)?;
    let numeric = energy_into_load_quadrature(shape, r_load, quad)?;
    Ok(EnergyReport {
        r_load_ohm: r_load,
        n_synapses,
        per_synapse_j: closed,
        per_synapse_quadrature_j: numeric,
        relative_disagreement: ((closed - numeric) / closed).abs(),
        total_j: closed * n_synapses as f64,
        measured_per_synapse_j: MEASURED_ENERGY_PER_SYNAPSE,
        below_measured: closed < MEASURED_ENERGY_PER_SYNAPSE,
        caveat: OVERHEAD_CAVEAT.to_string(),
    })
}
