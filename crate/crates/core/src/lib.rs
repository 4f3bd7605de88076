//! Behavioral simulator for networks of dual-mode leaky integrate-and-fire
//! neurons connected through two-terminal resistive synapses that learn by
//! voltage-threshold STDP.
//!
//! * [`waveform`]: spike shape, pair net potential, overdrive and energy
//! * [`synapse`]: conductance current and plasticity
//! * [`neuron`]: integration/firing state machine
//! * [`engine`]: fixed-step network simulation and traces
//! * [`scenarios`]: calibration, STDP curve, energy, associative learning
//! * [`config`]: JSON configuration with dotted-path overrides

pub mod config;
pub mod engine;
mod error;
pub mod neuron;
pub mod scenarios;
pub mod synapse;
pub mod waveform;

pub use error::{Error, Result};
