//! Pre-built experiments: shape calibration, spike-pair STDP
//! characterization, load energy, and associative learning.

mod calibrate;
mod energy;
mod pavlov;
mod stdp;

pub use calibrate::{
    calibrate_shape, BindingConstraint, Calibration, CalibrationOutcome, CalibrationTargets,
    CandidateLog, Infeasible,
};
pub use energy::{energy_report, EnergyReport, MEASURED_ENERGY_PER_SYNAPSE, OVERHEAD_CAVEAT};
pub use pavlov::{
    run_pavlov, PavlovConfig, PavlovReport, PavlovRun, Phase, PhaseReport, StimulusResponse,
    INPUT_BELL, INPUT_FOOD, OUTPUT, SYN_BELL, SYN_FOOD,
};
pub use stdp::{
    cross_validate, simulate_pair, stdp_curve, ProbeComparison, StdpCurve, StdpPoint, StdpSweep,
};
