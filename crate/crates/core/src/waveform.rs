//! STDP-compatible spike waveform and the pairwise net-potential quantities
//! derived from it.
//!
//! A spike is a short positive pulse of amplitude `v_a_plus` above the
//! refractory level followed by a negative tail that starts `v_a_minus`
//! below it and relaxes back exponentially. Finite driver slew is modelled
//! with linear edge ramps that sit inside the positive pulse:
//!
//! ```text
//!        ___________
//!       /           \
//! _____/             \          ______________ v_refr
//!                     \      .-'
//!                      \_.-'
//!      |<-- t_plus -->|<----- t_minus ----->|
//! ```
//!
//! All pair quantities use the convention that the pre-synaptic spike starts
//! at `t = 0` and the post-synaptic spike at `t = delta_t`, and that the net
//! potential across the synapse is `V_post - V_pre`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Driver rising-edge slew rate, V/s.
pub const RISE_SLEW_RATE: f64 = 784e6;
/// Driver falling-edge slew rate, V/s.
pub const FALL_SLEW_RATE: f64 = 500e6;

/// Parameterized action-potential waveform, all amplitudes relative to `v_refr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpikeShape {
    pub v_refr: f64,
    pub v_a_plus: f64,
    pub v_a_minus: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    pub tau_decay: f64,
    pub t_rise: f64,
    pub t_fall: f64,
}

impl Default for SpikeShape {
    /// The calibrated shape reproduced by [`crate::scenarios::calibrate_shape`]
    /// with [`crate::scenarios::CalibrationTargets::default`].
    fn default() -> Self {
        SpikeShape::with_slew_edges(0.0, 0.3, 0.1, 0.5e-6, 2.5e-6, DEFAULT_TAU_DECAY)
    }
}

/// Tail time constant found by the default calibration search.
pub(crate) const DEFAULT_TAU_DECAY: f64 = 4.368767722778938e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    Rest,
    Rise,
    Plateau,
    Fall,
    Tail,
}

impl SpikeShape {
    /// Builds a shape whose edge ramps follow the driver slew rates.
    pub fn with_slew_edges(
        v_refr: f64,
        v_a_plus: f64,
        v_a_minus: f64,
        t_plus: f64,
        t_minus: f64,
        tau_decay: f64,
    ) -> Self {
        SpikeShape {
            v_refr,
            v_a_plus,
            v_a_minus,
            t_plus,
            t_minus,
            tau_decay,
            t_rise: v_a_plus / RISE_SLEW_RATE,
            t_fall: (v_a_plus + v_a_minus) / FALL_SLEW_RATE,
        }
    }

    /// Total spike duration `t_plus + t_minus`.
    pub fn duration(&self) -> f64 {
        self.t_plus + self.t_minus
    }

    /// Same timing with both amplitudes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        SpikeShape {
            v_a_plus: self.v_a_plus * factor,
            v_a_minus: self.v_a_minus * factor,
            ..*self
        }
    }

    /// Structural violations (durations, edges). Thresholds are checked by
    /// [`validate_shape`].
    pub fn violations(&self) -> Vec<ShapeViolation> {
        let mut out = Vec::new();
        let fields = [
            ("v_refr", self.v_refr),
            ("v_a_plus", self.v_a_plus),
            ("v_a_minus", self.v_a_minus),
            ("t_plus", self.t_plus),
            ("t_minus", self.t_minus),
            ("tau_decay", self.tau_decay),
            ("t_rise", self.t_rise),
            ("t_fall", self.t_fall),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                out.push(ShapeViolation::NonFinite(name));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (name, value) in [
            ("v_a_plus", self.v_a_plus),
            ("v_a_minus", self.v_a_minus),
            ("t_minus", self.t_minus),
            ("t_rise", self.t_rise),
            ("t_fall", self.t_fall),
        ] {
            if value < 0.0 {
                out.push(ShapeViolation::Negative { field: name, value });
            }
        }
        for (name, value) in [("t_plus", self.t_plus), ("tau_decay", self.tau_decay)] {
            if value <= 0.0 {
                out.push(ShapeViolation::NonPositive { field: name, value });
            }
        }
        if self.t_rise + self.t_fall > self.t_plus {
            out.push(ShapeViolation::EdgesExceedPulse {
                t_rise: self.t_rise,
                t_fall: self.t_fall,
                t_plus: self.t_plus,
            });
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidShape(v))
        }
    }

    /// Port voltage `t` seconds after spike onset. Assumes a structurally
    /// valid shape; use [`spike_voltage`] for a checked evaluation.
    pub fn voltage(&self, t: f64) -> f64 {
        self.eval(self.segment(t), t)
    }

    /// Segment boundaries `[0, rise end, fall start, t_plus, T_spk]`.
    pub(crate) fn breakpoints(&self) -> [f64; 5] {
        [
            0.0,
            self.t_rise,
            self.t_plus - self.t_fall,
            self.t_plus,
            self.duration(),
        ]
    }

    fn segment(&self, t: f64) -> Segment {
        if !(t >= 0.0 && t < self.duration()) {
            Segment::Rest
        } else if t < self.t_rise {
            Segment::Rise
        } else if t < self.t_plus - self.t_fall {
            Segment::Plateau
        } else if t < self.t_plus {
            Segment::Fall
        } else {
            Segment::Tail
        }
    }

    /// Evaluates the formula of `seg` at `t`. Each formula extends
    /// continuously to the closed segment, which lets quadrature sample
    /// segment end points without picking up the neighbour's value.
    fn eval(&self, seg: Segment, t: f64) -> f64 {
        match seg {
            Segment::Rest => self.v_refr,
            Segment::Rise => self.v_refr + self.v_a_plus * (t / self.t_rise),
            Segment::Plateau => self.v_refr + self.v_a_plus,
            Segment::Fall => {
                let s = (t - (self.t_plus - self.t_fall)) / self.t_fall;
                self.v_refr + self.v_a_plus - (self.v_a_plus + self.v_a_minus) * s
            }
            Segment::Tail => {
                self.v_refr - self.v_a_minus * (-(t - self.t_plus) / self.tau_decay).exp()
            }
        }
    }

    /// Visits `[t0, t1, v(t0), v(t1)]` for every sub-step of a
    /// breakpoint-aligned grid with step at most `step` over `[0, T_spk]`.
    fn for_each_substep(&self, step: f64, mut visit: impl FnMut(f64, f64, f64, f64)) {
        let bps = self.breakpoints();
        for w in bps.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let seg = self.segment(0.5 * (a + b));
            substeps(a, b, step, |t| self.eval(seg, t), &mut visit);
        }
    }
}

fn substeps(
    a: f64,
    b: f64,
    step: f64,
    f: impl Fn(f64) -> f64,
    visit: &mut impl FnMut(f64, f64, f64, f64),
) {
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut t0 = a;
    let mut f0 = f(a);
    for i in 1..=n {
        let t1 = if i == n { b } else { a + i as f64 * h };
        let f1 = f(t1);
        visit(t0, t1, f0, f1);
        t0 = t1;
        f0 = f1;
    }
}

/// Programming thresholds of a resistive synapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlasticityThresholds {
    /// Net potential above which resistance decreases.
    pub v_tp: f64,
    /// Net potential below `-v_tm` increases resistance.
    pub v_tm: f64,
}

impl Default for PlasticityThresholds {
    fn default() -> Self {
        PlasticityThresholds {
            v_tp: 0.34,
            v_tm: 0.34,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeViolation {
    NonFinite(&'static str),
    Negative { field: &'static str, value: f64 },
    NonPositive { field: &'static str, value: f64 },
    EdgesExceedPulse { t_rise: f64, t_fall: f64, t_plus: f64 },
    NonPositiveThreshold { field: &'static str, value: f64 },
    /// A single spike against a resting partner would already potentiate.
    LoneSpikePotentiates { v_a_plus: f64, v_tp: f64 },
    /// A single spike against a resting partner would already depress.
    LoneSpikeDepresses { v_a_minus: f64, v_tm: f64 },
}

impl fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeViolation::NonFinite(field) => write!(f, "{field} is not finite"),
            ShapeViolation::Negative { field, value } => {
                write!(f, "{field} = {value} must be >= 0")
            }
            ShapeViolation::NonPositive { field, value } => {
                write!(f, "{field} = {value} must be > 0")
            }
            ShapeViolation::EdgesExceedPulse {
                t_rise,
                t_fall,
                t_plus,
            } => write!(
                f,
                "edges overlap: t_rise + t_fall = {} exceeds t_plus = {t_plus}",
                t_rise + t_fall
            ),
            ShapeViolation::NonPositiveThreshold { field, value } => {
                write!(f, "threshold {field} = {value} must be > 0")
            }
            ShapeViolation::LoneSpikePotentiates { v_a_plus, v_tp } => write!(
                f,
                "lone spike would potentiate: v_a_plus = {v_a_plus} >= v_tp = {v_tp}"
            ),
            ShapeViolation::LoneSpikeDepresses { v_a_minus, v_tm } => write!(
                f,
                "lone spike would depress: v_a_minus = {v_a_minus} >= v_tm = {v_tm}"
            ),
        }
    }
}

/// Returns every violated invariant of `shape` under `thr`, including the
/// requirement that a single spike stays below both programming thresholds.
pub fn validate_shape(
    shape: &SpikeShape,
    thr: &PlasticityThresholds,
) -> std::result::Result<(), Vec<ShapeViolation>> {
    let mut out = shape.violations();
    for (field, value) in [("v_tp", thr.v_tp), ("v_tm", thr.v_tm)] {
        if !(value > 0.0) || !value.is_finite() {
            out.push(ShapeViolation::NonPositiveThreshold { field, value });
        }
    }
    if shape.v_a_plus >= thr.v_tp {
        out.push(ShapeViolation::LoneSpikePotentiates {
            v_a_plus: shape.v_a_plus,
            v_tp: thr.v_tp,
        });
    }
    if shape.v_a_minus >= thr.v_tm {
        out.push(ShapeViolation::LoneSpikeDepresses {
            v_a_minus: shape.v_a_minus,
            v_tm: thr.v_tm,
        });
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn checked(shape: &SpikeShape, thr: &PlasticityThresholds) -> Result<()> {
    validate_shape(shape, thr).map_err(Error::InvalidShape)
}

pub fn spike_voltage(shape: &SpikeShape, t: f64) -> Result<f64> {
    shape.validate()?;
    Ok(shape.voltage(t))
}

/// `V_post(t) - V_pre(t)` with the pre spike at 0 and the post spike at `delta_t`.
pub fn net_potential(shape: &SpikeShape, delta_t: f64, t: f64) -> Result<f64> {
    shape.validate()?;
    Ok(shape.voltage(t - delta_t) - shape.voltage(t))
}

/// Fixed-step trapezoid quadrature. Panels are aligned to the waveform's
/// segment boundaries and subdivided into equal sub-steps no longer than
/// `step`, so edge discontinuities never fall inside a sub-step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Quadrature {
    pub step: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { step: 1e-9 }
    }
}

impl Quadrature {
    pub fn validate(&self) -> Result<()> {
        if self.step > 0.0 && self.step.is_finite() {
            Ok(())
        } else {
            Err(Error::param("quadrature.step", "must be finite and > 0"))
        }
    }

    pub fn halved(&self) -> Self {
        Quadrature {
            step: self.step / 2.0,
        }
    }
}

/// Everything the plasticity model needs to know about one spike pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairOverdrive {
    pub delta_t: f64,
    /// `∫ max(0, V_net - v_tp) dt`, V·s.
    pub pot: f64,
    /// `∫ max(0, -V_net - v_tm) dt`, V·s.
    pub dep: f64,
    /// Measure of `{t : V_net(t) > v_tp}`, s.
    pub pot_window: f64,
    /// Measure of `{t : V_net(t) < -v_tm}`, s.
    pub dep_window: f64,
    /// Largest sampled net potential, V.
    pub peak: f64,
    /// Smallest sampled net potential, V.
    pub trough: f64,
}

/// Visits every sub-step of the union of both spikes' supports with the net
/// potential evaluated segment-wise on each side.
fn for_each_pair_substep(
    shape: &SpikeShape,
    delta_t: f64,
    step: f64,
    mut visit: impl FnMut(f64, f64, f64, f64),
) {
    let mut bps: Vec<f64> = shape
        .breakpoints()
        .iter()
        .flat_map(|&b| [b, b + delta_t])
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let pre = shape.segment(mid);
        let post = shape.segment(mid - delta_t);
        substeps(
            a,
            b,
            step,
            |t| shape.eval(post, t - delta_t) - shape.eval(pre, t),
            &mut visit,
        );
    }
}

/// Area under the positive part of the line through `(0, a)` and `(h, b)`.
fn positive_area(h: f64, a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        0.5 * h * (a + b)
    } else if a <= 0.0 && b <= 0.0 {
        0.0
    } else {
        let (p, n) = (a.max(b), a.min(b));
        0.5 * h * p * p / (p - n)
    }
}

/// Length of the sub-interval where the same line is strictly positive.
fn positive_measure(h: f64, a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        h
    } else if a <= 0.0 && b <= 0.0 {
        0.0
    } else {
        let (p, n) = (a.max(b), a.min(b));
        h * p / (p - n)
    }
}

/// Overdrive integrals, over-threshold windows and net-potential extremes of
/// a spike pair, from one pass of breakpoint-aligned quadrature.
pub fn pair_overdrive(
    shape: &SpikeShape,
    thr: &PlasticityThresholds,
    delta_t: f64,
    quad: &Quadrature,
) -> Result<PairOverdrive> {
    checked(shape, thr)?;
    quad.validate()?;
    let mut out = PairOverdrive {
        delta_t,
        pot: 0.0,
        dep: 0.0,
        pot_window: 0.0,
        dep_window: 0.0,
        peak: f64::NEG_INFINITY,
        trough: f64::INFINITY,
    };
    for_each_pair_substep(shape, delta_t, quad.step, |t0, t1, v0, v1| {
        let h = t1 - t0;
        let (p0, p1) = (v0 - thr.v_tp, v1 - thr.v_tp);
        let (d0, d1) = (-v0 - thr.v_tm, -v1 - thr.v_tm);
        out.pot += positive_area(h, p0, p1);
        out.dep += positive_area(h, d0, d1);
        out.pot_window += positive_measure(h, p0, p1);
        out.dep_window += positive_measure(h, d0, d1);
        out.peak = out.peak.max(v0).max(v1);
        out.trough = out.trough.min(v0).min(v1);
    });
    Ok(out)
}

/// `(pot, dep)` exposure integrals in V·s.
pub fn overdrive_integrals(
    shape: &SpikeShape,
    thr: &PlasticityThresholds,
    delta_t: f64,
    quad: &Quadrature,
) -> Result<(f64, f64)> {
    let o = pair_overdrive(shape, thr, delta_t, quad)?;
    Ok((o.pot, o.dep))
}

/// Total time the pair's net potential spends above `v_tp`.
pub fn over_threshold_window(
    shape: &SpikeShape,
    thr: &PlasticityThresholds,
    delta_t: f64,
    quad: &Quadrature,
) -> Result<f64> {
    Ok(pair_overdrive(shape, thr, delta_t, quad)?.pot_window)
}

fn check_load(r_load: f64) -> Result<()> {
    if r_load > 0.0 && !r_load.is_nan() {
        Ok(())
    } else {
        Err(Error::param("r_load", format!("{r_load} must be > 0")))
    }
}

/// Energy one spike dissipates in a resistive load held at `v_refr` on the
/// far side, closed form over rise ramp, plateau, fall ramp and tail.
pub fn energy_into_load(shape: &SpikeShape, r_load: f64) -> Result<f64> {
    shape.validate()?;
    check_load(r_load)?;
    let a = shape.v_a_plus;
    let b = shape.v_a_minus;
    let plateau = shape.t_plus - shape.t_rise - shape.t_fall;
    // A linear ramp from x to y over L contributes L(x² + xy + y²)/3.
    let rise = a * a * shape.t_rise / 3.0;
    let flat = a * a * plateau;
    let fall = shape.t_fall * (a * a - a * b + b * b) / 3.0;
    let tail = -b * b * shape.tau_decay / 2.0 * (-2.0 * shape.t_minus / shape.tau_decay).exp_m1();
    Ok((rise + flat + fall + tail) / r_load)
}

/// Quadrature counterpart of [`energy_into_load`].
pub fn energy_into_load_quadrature(
    shape: &SpikeShape,
    r_load: f64,
    quad: &Quadrature,
) -> Result<f64> {
    shape.validate()?;
    check_load(r_load)?;
    quad.validate()?;
    let mut sum = 0.0;
    shape.for_each_substep(quad.step, |t0, t1, v0, v1| {
        let (d0, d1) = (v0 - shape.v_refr, v1 - shape.v_refr);
        // Square of the linear interpolant, integrated exactly.
        sum += (t1 - t0) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
    });
    Ok(sum / r_load)
}
