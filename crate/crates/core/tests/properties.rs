mod common;

use proptest::prelude::*;
use snn_core::neuron::NeuronParams;
use snn_core::synapse::{pair_weight_change, SynapseParams, SynapseState};
use snn_core::waveform::{
    energy_into_load, net_potential, overdrive_integrals, pair_overdrive, spike_voltage,
    PlasticityThresholds, Quadrature, SpikeShape,
};

fn shapes() -> impl Strategy<Value = SpikeShape> {
    (
        -0.2f64..0.2,
        0.05f64..0.33,
        0.0f64..0.33,
        0.2e-6f64..1.0e-6,
        0.5e-6f64..4.0e-6,
        0.1e-6f64..1.5e-6,
    )
        .prop_map(|(v_refr, a, b, tp, tm, tau)| {
            SpikeShape::with_slew_edges(v_refr, a, b, tp, tm, tau)
        })
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

#[test]
fn acceptance_property_checks() {
    common::require(common::default_leak());
    common::require(common::default_antisymmetry());
    common::require(common::dt_halving());
    common::require(common::determinism());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn waveform_support_and_bounds(s in shapes(), t in -5e-6f64..10e-6) {
        let v = spike_voltage(&s, t).unwrap();
        if t < 0.0 || t >= s.duration() {
            prop_assert_eq!(v, s.v_refr);
        }
        prop_assert!(v <= s.v_refr + s.v_a_plus + 1e-15);
        prop_assert!(v >= s.v_refr - s.v_a_minus - 1e-15);
    }

    #[test]
    fn waveform_continuous_inside_support(s in shapes(), frac in 0.0f64..1.0) {
        // Steepest edge slope bounds the change over a tiny step.
        let t = frac * s.duration();
        let h = 1e-15;
        prop_assume!(t + h < s.duration());
        let slope = (s.v_a_plus / s.t_rise).max((s.v_a_plus + s.v_a_minus) / s.t_fall);
        let jump = (s.voltage(t + h) - s.voltage(t)).abs();
        prop_assert!(jump <= slope * h * 1.01 + 1e-12, "jump {} at {}", jump, t);
    }

    #[test]
    fn pointwise_net_antisymmetry(s in shapes(), d in -4e-6f64..4e-6, t in -5e-6f64..9e-6) {
        let a = net_potential(&s, -d, t).unwrap();
        let b = net_potential(&s, d, t + d).unwrap();
        prop_assert!((a + b).abs() < 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn aligned_pair_has_no_overdrive(s in shapes()) {
        let (pot, dep) = overdrive_integrals(
            &s, &PlasticityThresholds::default(), 0.0, &Quadrature::default()).unwrap();
        prop_assert_eq!((pot, dep), (0.0, 0.0));
    }

    #[test]
    fn pot_mirrors_dep(s in shapes(), d in 0.0f64..3e-6, v in 0.2f64..0.5) {
        let thr = PlasticityThresholds { v_tp: v, v_tm: v };
        prop_assume!(s.v_a_plus < v && s.v_a_minus < v);
        let q = Quadrature::default();
        let fwd = pair_overdrive(&s, &thr, d, &q).unwrap();
        let back = pair_overdrive(&s, &thr, -d, &q).unwrap();
        prop_assert!((fwd.pot - back.dep).abs() <= 1e-9 * fwd.pot.max(back.dep) + 1e-24,
            "{} vs {}", fwd.pot, back.dep);
        prop_assert!((fwd.dep - back.pot).abs() <= 1e-9 * fwd.dep.max(back.pot) + 1e-24);
    }

    #[test]
    fn weight_change_antisymmetry(s in shapes(), eta in 0.1f64..1e3) {
        let p = SynapseParams { eta_p: eta, eta_d: eta, ..SynapseParams::default() };
        let grid: Vec<f64> = (1..=60).map(|i| i as f64 * 0.1e-6).collect();
        common::antisymmetry(&s, &p, &grid).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn energy_scaling(s in shapes(), r in 1e3f64..1e8, k in 0.1f64..10.0, a in 0.1f64..1.0) {
        let e = energy_into_load(&s, r).unwrap();
        prop_assert!(rel(energy_into_load(&s, r * k).unwrap(), e / k) < 1e-12);
        prop_assert!(rel(energy_into_load(&s.scaled(a), r).unwrap(), a * a * e) < 1e-12);
    }

    #[test]
    fn leak_follows_exponential(v0 in -0.099f64..-0.001, div in 100.0f64..10_000.0) {
        let p = NeuronParams::default();
        common::leak(&p, v0, p.tau_m() / div, 2000).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn dead_zone_never_drifts(
        g in 1e-9f64..1e-4,
        vs in prop::collection::vec(-0.34f64..=0.34, 1..200),
        dt in 1e-10f64..1e-6,
    ) {
        let p = SynapseParams::default();
        let mut s = SynapseState { g, pre: 0, post: 1 };
        for v in vs {
            s.apply_plasticity_step(&p, v, dt);
        }
        prop_assert_eq!(s.g, g);
    }

    #[test]
    fn plasticity_steps_stay_in_bounds(
        g in 1e-9f64..1e-4,
        vs in prop::collection::vec(-2.0f64..2.0, 1..500),
        dt in 1e-9f64..1e-3,
        eta in 0.0f64..1e6,
    ) {
        let p = SynapseParams { eta_p: eta, eta_d: eta, ..SynapseParams::default() };
        let mut s = SynapseState { g, pre: 0, post: 1 };
        for v in vs {
            s.apply_plasticity_step(&p, v, dt);
            prop_assert!(s.g >= p.g_min && s.g <= p.g_max);
        }
    }

    #[test]
    fn timing_sign(d in 0.05e-6f64..0.75e-6) {
        let p = SynapseParams::default();
        let s = SpikeShape::default();
        let q = Quadrature::default();
        prop_assert!(pair_weight_change(&p, &s, d, &q).unwrap() > 0.0);
        prop_assert!(pair_weight_change(&p, &s, -d, &q).unwrap() < 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn network_conductances_stay_bounded(run in common::random_run()) {
        common::bounds_hold(&run).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn random_runs_are_deterministic(run in common::random_run()) {
        let config = snn_core::engine::SimConfig { t_end: 30e-6, ..Default::default() };
        let a = snn_core::engine::run(&run.network(), &run.stimulus(), &config).unwrap();
        let b = snn_core::engine::run(&run.network(), &run.stimulus(), &config).unwrap();
        prop_assert_eq!(common::trace_bytes(&a), common::trace_bytes(&b));
    }
}

#[test]
fn quadrature_converges_on_default_grid() {
    let s = SpikeShape::default();
    let thr = PlasticityThresholds::default();
    let q = Quadrature::default();
    let mut checked = 0;
    for i in -60..=60 {
        let d = i as f64 * 0.1e-6;
        let (p1, d1) = overdrive_integrals(&s, &thr, d, &q).unwrap();
        let (p2, d2) = overdrive_integrals(&s, &thr, d, &q.halved()).unwrap();
        for (a, b) in [(p1, p2), (d1, d2)] {
            if a != 0.0 || b != 0.0 {
                checked += 1;
                assert!(rel(a, b) < 1e-3, "dt {d}: {a} vs {b}");
            }
        }
    }
    assert!(checked >= 8);
}

#[test]
fn quadrature_converges_near_window_edges() {
    // Offsets where the overdrive is small and most sensitive to the grid.
    let s = SpikeShape::default();
    let thr = PlasticityThresholds::default();
    let q = Quadrature::default();
    for d in [0.83e-6, 0.85e-6, 0.87e-6, -0.86e-6, 0.02e-6, -0.03e-6] {
        let (p1, d1) = overdrive_integrals(&s, &thr, d, &q).unwrap();
        let (p2, d2) = overdrive_integrals(&s, &thr, d, &q.halved()).unwrap();
        assert!(rel(p1, p2) < 1e-3 && rel(d1, d2) < 1e-3, "{d}: {p1} {p2} {d1} {d2}");
    }
}
