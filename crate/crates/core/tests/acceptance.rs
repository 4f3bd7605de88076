//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runtime limits are part of each criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::Check;

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Vec<(&'static str, Check)>,
}

fn window() -> Vec<(&'static str, Check)> {
    vec![("window", common::window())]
}

fn pavlov() -> Vec<(&'static str, Check)> {
    vec![("pavlov", common::pavlov())]
}

fn energy() -> Vec<(&'static str, Check)> {
    vec![("energy", common::energy())]
}

fn properties() -> Vec<(&'static str, Check)> {
    vec![
        ("leak decay", common::default_leak()),
        ("stdp antisymmetry", common::default_antisymmetry()),
        ("closed form vs stepped", common::oracle_equivalence()),
        ("conductance bounds", common::random_bounds(24)),
        ("dt halving", common::dt_halving()),
        ("determinism", common::determinism()),
    ]
}

fn scale() -> Vec<(&'static str, Check)> {
    vec![("fan-out 1 -> 1000", common::fan_out(1000))]
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "over-threshold window",
            limit: Some(Duration::from_secs(1)),
            run: window,
        },
        Criterion {
            name: "associative learning",
            limit: Some(Duration::from_secs(10)),
            run: pavlov,
        },
        Criterion {
            name: "energy bound",
            limit: None,
            run: energy,
        },
        Criterion {
            name: "property suites",
            limit: None,
            run: properties,
        },
        Criterion {
            name: "scale",
            limit: Some(Duration::from_secs(60)),
            run: scale,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let results = (c.run)();
        let elapsed = start.elapsed();
        let in_time = c.limit.is_none_or(|l| elapsed < l);
        let ok = in_time && results.iter().all(|(_, r)| r.is_ok());
        if !ok {
            failed += 1;
        }
        let limit = c
            .limit
            .map(|l| format!(" (limit {} s)", l.as_secs()))
            .unwrap_or_default();
        println!(
            "{} {} [{:.2} s{limit}]",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            elapsed.as_secs_f64()
        );
        for (label, r) in &results {
            match r {
                Ok(d) => println!("    ok   {label}: {d}"),
                Err(d) => println!("    FAIL {label}: {d}"),
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
