//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI};
use std::process::ExitCode;
use std::time::Instant;

use bellwb::analysis::{
    check_p_ppt_bound, ns_condition_value, violation_factor_dur, violation_factor_ghz,
    DEFAULT_RESTARTS,
};
use bellwb::ccp::{
    advantage_cell, simulate_protocol, CcpTask, Protocol, SettingsCount, REFERENCE_RATIOS,
};
use bellwb::linalg::{hermitian_eigenvalues, trace_product};
use bellwb::quantum::{
    bell_operator_closed, bell_operator_sum, dur_state, generalized_ghz, ghz_state, is_p_ppt,
    partial_transpose_checks, quantum_value, quantum_value_with, random, twirled_bell_operator,
    DensityMatrix, GhzSign, OperatorForm, Partition,
};
use bellwb::scenario::{lhv_bound_bruteforce, BellScenario};
use bellwb_cli::{execute, Cli};
use clap::Parser;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// `sin(pi/2M)^-N cos(pi/2M)`, written out independently of the library.
fn lr_oracle(n: usize, m: usize) -> f64 {
    let h = PI / (2.0 * m as f64);
    h.sin().powi(-(n as i32)) * h.cos()
}

fn scenario(n: usize, m: usize) -> BellScenario {
    BellScenario::new(n, m).expect("valid scenario")
}

fn ghz(n: usize) -> DensityMatrix {
    ghz_state(n, GhzSign::Plus).unwrap().density()
}

fn verdict(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn lhv_oracle_agreement() -> Outcome {
    let grid = [
        (2, 2),
        (2, 3),
        (2, 4),
        (2, 5),
        (3, 2),
        (3, 3),
        (3, 4),
        (4, 2),
        (4, 3),
    ];
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (n, m) in grid {
        let (brute, _) = lhv_bound_bruteforce(&scenario(n, m)).map_err(|e| e.to_string())?;
        let diff = (brute - lr_oracle(n, m)).abs();
        worst = worst.max(diff);
        if diff > 1e-9 {
            failures.push(format!("({n},{m}) brute {brute} vs {}", lr_oracle(n, m)));
        }
    }
    verdict(
        failures,
        format!("{} scenarios, max |diff| {worst:.1e}", grid.len()),
    )
}

fn operator_grid() -> impl Iterator<Item = (usize, usize)> {
    (2..=4).flat_map(|n| (2..=5).map(move |m| (n, m)))
}

fn bell_operator_identity() -> Outcome {
    let mut failures = Vec::new();
    let (mut worst_diff, mut worst_rel) = (0.0f64, 0.0f64);
    for (n, m) in operator_grid() {
        let s = scenario(n, m);
        let sum = bell_operator_sum(&s).map_err(|e| e.to_string())?;
        let closed = bell_operator_closed(&s).map_err(|e| e.to_string())?;
        let expected = 0.5 * (m as f64).powi(2 * n as i32);
        let diff = sum.max_abs_diff(&closed).unwrap();
        let traces = [
            trace_product(&sum, &closed).unwrap().re,
            trace_product(&closed, &closed).unwrap().re,
            trace_product(&sum, &sum).unwrap().re,
        ];
        let rel = traces
            .iter()
            .map(|t| (t - expected).abs() / expected)
            .fold(0.0, f64::max);
        worst_diff = worst_diff.max(diff);
        worst_rel = worst_rel.max(rel);
        if diff > 1e-9 || rel > 1e-6 {
            failures.push(format!("({n},{m}) diff {diff:.1e} trace rel {rel:.1e}"));
        }
    }
    verdict(
        failures,
        format!("12 scenarios, max |B'-B| {worst_diff:.1e}, max trace rel err {worst_rel:.1e}"),
    )
}

fn bell_operator_spectrum() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (n, m) in operator_grid() {
        let s = scenario(n, m);
        let ev = hermitian_eigenvalues(&bell_operator_sum(&s).unwrap()).unwrap();
        let half = 0.5 * (m as f64).powi(n as i32);
        let dim = ev.len();
        let residual = ev
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let target = if i == 0 {
                    -half
                } else if i == dim - 1 {
                    half
                } else {
                    0.0
                };
                (l - target).abs()
            })
            .fold(0.0, f64::max);
        worst = worst.max(residual);
        if residual > 1e-8 {
            failures.push(format!("({n},{m}) residual {residual:.1e}"));
        }
    }
    verdict(failures, format!("12 scenarios, max residual {worst:.1e}"))
}

fn closed_form_violation_factors() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for n in 2..=6 {
        let rho = ghz(n);
        for (m, formula) in [
            (2, 2f64.powf((n as f64 - 1.0) / 2.0)),
            (3, 1.5f64.powi(n as i32) / 3f64.sqrt()),
        ] {
            let s = scenario(n, m);
            let value = quantum_value_with(&s, &rho, OperatorForm::Sum).unwrap();
            let v = value / lr_oracle(n, m);
            worst = worst.max((v - formula).abs());
            if (v - formula).abs() > 1e-9 {
                failures.push(format!("V({n},{m}) operator {v} vs {formula}"));
            }
        }
        let limit = 0.5 * (PI / 2.0).powi(n as i32);
        let v = violation_factor_ghz(&scenario(n, 1 << 14));
        let rel = (v - limit).abs() / limit;
        if rel > 1e-6 {
            failures.push(format!("V({n},2^14) {v} vs limit {limit} (rel {rel:.1e})"));
        }
    }
    verdict(
        failures,
        format!("N = 2..6, max |V - formula| {worst:.1e}, limit within 1e-6"),
    )
}

fn table_reproduction() -> Outcome {
    let columns = [
        SettingsCount::Finite(2),
        SettingsCount::Finite(3),
        SettingsCount::Finite(4),
        SettingsCount::Finite(5),
        SettingsCount::Infinite,
    ];
    let mut flagged = Vec::new();
    let mut worst = 0.0f64;
    for (row, printed_row) in REFERENCE_RATIOS.iter().enumerate() {
        let n = row + 2;
        for (settings, &printed) in columns.iter().zip(printed_row) {
            let cell = advantage_cell(n, *settings).map_err(|e| e.to_string())?;
            let diff = (cell.ratio - printed).abs();
            worst = worst.max(diff);
            if diff > 5e-4 || !cell.converged {
                flagged.push(format!(
                    "N={n} M={settings}: computed {:.6} printed {printed:.4}",
                    cell.ratio
                ));
            }
        }
    }
    verdict(flagged, format!("20 cells, max |diff| {worst:.1e}"))
}

fn dur_thresholds() -> Outcome {
    let mut failures = Vec::new();
    for (m, expected) in [(3, 7), (5, 6)] {
        let first =
            (3..=8).find(|&n| violation_factor_dur(&scenario(n, m), 0.0, true).unwrap() > 1.0);
        if first != Some(expected) {
            failures.push(format!(
                "M={m}: first violating N {first:?}, expected {expected}"
            ));
        }
    }
    let mut worst = 0.0f64;
    for m in [3, 5] {
        for n in 3..=6 {
            let s = scenario(n, m);
            for alpha in [0.0, 0.9] {
                let rho = dur_state(n, alpha).unwrap();
                let tilde = twirled_bell_operator(&s, alpha, OperatorForm::Sum).unwrap();
                let twirled = trace_product(&tilde, rho.matrix()).unwrap().re / lr_oracle(n, m);
                let plain =
                    quantum_value_with(&s, &rho, OperatorForm::Sum).unwrap() / lr_oracle(n, m);
                let d1 = (twirled - violation_factor_dur(&s, alpha, true).unwrap()).abs();
                let d2 = (plain - violation_factor_dur(&s, alpha, false).unwrap()).abs();
                worst = worst.max(d1).max(d2);
                if d1 > 1e-9 || d2 > 1e-9 {
                    failures.push(format!(
                        "({n},{m},alpha={alpha}) twirled diff {d1:.1e} plain diff {d2:.1e}"
                    ));
                }
            }
        }
    }
    verdict(
        failures,
        format!(
            "first violation N=7 (M=3), N=6 (M=5); operator vs closed form max diff {worst:.1e}"
        ),
    )
}

fn ppt_suite() -> Outcome {
    let mut failures = Vec::new();
    for n in [3, 4] {
        let rho = dur_state(n, 0.0).unwrap();
        let split = Partition::full_split(n).unwrap();
        for check in partial_transpose_checks(&rho, &split).unwrap() {
            if check.min_eigenvalue < -1e-10 {
                failures.push(format!(
                    "dur N={n} transpose {} min eigenvalue {:.3}",
                    check.transposed, check.min_eigenvalue
                ));
            }
        }
        for m in 2..=5 {
            let value = quantum_value(&scenario(n, m), &rho).unwrap();
            let bound = (m as f64 / 2.0).powi(n as i32);
            if value.abs() > bound + 1e-9 {
                failures.push(format!(
                    "dur N={n} M={m} |Tr(B rho)| {value:.4} > {bound:.4}"
                ));
            }
        }
        let ghz_checks = partial_transpose_checks(&ghz(n), &split).unwrap();
        if ghz_checks.iter().any(|c| c.positive) {
            failures.push(format!("GHZ N={n} has a positive cut"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e9a);
    for k in 0..50 {
        let n = 2 + k % 3;
        let rho = random::separable_state(n, 4, &mut rng).unwrap();
        if !is_p_ppt(&rho, &Partition::full_split(n).unwrap()).unwrap() {
            failures.push(format!("separable state {k} is not PPT"));
        }
        if !check_p_ppt_bound(&rho, n).unwrap().satisfied {
            failures.push(format!("separable state {k} breaks 2^(1-N)"));
        }
        for m in 2..=5 {
            let value = quantum_value(&scenario(n, m), &rho).unwrap();
            if value.abs() > (m as f64 / 2.0).powi(n as i32) + 1e-9 {
                failures.push(format!("separable state {k} breaks (M/2)^N at M={m}"));
            }
        }
    }
    verdict(
        failures,
        "dur N=3,4 transposes and (M/2)^N, GHZ NPT cuts, 50 separable states".into(),
    )
}

fn ns_optimizer() -> Outcome {
    const SEED: u64 = 31;
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (n, m) in [(2, 2), (3, 3), (4, 3)] {
        let s = scenario(n, m);
        let half = 0.5 * (m as f64).powi(n as i32);
        let states = [
            ("ghz", ghz(n), half),
            (
                "gen pi/8",
                generalized_ghz(n, FRAC_PI_8).unwrap().density(),
                half * (2.0 * FRAC_PI_8).sin(),
            ),
            (
                "gen pi/6",
                generalized_ghz(n, FRAC_PI_6).unwrap().density(),
                half * (2.0 * FRAC_PI_6).sin(),
            ),
            (
                "gen pi/4",
                generalized_ghz(n, FRAC_PI_4).unwrap().density(),
                half,
            ),
        ];
        for (label, rho, closed) in states {
            let (value, frames) = ns_condition_value(&s, &rho, DEFAULT_RESTARTS, SEED).unwrap();
            let (again, frames_again) =
                ns_condition_value(&s, &rho, DEFAULT_RESTARTS, SEED).unwrap();
            if value.to_bits() != again.to_bits() || frames != frames_again {
                failures.push(format!("({n},{m}) {label} not reproducible"));
            }
            let diff = (value - closed).abs();
            worst = worst.max(diff);
            if diff > 1e-4 {
                failures.push(format!(
                    "({n},{m}) {label}: optimized {value:.6} vs closed form {closed:.6}"
                ));
            }
        }
    }
    verdict(failures, format!("12 cases, max |diff| {worst:.1e}"))
}

fn ccp_monte_carlo() -> Outcome {
    const TRIALS: u64 = 1_000_000;
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for (n, m) in [(2, 2), (3, 2)] {
        let task = CcpTask::new(scenario(n, m));
        let rho = ghz(n);
        for protocol in [Protocol::Classical, Protocol::Quantum(&rho)] {
            let hits = (0..100u64)
                .filter(|&seed| {
                    simulate_protocol(&task, &protocol, TRIALS, seed, 8)
                        .unwrap()
                        .within_sigmas(3.0)
                })
                .count();
            summary.push(format!("({n},{m}) {:?} {hits}/100", protocol.kind()));
            if hits < 99 {
                failures.push(format!(
                    "({n},{m}) {:?} only {hits}/100 within 3 sigma",
                    protocol.kind()
                ));
            }
        }
    }
    verdict(failures, summary.join(", "))
}

fn fig1_shape() -> Outcome {
    let cli = Cli::try_parse_from([
        "bellwb", "fig1", "--format", "csv", "--n-list", "2,3,4,5", "--m-max", "64",
    ])
    .map_err(|e| e.to_string())?;
    let text = execute(&cli)
        .and_then(|r| r.render())
        .map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut curves: Vec<(usize, Vec<f64>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let n: usize = record[0].parse().map_err(|_| "bad n column")?;
        let v: f64 = record[2].parse().map_err(|_| "bad value column")?;
        match curves.last_mut() {
            Some((last, values)) if *last == n => values.push(v),
            _ => curves.push((n, vec![v])),
        }
    }
    let rows: usize = curves.iter().map(|(_, v)| v.len()).sum();
    let mut failures = Vec::new();
    if rows != 4 * 63 {
        failures.push(format!("{rows} CSV rows, expected 252"));
    }
    for (n, values) in &curves {
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let ok = if *n <= 3 { decreasing } else { increasing };
        if !ok {
            failures.push(format!(
                "N={n} curve not monotone in the expected direction"
            ));
        }
    }
    verdict(
        failures,
        format!("{rows} rows; N=2,3 decreasing, N=4,5 increasing"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("LHV oracle agreement", lhv_oracle_agreement),
        ("Bell-operator identity", bell_operator_identity),
        ("Bell-operator spectrum", bell_operator_spectrum),
        (
            "closed-form violation factors",
            closed_form_violation_factors,
        ),
        ("success-ratio table", table_reproduction),
        ("bound entangled thresholds", dur_thresholds),
        ("PPT suite", ppt_suite),
        ("frame optimizer", ns_optimizer),
        ("communication Monte Carlo", ccp_monte_carlo),
        ("violation curve shape", fig1_shape),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
