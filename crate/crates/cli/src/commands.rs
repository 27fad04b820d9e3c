use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use bellwb::analysis::{
    check_p_ppt_bound, fig1_data, nppt_bound, ns_condition_value, ViolationReport,
};
use bellwb::ccp::{
    advantage_table, reference_ratio, simulate_protocol, CcpTask, Protocol, ProtocolEstimate,
    SettingsCount,
};
use bellwb::linalg::{hermitian_eigenvalues, trace_product, MAX_QUBITS};
use bellwb::quantum::{
    bell_operator_closed, bell_operator_sum, dur_state, generalized_ghz, ghz_state,
    partial_transpose_checks, quantum_value, twirled_quantum_value, DensityMatrix, GhzSign,
    Partition,
};
use bellwb::scenario::{lhv_bound_bruteforce, lr_bound_analytic, BellScenario};
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{dp4, opt, sig, Table};
use crate::{state_file, svg, Cli, CliError, Command, Family, Report, RunConfig};

/// Largest party count for the operator spectrum and the PPT eigensolves.
pub const MAX_EIGEN_PARTIES: usize = 7;

/// Largest difference to a printed ratio that counts as a match.
pub const TABLE_TOLERANCE: f64 = 5e-4;

pub fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Bound {
            n,
            m,
            analytic_only,
        } => {
            let mut config = RunConfig::new("bound", cli);
            config.n_parties = Some(*n);
            config.n_settings = Some(*m);
            config.analytic_only = *analytic_only;
            bound(config, *n, *m, *analytic_only)
        }
        Command::OperatorCheck { n, m } => {
            let mut config = RunConfig::new("operator-check", cli);
            config.n_parties = Some(*n);
            config.n_settings = Some(*m);
            operator_check(config, *n, *m)
        }
        Command::Violation {
            family,
            n,
            m,
            alpha,
            twirl,
            optimize,
            restarts,
            state,
        } => {
            let mut config = RunConfig::new("violation", cli);
            config.family = Some(*family);
            config.n_parties = *n;
            config.n_settings = Some(*m);
            config.alpha = alpha.or_else(|| default_alpha(*family));
            config.twirl = *twirl;
            config.optimize = *optimize;
            config.restarts = optimize.then_some(*restarts);
            config.state = state.clone();
            violation(config)
        }
        Command::Ppt {
            family,
            n,
            m,
            alpha,
            state,
        } => {
            let mut config = RunConfig::new("ppt", cli);
            config.family = Some(*family);
            config.n_parties = *n;
            config.n_settings = Some(*m);
            config.alpha = alpha.or_else(|| default_alpha(*family));
            config.state = state.clone();
            ppt(config)
        }
        Command::Table1 { n_max, m_list } => {
            let mut config = RunConfig::new("table1", cli);
            config.n_max = Some(*n_max);
            config.m_list = Some(m_list.clone());
            table1(config, *n_max, m_list)
        }
        Command::Fig1 { n_list, m_max, svg } => {
            let mut config = RunConfig::new("fig1", cli);
            config.n_list = Some(n_list.clone());
            config.m_max = Some(*m_max);
            config.svg = svg.clone();
            fig1(config, n_list, *m_max, svg.as_deref())
        }
        Command::Ccp {
            n,
            m,
            trials,
            shards,
        } => {
            let mut config = RunConfig::new("ccp", cli);
            config.n_parties = Some(*n);
            config.n_settings = Some(*m);
            config.trials = Some(*trials);
            config.shards = Some(*shards);
            ccp(config, *n, *m, *trials, *shards)
        }
    }
}

fn default_alpha(family: Family) -> Option<f64> {
    match family {
        Family::GenGhz => Some(FRAC_PI_4),
        Family::Dur => Some(0.0),
        Family::Ghz | Family::File => None,
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Render(e.to_string()))
}

fn bound(config: RunConfig, n: usize, m: usize, analytic_only: bool) -> Result<Report, CliError> {
    let s = BellScenario::new(n, m)?;
    let analytic = lr_bound_analytic(&s);
    let brute = if analytic_only {
        None
    } else {
        Some(lhv_bound_bruteforce(&s)?.0)
    };
    let difference = brute.map(|b| (b - analytic).abs());
    let note = (n == 2 && m == 2).then_some(
        "N = M = 2 reproduces CHSH scaled by 1/sqrt 2: the coefficients are +-1/sqrt 2, so the bound is sqrt 2 rather than 2",
    );
    let mut table = Table::new(&[
        "n_parties",
        "n_settings",
        "analytic",
        "brute_force",
        "difference",
    ]);
    table.push(vec![
        n.to_string(),
        m.to_string(),
        sig(analytic),
        opt(brute.map(sig)),
        opt(difference.map(sig)),
    ]);
    Ok(Report {
        config,
        result: json!({
            "scenario": s,
            "analytic": analytic,
            "brute_force": brute,
            "difference": difference,
            "note": note,
        }),
        table,
    })
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    positive: f64,
    positive_count: usize,
    zero_count: usize,
    negative: f64,
    negative_count: usize,
    max_residual: f64,
}

fn operator_check(config: RunConfig, n: usize, m: usize) -> Result<Report, CliError> {
    let s = BellScenario::new(n, m)?;
    if n > MAX_EIGEN_PARTIES {
        return Err(bellwb::Error::BudgetExceeded(format!(
            "operator spectrum for {n} parties (limit {MAX_EIGEN_PARTIES})"
        ))
        .into());
    }
    let sum_form = bell_operator_sum(&s)?;
    let closed = bell_operator_closed(&s)?;
    let expected = 0.5 * s.n_tuples_f64().powi(2);
    let tr_sum_closed = trace_product(&sum_form, &closed)?.re;
    let tr_closed_closed = trace_product(&closed, &closed)?.re;
    let tr_sum_sum = trace_product(&sum_form, &sum_form)?.re;
    let max_difference = sum_form.max_abs_diff(&closed)?;

    let half = 0.5 * s.n_tuples_f64();
    let ev = hermitian_eigenvalues(&sum_form)?;
    let dim = ev.len();
    let targets = |i: usize| match i {
        0 => -half,
        i if i == dim - 1 => half,
        _ => 0.0,
    };
    let max_residual = ev
        .iter()
        .enumerate()
        .map(|(i, l)| (l - targets(i)).abs())
        .fold(0.0, f64::max);
    let tol = 1e-8 * half.max(1.0);
    let spectrum = SpectrumSummary {
        positive: half,
        positive_count: ev.iter().filter(|l| (*l - half).abs() <= tol).count(),
        zero_count: ev.iter().filter(|l| l.abs() <= tol).count(),
        negative: -half,
        negative_count: ev.iter().filter(|l| (*l + half).abs() <= tol).count(),
        max_residual,
    };

    let mut table = Table::new(&[
        "n_parties",
        "n_settings",
        "expected_trace",
        "tr_sum_closed",
        "tr_closed_closed",
        "tr_sum_sum",
        "max_difference",
        "positive_count",
        "zero_count",
        "negative_count",
        "max_residual",
    ]);
    table.push(vec![
        n.to_string(),
        m.to_string(),
        sig(expected),
        sig(tr_sum_closed),
        sig(tr_closed_closed),
        sig(tr_sum_sum),
        sig(max_difference),
        spectrum.positive_count.to_string(),
        spectrum.zero_count.to_string(),
        spectrum.negative_count.to_string(),
        sig(max_residual),
    ]);
    Ok(Report {
        config,
        result: json!({
            "scenario": s,
            "expected_trace": expected,
            "tr_sum_closed": tr_sum_closed,
            "tr_closed_closed": tr_closed_closed,
            "tr_sum_sum": tr_sum_sum,
            "max_difference": max_difference,
            "spectrum": to_value(&spectrum)?,
        }),
        table,
    })
}

fn require_parties(n: Option<usize>) -> Result<usize, CliError> {
    n.ok_or_else(|| CliError::Usage("--n is required for this family".into()))
}

/// Builds the state for a family, filling in `config.n_parties` from a file.
fn family_state(config: &mut RunConfig) -> Result<DensityMatrix, CliError> {
    let family = config.family.expect("family set by caller");
    let alpha = config.alpha.unwrap_or(0.0);
    match family {
        Family::File => {
            let path: PathBuf = config
                .state
                .clone()
                .ok_or_else(|| CliError::Usage("--state is required for family file".into()))?;
            let rho = state_file::load(&path)?;
            match config.n_parties {
                Some(n) if n != rho.n_parties() => Err(CliError::StateFile {
                    path,
                    reason: format!("holds {} parties, --n is {n}", rho.n_parties()),
                }),
                _ => {
                    config.n_parties = Some(rho.n_parties());
                    Ok(rho)
                }
            }
        }
        _ if config.state.is_some() => Err(CliError::Usage(
            "--state only applies to family file".into(),
        )),
        Family::Ghz => Ok(ghz_state(require_parties(config.n_parties)?, GhzSign::Plus)?.density()),
        Family::GenGhz => Ok(generalized_ghz(require_parties(config.n_parties)?, alpha)?.density()),
        Family::Dur => Ok(dur_state(require_parties(config.n_parties)?, alpha)?),
    }
}

/// Closed-form quantum value for the built-in families, used past the
/// dense-state size limit.
fn closed_form_value(s: &BellScenario, family: Family, alpha: f64, twirl: bool) -> Option<f64> {
    let half = 0.5 * s.n_tuples_f64();
    let n = s.n_parties() as f64;
    match family {
        Family::Ghz if twirl => Some(half * alpha.cos()),
        Family::Ghz => Some(half),
        Family::GenGhz if twirl => None,
        Family::GenGhz => Some(half * (2.0 * alpha).sin()),
        Family::Dur if twirl => Some(half / (n + 1.0)),
        Family::Dur => Some(half * alpha.cos() / (n + 1.0)),
        Family::File => None,
    }
}

fn violation(mut config: RunConfig) -> Result<Report, CliError> {
    let family = config.family.expect("family set");
    let alpha = config.alpha.unwrap_or(0.0);
    let m = config.n_settings.expect("m set");
    if config.twirl && config.optimize {
        return Err(CliError::Usage(
            "--twirl and --optimize are exclusive".into(),
        ));
    }
    let large = family != Family::File
        && config.n_parties.is_some_and(|n| n > MAX_QUBITS)
        && !config.optimize;
    let (s, value, method, frames) = if large {
        let s = BellScenario::new(require_parties(config.n_parties)?, m)?;
        let value = closed_form_value(&s, family, alpha, config.twirl).ok_or_else(|| {
            bellwb::Error::BudgetExceeded(format!(
                "no closed form for this family beyond {MAX_QUBITS} parties"
            ))
        })?;
        (s, value, "closed-form", None)
    } else {
        let rho = family_state(&mut config)?;
        let s = BellScenario::new(rho.n_parties(), m)?;
        if config.optimize {
            let restarts = config
                .restarts
                .unwrap_or(bellwb::analysis::DEFAULT_RESTARTS);
            let (value, frames) = ns_condition_value(&s, &rho, restarts, config.seed)?;
            (s, value, "frame-optimized", Some(frames))
        } else if config.twirl {
            (
                s,
                twirled_quantum_value(&s, &rho, alpha)?,
                "twirled-operator",
                None,
            )
        } else {
            (s, quantum_value(&s, &rho)?, "operator", None)
        }
    };
    let report = ViolationReport::new(s, value, config.optimize);
    let mut table = Table::new(&[
        "n_parties",
        "n_settings",
        "method",
        "quantum_value",
        "lr_bound",
        "violation_factor",
        "violation_factor_4dp",
        "violated",
        "max_is_heuristic",
    ]);
    table.push(vec![
        s.n_parties().to_string(),
        s.n_settings().to_string(),
        method.to_string(),
        sig(report.quantum_value),
        sig(report.lr_bound),
        sig(report.violation_factor),
        dp4(report.violation_factor),
        report.violated.to_string(),
        report.max_is_heuristic.to_string(),
    ]);
    let mut result = to_value(&report)?;
    result["method"] = json!(method);
    if let Some(frames) = frames {
        result["frames"] = to_value(&frames)?;
    }
    Ok(Report {
        config,
        result,
        table,
    })
}

#[derive(Debug, Serialize)]
struct CutReport {
    transposed: String,
    min_eigenvalue: f64,
    positive: bool,
}

fn ppt(mut config: RunConfig) -> Result<Report, CliError> {
    if let Some(n) = config.n_parties.filter(|&n| n > MAX_EIGEN_PARTIES) {
        return Err(bellwb::Error::BudgetExceeded(format!(
            "partial transposes for {n} parties (limit {MAX_EIGEN_PARTIES})"
        ))
        .into());
    }
    let rho = family_state(&mut config)?;
    let n = rho.n_parties();
    if n > MAX_EIGEN_PARTIES {
        return Err(bellwb::Error::BudgetExceeded(format!(
            "partial transposes for {n} parties (limit {MAX_EIGEN_PARTIES})"
        ))
        .into());
    }
    if n < 2 {
        return Err(CliError::Usage(
            "partial transposes need at least 2 parties".into(),
        ));
    }
    let s = BellScenario::new(n, config.n_settings.expect("m set"))?;
    let cuts: Vec<CutReport> = partial_transpose_checks(&rho, &Partition::full_split(n)?)?
        .into_iter()
        .map(|c| CutReport {
            transposed: c.transposed.to_string(),
            min_eigenvalue: c.min_eigenvalue,
            positive: c.positive,
        })
        .collect();
    let n_ppt = cuts.iter().all(|c| c.positive);
    let bell_value = quantum_value(&s, &rho)?;
    let bound = nppt_bound(&s);
    let bound_respected = bell_value.abs() <= bound * (1.0 + 1e-12);
    let overlap = check_p_ppt_bound(&rho, n)?;

    let mut table = Table::new(&["transposed", "min_eigenvalue", "positive"]);
    for c in &cuts {
        table.push(vec![
            c.transposed.clone(),
            sig(c.min_eigenvalue),
            c.positive.to_string(),
        ]);
    }
    Ok(Report {
        config,
        result: json!({
            "scenario": s,
            "cuts": to_value(&cuts)?,
            "n_ppt": n_ppt,
            "bell_value": bell_value,
            "nppt_bound": bound,
            "bound_respected": bound_respected,
            "overlap_check": to_value(&overlap)?,
        }),
        table,
    })
}

#[derive(Debug, Serialize)]
struct TableCell {
    n_parties: usize,
    settings: String,
    p_classical: f64,
    p_quantum: f64,
    ratio: f64,
    ratio_4dp: String,
    printed: Option<f64>,
    difference: Option<f64>,
    matches_printed: Option<bool>,
    limit_coarse_ratio: Option<f64>,
    limit_converged: bool,
}

fn table1(config: RunConfig, n_max: usize, m_list: &[String]) -> Result<Report, CliError> {
    if n_max < 2 {
        return Err(CliError::Usage("--n-max must be at least 2".into()));
    }
    let settings: Vec<SettingsCount> = m_list
        .iter()
        .map(|m| m.parse::<SettingsCount>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let n_list: Vec<usize> = (2..=n_max).collect();
    let cells: Vec<TableCell> = advantage_table(&n_list, &settings)?
        .into_iter()
        .map(|c| {
            let printed = reference_ratio(c.n_parties, c.settings);
            let difference = printed.map(|p| (c.ratio - p).abs());
            TableCell {
                n_parties: c.n_parties,
                settings: c.settings.to_string(),
                p_classical: c.p_classical,
                p_quantum: c.p_quantum,
                ratio: c.ratio,
                ratio_4dp: dp4(c.ratio),
                printed,
                difference,
                matches_printed: difference.map(|d| d <= TABLE_TOLERANCE),
                limit_coarse_ratio: c.coarse_ratio,
                limit_converged: c.converged,
            }
        })
        .collect();
    let flagged: Vec<String> = cells
        .iter()
        .filter(|c| c.matches_printed == Some(false) || !c.limit_converged)
        .map(|c| {
            format!(
                "N={} M={}: computed {} printed {}",
                c.n_parties,
                c.settings,
                sig(c.ratio),
                opt(c.printed)
            )
        })
        .collect();
    let mut table = Table::new(&[
        "n_parties",
        "n_settings",
        "p_classical",
        "p_quantum",
        "ratio",
        "ratio_4dp",
        "printed",
        "matches_printed",
    ]);
    for c in &cells {
        table.push(vec![
            c.n_parties.to_string(),
            c.settings.clone(),
            sig(c.p_classical),
            sig(c.p_quantum),
            sig(c.ratio),
            c.ratio_4dp.clone(),
            opt(c.printed.map(dp4)),
            opt(c.matches_printed),
        ]);
    }
    Ok(Report {
        config,
        result: json!({
            "tolerance": TABLE_TOLERANCE,
            "cells": to_value(&cells)?,
            "flagged": flagged,
        }),
        table,
    })
}

fn fig1(
    config: RunConfig,
    n_list: &[usize],
    m_max: usize,
    svg_path: Option<&Path>,
) -> Result<Report, CliError> {
    let rows = fig1_data(n_list, m_max)?;
    if let Some(path) = svg_path {
        std::fs::write(path, svg::fig1_svg(&rows)).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    let mut table = Table::new(&[
        "n_parties",
        "n_settings",
        "violation_factor",
        "violation_factor_4dp",
        "limit",
    ]);
    for r in &rows {
        table.push(vec![
            r.n_parties.to_string(),
            r.n_settings.to_string(),
            sig(r.violation_factor),
            dp4(r.violation_factor),
            sig(r.limit),
        ]);
    }
    Ok(Report {
        config,
        result: json!({ "rows": to_value(&rows)? }),
        table,
    })
}

#[derive(Debug, Serialize)]
struct EstimateReport {
    #[serde(flatten)]
    estimate: ProtocolEstimate,
    interval_3sigma: [f64; 2],
    within_3sigma: bool,
}

impl From<ProtocolEstimate> for EstimateReport {
    fn from(estimate: ProtocolEstimate) -> Self {
        Self {
            interval_3sigma: [
                estimate.exact - 3.0 * estimate.sigma,
                estimate.exact + 3.0 * estimate.sigma,
            ],
            within_3sigma: estimate.within_sigmas(3.0),
            estimate,
        }
    }
}

fn ccp(
    config: RunConfig,
    n: usize,
    m: usize,
    trials: u64,
    shards: usize,
) -> Result<Report, CliError> {
    let s = BellScenario::new(n, m)?;
    let task = CcpTask::new(s);
    let exact = task.ghz_report();
    let printed = reference_ratio(n, SettingsCount::Finite(m));
    let estimates: Option<[EstimateReport; 2]> = if trials == 0 {
        None
    } else {
        if n > MAX_QUBITS {
            return Err(bellwb::Error::BudgetExceeded(format!(
                "sampling a {n}-party state (limit {MAX_QUBITS})"
            ))
            .into());
        }
        let rho = ghz_state(n, GhzSign::Plus)?.density();
        let classical =
            simulate_protocol(&task, &Protocol::Classical, trials, config.seed, shards)?;
        let quantum =
            simulate_protocol(&task, &Protocol::Quantum(&rho), trials, config.seed, shards)?;
        Some([classical.into(), quantum.into()])
    };

    let mut table = Table::new(&[
        "n_parties",
        "n_settings",
        "protocol",
        "p_exact",
        "p_exact_4dp",
        "estimate",
        "sigma",
        "within_3sigma",
        "ratio",
        "ratio_4dp",
    ]);
    for (k, (name, p)) in [
        ("classical", exact.p_classical),
        ("quantum", exact.p_quantum),
    ]
    .into_iter()
    .enumerate()
    {
        let est = estimates.as_ref().map(|e| &e[k]);
        table.push(vec![
            n.to_string(),
            m.to_string(),
            name.to_string(),
            sig(p),
            dp4(p),
            opt(est.map(|e| sig(e.estimate.estimate))),
            opt(est.map(|e| sig(e.estimate.sigma))),
            opt(est.map(|e| e.within_3sigma)),
            sig(exact.ratio),
            dp4(exact.ratio),
        ]);
    }
    Ok(Report {
        config,
        result: json!({
            "scenario": s,
            "normalization": task.normalization(),
            "exact": to_value(&exact)?,
            "printed_ratio": printed,
            "estimates": estimates.map(|[c, q]| json!({ "classical": c, "quantum": q })),
        }),
        table,
    })
}
