//! Communication-complexity task tied to the Bell expression.
//!
//! Each of `N` parties receives `y_n = +-1` (uniform) and a setting
//! `x_n in 0..M` (weighted by `|cos(sum phi)|`). Alice must output
//! `F = y_1 ... y_N Sign[cos(phi_{x_1} + ... + phi_{x_N})]` after receiving
//! one bit from every other party. Success probability is
//! `P = (1 + (F, A)) / 2` where `(F, A)` is the weighted average success.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{correlation_vector, quantum_value, DensityMatrix};
use crate::scenario::{
    bell_value, coefficient_tensor, lhv_bound_bruteforce, lr_bound_analytic, strategy_correlations,
    BellScenario, DeterministicStrategy, SettingTuple,
};

/// Settings count used to evaluate the continuous-settings column.
pub const LIMIT_SETTINGS: usize = 1 << 14;
/// Coarser settings count the limit is checked against.
pub const LIMIT_CHECK_SETTINGS: usize = 1 << 13;
/// Required agreement between the two limit evaluations.
pub const LIMIT_AGREEMENT: f64 = 5e-5;

/// Default number of independent shards the simulator splits trials into.
pub const DEFAULT_SHARDS: usize = 8;

/// Largest `M^N` the simulator tabulates weights for.
const MAX_SIMULATED_TUPLES: usize = 1 << 22;

/// Published quantum/classical success ratios for `N = 2..=5` and
/// `M = 2, 3, 4, 5, infinity`, rounded to four decimals.
pub const REFERENCE_RATIOS: [[f64; 5]; 4] = [
    [1.1381, 1.1196, 1.1009, 1.1002, 1.0909],
    [1.3333, 1.2919, 1.2815, 1.2773, 1.2709],
    [1.3657, 1.4395, 1.4038, 1.4258, 1.4192],
    [1.6000, 1.5582, 1.5467, 1.5418, 1.5336],
];

/// `sum_x |cos(phi_{x_1} + ... + phi_{x_N})|`.
///
/// The cosine depends on the tuple only through `x_1 + ... + x_N`, so the
/// sum runs over the distribution of that total (`N`-fold convolution of a
/// width-`M` box) instead of all `M^N` tuples.
pub fn normalization(s: &BellScenario) -> f64 {
    let m = s.n_settings();
    let mut counts = vec![1.0f64];
    for _ in 0..s.n_parties() {
        let len = counts.len() + m - 1;
        let mut next = vec![0.0; len];
        let mut window = 0.0;
        for (k, slot) in next.iter_mut().enumerate() {
            if k < counts.len() {
                window += counts[k];
            }
            if k >= m {
                window -= counts[k - m];
            }
            *slot = window;
        }
        counts = next;
    }
    counts
        .iter()
        .enumerate()
        .map(|(sum, &c)| c * s.coefficient_for_sum(sum).abs())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcpTask {
    scenario: BellScenario,
    normalization: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcpInputs {
    pub y: Vec<i8>,
    pub x: SettingTuple,
}

impl CcpInputs {
    pub fn new(y: Vec<i8>, x: SettingTuple) -> Result<Self> {
        if y.len() != x.settings().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} y inputs for {} settings",
                y.len(),
                x.settings().len()
            )));
        }
        if y.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidArgument("y inputs must be +-1".into()));
        }
        Ok(Self { y, x })
    }

    fn y_product(&self) -> i8 {
        self.y.iter().product()
    }
}

impl CcpTask {
    pub fn new(scenario: BellScenario) -> Self {
        Self {
            scenario,
            normalization: normalization(&scenario),
        }
    }

    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `+1` for a nonnegative coefficient; zero coefficients carry zero
    /// weight so their sign never affects a success probability.
    pub fn coefficient_sign(&self, x: &SettingTuple) -> i8 {
        if self.scenario.coefficient_for_sum(x.sum()) >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn task_value(&self, inputs: &CcpInputs) -> i8 {
        inputs.y_product() * self.coefficient_sign(&inputs.x)
    }

    pub fn input_weight(&self, x: &SettingTuple) -> f64 {
        self.scenario.coefficient_for_sum(x.sum()).abs() / self.normalization
    }

    /// Best classical `(F, A)`: `B_LR / N`.
    pub fn classical_average_success(&self) -> f64 {
        lr_bound_analytic(&self.scenario) / self.normalization
    }

    /// Quantum `(F, A)` for a shared state: `Tr(B rho) / N`.
    pub fn quantum_average_success(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(quantum_value(&self.scenario, rho)? / self.normalization)
    }

    pub fn classical_success_exact(&self) -> f64 {
        0.5 * (1.0 + self.classical_average_success())
    }

    pub fn quantum_success_exact(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(0.5 * (1.0 + self.quantum_average_success(rho)?))
    }

    /// Quantum success with a GHZ state, `(1 + M^N / 2N) / 2`, valid at any size.
    pub fn ghz_success_exact(&self) -> f64 {
        0.5 * (1.0 + self.scenario.n_tuples_f64() / 2.0 / self.normalization)
    }

    pub fn ghz_report(&self) -> SuccessReport {
        SuccessReport::exact(
            &self.scenario,
            self.classical_success_exact(),
            self.ghz_success_exact(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessReport {
    pub n_parties: usize,
    pub n_settings: usize,
    pub p_classical: f64,
    pub p_quantum: f64,
    pub ratio: f64,
    /// Zero for exact values.
    pub trials: u64,
}

impl SuccessReport {
    pub fn exact(s: &BellScenario, p_classical: f64, p_quantum: f64) -> Self {
        Self {
            n_parties: s.n_parties(),
            n_settings: s.n_settings(),
            p_classical,
            p_quantum,
            ratio: p_quantum / p_classical,
            trials: 0,
        }
    }
}

/// Number of settings per party, possibly the continuous limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SettingsCount {
    Finite(usize),
    Infinite,
}

impl std::fmt::Display for SettingsCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SettingsCount::Finite(m) => write!(f, "{m}"),
            SettingsCount::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for SettingsCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(SettingsCount::Infinite),
            other => other
                .parse()
                .map(SettingsCount::Finite)
                .map_err(|_| Error::InvalidArgument(format!("bad settings count '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageCell {
    pub n_parties: usize,
    pub settings: SettingsCount,
    pub p_classical: f64,
    pub p_quantum: f64,
    pub ratio: f64,
    /// For the continuous limit: the ratio at the coarser settings count.
    pub coarse_ratio: Option<f64>,
    /// For the continuous limit: whether the two evaluations agree.
    pub converged: bool,
}

pub fn advantage_cell(n_parties: usize, settings: SettingsCount) -> Result<AdvantageCell> {
    match settings {
        SettingsCount::Finite(m) => {
            let r = CcpTask::new(BellScenario::new(n_parties, m)?).ghz_report();
            Ok(AdvantageCell {
                n_parties,
                settings,
                p_classical: r.p_classical,
                p_quantum: r.p_quantum,
                ratio: r.ratio,
                coarse_ratio: None,
                converged: true,
            })
        }
        SettingsCount::Infinite => {
            let fine = CcpTask::new(BellScenario::new(n_parties, LIMIT_SETTINGS)?).ghz_report();
            let coarse =
                CcpTask::new(BellScenario::new(n_parties, LIMIT_CHECK_SETTINGS)?).ghz_report();
            Ok(AdvantageCell {
                n_parties,
                settings,
                p_classical: fine.p_classical,
                p_quantum: fine.p_quantum,
                ratio: fine.ratio,
                coarse_ratio: Some(coarse.ratio),
                converged: (fine.ratio - coarse.ratio).abs() <= LIMIT_AGREEMENT,
            })
        }
    }
}

/// GHZ-versus-classical success ratios for every `(N, M)` pair, rows in
/// `n_list` order.
pub fn advantage_table(n_list: &[usize], m_list: &[SettingsCount]) -> Result<Vec<AdvantageCell>> {
    let cells: Vec<(usize, SettingsCount)> = n_list
        .iter()
        .flat_map(|&n| m_list.iter().map(move |&m| (n, m)))
        .collect();
    cells
        .into_par_iter()
        .map(|(n, m)| advantage_cell(n, m))
        .collect()
}

pub fn reference_ratio(n_parties: usize, settings: SettingsCount) -> Option<f64> {
    let row = REFERENCE_RATIOS.get(n_parties.checked_sub(2)?)?;
    let col = match settings {
        SettingsCount::Finite(m @ 2..=5) => m - 2,
        SettingsCount::Finite(_) => return None,
        SettingsCount::Infinite => 4,
    };
    Some(row[col])
}

/// Answer Alice forms in the star topology: `y_1 f_1 e_2 ... e_N` with
/// `e_n = y_n f_n`.
pub fn star_answer(y: &[i8], f: &[i8]) -> i8 {
    let messages = y.iter().zip(f).skip(1).map(|(a, b)| a * b);
    y[0] * f[0] * messages.product::<i8>()
}

/// Final message of the chain topology, where party `n` forwards
/// `e_n = y_n f_n e_{n-1}` and Alice is last. Party order is reversed so
/// Alice (party 1) closes the chain.
pub fn chain_answer(y: &[i8], f: &[i8]) -> i8 {
    y.iter()
        .zip(f)
        .rev()
        .fold(1, |message, (a, b)| a * b * message)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolKind {
    Classical,
    Quantum,
}

/// Resource the simulated parties share.
#[derive(Debug, Clone)]
pub enum Protocol<'a> {
    /// Shared randomness fixed to an optimal deterministic strategy.
    Classical,
    /// Shared quantum state measured with the equatorial settings.
    Quantum(&'a DensityMatrix),
}

impl Protocol<'_> {
    pub fn kind(&self) -> ProtocolKind {
        match self {
            Protocol::Classical => ProtocolKind::Classical,
            Protocol::Quantum(_) => ProtocolKind::Quantum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolEstimate {
    pub kind: ProtocolKind,
    pub trials: u64,
    pub seed: u64,
    pub shards: usize,
    pub successes: u64,
    pub estimate: f64,
    pub exact: f64,
    /// Binomial standard error at the exact probability.
    pub sigma: f64,
}

impl ProtocolEstimate {
    pub fn within_sigmas(&self, k: f64) -> bool {
        (self.estimate - self.exact).abs() <= k * self.sigma
    }
}

/// Per-tuple data the trial loop needs.
struct SimulationTable {
    weights: WeightedIndex<f64>,
    /// `Sign(c_x)`.
    signs: Vec<i8>,
    tuples: Vec<Vec<usize>>,
    /// Quantum correlation `E_x`; unused for the classical protocol.
    correlations: Vec<f64>,
    strategy: Option<DeterministicStrategy>,
}

fn build_table(task: &CcpTask, protocol: &Protocol) -> Result<(SimulationTable, f64)> {
    let s = &task.scenario;
    let n_tuples = s
        .n_tuples()
        .filter(|&t| t <= MAX_SIMULATED_TUPLES)
        .ok_or_else(|| Error::BudgetExceeded(format!("simulating {s}")))?;
    let tuples: Vec<SettingTuple> = (0..n_tuples).map(|i| s.tuple(i)).collect();
    let weights: Vec<f64> = tuples.iter().map(|x| task.input_weight(x)).collect();
    let signs = tuples.iter().map(|x| task.coefficient_sign(x)).collect();
    let weights = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidArgument(format!("input weights: {e}")))?;
    let (correlations, strategy, exact) = match protocol {
        Protocol::Classical => {
            let (value, mut strategy) = lhv_bound_bruteforce(s)?;
            // the brute force maximizes |C.E|; orient it to the positive side
            let e = strategy_correlations(s, &strategy)?;
            if bell_value(&coefficient_tensor(s)?, &e)? < 0.0 {
                strategy.flip_party(0);
            }
            (
                vec![],
                Some(strategy),
                0.5 * (1.0 + value / task.normalization),
            )
        }
        Protocol::Quantum(rho) => {
            let e = correlation_vector(s, rho)?;
            (e.values().to_vec(), None, task.quantum_success_exact(rho)?)
        }
    };
    Ok((
        SimulationTable {
            weights,
            signs,
            tuples: tuples.into_iter().map(|t| t.settings().to_vec()).collect(),
            correlations,
            strategy,
        },
        exact,
    ))
}

impl SimulationTable {
    fn run_shard(&self, n_parties: usize, trials: u64, rng: &mut ChaCha8Rng) -> u64 {
        let mut y = vec![1i8; n_parties];
        let mut f = vec![1i8; n_parties];
        let mut successes = 0;
        for _ in 0..trials {
            for v in y.iter_mut() {
                *v = if rng.random::<bool>() { 1 } else { -1 };
            }
            let x = self.weights.sample(rng);
            let settings = &self.tuples[x];
            match &self.strategy {
                Some(d) => {
                    for (party, out) in f.iter_mut().enumerate() {
                        *out = d.outcome(party, settings[party]);
                    }
                }
                None => {
                    // joint outcomes with P(f) = 2^-N (1 + prod(f) E_x)
                    let p_even = 0.5 * (1.0 + self.correlations[x]);
                    let parity: i8 = if rng.random::<f64>() < p_even { 1 } else { -1 };
                    let mut rest = 1i8;
                    for out in f.iter_mut().skip(1) {
                        *out = if rng.random::<bool>() { 1 } else { -1 };
                        rest *= *out;
                    }
                    f[0] = parity * rest;
                }
            }
            let answer = star_answer(&y, &f);
            let target = y.iter().product::<i8>() * self.signs[x];
            if answer == target {
                successes += 1;
            }
        }
        successes
    }
}

/// Monte Carlo estimate of the success probability. Trials are split over
/// `shards` independent streams of a ChaCha8 generator seeded with `seed`;
/// the result depends only on `(seed, trials, shards)`.
pub fn simulate_protocol(
    task: &CcpTask,
    protocol: &Protocol,
    trials: u64,
    seed: u64,
    shards: usize,
) -> Result<ProtocolEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let shards = shards.max(1);
    let (table, exact) = build_table(task, protocol)?;
    let n = task.scenario.n_parties();
    let per_shard = trials / shards as u64;
    let extra = trials % shards as u64;
    let successes: u64 = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            let count = per_shard + u64::from((shard as u64) < extra);
            table.run_shard(n, count, &mut rng)
        })
        .sum();
    Ok(ProtocolEstimate {
        kind: protocol.kind(),
        trials,
        seed,
        shards,
        successes,
        estimate: successes as f64 / trials as f64,
        exact,
        sigma: (exact * (1.0 - exact) / trials as f64).sqrt(),
    })
}

/// Large-`M` value of `(M^N / 2) / N`, approached as `pi / 4`.
pub fn ghz_average_success_limit() -> f64 {
    PI / 4.0
}
