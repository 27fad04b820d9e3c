//! Bell scenario with `N` parties and `M` settings: the angle scheme, the
//! cosine coefficient tensor, and the local-realistic bound.
//!
//! Setting tuples `(m_1, ..., m_N)` are laid out lexicographically with
//! party 1 as the most significant digit, so tuple index
//! `sum_n m_n M^{N-n}` addresses both the coefficient and correlation
//! vectors.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `M * (N - 1)` accepted by [`lhv_bound_bruteforce`].
pub const MAX_BRUTE_FORCE_BITS: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellScenario {
    n_parties: usize,
    n_settings: usize,
    eta: u8,
}

impl BellScenario {
    pub fn new(n_parties: usize, n_settings: usize) -> Result<Self> {
        if n_parties < 2 {
            return Err(Error::InvalidScenario(format!(
                "need at least 2 parties, got {n_parties}"
            )));
        }
        if n_settings < 2 {
            return Err(Error::InvalidScenario(format!(
                "need at least 2 settings, got {n_settings}"
            )));
        }
        let eta = (((n_settings + 1) % 2) * (n_parties % 2) + 1) as u8;
        Ok(Self {
            n_parties,
            n_settings,
            eta,
        })
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn eta(&self) -> u8 {
        self.eta
    }

    /// `M^N`, or `None` on overflow.
    pub fn n_tuples(&self) -> Option<usize> {
        self.n_settings.checked_pow(self.n_parties as u32)
    }

    /// `M^N` as a float, valid for any size.
    pub fn n_tuples_f64(&self) -> f64 {
        (self.n_settings as f64).powi(self.n_parties as i32)
    }

    pub fn angle(&self, party: usize, setting: usize) -> Result<f64> {
        if party >= self.n_parties {
            return Err(Error::PartyOutOfRange {
                index: party,
                n_parties: self.n_parties,
            });
        }
        if setting >= self.n_settings {
            return Err(Error::SettingOutOfRange {
                index: setting,
                n_settings: self.n_settings,
            });
        }
        Ok(self.angle_unchecked(setting))
    }

    /// The angle offset is shared by all parties.
    pub(crate) fn angle_unchecked(&self, setting: usize) -> f64 {
        let m = self.n_settings as f64;
        PI / m * setting as f64 + PI / (2.0 * m * self.n_parties as f64) * self.eta as f64
    }

    /// `cos(phi_{m_1} + ... + phi_{m_N})` given only `m_1 + ... + m_N`.
    ///
    /// The total angle is `pi (2 s + eta) / 2M`; odd multiples of `pi/2`
    /// return an exact zero.
    pub fn coefficient_for_sum(&self, setting_sum: usize) -> f64 {
        let m = self.n_settings;
        let j = (2 * setting_sum + self.eta as usize) % (4 * m);
        if j % (2 * m) == m {
            0.0
        } else {
            (PI * j as f64 / (2.0 * m as f64)).cos()
        }
    }

    pub fn tuple(&self, index: usize) -> SettingTuple {
        let mut m = vec![0; self.n_parties];
        let mut rest = index;
        for slot in m.iter_mut().rev() {
            *slot = rest % self.n_settings;
            rest /= self.n_settings;
        }
        SettingTuple(m)
    }

    fn label(&self) -> String {
        format!("N={}, M={}", self.n_parties, self.n_settings)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::ScenarioMismatch(self.label(), other.label()));
        }
        Ok(())
    }
}

impl fmt::Display for BellScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (eta={})", self.label(), self.eta)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SettingTuple(Vec<usize>);

impl SettingTuple {
    pub fn new(settings: Vec<usize>, scenario: &BellScenario) -> Result<Self> {
        if settings.len() != scenario.n_parties {
            return Err(Error::DimensionMismatch(format!(
                "setting tuple of length {} for {} parties",
                settings.len(),
                scenario.n_parties
            )));
        }
        if let Some(&index) = settings.iter().find(|&&m| m >= scenario.n_settings) {
            return Err(Error::SettingOutOfRange {
                index,
                n_settings: scenario.n_settings,
            });
        }
        Ok(Self(settings))
    }

    pub fn settings(&self) -> &[usize] {
        &self.0
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn index(&self, scenario: &BellScenario) -> usize {
        self.0
            .iter()
            .fold(0, |acc, &m| acc * scenario.n_settings + m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTensor {
    scenario: BellScenario,
    values: Vec<f64>,
}

impl CoefficientTensor {
    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, tuple: &SettingTuple) -> f64 {
        self.values[tuple.index(&self.scenario)]
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|c| c * c).sum()
    }
}

pub fn coefficient_tensor(s: &BellScenario) -> Result<CoefficientTensor> {
    let n = s
        .n_tuples()
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| Error::BudgetExceeded(format!("coefficient tensor for {}", s.label())))?;
    let values = (0..n)
        .map(|idx| s.coefficient_for_sum(s.tuple(idx).sum()))
        .collect();
    Ok(CoefficientTensor {
        scenario: *s,
        values,
    })
}

/// `[sin(pi/2M)]^{-N} cos(pi/2M)`.
pub fn lr_bound_analytic(s: &BellScenario) -> f64 {
    let half = PI / (2.0 * s.n_settings as f64);
    half.sin().powi(-(s.n_parties as i32)) * half.cos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationVector {
    scenario: BellScenario,
    values: Vec<f64>,
}

impl CorrelationVector {
    pub fn new(scenario: BellScenario, values: Vec<f64>) -> Result<Self> {
        if Some(values.len()) != scenario.n_tuples() {
            return Err(Error::DimensionMismatch(format!(
                "{} correlations for {}",
                values.len(),
                scenario.label()
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan() || v.abs() > 1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "correlation {v} outside [-1, 1]"
            )));
        }
        Ok(Self { scenario, values })
    }

    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn bell_value(c: &CoefficientTensor, e: &CorrelationVector) -> Result<f64> {
    c.scenario.check_same(&e.scenario)?;
    Ok(c.values.iter().zip(&e.values).map(|(a, b)| a * b).sum())
}

/// Predetermined `+-1` outcome for every party and setting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    n_parties: usize,
    n_settings: usize,
    outcomes: Vec<i8>,
}

impl DeterministicStrategy {
    /// `table[n][m]` is the outcome of party `n` under setting `m`.
    pub fn new(table: Vec<Vec<i8>>) -> Result<Self> {
        let n_parties = table.len();
        let n_settings = table.first().map_or(0, Vec::len);
        if n_parties == 0 || n_settings == 0 || table.iter().any(|r| r.len() != n_settings) {
            return Err(Error::DimensionMismatch(
                "strategy table must be N x M".into(),
            ));
        }
        if table.iter().flatten().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidArgument(
                "strategy outcomes must be +-1".into(),
            ));
        }
        Ok(Self {
            n_parties,
            n_settings,
            outcomes: table.concat(),
        })
    }

    pub fn constant(s: &BellScenario, value: i8) -> Result<Self> {
        Self::new(vec![vec![value; s.n_settings]; s.n_parties])
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn outcome(&self, party: usize, setting: usize) -> i8 {
        self.outcomes[party * self.n_settings + setting]
    }

    pub fn table(&self) -> Vec<Vec<i8>> {
        self.outcomes
            .chunks(self.n_settings)
            .map(<[i8]>::to_vec)
            .collect()
    }

    pub fn flip_party(&mut self, party: usize) {
        let row = &mut self.outcomes[party * self.n_settings..(party + 1) * self.n_settings];
        row.iter_mut().for_each(|v| *v = -*v);
    }
}

pub fn strategy_correlations(
    s: &BellScenario,
    d: &DeterministicStrategy,
) -> Result<CorrelationVector> {
    if d.n_parties != s.n_parties || d.n_settings != s.n_settings {
        return Err(Error::DimensionMismatch(format!(
            "strategy is {}x{}, scenario {}",
            d.n_parties,
            d.n_settings,
            s.label()
        )));
    }
    let mut values = vec![1.0];
    for party in 0..s.n_parties {
        let row = &d.outcomes[party * s.n_settings..(party + 1) * s.n_settings];
        values = values
            .iter()
            .flat_map(|&v| row.iter().map(move |&o| v * o as f64))
            .collect();
    }
    CorrelationVector::new(*s, values)
}

/// Exact `max |C . E|` over deterministic strategies, with an argmax.
///
/// Parties 2..N are enumerated (`2^{M(N-1)}` assignments). For each one,
/// party 1 answers setting-wise with the sign of its partial sum, which is
/// optimal, so its outcomes are implied rather than searched.
pub fn lhv_bound_bruteforce(s: &BellScenario) -> Result<(f64, DeterministicStrategy)> {
    lhv_bound_bruteforce_with(s, true)
}

pub fn lhv_bound_bruteforce_with(
    s: &BellScenario,
    parallel: bool,
) -> Result<(f64, DeterministicStrategy)> {
    let bits = s.n_settings * (s.n_parties - 1);
    if bits > MAX_BRUTE_FORCE_BITS {
        return Err(Error::BudgetExceeded(format!(
            "brute force over 2^{bits} strategies (limit 2^{MAX_BRUTE_FORCE_BITS})"
        )));
    }
    let coeffs = coefficient_tensor(s)?;
    let n_masks: u64 = 1 << bits;
    let search = BruteForce::new(s, coeffs.values());

    let best = if parallel {
        const CHUNK: u64 = 1 << 10;
        let n_chunks = n_masks.div_ceil(CHUNK);
        (0..n_chunks)
            .into_par_iter()
            .map(|chunk| search.scan(chunk * CHUNK..((chunk + 1) * CHUNK).min(n_masks)))
            .reduce(|| (f64::NEG_INFINITY, u64::MAX), pick_best)
    } else {
        search.scan(0..n_masks)
    };

    let (value, mask) = best;
    let partial = search.partial_sums(mask, &mut vec![0.0; search.rest_len]);
    let mut table = vec![partial
        .iter()
        .map(|&p| if p >= 0.0 { 1 } else { -1 })
        .collect::<Vec<i8>>()];
    for party in 1..s.n_parties {
        table.push(
            (0..s.n_settings)
                .map(|m| search.outcome(mask, party, m))
                .collect(),
        );
    }
    Ok((value, DeterministicStrategy::new(table)?))
}

/// Highest value wins; ties go to the lowest mask.
fn pick_best(a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

struct BruteForce<'a> {
    n_parties: usize,
    n_settings: usize,
    coeffs: &'a [f64],
    rest_len: usize,
}

impl<'a> BruteForce<'a> {
    fn new(s: &BellScenario, coeffs: &'a [f64]) -> Self {
        Self {
            n_parties: s.n_parties,
            n_settings: s.n_settings,
            coeffs,
            rest_len: coeffs.len() / s.n_settings,
        }
    }

    /// Outcome of `party >= 1` under `setting` encoded in `mask`.
    fn outcome(&self, mask: u64, party: usize, setting: usize) -> i8 {
        let bit = (party - 1) * self.n_settings + setting;
        if mask >> bit & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Per-setting partial sums of party 1 given the others' outcomes.
    fn partial_sums(&self, mask: u64, products: &mut Vec<f64>) -> Vec<f64> {
        products.clear();
        products.push(1.0);
        for party in 1..self.n_parties {
            let len = products.len();
            let mut next = Vec::with_capacity(len * self.n_settings);
            for &p in products.iter() {
                for m in 0..self.n_settings {
                    next.push(p * self.outcome(mask, party, m) as f64);
                }
            }
            *products = next;
        }
        self.coeffs
            .chunks(self.rest_len)
            .map(|row| row.iter().zip(products.iter()).map(|(c, p)| c * p).sum())
            .collect()
    }

    fn scan(&self, masks: std::ops::Range<u64>) -> (f64, u64) {
        let mut products = Vec::with_capacity(self.rest_len);
        let mut best = (f64::NEG_INFINITY, u64::MAX);
        for mask in masks {
            let value: f64 = self
                .partial_sums(mask, &mut products)
                .iter()
                .map(|p| p.abs())
                .sum();
            best = pick_best(best, (value, mask));
        }
        best
    }
}
