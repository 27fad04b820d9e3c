//! Violation factors for the named state families, the local-frame
//! optimization of the violation condition, PPT bounds and the settings
//! sweep for GHZ states.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quantum::{
    correlation_tensor, ghz_overlap_difference, twirled_quantum_value, DensityMatrix,
};
use crate::scenario::{lr_bound_analytic, BellScenario};

pub const DEFAULT_RESTARTS: usize = 20;
const INITIAL_STEP: f64 = FRAC_PI_4;
const FINAL_STEP: f64 = 1e-6;
const MAX_PASSES_PER_STEP: usize = 10_000;

/// Proper rotation of each party's Bloch axes, given as Z-Y-Z Euler angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalFrameSet {
    angles: Vec<[f64; 3]>,
}

impl LocalFrameSet {
    pub fn new(angles: Vec<[f64; 3]>) -> Self {
        Self { angles }
    }

    pub fn identity(n_parties: usize) -> Self {
        Self::new(vec![[0.0; 3]; n_parties])
    }

    pub fn angles(&self) -> &[[f64; 3]] {
        &self.angles
    }

    pub fn n_parties(&self) -> usize {
        self.angles.len()
    }

    /// `Rz(a) Ry(b) Rz(c)`. Row `i` is the new `i`-th axis in old coordinates.
    pub fn rotation(&self, party: usize) -> [[f64; 3]; 3] {
        euler_zyz(self.angles[party])
    }

    fn from_flat(flat: &[f64]) -> Self {
        Self::new(flat.chunks(3).map(|c| [c[0], c[1], c[2]]).collect())
    }
}

fn euler_zyz([a, b, c]: [f64; 3]) -> [[f64; 3]; 3] {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    [
        [ca * cb * cc - sa * sc, -ca * cb * sc - sa * cc, ca * sb],
        [sa * cb * cc + ca * sc, -sa * cb * sc + ca * cc, sa * sb],
        [-sb * cc, sb * sc, cb],
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub scenario: BellScenario,
    pub quantum_value: f64,
    pub lr_bound: f64,
    pub violation_factor: f64,
    pub violated: bool,
    /// Set when `violated` is false but the quantum value came from a
    /// heuristic maximization, so a larger value may exist.
    pub max_is_heuristic: bool,
}

impl ViolationReport {
    pub fn new(scenario: BellScenario, quantum_value: f64, heuristic: bool) -> Self {
        let lr_bound = lr_bound_analytic(&scenario);
        let violation_factor = quantum_value / lr_bound;
        let violated = violation_factor > 1.0;
        Self {
            scenario,
            quantum_value,
            lr_bound,
            violation_factor,
            violated,
            max_is_heuristic: heuristic && !violated,
        }
    }
}

/// `(M sin(pi/2M))^N / (2 cos(pi/2M))`.
pub fn violation_factor_ghz(s: &BellScenario) -> f64 {
    let half = PI / (2.0 * s.n_settings() as f64);
    (s.n_settings() as f64 * half.sin()).powi(s.n_parties() as i32) / (2.0 * half.cos())
}

/// `(pi/2)^N / 2`, the continuous-settings value.
pub fn violation_factor_ghz_limit(n_parties: usize) -> f64 {
    0.5 * FRAC_PI_2.powi(n_parties as i32)
}

/// `M^N sin(2 alpha) / (2 B_LR)`.
pub fn violation_factor_gen_ghz(s: &BellScenario, alpha: f64) -> f64 {
    s.n_tuples_f64() / (2.0 * lr_bound_analytic(s)) * (2.0 * alpha).sin()
}

/// `M^N / (2 (N+1) B_LR)`, times `cos(alpha)` for the untwirled operator.
pub fn violation_factor_dur(s: &BellScenario, alpha: f64, twirled: bool) -> Result<f64> {
    if s.n_parties() < 3 {
        return Err(Error::InvalidArgument(
            "bound entangled family needs N >= 3".into(),
        ));
    }
    let base = s.n_tuples_f64() / (2.0 * (s.n_parties() as f64 + 1.0) * lr_bound_analytic(s));
    Ok(if twirled { base } else { base * alpha.cos() })
}

/// Frame-optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSearch {
    pub restarts: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub final_step: f64,
}

impl FrameSearch {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            initial_step: INITIAL_STEP,
            final_step: FINAL_STEP,
        }
    }
}

/// Signed `xy`-plane correlation sum `sum_{I_xi} (-1)^xi T'` in rotated frames.
///
/// With `w_n = R_n[x] + i R_n[y]` the sum is `Re sum_j T_j prod_n w_n[j_n]`
/// over the full correlations `j in {x,y,z}^N`: terms with `2 xi` factors
/// of `i` keep sign `(-1)^xi`, odd counts are imaginary.
pub struct FrameObjective {
    n_parties: usize,
    correlations: Vec<f64>,
}

impl FrameObjective {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let t = correlation_tensor(rho)?;
        Ok(Self {
            n_parties: rho.n_parties(),
            correlations: t.full_correlations(),
        })
    }

    pub fn value(&self, frames: &LocalFrameSet) -> f64 {
        let mut current: Vec<C64> = self
            .correlations
            .iter()
            .map(|&t| C64::new(t, 0.0))
            .collect();
        for party in (0..self.n_parties).rev() {
            let r = frames.rotation(party);
            let w = [
                C64::new(r[0][0], r[1][0]),
                C64::new(r[0][1], r[1][1]),
                C64::new(r[0][2], r[1][2]),
            ];
            current = current
                .chunks(3)
                .map(|c| c[0] * w[0] + c[1] * w[1] + c[2] * w[2])
                .collect();
        }
        current[0].re
    }

    fn value_flat(&self, flat: &[f64]) -> f64 {
        self.value(&LocalFrameSet::from_flat(flat))
    }

    /// Randomized coordinate ascent from one random starting frame.
    fn ascend(&self, search: &FrameSearch, restart: usize) -> (f64, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
        rng.set_stream(restart as u64);
        let dims = 3 * self.n_parties;
        let mut x: Vec<f64> = (0..dims).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let mut best = self.value_flat(&x);
        let mut order: Vec<usize> = (0..dims).collect();
        let mut step = search.initial_step;
        while step >= search.final_step {
            for _ in 0..MAX_PASSES_PER_STEP {
                order.shuffle(&mut rng);
                let mut improved = false;
                for &k in &order {
                    let origin = x[k];
                    for delta in [step, -step] {
                        x[k] = origin + delta;
                        let v = self.value_flat(&x);
                        if v > best {
                            best = v;
                            improved = true;
                            break;
                        }
                        x[k] = origin;
                    }
                }
                if !improved {
                    break;
                }
            }
            step *= 0.5;
        }
        (best, x)
    }

    /// Best value over independent restarts; ties resolve to the
    /// lexicographically smallest angle vector so the result does not depend
    /// on scheduling.
    pub fn maximize(&self, search: &FrameSearch) -> (f64, LocalFrameSet) {
        let runs: Vec<(f64, Vec<f64>)> = (0..search.restarts.max(1))
            .into_par_iter()
            .map(|r| self.ascend(search, r))
            .collect();
        let (value, flat) = runs
            .into_iter()
            .reduce(|a, b| match a.0.total_cmp(&b.0) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => {
                    let lex =
                        a.1.iter()
                            .zip(&b.1)
                            .map(|(x, y)| x.total_cmp(y))
                            .find(|o| o.is_ne())
                            .unwrap_or(std::cmp::Ordering::Equal);
                    if lex.is_le() {
                        a
                    } else {
                        b
                    }
                }
            })
            .expect("at least one restart");
        (value, LocalFrameSet::from_flat(&flat))
    }
}

/// `(M/2)^N max_frames sum_{I_xi} (-1)^xi T`, a lower bound on the true
/// maximum found by seeded random-restart coordinate ascent.
pub fn ns_condition_value(
    s: &BellScenario,
    rho: &DensityMatrix,
    restarts: usize,
    seed: u64,
) -> Result<(f64, LocalFrameSet)> {
    if s.n_parties() != rho.n_parties() {
        return Err(Error::DimensionMismatch(format!(
            "scenario has {} parties, state has {}",
            s.n_parties(),
            rho.n_parties()
        )));
    }
    let objective = FrameObjective::new(rho)?;
    let (best, frames) = objective.maximize(&FrameSearch::new(restarts, seed));
    let scale = (s.n_settings() as f64 / 2.0).powi(s.n_parties() as i32);
    Ok((scale * best, frames))
}

/// Violation check with the frame-optimized quantum value.
pub fn violates(
    s: &BellScenario,
    rho: &DensityMatrix,
    restarts: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let (value, _) = ns_condition_value(s, rho, restarts, seed)?;
    Ok(ViolationReport::new(*s, value, true))
}

/// Violation check against the phase-twirled Bell operator.
pub fn violates_twirled(
    s: &BellScenario,
    rho: &DensityMatrix,
    alpha: f64,
) -> Result<ViolationReport> {
    let value = twirled_quantum_value(s, rho, alpha)?;
    Ok(ViolationReport::new(*s, value, false))
}

/// `(M/2)^N`, the largest Bell value reachable by states that are PPT with
/// respect to every subsystem.
pub fn nppt_bound(s: &BellScenario) -> f64 {
    (s.n_settings() as f64 / 2.0).powi(s.n_parties() as i32)
}

pub fn nppt_violation_factor(s: &BellScenario) -> f64 {
    nppt_bound(s) / lr_bound_analytic(s)
}

/// `2^{1-p}`.
pub fn p_ppt_bell_bound(p: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    Ok(2f64.powi(1 - p as i32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PptBellCheck {
    pub p: usize,
    /// `|<psi+|rho|psi+> - <psi-|rho|psi->|`.
    pub lhs: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Evaluates the GHZ overlap inequality that `p`-PPT states obey.
pub fn check_p_ppt_bound(rho: &DensityMatrix, p: usize) -> Result<PptBellCheck> {
    let bound = p_ppt_bell_bound(p)?;
    let lhs = ghz_overlap_difference(rho)?.abs();
    Ok(PptBellCheck {
        p,
        lhs,
        bound,
        satisfied: lhs <= bound + 1e-12,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub n_parties: usize,
    pub n_settings: usize,
    pub violation_factor: f64,
    pub limit: f64,
}

/// GHZ violation factors for `M = 2..=m_max` and each `N`.
pub fn fig1_data(n_list: &[usize], m_max: usize) -> Result<Vec<Fig1Row>> {
    if m_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "m_max must be >= 2, got {m_max}"
        )));
    }
    let mut rows = Vec::with_capacity(n_list.len() * (m_max - 1));
    for &n in n_list {
        let limit = violation_factor_ghz_limit(n);
        for m in 2..=m_max {
            let s = BellScenario::new(n, m)?;
            rows.push(Fig1Row {
                n_parties: n,
                n_settings: m,
                violation_factor: violation_factor_ghz(&s),
                limit,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{
        dur_state, generalized_ghz, ghz_state, quantum_value, quantum_value_with, random, GhzSign,
        OperatorForm,
    };

    fn sc(n: usize, m: usize) -> BellScenario {
        BellScenario::new(n, m).unwrap()
    }

    #[test]
    fn rotations_are_proper() {
        for angles in [[0.1, 0.2, 0.3], [2.0, -1.0, 4.0], [0.0, 0.0, 0.0]] {
            let r = euler_zyz(angles);
            for i in 0..3 {
                for j in 0..3 {
                    let dot: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expected).abs() < 1e-12);
                }
            }
            let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
                - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
            assert!((det - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_factor_closed_forms() {
        for n in 2..=6 {
            let v2 = violation_factor_ghz(&sc(n, 2));
            assert!((v2 - 2f64.powf((n as f64 - 1.0) / 2.0)).abs() < 1e-12);
            let v3 = violation_factor_ghz(&sc(n, 3));
            assert!((v3 - 1.5f64.powi(n as i32) / 3f64.sqrt()).abs() < 1e-12);
        }
        let v44 = violation_factor_ghz(&sc(4, 4));
        assert!((v44 - 2.9713).abs() < 5e-5, "{v44}");
        assert!(violation_factor_ghz(&sc(4, 3)) < v44 && v44 < violation_factor_ghz_limit(4));
    }

    #[test]
    fn ghz_factor_matches_operator_ratio() {
        for n in 2..=5 {
            for m in 2..=5 {
                let s = sc(n, m);
                let rho = ghz_state(n, GhzSign::Plus).unwrap().density();
                let op = quantum_value(&s, &rho).unwrap() / lr_bound_analytic(&s);
                assert!((op - violation_factor_ghz(&s)).abs() < 1e-12 * op.max(1.0));
            }
        }
    }

    #[test]
    fn limit_values() {
        assert!((violation_factor_ghz_limit(2) - PI * PI / 8.0).abs() < 1e-15);
        assert!((violation_factor_ghz_limit(3) - PI.powi(3) / 16.0).abs() < 1e-15);
        for n in 2..=6 {
            let v = violation_factor_ghz(&sc(n, 10_000));
            let lim = violation_factor_ghz_limit(n);
            assert!(((v - lim) / lim).abs() < 1e-6);
        }
    }

    #[test]
    fn gen_ghz_factors() {
        let s = sc(4, 3);
        assert!((violation_factor_gen_ghz(&s, FRAC_PI_4) - violation_factor_ghz(&s)).abs() < 1e-12);
        assert_eq!(violation_factor_gen_ghz(&s, 0.0), 0.0);
        for alpha in [0.1, 0.4, 0.7] {
            let rho = generalized_ghz(4, alpha).unwrap().density();
            let op = quantum_value(&s, &rho).unwrap() / lr_bound_analytic(&s);
            assert!((op - violation_factor_gen_ghz(&s, alpha)).abs() < 1e-9);
        }
    }

    #[test]
    fn gen_ghz_gap_between_two_and_three_settings() {
        // sin 2a strictly between 1/V(5,3) and 1/V(5,2)
        let lo = 1.0 / violation_factor_ghz(&sc(5, 3));
        let hi = 1.0 / violation_factor_ghz(&sc(5, 2));
        assert!(lo < hi);
        let alpha = 0.5 * (0.5 * (lo + hi)).asin();
        assert!(violation_factor_gen_ghz(&sc(5, 3), alpha) > 1.0);
        assert!(violation_factor_gen_ghz(&sc(5, 2), alpha) <= 1.0);
    }

    #[test]
    fn dur_factors() {
        let first_violation = |m: usize| {
            (3..=12)
                .find(|&n| violation_factor_dur(&sc(n, m), 0.0, true).unwrap() > 1.0)
                .unwrap()
        };
        assert_eq!(first_violation(3), 7);
        assert_eq!(first_violation(5), 6);
        let v65 = violation_factor_dur(&sc(6, 5), 0.0, true).unwrap();
        assert!((v65 - 1.0219).abs() < 1e-4, "{v65}");
        let untwirled = violation_factor_dur(&sc(6, 5), 0.5, false).unwrap();
        assert!((untwirled - v65 * 0.5f64.cos()).abs() < 1e-15);
        assert!(violation_factor_dur(&sc(2, 5), 0.0, true).is_err());

        let s = sc(4, 3);
        let rho = dur_state(4, 0.9).unwrap();
        let op = quantum_value_with(&s, &rho, OperatorForm::Sum).unwrap() / lr_bound_analytic(&s);
        assert!((op - violation_factor_dur(&s, 0.9, false).unwrap()).abs() < 1e-9);
        let tw = twirled_quantum_value(&s, &rho, 0.9).unwrap() / lr_bound_analytic(&s);
        assert!((tw - violation_factor_dur(&s, 0.9, true).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn objective_identity_frame_for_ghz() {
        for n in 2..=4 {
            let rho = ghz_state(n, GhzSign::Plus).unwrap().density();
            let obj = FrameObjective::new(&rho).unwrap();
            let v = obj.value(&LocalFrameSet::identity(n));
            assert!((v - (1 << (n - 1)) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn objective_matches_overlap_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random::density_matrix(3, &mut rng).unwrap();
        let obj = FrameObjective::new(&rho).unwrap();
        let v = obj.value(&LocalFrameSet::identity(3));
        assert!((v - 4.0 * ghz_overlap_difference(&rho).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn optimizer_examples() {
        let s = sc(3, 3);
        let ghz = ghz_state(3, GhzSign::Plus).unwrap().density();
        let (v, frames) = ns_condition_value(&s, &ghz, 8, 1).unwrap();
        assert!((v - 13.5).abs() < 1e-6, "{v}");
        assert_eq!(frames.n_parties(), 3);

        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let (v, _) = ns_condition_value(&s, &mixed, 2, 1).unwrap();
        assert!(v.abs() < 1e-12);

        let report = violates(&s, &mixed, 2, 1).unwrap();
        assert!(!report.violated && report.max_is_heuristic);
        assert_eq!(report.violation_factor, 0.0);

        let report = violates(&s, &ghz, 4, 1).unwrap();
        assert!(report.violated && !report.max_is_heuristic);
    }

    #[test]
    fn optimizer_is_seed_reproducible() {
        let s = sc(3, 3);
        let rho = generalized_ghz(3, 0.3).unwrap().density();
        let a = ns_condition_value(&s, &rho, 4, 42).unwrap();
        let b = ns_condition_value(&s, &rho, 4, 42).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn nppt_bounds() {
        assert_eq!(nppt_bound(&sc(2, 2)), 1.0);
        assert!((nppt_violation_factor(&sc(2, 2)) - 2f64.powf(-0.5)).abs() < 1e-15);
        for n in 2..=8 {
            let expected = 2f64.powf((1.0 - n as f64) / 2.0);
            assert!((nppt_violation_factor(&sc(n, 2)) - expected).abs() < 1e-12);
            for m in 2..=10 {
                let v = nppt_violation_factor(&sc(n, m));
                assert!(v <= 2f64.sqrt() * FRAC_PI_4.powi(n as i32) + 1e-12);
                assert!(v < 1.0);
            }
        }
    }

    #[test]
    fn p_ppt_bounds() {
        assert_eq!(p_ppt_bell_bound(1).unwrap(), 1.0);
        assert!(p_ppt_bell_bound(0).is_err());
        let dur = dur_state(3, 0.0).unwrap();
        let check = check_p_ppt_bound(&dur, 3).unwrap();
        assert!((check.lhs - 0.25).abs() < 1e-14);
        assert!(check.satisfied);
        let ghz = ghz_state(4, GhzSign::Plus).unwrap().density();
        let check = check_p_ppt_bound(&ghz, 4).unwrap();
        assert!(!check.satisfied && (check.lhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fig1_shapes() {
        let rows = fig1_data(&[2, 3, 5], 12).unwrap();
        assert_eq!(rows.len(), 33);
        let series = |n: usize| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.n_parties == n)
                .map(|r| r.violation_factor)
                .collect()
        };
        assert!(series(2).windows(2).all(|w| w[1] < w[0]));
        assert!(series(3).windows(2).all(|w| w[1] < w[0]));
        assert!(series(5).windows(2).all(|w| w[1] > w[0]));
        assert!(fig1_data(&[2], 1).is_err());
    }
}
