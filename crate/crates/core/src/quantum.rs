//! Qubit states, the Bell operator in summed and closed form, correlation
//! functions and tensors, and partial-transpose positivity checks.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, kron, kron_all, partial_transpose, trace_product, ComplexMatrix, QubitIndexSet, C64,
    MAX_QUBITS, ONE, ZERO,
};
use crate::scenario::{coefficient_tensor, BellScenario, CorrelationVector};

/// Upper limit on `M^N * 4^N` for building the summed Bell operator.
pub const MAX_OPERATOR_WORK: f64 = 2.0e8;

/// Largest `N` for which the full correlation tensor is computed.
pub const MAX_TENSOR_QUBITS: usize = 6;

const NORM_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const STATE_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GhzSign {
    Plus,
    Minus,
}

impl GhzSign {
    pub fn factor(self) -> f64 {
        match self {
            GhzSign::Plus => 1.0,
            GhzSign::Minus => -1.0,
        }
    }
}

fn check_qubits(n_parties: usize) -> Result<()> {
    if n_parties == 0 || n_parties > MAX_QUBITS {
        return Err(Error::InvalidState(format!(
            "{n_parties} qubits outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    n_parties: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(n_parties: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_qubits(n_parties)?;
        if amplitudes.len() != 1 << n_parties {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {n_parties} qubits",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} != 1")));
        }
        Ok(Self {
            n_parties,
            amplitudes,
        })
    }

    /// Normalizes the given amplitudes first.
    pub fn normalized(n_parties: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(n_parties, amplitudes)
    }

    pub fn basis(n_parties: usize, index: usize) -> Result<Self> {
        check_qubits(n_parties)?;
        let mut amps = vec![ZERO; 1 << n_parties];
        *amps
            .get_mut(index)
            .ok_or_else(|| Error::InvalidArgument(format!("basis index {index} out of range")))? =
            ONE;
        Self::new(n_parties, amps)
    }

    /// Tensor product of single-qubit states, party 1 first.
    pub fn product(qubits: &[[C64; 2]]) -> Result<Self> {
        check_qubits(qubits.len())?;
        let mut amps = vec![ONE];
        for q in qubits {
            amps = amps.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        Self::normalized(qubits.len(), amps)
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_parts(self.n_parties, ComplexMatrix::outer(&self.amplitudes))
    }
}

/// `(|0...0> + sign |1...1>) / sqrt 2`.
pub fn ghz_state(n_parties: usize, sign: GhzSign) -> Result<PureState> {
    if n_parties < 2 {
        return Err(Error::InvalidArgument("GHZ state needs N >= 2".into()));
    }
    check_qubits(n_parties)?;
    let mut amps = vec![ZERO; 1 << n_parties];
    amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[(1 << n_parties) - 1] = C64::new(sign.factor() * FRAC_1_SQRT_2, 0.0);
    PureState::new(n_parties, amps)
}

/// `cos(alpha) |0...0> + sin(alpha) |1...1>`.
pub fn generalized_ghz(n_parties: usize, alpha: f64) -> Result<PureState> {
    check_qubits(n_parties)?;
    let mut amps = vec![ZERO; 1 << n_parties];
    amps[0] = C64::new(alpha.cos(), 0.0);
    amps[(1 << n_parties) - 1] += C64::new(alpha.sin(), 0.0);
    PureState::normalized(n_parties, amps)
}

/// `(|0...0> + e^{i alpha} |1...1>) / sqrt 2`.
pub fn phased_ghz(n_parties: usize, alpha: f64) -> Result<PureState> {
    check_qubits(n_parties)?;
    let mut amps = vec![ZERO; 1 << n_parties];
    amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[(1 << n_parties) - 1] += C64::from_polar(FRAC_1_SQRT_2, alpha);
    PureState::normalized(n_parties, amps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    n_parties: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity. The stored matrix is
    /// the Hermitian part of the input.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_parties =
            linalg::qubit_count(&matrix).map_err(|e| Error::InvalidState(e.to_string()))?;
        check_qubits(n_parties)?;
        let defect = matrix.hermiticity_defect();
        if defect > STATE_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max deviation {defect:e})"
            )));
        }
        let matrix = &matrix.scale_real(0.5) + &matrix.adjoint().scale_real(0.5);
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} != 1")));
        }
        let lambda = linalg::min_eigenvalue(&matrix)?;
        if lambda < -TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {lambda:e})"
            )));
        }
        Ok(Self { n_parties, matrix })
    }

    /// For matrices that are valid states by construction.
    pub(crate) fn from_parts(n_parties: usize, matrix: ComplexMatrix) -> Self {
        Self { n_parties, matrix }
    }

    pub fn maximally_mixed(n_parties: usize) -> Result<Self> {
        check_qubits(n_parties)?;
        let dim = 1 << n_parties;
        Ok(Self::from_parts(
            n_parties,
            ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        ))
    }

    /// Convex combination `sum_k w_k rho_k`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let n = first.1.n_parties;
        let total: f64 = parts.iter().map(|p| p.0).sum();
        if parts.iter().any(|p| p.0 < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "mixture weights must form a distribution".into(),
            ));
        }
        let mut m = ComplexMatrix::zeros(1 << n, 1 << n);
        for (w, rho) in parts {
            if rho.n_parties != n {
                return Err(Error::DimensionMismatch(
                    "mixing states of different size".into(),
                ));
            }
            m.add_scaled(&rho.matrix, C64::new(*w, 0.0))?;
        }
        Ok(Self::from_parts(n, m))
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, psi: &PureState) -> Result<f64> {
        if psi.n_parties != self.n_parties {
            return Err(self.size_mismatch(psi.n_parties));
        }
        Ok(self.matrix.quadratic_form(&psi.amplitudes)?.re)
    }

    /// `U^{(x)N} rho U^{dag (x)N}` with `U = |0><0| + e^{i theta} |1><1|`.
    pub fn with_local_phase(&self, theta: f64) -> Self {
        let dim = self.matrix.rows();
        let mut m = self.matrix.clone();
        for r in 0..dim {
            for c in 0..dim {
                let k = r.count_ones() as f64 - c.count_ones() as f64;
                m[(r, c)] *= C64::from_polar(1.0, theta * k);
            }
        }
        Self::from_parts(self.n_parties, m)
    }

    /// `(U_1 (x) ... (x) U_N) rho (...)^dag` for single-qubit unitaries.
    pub fn with_local_unitaries(&self, unitaries: &[ComplexMatrix]) -> Result<Self> {
        if unitaries.len() != self.n_parties {
            return Err(self.size_mismatch(unitaries.len()));
        }
        if unitaries.iter().any(|u| u.rows() != 2 || u.cols() != 2) {
            return Err(Error::DimensionMismatch(
                "local unitaries must be 2x2".into(),
            ));
        }
        let u = kron_all(unitaries);
        let m = u.matmul(&self.matrix)?.matmul(&u.adjoint())?;
        Ok(Self::from_parts(self.n_parties, m))
    }

    fn size_mismatch(&self, other: usize) -> Error {
        Error::DimensionMismatch(format!(
            "{other} parties vs a {}-qubit state",
            self.n_parties
        ))
    }
}

/// The bound entangled family
/// `rho_N = (|phi><phi| + 1/2 sum_k (P_k + P~_k)) / (N + 1)`,
/// where `P_k` projects on the basis state with a single `1` at party `k`
/// and `P~_k` on its bitwise complement.
pub fn dur_state(n_parties: usize, alpha: f64) -> Result<DensityMatrix> {
    if n_parties < 3 {
        return Err(Error::InvalidArgument(format!(
            "bound entangled family needs N >= 3, got {n_parties}"
        )));
    }
    let phi = phased_ghz(n_parties, alpha)?;
    let dim = 1 << n_parties;
    let mut m = ComplexMatrix::outer(phi.amplitudes());
    for k in 0..n_parties {
        let single = 1 << (n_parties - 1 - k);
        let complement = (dim - 1) ^ single;
        m[(single, single)] += C64::new(0.5, 0.0);
        m[(complement, complement)] += C64::new(0.5, 0.0);
    }
    Ok(DensityMatrix::from_parts(
        n_parties,
        m.scale_real(1.0 / (n_parties as f64 + 1.0)),
    ))
}

/// `cos(phi) sigma_x + sin(phi) sigma_y`.
pub fn equatorial_observable(phi: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 1)] = C64::from_polar(1.0, -phi);
    m[(1, 0)] = C64::from_polar(1.0, phi);
    m
}

/// Which form of the Bell operator an expectation is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OperatorForm {
    /// `(M^N / 2) (|psi+><psi+| - |psi-><psi-|)`.
    #[default]
    Closed,
    /// The `M^N`-term sum of tensor products of equatorial observables.
    Sum,
}

/// Sum over all setting tuples of `c_m  A_{m_1} (x) ... (x) A_{m_N}`.
pub fn bell_operator_sum(s: &BellScenario) -> Result<ComplexMatrix> {
    let n = s.n_parties();
    let work = s.n_tuples_f64() * 4f64.powi(n as i32);
    if n > MAX_QUBITS || work > MAX_OPERATOR_WORK {
        return Err(Error::BudgetExceeded(format!(
            "summed Bell operator for {s} needs {work:.3e} operations"
        )));
    }
    let coeffs = coefficient_tensor(s)?;
    let observables: Vec<ComplexMatrix> = (0..s.n_settings())
        .map(|m| equatorial_observable(s.angle_unchecked(m)))
        .collect();
    let dim = 1 << n;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    // depth-first over parties keeps partial products; tuples are visited
    // in lexicographic order
    let mut stack: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(1)];
    let mut tuple = vec![0usize; n];
    let mut index = 0usize;
    loop {
        while stack.len() <= n {
            let depth = stack.len() - 1;
            let next = kron(&stack[depth], &observables[tuple[depth]]);
            stack.push(next);
        }
        let c = coeffs.values()[index];
        if c != 0.0 {
            acc.add_scaled(&stack[n], C64::new(c, 0.0))?;
        }
        index += 1;
        // advance the odometer
        let mut depth = n;
        loop {
            if depth == 0 {
                return Ok(acc);
            }
            depth -= 1;
            stack.pop();
            tuple[depth] += 1;
            if tuple[depth] < s.n_settings() {
                break;
            }
            tuple[depth] = 0;
        }
    }
}

/// `(M^N / 2) (|psi+><psi+| - |psi-><psi-|)`.
pub fn bell_operator_closed(s: &BellScenario) -> Result<ComplexMatrix> {
    let n = s.n_parties();
    let plus = ComplexMatrix::outer(ghz_state(n, GhzSign::Plus)?.amplitudes());
    let minus = ComplexMatrix::outer(ghz_state(n, GhzSign::Minus)?.amplitudes());
    Ok((&plus - &minus).scale_real(s.n_tuples_f64() / 2.0))
}

pub fn bell_operator(s: &BellScenario, form: OperatorForm) -> Result<ComplexMatrix> {
    match form {
        OperatorForm::Closed => bell_operator_closed(s),
        OperatorForm::Sum => bell_operator_sum(s),
    }
}

/// `U^{(x)N} B U^{dag (x)N}` with `U = |0><0| + e^{i alpha/N} |1><1|`.
pub fn twirled_bell_operator(
    s: &BellScenario,
    alpha: f64,
    form: OperatorForm,
) -> Result<ComplexMatrix> {
    let b = bell_operator(s, form)?;
    let n = s.n_parties();
    Ok(DensityMatrix::from_parts(n, b)
        .with_local_phase(alpha / n as f64)
        .into_matrix())
}

fn check_scenario_state(s: &BellScenario, rho: &DensityMatrix) -> Result<()> {
    if s.n_parties() != rho.n_parties() {
        return Err(Error::DimensionMismatch(format!(
            "scenario has {} parties, state has {}",
            s.n_parties(),
            rho.n_parties()
        )));
    }
    Ok(())
}

/// `<psi+|rho|psi+> - <psi-|rho|psi->`.
pub fn ghz_overlap_difference(rho: &DensityMatrix) -> Result<f64> {
    let n = rho.n_parties();
    Ok(rho.expectation(&ghz_state(n, GhzSign::Plus)?)?
        - rho.expectation(&ghz_state(n, GhzSign::Minus)?)?)
}

/// `Tr(B rho)` from the closed form of the Bell operator.
pub fn quantum_value(s: &BellScenario, rho: &DensityMatrix) -> Result<f64> {
    check_scenario_state(s, rho)?;
    Ok(s.n_tuples_f64() / 2.0 * ghz_overlap_difference(rho)?)
}

pub fn quantum_value_with(
    s: &BellScenario,
    rho: &DensityMatrix,
    form: OperatorForm,
) -> Result<f64> {
    match form {
        OperatorForm::Closed => quantum_value(s, rho),
        OperatorForm::Sum => {
            check_scenario_state(s, rho)?;
            Ok(trace_product(&bell_operator_sum(s)?, rho.matrix())?.re)
        }
    }
}

/// `Tr(B~ rho)` for the phase-twirled operator, evaluated as the closed-form
/// value of `U^dag rho U`.
pub fn twirled_quantum_value(s: &BellScenario, rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_scenario_state(s, rho)?;
    let n = s.n_parties() as f64;
    quantum_value(s, &rho.with_local_phase(-alpha / n))
}

/// `Tr(rho A(phi_1) (x) ... (x) A(phi_N))` for equatorial observables.
///
/// The product operator maps `|b>` to the complementary basis state, so
/// only the anti-diagonal of `rho` contributes.
pub fn correlation_function(rho: &DensityMatrix, angles: &[f64]) -> Result<f64> {
    let n = rho.n_parties();
    if angles.len() != n {
        return Err(rho.size_mismatch(angles.len()));
    }
    let dim = 1usize << n;
    let m = rho.matrix();
    let mut acc = ZERO;
    for b in 0..dim {
        let phase: f64 = angles
            .iter()
            .enumerate()
            .map(|(party, &phi)| {
                if b >> (n - 1 - party) & 1 == 0 {
                    phi
                } else {
                    -phi
                }
            })
            .sum();
        acc += C64::from_polar(1.0, phase) * m[(b, (dim - 1) ^ b)];
    }
    Ok(acc.re)
}

/// Quantum correlations for every setting tuple of the scenario.
pub fn correlation_vector(s: &BellScenario, rho: &DensityMatrix) -> Result<CorrelationVector> {
    check_scenario_state(s, rho)?;
    let n_tuples = s
        .n_tuples()
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::BudgetExceeded(format!("correlation vector for {s}")))?;
    let mut angles = vec![0.0; s.n_parties()];
    let values = (0..n_tuples)
        .map(|idx| {
            for (a, &m) in angles.iter_mut().zip(s.tuple(idx).settings()) {
                *a = s.angle_unchecked(m);
            }
            correlation_function(rho, &angles).map(|e| e.clamp(-1.0, 1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    CorrelationVector::new(*s, values)
}

/// `T_{mu_1...mu_N} = Tr[rho (sigma_{mu_1} (x) ... (x) sigma_{mu_N})]`,
/// `mu = 0..3` for identity, x, y, z. Index layout is base 4 with party 1
/// most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTensor {
    n_parties: usize,
    entries: Vec<f64>,
}

impl CorrelationTensor {
    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn index_of(mu: &[usize]) -> usize {
        mu.iter().fold(0, |acc, &m| acc * 4 + m)
    }

    pub fn get(&self, mu: &[usize]) -> f64 {
        assert_eq!(mu.len(), self.n_parties, "index length");
        self.entries[Self::index_of(mu)]
    }

    /// Components with every index in `{x, y, z}`, layout base 3 with
    /// `0, 1, 2` for x, y, z.
    pub fn full_correlations(&self) -> Vec<f64> {
        let n = self.n_parties;
        (0..3usize.pow(n as u32))
            .map(|k| {
                let mut rest = k;
                let mut mu = vec![0; n];
                for slot in mu.iter_mut().rev() {
                    *slot = rest % 3 + 1;
                    rest /= 3;
                }
                self.entries[Self::index_of(&mu)]
            })
            .collect()
    }
}

pub fn correlation_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    let n = rho.n_parties();
    if n > MAX_TENSOR_QUBITS {
        return Err(Error::BudgetExceeded(format!(
            "correlation tensor for {n} qubits (limit {MAX_TENSOR_QUBITS})"
        )));
    }
    let dim = 1usize << n;
    let m = rho.matrix();
    let mut entries = Vec::with_capacity(1 << (2 * n));
    let mut mu = vec![0usize; n];
    for k in 0..(1usize << (2 * n)) {
        for (party, slot) in mu.iter_mut().enumerate() {
            *slot = k >> (2 * (n - 1 - party)) & 3;
        }
        let flip: usize = mu
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == 1 || p == 2)
            .fold(0, |f, (party, _)| f | 1 << (n - 1 - party));
        let mut acc = ZERO;
        for c in 0..dim {
            // sigma|c> = phase * |c ^ flip>
            let mut phase = ONE;
            for (party, &p) in mu.iter().enumerate() {
                let bit = c >> (n - 1 - party) & 1;
                phase *= match (p, bit) {
                    (2, 0) => C64::new(0.0, 1.0),
                    (2, _) => C64::new(0.0, -1.0),
                    (3, 1) => -ONE,
                    _ => ONE,
                };
            }
            acc += phase * m[(c, c ^ flip)];
        }
        entries.push(acc.re);
    }
    Ok(CorrelationTensor {
        n_parties: n,
        entries,
    })
}

/// `<psi+-|rho|psi+->` evaluated as `2^{-N} sum_mu T^{+-}_mu T_mu`.
pub fn ghz_overlap_via_tensor(rho: &DensityMatrix, sign: GhzSign) -> Result<f64> {
    let n = rho.n_parties();
    let t = correlation_tensor(rho)?;
    let t_ghz = correlation_tensor(&ghz_state(n, sign)?.density())?;
    let dot: f64 = t
        .entries
        .iter()
        .zip(&t_ghz.entries)
        .map(|(a, b)| a * b)
        .sum();
    Ok(dot / (1u64 << n) as f64)
}

/// Disjoint cover of the parties by nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    n_parties: usize,
    blocks: Vec<QubitIndexSet>,
}

impl Partition {
    pub fn new(blocks: Vec<QubitIndexSet>, n_parties: usize) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        let mut seen = 0u64;
        for b in &blocks {
            if let Some(&index) = b.indices().iter().find(|&&i| i >= n_parties) {
                return Err(Error::PartyOutOfRange { index, n_parties });
            }
            if seen & b.mask() != 0 {
                return Err(Error::InvalidPartition(format!(
                    "block {b} overlaps another"
                )));
            }
            seen |= b.mask();
        }
        if seen != (1u64 << n_parties) - 1 {
            return Err(Error::InvalidPartition(
                "blocks do not cover every party".into(),
            ));
        }
        Ok(Self { n_parties, blocks })
    }

    /// Every party in its own block.
    pub fn full_split(n_parties: usize) -> Result<Self> {
        let blocks = (0..n_parties)
            .map(|i| QubitIndexSet::single(i, n_parties))
            .collect::<Result<_>>()?;
        Self::new(blocks, n_parties)
    }

    /// All two-block partitions `{S, complement}`.
    pub fn bipartitions(n_parties: usize) -> Result<Vec<Self>> {
        // S ranges over nonempty sets that exclude the last party
        let limit = 1u64 << (n_parties - 1);
        (1..limit)
            .map(|mask| {
                let s = QubitIndexSet::from_mask(mask, n_parties)?;
                let rest = s.complement(n_parties).expect("last party excluded");
                Self::new(vec![s, rest], n_parties)
            })
            .collect()
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn blocks(&self) -> &[QubitIndexSet] {
        &self.blocks
    }

    /// One representative per complementary pair of block unions: the
    /// nonempty unions that leave out the last block.
    pub fn transpose_sets(&self) -> Vec<QubitIndexSet> {
        let p = self.blocks.len();
        (1u64..1 << (p - 1))
            .map(|sel| {
                let mask = (0..p - 1)
                    .filter(|b| sel >> b & 1 == 1)
                    .fold(0, |m, b| m | self.blocks[b].mask());
                QubitIndexSet::from_mask(mask, self.n_parties).expect("nonempty union")
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransposeCheck {
    pub transposed: QubitIndexSet,
    pub min_eigenvalue: f64,
    pub positive: bool,
}

pub fn partial_transpose_checks(
    rho: &DensityMatrix,
    partition: &Partition,
) -> Result<Vec<TransposeCheck>> {
    if partition.n_parties != rho.n_parties() {
        return Err(Error::InvalidPartition(format!(
            "partition of {} parties for a {}-qubit state",
            partition.n_parties,
            rho.n_parties()
        )));
    }
    partition
        .transpose_sets()
        .into_iter()
        .map(|set| {
            let pt = partial_transpose(rho.matrix(), &set, rho.n_parties())?;
            let min_eigenvalue = linalg::min_eigenvalue(&pt)?;
            let positive = min_eigenvalue >= -linalg::psd_tolerance(&pt);
            Ok(TransposeCheck {
                transposed: set,
                min_eigenvalue,
                positive,
            })
        })
        .collect()
}

/// True when every partial transpose over a union of partition blocks is
/// positive semidefinite.
pub fn is_p_ppt(rho: &DensityMatrix, partition: &Partition) -> Result<bool> {
    Ok(partial_transpose_checks(rho, partition)?
        .iter()
        .all(|c| c.positive))
}

/// Random states for property checks and examples.
pub mod random {
    use rand::Rng;
    use rand_distr::StandardNormal;

    use super::*;

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    /// Haar-random pure state.
    pub fn pure_state<R: Rng + ?Sized>(n_parties: usize, rng: &mut R) -> Result<PureState> {
        let amps = (0..1 << n_parties).map(|_| gaussian(rng)).collect();
        PureState::normalized(n_parties, amps)
    }

    /// `G G^dag / Tr` for a complex Gaussian `G` of full rank.
    pub fn density_matrix<R: Rng + ?Sized>(n_parties: usize, rng: &mut R) -> Result<DensityMatrix> {
        check_qubits(n_parties)?;
        let dim = 1 << n_parties;
        let g = ComplexMatrix::from_vec(dim, dim, (0..dim * dim).map(|_| gaussian(rng)).collect())?;
        let m = g.matmul(&g.adjoint())?;
        let tr = m.trace().re;
        Ok(DensityMatrix::from_parts(n_parties, m.scale_real(1.0 / tr)))
    }

    pub fn qubit<R: Rng + ?Sized>(rng: &mut R) -> [C64; 2] {
        let a = gaussian(rng);
        let b = gaussian(rng);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        [a / norm, b / norm]
    }

    pub fn product_state<R: Rng + ?Sized>(n_parties: usize, rng: &mut R) -> Result<PureState> {
        let qubits: Vec<[C64; 2]> = (0..n_parties).map(|_| qubit(rng)).collect();
        PureState::product(&qubits)
    }

    /// Mixture of `terms` random product states with random weights.
    pub fn separable_state<R: Rng + ?Sized>(
        n_parties: usize,
        terms: usize,
        rng: &mut R,
    ) -> Result<DensityMatrix> {
        let raw: Vec<f64> = (0..terms.max(1))
            .map(|_| rng.random::<f64>() + 1e-3)
            .collect();
        let total: f64 = raw.iter().sum();
        let parts = raw
            .iter()
            .map(|w| Ok((w / total, product_state(n_parties, rng)?.density())))
            .collect::<Result<Vec<_>>>()?;
        let mut m = DensityMatrix::mixture(&parts)?.into_matrix();
        // renormalize away the rounding of the weights
        let tr = m.trace().re;
        m = m.scale_real(1.0 / tr);
        Ok(DensityMatrix::from_parts(n_parties, m))
    }

    /// Haar-random element of SU(2).
    pub fn su2<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a = C64::new(q[0], q[1]) / norm;
        let b = C64::new(q[2], q[3]) / norm;
        ComplexMatrix::from_rows(&[vec![a, -b.conj()], vec![b, a.conj()]]).expect("2x2 rows")
    }
}
