//! Dense complex matrices sized for `N`-qubit operators (`N <= 10`).
//!
//! Storage is row-major. Qubit 0 owns the most significant bit of a
//! computational-basis index, so `|b_0 b_1 ... b_{N-1}>` sits at index
//! `sum_n b_n 2^{N-1-n}`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported qubit count for dense operators.
pub const MAX_QUBITS: usize = 10;

/// Hermiticity tolerance accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;

const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(n_rows, n_cols, rows.concat())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Projector `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                m[(j, k)] = v[j] * v[k].conj();
            }
        }
        m
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (k, &v) in values.iter().enumerate() {
            m[(k, k)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|k| self[(k, k)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)];
            }
        }
        m
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Self, factor: C64) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// `<v| self |v>`.
    pub fn quadratic_form(&self, v: &[C64]) -> Result<C64> {
        let hv = self.apply(v)?;
        Ok(v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max_{jk} |A[j][k] - conj(A[k][j])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for j in 0..self.rows {
            for k in j..self.cols {
                worst = worst.max((self[(j, k)] - self[(k, j)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on shape mismatch.
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, ONE).expect("matrix shapes differ");
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on shape mismatch.
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, -ONE).expect("matrix shapes differ");
        out
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on shape mismatch.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix shapes differ")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(r) {
                write!(f, "{:>8.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli matrix by index: 0 identity, 1 x, 2 y, 3 z.
pub fn pauli(mu: usize) -> ComplexMatrix {
    let rows: [[C64; 2]; 2] = match mu {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("pauli index {mu} out of range"),
    };
    ComplexMatrix {
        rows: 2,
        cols: 2,
        data: rows.concat(),
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                let dst = (ar * b.rows + br) * cols + ac * b.cols;
                for (d, &y) in out.data[dst..dst + b.cols].iter_mut().zip(b.row(br)) {
                    *d = x * y;
                }
            }
        }
    }
    out
}

/// Kronecker product of a sequence, left to right.
pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// `Tr(ab)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if !a.is_square() || !b.is_square() || a.rows != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "trace_product of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let n = a.rows;
    let mut acc = ZERO;
    for j in 0..n {
        for k in 0..n {
            acc += a[(j, k)] * b[(k, j)];
        }
    }
    Ok(acc)
}

/// Number of qubits `N` for a `2^N x 2^N` matrix.
pub fn qubit_count(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if !m.rows.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m.rows));
    }
    Ok(m.rows.trailing_zeros() as usize)
}

/// Strictly increasing, nonempty list of party indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitIndexSet(Vec<usize>);

impl QubitIndexSet {
    pub fn new(indices: Vec<usize>, n_parties: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidIndexSet("empty".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndexSet(format!(
                "{indices:?} is not strictly increasing"
            )));
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= n_parties) {
            return Err(Error::PartyOutOfRange { index, n_parties });
        }
        Ok(Self(indices))
    }

    pub fn single(index: usize, n_parties: usize) -> Result<Self> {
        Self::new(vec![index], n_parties)
    }

    /// Builds the set from a bit mask over parties (bit `n` selects party `n`).
    pub fn from_mask(mask: u64, n_parties: usize) -> Result<Self> {
        Self::new(
            (0..n_parties).filter(|n| mask >> n & 1 == 1).collect(),
            n_parties,
        )
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, party: usize) -> bool {
        self.0.binary_search(&party).is_ok()
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &i| m | 1 << i)
    }

    /// `None` when the set covers every party.
    pub fn complement(&self, n_parties: usize) -> Option<Self> {
        let rest: Vec<usize> = (0..n_parties).filter(|&n| !self.contains(n)).collect();
        if rest.is_empty() {
            None
        } else {
            Some(Self(rest))
        }
    }
}

impl fmt::Display for QubitIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Transposes the tensor factors of the listed parties.
pub fn partial_transpose(
    rho: &ComplexMatrix,
    parties: &QubitIndexSet,
    n_parties: usize,
) -> Result<ComplexMatrix> {
    let n = qubit_count(rho)?;
    if n != n_parties {
        return Err(Error::DimensionMismatch(format!(
            "matrix acts on {n} qubits, expected {n_parties}"
        )));
    }
    if let Some(&index) = parties.indices().iter().find(|&&i| i >= n_parties) {
        return Err(Error::PartyOutOfRange { index, n_parties });
    }
    let bit_mask: usize = parties
        .indices()
        .iter()
        .fold(0, |m, &p| m | 1 << (n_parties - 1 - p));
    let dim = rho.rows;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            // swap the selected bits between row and column
            let diff = (r ^ c) & bit_mask;
            out[(r ^ diff, c ^ diff)] = rho[(r, c)];
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix. Values ascend; `vectors[k]`
/// pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

/// Cyclic Jacobi on the real symmetric embedding `[[A, -B], [B, A]]` of
/// `H = A + iB`. Every eigenvalue of `H` appears twice in the embedding.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolve of non-square {}x{}",
            h.rows, h.cols
        )));
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = h.rows;
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: vec![],
        });
    }
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for j in 0..n {
        for k in 0..n {
            // symmetrize to absorb the tolerated defect
            let z = 0.5 * (h[(j, k)] + h[(k, j)].conj());
            a[j * m + k] = z.re;
            a[(j + n) * m + k + n] = z.re;
            a[j * m + k + n] = -z.im;
            a[(j + n) * m + k] = z.im;
        }
    }
    let (values, vecs) = jacobi_symmetric(a, m)?;

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));

    let mut out_vectors: Vec<Vec<C64>> = Vec::with_capacity(n);
    for &k in &order {
        if out_vectors.len() == n {
            break;
        }
        let mut z: Vec<C64> = (0..n)
            .map(|j| C64::new(vecs[j * m + k], vecs[(j + n) * m + k]))
            .collect();
        for q in &out_vectors {
            let proj: C64 = q.iter().zip(&z).map(|(a, b)| a.conj() * b).sum();
            for (zi, qi) in z.iter_mut().zip(q) {
                *zi -= proj * qi;
            }
        }
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            z.iter_mut().for_each(|c| *c /= norm);
            out_vectors.push(z);
        }
    }
    debug_assert_eq!(out_vectors.len(), n);
    let values: Vec<f64> = order.iter().step_by(2).map(|&k| values[k]).collect();
    Ok(HermitianEigen {
        values,
        vectors: out_vectors,
    })
}

/// Returns (eigenvalues, eigenvectors as columns of a row-major matrix).
fn jacobi_symmetric(mut a: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = vec![0.0f64; n * n];
    for k in 0..n {
        v[k * n + k] = 1.0;
    }
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_REL_TOL * norm;
    let off_norm = |a: &[f64]| {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[p * n + q] * a[p * n + q];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(sweeps));
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_norm(&a) <= threshold;
    }
    let values = (0..n).map(|k| a[k * n + k]).collect();
    Ok((values, v))
}

pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(h)?.values)
}

pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    hermitian_eigenvalues(h)?
        .first()
        .copied()
        .ok_or_else(|| Error::DimensionMismatch("empty matrix".into()))
}

/// Tolerance used by [`is_psd`]: `1e-10 * max(1, ||H||_F)`.
pub fn psd_tolerance(h: &ComplexMatrix) -> f64 {
    1e-10 * h.frobenius_norm().max(1.0)
}

pub fn is_psd(h: &ComplexMatrix) -> Result<bool> {
    Ok(min_eigenvalue(h)? >= -psd_tolerance(h))
}
