//! Dense complex matrices over tensor-factored spaces.
//!
//! A [`ComplexMatrix`] carries its dimension split into an ordered list of
//! tensor factors, so that `H ⊗ H ⊗ H` with `dim H = d` is a `d³ × d³`
//! matrix with factors `[d, d, d]`. Basis indices follow the Kronecker
//! convention: the first factor is the most significant digit.
//!
//! Entries are stored in an `nalgebra::DMatrix` (column-major). The JSON
//! file format is row-major; see [`MatrixFile`].

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance on `max |A - A†|` for a matrix to count as Hermitian.
pub const HERM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    factors: Vec<usize>,
    data: DMatrix<C64>,
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, in the order of `values`.
    pub vectors: DMatrix<C64>,
    /// `max |A - A†|` of the input before it was symmetrized.
    pub symmetrization_deviation: f64,
}

impl Eigh {
    /// Rebuilds `U f(Λ) U†` with the given factorization.
    pub fn rebuild(&self, factors: &[usize], f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for i in 0..n {
                scaled[(i, k)] *= s;
            }
        }
        let data = &scaled * self.vectors.adjoint();
        ComplexMatrix {
            factors: factors.to_vec(),
            data,
        }
    }
}

fn product(factors: &[usize]) -> usize {
    factors.iter().product()
}

impl ComplexMatrix {
    pub fn new(factors: Vec<usize>, data: DMatrix<C64>) -> Result<Self> {
        let dim = product(&factors);
        if factors.is_empty() || factors.contains(&0) || data.nrows() != dim || data.ncols() != dim {
            return Err(Error::FactorMismatch {
                dim: data.nrows().max(data.ncols()),
                product: dim,
            });
        }
        Ok(Self { factors, data })
    }

    /// Single-factor matrix from a square `DMatrix`.
    pub fn from_matrix(data: DMatrix<C64>) -> Result<Self> {
        let n = data.nrows();
        Self::new(vec![n], data)
    }

    pub fn from_fn(factors: &[usize], f: impl FnMut(usize, usize) -> C64) -> Self {
        let dim = product(factors);
        Self {
            factors: factors.to_vec(),
            data: DMatrix::from_fn(dim, dim, f),
        }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(factors: &[usize], entries: &[C64]) -> Result<Self> {
        let dim = product(factors);
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", dim * dim),
                found: format!("{} entries", entries.len()),
            });
        }
        Ok(Self::from_fn(factors, |i, j| entries[i * dim + j]))
    }

    pub fn identity(factors: &[usize]) -> Self {
        let dim = product(factors);
        Self {
            factors: factors.to_vec(),
            data: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(factors: &[usize]) -> Self {
        let dim = product(factors);
        Self {
            factors: factors.to_vec(),
            data: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_real_diagonal(factors: &[usize], diag: &[f64]) -> Result<Self> {
        let dim = product(factors);
        if diag.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{dim} diagonal entries"),
                found: format!("{}", diag.len()),
            });
        }
        Ok(Self::from_fn(factors, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Rank-one projector `|ψ⟩⟨ψ|` (not normalized).
    pub fn outer(factors: &[usize], psi: &[C64]) -> Result<Self> {
        let dim = product(factors);
        if psi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of length {dim}"),
                found: format!("{}", psi.len()),
            });
        }
        Ok(Self::from_fn(factors, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    /// Same entries, different factorization of the same dimension.
    pub fn with_factors(mut self, factors: &[usize]) -> Result<Self> {
        let p = product(factors);
        if p != self.dim() || factors.contains(&0) {
            return Err(Error::FactorMismatch {
                dim: self.dim(),
                product: p,
            });
        }
        self.factors = factors.to_vec();
        Ok(self)
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            factors: self.factors.clone(),
            data: self.data.adjoint(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            factors: self.factors.clone(),
            data: &self.data * C64::new(s, 0.0),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self {
            factors: self.factors.clone(),
            data: &self.data * s,
        }
    }

    /// `max |A - A†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev = 0.0f64;
        for j in 0..n {
            for i in j..n {
                dev = dev.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERM_TOL
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let data = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        Self {
            factors: self.factors.clone(),
            data,
        }
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > HERM_TOL {
            Err(Error::NotHermitian { deviation })
        } else {
            Ok(())
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `tr[A B]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[(i, k)] * other.data[(k, i)];
            }
        }
        acc
    }

    /// Kronecker product; factors concatenate.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self {
            factors,
            data: self.data.kronecker(&other.data),
        }
    }

    /// Splits the dimension around `slot` into (left, mid, right) sizes.
    fn split(&self, slot: usize) -> Result<(usize, usize, usize)> {
        if slot >= self.factors.len() {
            return Err(Error::InvalidSlot {
                slot,
                factors: self.factors.len(),
            });
        }
        let left = product(&self.factors[..slot]);
        let mid = self.factors[slot];
        let right = product(&self.factors[slot + 1..]);
        Ok((left, mid, right))
    }

    /// Traces out the tensor factor at `slot` (0-based). Remaining factors
    /// keep their relative order. Tracing the only factor of a one-factor
    /// matrix yields a `1 × 1` matrix holding the trace.
    pub fn partial_trace(&self, slot: usize) -> Result<Self> {
        let (left, mid, right) = self.split(slot)?;
        let out = left * right;
        let mut data = DMatrix::zeros(out, out);
        for l2 in 0..left {
            for r2 in 0..right {
                let col = l2 * right + r2;
                for l1 in 0..left {
                    for r1 in 0..right {
                        let row = l1 * right + r1;
                        let mut acc = C64::new(0.0, 0.0);
                        for m in 0..mid {
                            acc += self.data[(l1 * mid * right + m * right + r1, l2 * mid * right + m * right + r2)];
                        }
                        data[(row, col)] = acc;
                    }
                }
            }
        }
        let mut factors = self.factors.clone();
        factors.remove(slot);
        if factors.is_empty() {
            factors.push(1);
        }
        Ok(Self { factors, data })
    }

    /// Adjoint of [`partial_trace`](Self::partial_trace): places an identity
    /// of dimension `dim` at position `slot` of the result, so that
    /// `result.partial_trace(slot) == dim * self`.
    pub fn insert_identity(&self, slot: usize, dim: usize) -> Result<Self> {
        if slot > self.factors.len() || dim == 0 {
            return Err(Error::InvalidSlot {
                slot,
                factors: self.factors.len(),
            });
        }
        let mut factors = self.factors.clone();
        factors.insert(slot, dim);
        let left = product(&self.factors[..slot]);
        let right = product(&self.factors[slot..]);
        let n = left * dim * right;
        let mut data = DMatrix::zeros(n, n);
        for l2 in 0..left {
            for r2 in 0..right {
                for l1 in 0..left {
                    for r1 in 0..right {
                        let v = self.data[(l1 * right + r1, l2 * right + r2)];
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for m in 0..dim {
                            data[(l1 * dim * right + m * right + r1, l2 * dim * right + m * right + r2)] = v;
                        }
                    }
                }
            }
        }
        Ok(Self { factors, data })
    }

    /// Hermitian eigendecomposition. The input is symmetrized first; inputs
    /// deviating from Hermitian by more than [`HERM_TOL`] are rejected.
    pub fn eigh(&self) -> Result<Eigh> {
        let deviation = self.hermitian_deviation();
        if deviation > HERM_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let sym = self.hermitian_part().data;
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let n = self.dim();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Eigh {
            values,
            vectors,
            symmetrization_deviation: deviation,
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigh()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.values[0])
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigh()?.values.iter().map(|v| v.abs()).sum())
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> Result<f64> {
        Ok(self.eigh()?.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }

    /// `|A| = U |Λ| U†`.
    pub fn abs_operator(&self) -> Result<Self> {
        self.map_spectrum(f64::abs)
    }

    /// Applies `f` to the eigenvalues of a Hermitian matrix.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Ok(self.eigh()?.rebuild(&self.factors, f))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self {
            factors: self.factors.clone(),
            data: &self.data * &other.data,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix {
            factors: self.factors.clone(),
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix {
            factors: self.factors.clone(),
            data: &self.data - &rhs.data,
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-1.0)
    }
}

/// On-disk matrix format: `{"dim": n, "factors": [...], "entries": [[[re, im], ...], ...]}`,
/// entries row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub dim: usize,
    pub factors: Vec<usize>,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = m.get(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        MatrixFile {
            dim: n,
            factors: m.factors.clone(),
            entries,
        }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        if product(&f.factors) != f.dim {
            return Err(Error::FactorMismatch {
                dim: f.dim,
                product: product(&f.factors),
            });
        }
        if f.entries.len() != f.dim || f.entries.iter().any(|row| row.len() != f.dim) {
            return Err(Error::Parse(format!(
                "entries must be a {0}x{0} array of [re, im] pairs",
                f.dim
            )));
        }
        let flat: Vec<C64> = f
            .entries
            .iter()
            .flat_map(|row| row.iter().map(|[re, im]| C64::new(*re, *im)))
            .collect();
        ComplexMatrix::from_row_major(&f.factors, &flat)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = MatrixFile::deserialize(d)?;
        ComplexMatrix::try_from(f).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_row_major(&[2], &[c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = ComplexMatrix::identity(&[2]);
        let i4 = i2.tensor(&i2);
        assert_eq!(i4.factors(), &[2, 2]);
        assert_eq!(i4.max_abs_diff(&ComplexMatrix::identity(&[4])), 0.0);
    }

    #[test]
    fn diagonal_tensor() {
        let a = ComplexMatrix::from_real_diagonal(&[2], &[1.0, 2.0]).unwrap();
        let b = ComplexMatrix::from_real_diagonal(&[2], &[3.0, 4.0]).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[2, 2], &[3.0, 4.0, 6.0, 8.0]).unwrap();
        assert_eq!(a.tensor(&b).max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn factor_mismatch_rejected() {
        assert!(ComplexMatrix::new(vec![2, 2], DMatrix::zeros(3, 3)).is_err());
        assert!(ComplexMatrix::identity(&[4]).with_factors(&[2, 3]).is_err());
    }

    #[test]
    fn invalid_slot() {
        let m = ComplexMatrix::identity(&[2, 2]);
        assert_eq!(m.partial_trace(2), Err(Error::InvalidSlot { slot: 2, factors: 2 }));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = ComplexMatrix::from_real_diagonal(&[2], &[0.25, 0.5]).unwrap();
        let b = pauli_x();
        let pt = a.tensor(&b).partial_trace(0).unwrap();
        assert!(pt.max_abs_diff(&b.scale(0.75)) < 1e-15);
        let pt = a.tensor(&b).partial_trace(1).unwrap();
        assert!(pt.max_abs_diff(&a.scale(0.0)) < 1e-15);
    }

    #[test]
    fn insert_identity_is_adjoint_of_partial_trace() {
        let x = pauli_x().tensor(&ComplexMatrix::from_real_diagonal(&[2], &[1.0, -3.0]).unwrap());
        for slot in 0..=2 {
            let up = x.insert_identity(slot, 3).unwrap();
            assert_eq!(up.dim(), 12);
            let back = up.partial_trace(slot).unwrap();
            assert!(back.max_abs_diff(&x.scale(3.0)) < 1e-14);
        }
    }

    #[test]
    fn norms_of_simple_matrices() {
        let m = ComplexMatrix::from_real_diagonal(&[2], &[1.0, -1.0]).unwrap();
        assert!((m.trace_norm().unwrap() - 2.0).abs() < 1e-15);
        let m = ComplexMatrix::from_real_diagonal(&[2], &[0.3, -0.9]).unwrap();
        assert!((m.operator_norm().unwrap() - 0.9).abs() < 1e-15);
        assert!((ComplexMatrix::identity(&[3]).operator_norm().unwrap() - 1.0).abs() < 1e-15);
        let abs = ComplexMatrix::from_real_diagonal(&[2], &[1.0, -2.0])
            .unwrap()
            .abs_operator()
            .unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[2], &[1.0, 2.0]).unwrap();
        assert!(abs.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = pauli_x().eigh().unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_row_major(&[2], &[c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        assert!(matches!(m.eigh(), Err(Error::NotHermitian { .. })));
        assert!(m.trace_norm().is_err());
        assert!(m.operator_norm().is_err());
        assert!(m.abs_operator().is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = pauli_x()
            .tensor(&ComplexMatrix::identity(&[2]))
            .scale_complex(C64::new(0.5, -0.25));
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.starts_with("{\"dim\":4,\"factors\":[2,2],\"entries\":[[[0.0,0.0]"));
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_ragged_entries() {
        let text = r#"{"dim":2,"factors":[2],"entries":[[[1,0],[0,0]],[[0,0]]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(text).is_err());
        let text = r#"{"dim":2,"factors":[3],"entries":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(text).is_err());
    }
}
