//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here works on square matrices of dimension at most a few tens;
//! the case studies never exceed 4×4. Matrices are immutable values once built.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Relative tolerance on `‖M − M†‖_max` accepted by [`HermitianOperator::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// Square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for dimension {dim}",
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let entries: Vec<C64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::from_row_major(dim, &entries)
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected square and non-empty",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &DVector<C64>, b: &DVector<C64>) -> Self {
        Self(a * b.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self(&self.0 * &other.0))
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} applied to vector of length {}",
                self.dim(),
                v.len()
            )));
        }
        Ok(&self.0 * v)
    }

    /// `‖M†M − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        (self.0.adjoint() * &self.0 - DMatrix::<C64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `‖M − M†‖_max`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

fn same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Hermitian matrix, validated at construction against [`HERMITICITY_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    /// Rejects (does not symmetrize) matrices with
    /// `‖M − M†‖_max > 1e-12 · ‖M‖_max`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let scale = m.max_abs();
        let deviation = m.hermiticity_error();
        if deviation > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian { deviation, scale });
        }
        Ok(Self(m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self(ComplexMatrix::from_diagonal(&d))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    /// Projects an internally computed, Hermitian-up-to-rounding matrix onto
    /// its Hermitian part.
    pub(crate) fn hermitize(m: ComplexMatrix) -> Self {
        let h = (&m.0 + m.0.adjoint()) * C64::new(0.5, 0.0);
        Self(ComplexMatrix(h))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(C64::new(factor, 0.0)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(&self.0, &other.0)?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(&self.0, &other.0)?;
        Ok(Self(&self.0 - &other.0))
    }

    /// `tr(M)`; real for Hermitian input.
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eig(&self) -> Result<EigenSystem> {
        hermitian_eig(self)
    }
}

/// Eigenvalues in ascending order with the matching unitary eigenvector matrix
/// (eigenvectors are columns).
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> C64,
    {
        let v = self.eigenvectors.as_dmatrix();
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            for x in scaled.column_mut(j).iter_mut() {
                *x *= fj;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| C64::new(x, 0.0))
    }

    pub fn eigenvector(&self, j: usize) -> DVector<C64> {
        self.eigenvectors.as_dmatrix().column(j).into_owned()
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn hermitian_eig(m: &HermitianOperator) -> Result<EigenSystem> {
    let d = m.dim();
    let eig = m
        .matrix()
        .as_dmatrix()
        .clone()
        .try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors: ComplexMatrix(vectors),
    })
}

/// Applies a scalar function through the spectral decomposition:
/// `f(M) = V diag(f(λ)) V†`.
///
/// Fails with [`Error::Domain`] if `f` is not finite at some eigenvalue, e.g.
/// `ln` on a singular matrix.
pub fn matrix_function<F>(m: &HermitianOperator, f: F) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> C64,
{
    let eig = hermitian_eig(m)?;
    for &lambda in &eig.eigenvalues {
        let v = f(lambda);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Domain(format!("f({lambda:e}) = {v}")));
        }
    }
    Ok(eig.map_spectrum(f))
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    same_dim(a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// Kronecker product `A ⊗ B`; the row index of the result is `i_A · d_B + i_B`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

pub fn tensor_hermitian(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator(tensor_product(a.matrix(), b.matrix()))
}

/// Factor of a bipartite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Traces out one factor of a `d_A·d_B` dimensional operator and returns the
/// operator on the kept factor.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if da == 0 || db == 0 || da * db != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dims ({da}, {db}) incompatible with matrix of dimension {}",
            m.dim()
        )));
    }
    let full = &m.0;
    let out = match keep {
        Subsystem::A => DMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| full[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => DMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| full[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(ComplexMatrix(out))
}

/// Operator norm `max |λ_i|`.
pub fn spectral_norm(m: &HermitianOperator) -> Result<f64> {
    let eig = hermitian_eig(m)?;
    Ok(eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

/// Single-qubit Pauli matrices in the `{|0⟩, |1⟩}` basis with `σ_z|0⟩ = |0⟩`.
pub mod pauli {
    use super::{ComplexMatrix, HermitianOperator};
    use crate::C64;

    fn build(entries: [C64; 4]) -> HermitianOperator {
        HermitianOperator(ComplexMatrix::from_row_major(2, &entries).expect("2x2 literal"))
    }

    pub fn identity() -> HermitianOperator {
        HermitianOperator::identity(2)
    }

    pub fn x() -> HermitianOperator {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        build([o, l, l, o])
    }

    pub fn y() -> HermitianOperator {
        let o = C64::new(0.0, 0.0);
        build([o, C64::new(0.0, -1.0), C64::new(0.0, 1.0), o])
    }

    pub fn z() -> HermitianOperator {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        build([l, o, o, -l])
    }
}
