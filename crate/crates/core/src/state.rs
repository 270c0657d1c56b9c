//! Pure states, density operators and observable moments.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operator::{hermitian_eig, partial_trace, ComplexMatrix, EigenSystem, HermitianOperator, Subsystem};
use crate::C64;

/// Allowed deviation of `‖ψ‖₂` from one.
pub const NORM_TOL: f64 = 1e-12;
/// Below this variance the perpendicular-state prescription is degenerate.
pub const EPS_VAR: f64 = 1e-12;
/// Trace and positivity tolerance for density operators.
pub const DENSITY_TOL: f64 = 1e-12;

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes))
    }

    pub fn from_vector(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch("empty state vector".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a non-zero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm));
        }
        Self::from_vector(v.unscale(norm))
    }

    pub(crate) fn renormalize(v: DVector<C64>) -> Self {
        let norm = v.norm();
        Self {
            amplitudes: v.unscale(norm),
        }
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch(format!("basis index {k} >= {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// True if `|⟨self|other⟩| = 1` within `tol`, i.e. equal up to a global phase.
    pub fn equals_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && (self.inner(other).norm() - 1.0).abs() <= tol
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        let ov = op.apply(&self.amplitudes)?;
        Ok(self.amplitudes.dotc(&ov))
    }
}

/// Positive semidefinite, unit-trace Hermitian operator. The spectrum is
/// computed once at construction.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: HermitianOperator,
    spectrum: EigenSystem,
}

impl DensityOperator {
    pub fn new(matrix: HermitianOperator) -> Result<Self> {
        let trace = matrix.trace();
        if (trace - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace}")));
        }
        let spectrum = hermitian_eig(&matrix)?;
        let min = spectrum.eigenvalues[0];
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix, spectrum })
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(HermitianOperator::identity(dim).scale(1.0 / dim as f64))
            .expect("I/d is a density operator")
    }

    pub fn from_diagonal(populations: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(populations))
    }

    pub fn matrix(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn spectrum(&self) -> &EigenSystem {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    /// `tr(ρ O)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64> {
        Ok(self.matrix.matrix().checked_mul(op)?.trace().re)
    }
}

/// Mean, variance and standard deviation of an observable in a pure state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableMoments {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &PureState) -> DensityOperator {
    let m = ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes());
    DensityOperator::new(HermitianOperator::hermitize(m)).expect("pure-state projector")
}

/// Moments of `O` in `ψ`. The variance is evaluated as `‖(O − ⟨O⟩)ψ‖²`,
/// which is non-negative by construction.
pub fn moments(op: &HermitianOperator, psi: &PureState) -> Result<ObservableMoments> {
    let (mean, centered) = centered_action(op, psi)?;
    let variance = centered.norm_squared();
    Ok(ObservableMoments {
        mean,
        variance,
        std_dev: variance.sqrt(),
    })
}

/// Returns `⟨O⟩` and the vector `(O − ⟨O⟩)|ψ⟩`.
pub(crate) fn centered_action(
    op: &HermitianOperator,
    psi: &PureState,
) -> Result<(f64, DVector<C64>)> {
    let ov = op.matrix().apply(psi.amplitudes())?;
    let mean = psi.amplitudes().dotc(&ov);
    let scale = op.matrix().max_abs().max(1.0);
    if mean.im.abs() > 1e-10 * scale {
        return Err(Error::Numeric(format!(
            "expectation of Hermitian operator has imaginary part {:e}",
            mean.im
        )));
    }
    let centered = ov - psi.amplitudes() * C64::new(mean.re, 0.0);
    Ok((mean.re, centered))
}

/// `|ψ⊥⟩ = (O − ⟨O⟩)|ψ⟩ / ΔO`.
///
/// Fails with [`Error::DegenerateVariance`] when `ΔO² ≤ EPS_VAR`, i.e. when
/// `ψ` is (numerically) an eigenstate of `O`.
pub fn perpendicular_state(op: &HermitianOperator, psi: &PureState) -> Result<PureState> {
    let (_, centered) = centered_action(op, psi)?;
    let variance = centered.norm_squared();
    if variance <= EPS_VAR {
        return Err(Error::DegenerateVariance { variance });
    }
    Ok(PureState::renormalize(centered))
}

/// Reduced density operator of a bipartite pure state.
pub fn reduced_state(
    psi: &PureState,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<DensityOperator> {
    let rho = ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes());
    let reduced = partial_trace(&rho, dims, keep)?;
    DensityOperator::new(HermitianOperator::hermitize(reduced))
}
