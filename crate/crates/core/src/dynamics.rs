//! Unitary propagation in the Schrödinger and Heisenberg pictures, and exact
//! time derivatives of expectation values (ħ = 1).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{commutator, ComplexMatrix, EigenSystem, HermitianOperator};
use crate::state::{moments, PureState};
use crate::C64;

/// Default sampling density of the bound integrals.
pub const DEFAULT_STEPS_PER_UNIT: usize = 2000;

const UNITARITY_TOL: f64 = 1e-10;

/// Uniform grid `t_k = k · t_max / n_steps`, `k = 0..=n_steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 steps, got {n_steps}")));
        }
        Ok(Self { t_max, n_steps })
    }

    /// Grid with roughly `per_unit` steps per unit time, rounded up to an even
    /// count so that plain composite Simpson covers the full window.
    pub fn with_density(t_max: f64, per_unit: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
        }
        let raw = (t_max * per_unit as f64).ceil() as usize;
        let n = raw.max(2);
        Self::new(t_max, n + n % 2)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of sample points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_max
        } else {
            self.t_max * k as f64 / self.n_steps as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }
}

/// `e^{−iHt}` for arbitrary `t` from a single diagonalization of `H`.
#[derive(Clone, Debug)]
pub struct Propagator {
    eig: EigenSystem,
}

impl Propagator {
    pub fn new(h: &HermitianOperator) -> Result<Self> {
        Ok(Self { eig: h.eig()? })
    }

    pub fn at(&self, t: f64) -> ComplexMatrix {
        self.eig.map_spectrum(|e| C64::from_polar(1.0, -e * t))
    }
}

/// `U(t) = e^{−iHt}`.
pub fn propagator(h: &HermitianOperator, t: f64) -> Result<ComplexMatrix> {
    Ok(Propagator::new(h)?.at(t))
}

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    let err = u.unitarity_error();
    if err > UNITARITY_TOL {
        return Err(Error::NotUnitary(err));
    }
    Ok(())
}

/// `U|ψ⟩`.
pub fn evolve_state(u: &ComplexMatrix, psi: &PureState) -> Result<PureState> {
    check_unitary(u)?;
    let v = u.apply(psi.amplitudes())?;
    Ok(PureState::renormalize(v))
}

/// `O(t) = U† O U`.
pub fn heisenberg_evolve(u: &ComplexMatrix, op: &HermitianOperator) -> Result<HermitianOperator> {
    if u.dim() != op.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", u.dim(), op.dim())));
    }
    check_unitary(u)?;
    let m = u.adjoint().checked_mul(op.matrix())?.checked_mul(u)?;
    Ok(HermitianOperator::hermitize(m))
}

/// Bracket used to form `d⟨O⟩/dt`; [`commutator`] unless a test substitutes
/// a faulty one.
pub type Bracket = fn(&ComplexMatrix, &ComplexMatrix) -> Result<ComplexMatrix>;

/// `d⟨O⟩/dt = i⟨ψ|[H, O(t)]|ψ⟩`.
pub fn expectation_derivative(
    h: &HermitianOperator,
    o_t: &HermitianOperator,
    psi: &PureState,
) -> Result<f64> {
    expectation_derivative_with(commutator, h, o_t, psi)
}

pub fn expectation_derivative_with(
    bracket: Bracket,
    h: &HermitianOperator,
    o_t: &HermitianOperator,
    psi: &PureState,
) -> Result<f64> {
    let c = bracket(h.matrix(), o_t.matrix())?;
    let value = C64::new(0.0, 1.0) * psi.expectation(&c)?;
    let scale = h.matrix().max_abs().max(1.0) * o_t.matrix().max_abs().max(1.0);
    if value.im.abs() > 1e-10 * scale {
        return Err(Error::Numeric(format!(
            "derivative of a Hermitian expectation has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Mean, spread and exact rate of change of an observable at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableSample {
    pub mean: f64,
    pub std_dev: f64,
    pub derivative: f64,
}

#[derive(Clone, Debug)]
pub struct OperatorTrajectory {
    pub grid: TimeGrid,
    pub samples: Vec<ObservableSample>,
}

impl OperatorTrajectory {
    pub fn new(grid: TimeGrid, samples: Vec<ObservableSample>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn means(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.mean).collect()
    }
}

/// Evaluates `f` at every grid point in parallel, preserving grid order.
pub fn sample_grid<T, F>(grid: &TimeGrid, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    (0..grid.len())
        .into_par_iter()
        .map(|k| f(grid.point(k)))
        .collect()
}

/// Samples `O(t) = U†(t) O₀ U(t)` in the fixed state `ψ`.
pub fn track_observable(
    h: &HermitianOperator,
    o0: &HermitianOperator,
    psi: &PureState,
    grid: &TimeGrid,
) -> Result<OperatorTrajectory> {
    track_observable_with(commutator, h, o0, psi, grid)
}

pub fn track_observable_with(
    bracket: Bracket,
    h: &HermitianOperator,
    o0: &HermitianOperator,
    psi: &PureState,
    grid: &TimeGrid,
) -> Result<OperatorTrajectory> {
    if h.dim() != o0.dim() || h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "H {}, O {}, psi {}",
            h.dim(),
            o0.dim(),
            psi.dim()
        )));
    }
    let prop = Propagator::new(h)?;
    let samples = sample_grid(grid, |t| {
        let o_t = heisenberg_evolve(&prop.at(t), o0)?;
        let m = moments(&o_t, psi)?;
        Ok(ObservableSample {
            mean: m.mean,
            std_dev: m.std_dev,
            derivative: expectation_derivative_with(bracket, h, &o_t, psi)?,
        })
    })?;
    OperatorTrajectory::new(*grid, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{pauli, tensor_hermitian};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_8};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus() -> PureState {
        PureState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        let g = TimeGrid::with_density(0.7, 5).unwrap();
        assert_eq!(g.n_steps(), 4);
        assert_eq!(g.point(g.n_steps()), 0.7);
    }

    #[test]
    fn propagator_examples() {
        let h = crate::testing::random_hermitian(4, 7);
        let u0 = propagator(&h, 0.0).unwrap();
        assert!(u0.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);

        let u = propagator(&pauli::z(), FRAC_PI_2).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[c(0.0, -1.0), c(0.0, 1.0)]);
        assert!(u.max_abs_diff(&expected) < 1e-12);

        let xx = tensor_hermitian(&pauli::x(), &pauli::x());
        let u = propagator(&xx, 0.7).unwrap();
        let psi = evolve_state(&u, &PureState::basis(4, 0).unwrap()).unwrap();
        let a = psi.amplitudes();
        assert!((a[0] - c(0.7f64.cos(), 0.0)).norm() < 1e-12);
        assert!((a[3] - c(0.0, -(0.7f64.sin()))).norm() < 1e-12);
    }

    #[test]
    fn evolve_state_rejects_non_unitary() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(matches!(
            evolve_state(&m, &plus()),
            Err(Error::NotUnitary(_))
        ));
        let x = pauli::x().into_matrix();
        let flipped = evolve_state(&x, &PureState::basis(2, 0).unwrap()).unwrap();
        assert!(flipped.equals_up_to_phase(&PureState::basis(2, 1).unwrap(), 1e-12));
    }

    #[test]
    fn derivative_examples() {
        let h = pauli::z();
        let prop = Propagator::new(&h).unwrap();
        let d0 = expectation_derivative(&h, &pauli::x(), &plus()).unwrap();
        assert!(d0.abs() < 1e-14);

        let o_t = heisenberg_evolve(&prop.at(FRAC_PI_8), &pauli::x()).unwrap();
        let d = expectation_derivative(&h, &o_t, &plus()).unwrap();
        assert!((d + 2.0 * (std::f64::consts::FRAC_PI_4).sin()).abs() < 1e-12);
        let mean = moments(&o_t, &plus()).unwrap().mean;
        assert!((mean - (2.0 * FRAC_PI_8).cos()).abs() < 1e-12);

        let conserved = expectation_derivative(&h, &pauli::z(), &plus()).unwrap();
        assert_eq!(conserved, 0.0);
    }

    #[test]
    fn identity_trajectory_is_static() {
        let h = crate::testing::random_hermitian(3, 11);
        let psi = PureState::basis(3, 1).unwrap();
        let grid = TimeGrid::new(2.0, 10).unwrap();
        let traj = track_observable(&h, &HermitianOperator::identity(3), &psi, &grid).unwrap();
        for s in &traj.samples {
            assert!((s.mean - 1.0).abs() < 1e-12);
            assert!(s.std_dev < 1e-7);
            assert!(s.derivative.abs() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_matches_exact_derivative() {
        let h = crate::testing::random_hermitian(4, 3);
        let o = crate::testing::random_hermitian(4, 4);
        let psi = PureState::normalized(vec![c(0.3, 0.1), c(-0.5, 0.2), c(0.1, 0.7), c(0.2, -0.2)]).unwrap();
        let grid = TimeGrid::new(1.0, 400).unwrap();
        let traj = track_observable(&h, &o, &psi, &grid).unwrap();
        let dt = grid.step();
        let scale = h.matrix().max_abs().powi(3) * o.matrix().max_abs() * 16.0;
        for k in 1..grid.n_steps() {
            let fd = (traj.samples[k + 1].mean - traj.samples[k - 1].mean) / (2.0 * dt);
            assert!((fd - traj.samples[k].derivative).abs() <= 10.0 * dt * dt * scale);
        }
    }

    #[test]
    fn energy_is_conserved() {
        let h = crate::testing::random_hermitian(4, 21);
        let psi = PureState::normalized(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        let grid = TimeGrid::new(5.0, 50).unwrap();
        let traj = track_observable(&h, &h, &psi, &grid).unwrap();
        let e0 = traj.samples[0].mean;
        for s in &traj.samples {
            assert!((s.mean - e0).abs() < 1e-10);
            assert!(s.derivative.abs() < 1e-10);
        }
    }
}
