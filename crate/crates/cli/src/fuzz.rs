//! Seeded random operators and states for the uncertainty fuzzing check.

use rand::Rng;

use qslbound_core::operator::{ComplexMatrix, HermitianOperator};
use qslbound_core::state::PureState;
use qslbound_core::{Result, C64};

fn uniform_entry<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `(M + M†)/2` with entries uniform in the unit square.
pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> Result<HermitianOperator> {
    let entries: Vec<C64> = (0..dim * dim).map(|_| uniform_entry(rng)).collect();
    let m = ComplexMatrix::from_row_major(dim, &entries)?;
    let sym = (m.as_dmatrix() + m.adjoint().as_dmatrix()) * C64::new(0.5, 0.0);
    HermitianOperator::new(ComplexMatrix::from_dmatrix(sym)?)
}

pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> Result<PureState> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| uniform_entry(rng)).collect();
        if v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6 {
            return PureState::normalized(v);
        }
    }
}
