//! Deterministic random operators and states for unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operator::{ComplexMatrix, HermitianOperator};
use crate::state::PureState;
use crate::C64;

pub fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<C64> = (0..dim * dim)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let m = ComplexMatrix::from_row_major(dim, &entries).unwrap();
    HermitianOperator::hermitize(m)
}

pub fn random_state(dim: usize, seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    PureState::normalized(v).unwrap()
}
