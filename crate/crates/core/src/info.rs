//! Entropic functionals of density operators: entanglement entropy, modular
//! Hamiltonian, capacity of entanglement, relative-surprisal variance and
//! ergotropy.
//!
//! All logarithms are natural. Eigenvalues are clamped to `[EPS_LOG, 1]`
//! before taking logs, and terms `λ lnᵏ λ` with `λ < ZERO_WEIGHT` are dropped
//! (the `0 ln 0 = 0` convention).

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::state::DensityOperator;
use crate::C64;

pub const EPS_LOG: f64 = 1e-300;
pub const ZERO_WEIGHT: f64 = 1e-15;

fn clamped_ln(lambda: f64) -> f64 {
    lambda.clamp(EPS_LOG, 1.0).ln()
}

/// Spectrum summary of a reduced state.
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementReport {
    /// `S = −Σ λ ln λ`, nats.
    pub entropy: f64,
    /// `C = Σ λ ln² λ − S²`, nats².
    pub capacity: f64,
    /// Eigenvalues `−ln λ_i` of the modular Hamiltonian, ascending in `λ`.
    pub modular_spectrum: Vec<f64>,
}

/// `(Σ λ ln λ, Σ λ ln² λ)` over the significant part of the spectrum.
fn log_moments(eigenvalues: &[f64]) -> (f64, f64) {
    eigenvalues
        .iter()
        .filter(|&&l| l >= ZERO_WEIGHT)
        .fold((0.0, 0.0), |(m1, m2), &l| {
            let ln = clamped_ln(l);
            (m1 + l * ln, m2 + l * ln * ln)
        })
}

/// Von Neumann entropy `−tr(ρ ln ρ)`.
pub fn entanglement_entropy(rho: &DensityOperator) -> f64 {
    let (m1, _) = log_moments(rho.eigenvalues());
    (-m1).max(0.0)
}

/// `K = −ln ρ` with the clamping policy applied to zero eigenvalues.
pub fn modular_hamiltonian(rho: &DensityOperator) -> HermitianOperator {
    let k = rho
        .spectrum()
        .map_spectrum(|l| C64::new(-clamped_ln(l), 0.0));
    HermitianOperator::hermitize(k)
}

/// Variance of the modular Hamiltonian, `Σ λ ln² λ − (Σ λ ln λ)²`.
pub fn capacity_of_entanglement(rho: &DensityOperator) -> f64 {
    let (m1, m2) = log_moments(rho.eigenvalues());
    (m2 - m1 * m1).max(0.0)
}

pub fn entanglement_report(rho: &DensityOperator) -> EntanglementReport {
    EntanglementReport {
        entropy: entanglement_entropy(rho),
        capacity: capacity_of_entanglement(rho),
        modular_spectrum: rho.eigenvalues().iter().map(|&l| -clamped_ln(l)).collect(),
    }
}

/// `V(ρ‖σ) = tr ρ(ln ρ − ln σ)² − D(ρ‖σ)²`.
///
/// Evaluated in the eigenbasis of `ρ` so that directions outside its support
/// never meet the clamped logarithm. Fails if `supp ρ ⊄ supp σ`.
pub fn relative_surprisal_variance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let sigma_spec = sigma.spectrum();
    for (j, &s) in sigma_spec.eigenvalues.iter().enumerate() {
        if s < ZERO_WEIGHT {
            let v = sigma_spec.eigenvector(j);
            let weight = rho.matrix().matrix().apply(&v)?.dotc(&v).re;
            if weight > 1e-12 {
                return Err(Error::Domain(format!(
                    "support of rho not contained in support of sigma (weight {weight:e} on a null direction)"
                )));
            }
        }
    }
    let log_sigma = sigma_spec.map_spectrum(|l| C64::new(clamped_ln(l), 0.0));
    let rho_spec = rho.spectrum();
    let (mut first, mut second) = (0.0, 0.0);
    for (i, &l) in rho_spec.eigenvalues.iter().enumerate() {
        if l < ZERO_WEIGHT {
            continue;
        }
        let v = rho_spec.eigenvector(i);
        // (ln ρ − ln σ)|i⟩ = ln λ_i |i⟩ − ln σ |i⟩
        let w = v.clone() * C64::new(clamped_ln(l), 0.0) - log_sigma.apply(&v)?;
        first += l * v.dotc(&w).re;
        second += l * w.norm_squared();
    }
    Ok((second - first * first).max(0.0))
}

/// Ergotropy `tr(ρH) − min_U tr(UρU†H)`.
///
/// The minimum is attained by the passive state: populations sorted
/// descending matched with energies sorted ascending.
pub fn ergotropy_max(rho: &DensityOperator, h: &HermitianOperator) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            rho.dim(),
            h.dim()
        )));
    }
    let energy = rho.expectation(h.matrix())?;
    let energies = h.eig()?.eigenvalues; // ascending
    let mut populations = rho.eigenvalues().to_vec();
    populations.sort_by(|a, b| b.total_cmp(a));
    let passive: f64 = populations.iter().zip(&energies).map(|(r, e)| r * e).sum();
    Ok((energy - passive).max(0.0))
}

/// `K ⊗ I` for a modular Hamiltonian on the first factor.
pub fn extend_left(k: &HermitianOperator, right_dim: usize) -> HermitianOperator {
    crate::operator::tensor_hermitian(k, &HermitianOperator::identity(right_dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;
    use crate::state::{density_from_pure, PureState};

    /// Independent scalar oracle for (S, C) from a list of populations.
    fn scalar_oracle(ps: &[f64]) -> (f64, f64) {
        let s: f64 = ps.iter().map(|&p| -p * p.ln()).sum();
        let m2: f64 = ps.iter().map(|&p| p * p.ln().powi(2)).sum();
        (s, m2 - s * s)
    }

    #[test]
    fn entropy_values() {
        let pure = density_from_pure(&PureState::basis(2, 0).unwrap());
        assert_eq!(entanglement_entropy(&pure), 0.0);

        let mixed = DensityOperator::maximally_mixed(2);
        assert!((entanglement_entropy(&mixed) - 2f64.ln()).abs() < 1e-15);

        let rho = DensityOperator::from_diagonal(&[0.1, 0.9]).unwrap();
        let (s, _) = scalar_oracle(&[0.1, 0.9]);
        assert!((entanglement_entropy(&rho) - s).abs() < 1e-15);
        assert!((s - 0.325083).abs() < 1e-6);
    }

    #[test]
    fn modular_hamiltonian_values() {
        let k = modular_hamiltonian(&DensityOperator::maximally_mixed(2));
        assert!(k.matrix().max_abs_diff(&HermitianOperator::identity(2).scale(2f64.ln()).into_matrix()) < 1e-14);

        let rho = DensityOperator::from_diagonal(&[0.1, 0.9]).unwrap();
        let k = modular_hamiltonian(&rho);
        assert!((k.matrix().get(0, 0).re - std::f64::consts::LN_10).abs() < 1e-12);
        assert!((k.matrix().get(1, 1).re - 0.10536051565782628).abs() < 1e-12);
        let mean = rho.expectation(k.matrix()).unwrap();
        assert!((mean - entanglement_entropy(&rho)).abs() < 1e-12);

        let pure = density_from_pure(&PureState::basis(2, 1).unwrap());
        let k = modular_hamiltonian(&pure);
        let eig = k.eig().unwrap();
        assert!(eig.eigenvalues[0].abs() < 1e-12);
        assert!(eig.eigenvalues[1] > 600.0);
        assert!(pure.expectation(k.matrix()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn capacity_values() {
        let pure = density_from_pure(&PureState::basis(2, 0).unwrap());
        assert_eq!(capacity_of_entanglement(&pure), 0.0);
        assert!(capacity_of_entanglement(&DensityOperator::maximally_mixed(2)).abs() < 1e-15);
        let rho = DensityOperator::from_diagonal(&[0.1, 0.9]).unwrap();
        let (_, c) = scalar_oracle(&[0.1, 0.9]);
        assert!((capacity_of_entanglement(&rho) - c).abs() < 1e-14);
        assert!((c - 0.434503).abs() < 2e-6, "{c}");
    }

    #[test]
    fn relative_surprisal_values() {
        let rho = DensityOperator::from_diagonal(&[0.1, 0.9]).unwrap();
        let half = DensityOperator::maximally_mixed(2);
        assert!(relative_surprisal_variance(&rho, &rho).unwrap().abs() < 1e-14);

        let v = relative_surprisal_variance(&rho, &half).unwrap();
        assert!((v - capacity_of_entanglement(&rho)).abs() < 1e-14);

        // brute force: ρ = I/2, σ = diag(0.1, 0.9)
        let d = [0.5f64.ln() - 0.1f64.ln(), 0.5f64.ln() - 0.9f64.ln()];
        let mean = 0.5 * (d[0] + d[1]);
        let expected = 0.5 * (d[0] * d[0] + d[1] * d[1]) - mean * mean;
        let v = relative_surprisal_variance(&half, &rho).unwrap();
        assert!((v - expected).abs() < 1e-14);
        assert!((v - 1.207).abs() < 1e-3);
    }

    #[test]
    fn relative_surprisal_support_violation() {
        let sigma = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let rho = DensityOperator::maximally_mixed(2);
        assert!(matches!(
            relative_surprisal_variance(&rho, &sigma),
            Err(Error::Domain(_))
        ));
        // supp ρ ⊆ supp σ is fine even when σ is singular
        let rho = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(relative_surprisal_variance(&rho, &sigma).unwrap().abs() < 1e-14);
    }

    #[test]
    fn ergotropy_values() {
        let h = pauli::z();
        // ground state of σ_z is |1⟩
        let ground = density_from_pure(&PureState::basis(2, 1).unwrap());
        assert!(ergotropy_max(&ground, &h).unwrap().abs() < 1e-15);

        let rho = DensityOperator::from_diagonal(&[0.2, 0.8]).unwrap();
        let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        assert!((ergotropy_max(&rho, &h).unwrap() - 0.6).abs() < 1e-15);

        let h4 = HermitianOperator::from_real_diagonal(&[0.3, -1.0, 2.0, 0.5]);
        assert!(ergotropy_max(&DensityOperator::maximally_mixed(4), &h4).unwrap().abs() < 1e-14);
    }
}
