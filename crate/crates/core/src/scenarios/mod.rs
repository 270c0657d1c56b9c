//! Two-qubit case studies: entanglement generation under a canonical nonlocal
//! Hamiltonian (Schrödinger picture), modular energy of the same system
//! (Heisenberg picture), and charging of a two-cell quantum battery.

mod battery;
mod entanglement;
pub mod reference;

pub use battery::{
    battery_hamiltonians, ergotropy_closed_form, ergotropy_closed_form_report,
    ergotropy_trajectory, general_product_state, run_battery_scenario, battery_run,
    BatteryHamiltonians, BatteryMode, BatteryScenario,
};
pub use entanglement::{
    ce_see_closed_form, delta_h_entanglement, entanglement_closed_form_reports,
    entanglement_run, evolved_amplitudes, initial_schmidt_state, modular_closed_form,
    modular_closed_form_reports, modular_run, run_entanglement_scenario, run_modular_scenario,
    EntanglementRun, EntanglementSample, EntanglementScenario,
};

use crate::operator::{pauli, tensor_hermitian, HermitianOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `H± = μ₁ σx⊗σx ± μ₂ σy⊗σy + μ₃ σz⊗σz`.
pub fn canonical_hamiltonian(mu1: f64, mu2: f64, mu3: f64, sign: Sign) -> HermitianOperator {
    if !(mu1 >= mu2 && mu2 >= mu3 && mu3 >= 0.0) {
        log::warn!("canonical coefficients ({mu1}, {mu2}, {mu3}) are not ordered mu1 >= mu2 >= mu3 >= 0");
    }
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let xx = tensor_hermitian(&pauli::x(), &pauli::x()).scale(mu1);
    let yy = tensor_hermitian(&pauli::y(), &pauli::y()).scale(s * mu2);
    let zz = tensor_hermitian(&pauli::z(), &pauli::z()).scale(mu3);
    xx.add(&yy).and_then(|h| h.add(&zz)).expect("4x4 operands")
}

/// One oracle quantity compared along a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormRow {
    pub t: f64,
    pub analytic: f64,
    pub numeric: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormReport {
    pub quantity: String,
    pub rows: Vec<ClosedFormRow>,
}

impl ClosedFormReport {
    pub(crate) fn from_pairs(quantity: &str, rows: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        Self {
            quantity: quantity.to_string(),
            rows: rows
                .into_iter()
                .map(|(t, analytic, numeric)| ClosedFormRow {
                    t,
                    analytic,
                    numeric,
                    abs_error: (analytic - numeric).abs(),
                })
                .collect(),
        }
    }

    pub fn max_abs_error(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_error).fold(0.0, f64::max)
    }
}
