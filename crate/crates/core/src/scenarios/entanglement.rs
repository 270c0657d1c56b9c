use crate::bounds::{
    correction_r, observable_bound, time_average_bound, BoundCurve, CorrectionSample,
    ObservableRun,
};
use crate::dynamics::{
    evolve_state, expectation_derivative, sample_grid, track_observable, Propagator, TimeGrid,
};
use crate::error::{Error, Result};
use crate::info::{capacity_of_entanglement, entanglement_entropy, extend_left, modular_hamiltonian};
use crate::operator::{HermitianOperator, Subsystem};
use crate::state::{moments, reduced_state, PureState};
use crate::C64;

use super::{canonical_hamiltonian, ClosedFormReport, Sign};

const DIMS: (usize, usize) = (2, 2);

/// `√p|00⟩ + √(1−p)|11⟩`.
pub fn initial_schmidt_state(p: f64) -> Result<PureState> {
    check_weight(p)?;
    let z = C64::new(0.0, 0.0);
    PureState::new(vec![C64::new(p.sqrt(), 0.0), z, z, C64::new((1.0 - p).sqrt(), 0.0)])
}

fn check_weight(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Coefficients of `|00⟩` and `|11⟩` in `e^{−iH⁺t}|Ψ(0)⟩`.
pub fn evolved_amplitudes(p: f64, theta: f64, mu3: f64, t: f64) -> (C64, C64) {
    let phase = C64::from_polar(1.0, -mu3 * t);
    let (s, c) = (theta * t).sin_cos();
    let (a, b) = (p.sqrt(), (1.0 - p).sqrt());
    let alpha = phase * C64::new(a * c, -b * s);
    let beta = phase * C64::new(b * c, -a * s);
    (alpha, beta)
}

/// `(C_E(t), S_EE(t))` of the reduced state, from the analytic expressions.
///
/// Where a Schmidt weight vanishes both quantities are 0.
pub fn ce_see_closed_form(p: f64, theta: f64, t: f64) -> (f64, f64) {
    let a = 2.0 * p - 1.0;
    let c2 = (2.0 * theta * t).cos();
    let arg = a * c2;
    if 1.0 - arg.abs() < 1e-15 {
        return (0.0, 0.0);
    }
    let c_e = -0.5 * arg.atanh().powi(2) * (-1.0 + 4.0 * p * (p - 1.0) + (1.0 - 2.0 * p).powi(2) * (4.0 * theta * t).cos());

    let e = |k: f64| C64::from_polar(1.0, k * theta * t);
    let plus_log = ((1.0 + (1.0 - 2.0 * p) * c2) / 2.0).ln();
    let minus_log = ((1.0 - (1.0 - 2.0 * p) * c2) / 2.0).ln();
    let q = 2.0 * p;
    let first = C64::new(-1.0 + q, 0.0) - e(2.0) * 2.0 + e(4.0) * (-1.0 + q);
    let second = C64::new(-1.0 + q, 0.0) + e(2.0) * 2.0 + e(4.0) * (-1.0 + q);
    let s_ee = e(-2.0) / 4.0 * (first * plus_log - second * minus_log);
    (c_e.max(0.0), s_ee.re)
}

/// `ΔH = |θ(1 − 2p)|` in the initial Schmidt state.
pub fn delta_h_entanglement(p: f64, theta: f64) -> Result<f64> {
    check_weight(p)?;
    Ok((theta * (1.0 - 2.0 * p)).abs())
}

fn check_modular_weight(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) || (p - 0.5).abs() < 1e-12 {
        return Err(Error::Domain(format!(
            "modular closed form needs p in (0, 1/2) or (1/2, 1), got {p}"
        )));
    }
    Ok(())
}

/// `(C_M(t), E_M(t))` for `K_AB(t) = U†(K_A ⊗ I)U` in the initial state.
pub fn modular_closed_form(p: f64, theta: f64, t: f64) -> Result<(f64, f64)> {
    check_modular_weight(p)?;
    let (s, c) = (2.0 * theta * t).sin_cos();
    let log_ratio = (-1.0 + 1.0 / p).ln();
    let c_m = 0.25 * log_ratio.powi(2) * (4.0 * p * (1.0 - p) * c * c + s * s);
    let e_m = -(1.0 - 2.0 * p) * (1.0 - 2.0 * p).atanh() * c - 0.5 * (p * (1.0 - p)).ln();
    Ok((c_m, e_m))
}

/// Schmidt weight `p`, canonical coupling `θ = μ₁ − μ₂` and `μ₃` on a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntanglementScenario {
    pub p: f64,
    pub theta: f64,
    pub mu3: f64,
    pub grid: TimeGrid,
}

impl EntanglementScenario {
    pub fn new(p: f64, theta: f64, mu3: f64, grid: TimeGrid) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p = {p}: the initial state must be entangled (0 < p < 1)"
            )));
        }
        if (p - 0.5).abs() < 1e-12 {
            return Err(Error::InvalidParameter(
                "p = 1/2 is stationary under H+ (ΔH = 0)".into(),
            ));
        }
        if !theta.is_finite() || theta == 0.0 || !mu3.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite nonzero theta and finite mu3, got theta = {theta}, mu3 = {mu3}"
            )));
        }
        Ok(Self { p, theta, mu3, grid })
    }

    /// `H⁺` with `μ₁ = μ₃ + θ`, `μ₂ = μ₃`.
    pub fn hamiltonian(&self) -> HermitianOperator {
        canonical_hamiltonian(self.mu3 + self.theta, self.mu3, self.mu3, Sign::Plus)
    }

    pub fn initial_state(&self) -> PureState {
        initial_schmidt_state(self.p).expect("validated p")
    }

    /// `K_A(0) ⊗ I`.
    pub fn modular_operator(&self) -> Result<HermitianOperator> {
        let rho_a = reduced_state(&self.initial_state(), DIMS, Subsystem::A)?;
        Ok(extend_left(&modular_hamiltonian(&rho_a), 2))
    }
}

/// Per-sample quantities of the Schrödinger-picture run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntanglementSample {
    pub t: f64,
    pub s_ee: f64,
    pub c_e: f64,
    /// `Γ = dS_EE/dt`.
    pub rate: f64,
    pub correction: Option<CorrectionSample>,
}

#[derive(Clone, Debug)]
pub struct EntanglementRun {
    pub samples: Vec<EntanglementSample>,
    pub delta_h: f64,
    pub curve: BoundCurve,
}

/// Entanglement generation with `A = K_A(t) ⊗ I` rebuilt from `ρ_A(t)` at
/// every sample and `B = H`.
pub fn entanglement_run(scn: &EntanglementScenario) -> Result<EntanglementRun> {
    let h = scn.hamiltonian();
    let psi0 = scn.initial_state();
    let delta_h = moments(&h, &psi0)?.std_dev;
    let prop = Propagator::new(&h)?;
    let samples = sample_grid(&scn.grid, |t| {
        let psi = evolve_state(&prop.at(t), &psi0)?;
        let rho_a = reduced_state(&psi, DIMS, Subsystem::A)?;
        let k = extend_left(&modular_hamiltonian(&rho_a), 2);
        let correction = match correction_r(&k, &h, &psi) {
            Ok(c) => Some(c),
            Err(Error::DegenerateVariance { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(EntanglementSample {
            t,
            s_ee: entanglement_entropy(&rho_a),
            c_e: capacity_of_entanglement(&rho_a),
            rate: expectation_derivative(&h, &k, &psi)?,
            correction,
        })
    })?;
    let means: Vec<f64> = samples.iter().map(|s| s.s_ee).collect();
    let spreads: Vec<f64> = samples.iter().map(|s| s.c_e.sqrt()).collect();
    let corrections: Vec<Option<CorrectionSample>> = samples.iter().map(|s| s.correction).collect();
    let curve = time_average_bound(&scn.grid, &means, &spreads, &corrections, delta_h)?;
    Ok(EntanglementRun {
        samples,
        delta_h,
        curve,
    })
}

pub fn run_entanglement_scenario(scn: &EntanglementScenario) -> Result<BoundCurve> {
    Ok(entanglement_run(scn)?.curve)
}

/// Modular energy `⟨K_AB(t)⟩` with `K_AB(t) = U†(K_A(0) ⊗ I)U` and a fixed
/// state.
pub fn modular_run(scn: &EntanglementScenario) -> Result<ObservableRun> {
    observable_bound(
        &scn.hamiltonian(),
        &scn.modular_operator()?,
        &scn.initial_state(),
        &scn.grid,
    )
}

pub fn run_modular_scenario(scn: &EntanglementScenario) -> Result<BoundCurve> {
    Ok(modular_run(scn)?.curve)
}

/// `C_E` and `S_EE` from eigendecompositions of `ρ_A(t)` against the closed
/// forms.
pub fn entanglement_closed_form_reports(scn: &EntanglementScenario) -> Result<Vec<ClosedFormReport>> {
    let h = scn.hamiltonian();
    let psi0 = scn.initial_state();
    let prop = Propagator::new(&h)?;
    let rows = sample_grid(&scn.grid, |t| {
        let psi = evolve_state(&prop.at(t), &psi0)?;
        let rho_a = reduced_state(&psi, DIMS, Subsystem::A)?;
        let (c_e, s_ee) = ce_see_closed_form(scn.p, scn.theta, t);
        Ok((t, c_e, capacity_of_entanglement(&rho_a), s_ee, entanglement_entropy(&rho_a)))
    })?;
    Ok(vec![
        ClosedFormReport::from_pairs("C_E", rows.iter().map(|r| (r.0, r.1, r.2))),
        ClosedFormReport::from_pairs("S_EE", rows.iter().map(|r| (r.0, r.3, r.4))),
    ])
}

/// `C_M` and `E_M` from the Heisenberg-picture trajectory against the closed
/// forms.
pub fn modular_closed_form_reports(scn: &EntanglementScenario) -> Result<Vec<ClosedFormReport>> {
    let traj = track_observable(
        &scn.hamiltonian(),
        &scn.modular_operator()?,
        &scn.initial_state(),
        &scn.grid,
    )?;
    let mut c_rows = Vec::with_capacity(traj.samples.len());
    let mut e_rows = Vec::with_capacity(traj.samples.len());
    for (k, s) in traj.samples.iter().enumerate() {
        let t = scn.grid.point(k);
        let (c_m, e_m) = modular_closed_form(scn.p, scn.theta, t)?;
        c_rows.push((t, c_m, s.std_dev * s.std_dev));
        e_rows.push((t, e_m, s.mean));
    }
    Ok(vec![
        ClosedFormReport::from_pairs("C_M", c_rows),
        ClosedFormReport::from_pairs("E_M", e_rows),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::propagator;
    use crate::info::entanglement_entropy;
    use crate::state::perpendicular_state;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

    /// `(C, S)` directly from `λ = ½[1 ∓ (1−2p) cos 2θt]`.
    fn eigen_oracle(p: f64, theta: f64, t: f64) -> (f64, f64) {
        let x = (1.0 - 2.0 * p) * (2.0 * theta * t).cos();
        let ls = [(1.0 - x) / 2.0, (1.0 + x) / 2.0];
        let s: f64 = ls.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum();
        let m2: f64 = ls.iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln().powi(2)).sum();
        (m2 - s * s, s)
    }

    #[test]
    fn schmidt_state_examples() {
        let s = initial_schmidt_state(1.0).unwrap();
        assert!(s.equals_up_to_phase(&PureState::basis(4, 0).unwrap(), 1e-14));
        let bell = initial_schmidt_state(0.5).unwrap();
        let rho = reduced_state(&bell, DIMS, Subsystem::A).unwrap();
        assert!((entanglement_entropy(&rho) - LN_2).abs() < 1e-12);
        let rho = reduced_state(&initial_schmidt_state(0.1).unwrap(), DIMS, Subsystem::A).unwrap();
        assert!((rho.eigenvalues()[0] - 0.1).abs() < 1e-12);
        assert!((rho.eigenvalues()[1] - 0.9).abs() < 1e-12);
        assert!(initial_schmidt_state(1.5).is_err());
    }

    #[test]
    fn amplitude_examples() {
        let (a, b) = evolved_amplitudes(0.3, 1.2, 0.4, 0.0);
        assert!((a - C64::new(0.3f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((b - C64::new(0.7f64.sqrt(), 0.0)).norm() < 1e-15);
        let (a, b) = evolved_amplitudes(0.1, 1.0, 0.0, FRAC_PI_2);
        assert!((a - C64::new(0.0, -(0.9f64.sqrt()))).norm() < 1e-15);
        assert!((b - C64::new(0.0, -(0.1f64.sqrt()))).norm() < 1e-15);
    }

    #[test]
    fn amplitudes_match_propagation() {
        let cases = [(0.1, 1.0, 0.0, 0.5), (0.3, 0.7, 0.4, 1.9), (0.8, 2.0, 0.1, 3.3)];
        for (p, theta, mu3, t) in cases {
            let h = canonical_hamiltonian(mu3 + theta, mu3, mu3, Sign::Plus);
            let u = propagator(&h, t).unwrap();
            let psi = evolve_state(&u, &initial_schmidt_state(p).unwrap()).unwrap();
            let (a, b) = evolved_amplitudes(p, theta, mu3, t);
            let amp = psi.amplitudes();
            assert!((amp[0] - a).norm() < 1e-10);
            assert!((amp[3] - b).norm() < 1e-10);
            assert!(amp[1].norm() < 1e-12 && amp[2].norm() < 1e-12);
        }
    }

    #[test]
    fn closed_form_examples() {
        for t in [0.0, 0.3, 1.7] {
            let (c, s) = ce_see_closed_form(0.5, 1.0, t);
            assert!(c.abs() < 1e-15);
            assert!((s - LN_2).abs() < 1e-12);
        }
        let (c, s) = ce_see_closed_form(0.1, 1.0, FRAC_PI_4);
        assert!(c.abs() < 1e-12 && (s - LN_2).abs() < 1e-12);
        let (c, s) = ce_see_closed_form(0.1, 1.0, 0.0);
        assert!((c - 0.434503).abs() < 2e-6 && (s - 0.325083).abs() < 1e-6);
        for (p, theta, t) in [(0.1, 1.0, 0.37), (0.3, 0.5, 2.2), (0.9, 1.5, 0.8), (0.0, 1.0, 0.4)] {
            let (c, s) = ce_see_closed_form(p, theta, t);
            let (co, so) = eigen_oracle(p, theta, t);
            assert!((c - co).abs() < 1e-12, "{p} {theta} {t}");
            assert!((s - so).abs() < 1e-12);
        }
        assert_eq!(ce_see_closed_form(1.0, 1.0, 0.0), (0.0, 0.0));
    }

    #[test]
    fn delta_h_examples() {
        assert_eq!(delta_h_entanglement(0.5, 1.0).unwrap(), 0.0);
        assert!((delta_h_entanglement(0.1, 1.0).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(delta_h_entanglement(0.0, 2.0).unwrap(), 2.0);
        let h = canonical_hamiltonian(1.0, 0.0, 0.0, Sign::Plus);
        let dh = moments(&h, &initial_schmidt_state(0.1).unwrap()).unwrap().std_dev;
        assert!((dh - 0.8).abs() < 1e-10);
    }

    #[test]
    fn modular_examples() {
        let s0 = -(0.1f64 * 0.1f64.ln() + 0.9 * 0.9f64.ln());
        let (c, e) = modular_closed_form(0.1, 1.0, 0.0).unwrap();
        assert!((e - s0).abs() < 1e-12);
        assert!((c - 0.434503).abs() < 2e-6);
        let (c, _) = modular_closed_form(0.1, 1.0, FRAC_PI_4).unwrap();
        assert!((c - 0.25 * 9f64.ln().powi(2)).abs() < 1e-12);
        assert!(modular_closed_form(0.5, 1.0, 0.2).is_err());
        assert!(modular_closed_form(0.0, 1.0, 0.2).is_err());
    }

    #[test]
    fn scenario_rejects_degenerate_weights() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        for p in [0.0, 0.5, 1.0, -0.2] {
            assert!(EntanglementScenario::new(p, 1.0, 0.0, grid).is_err());
        }
        assert!(EntanglementScenario::new(0.1, 0.0, 0.0, grid).is_err());
    }

    #[test]
    fn fig2_run_is_tighter_and_consistent() {
        let scn = EntanglementScenario::new(0.1, 1.0, 0.0, TimeGrid::new(1.0, 2000).unwrap()).unwrap();
        let run = entanglement_run(&scn).unwrap();
        assert!((run.delta_h - 0.8).abs() < 1e-10);
        let c = &run.curve;
        assert!(c.hierarchy_violations().is_empty());
        for k in 1..scn.grid.n_steps() {
            assert!(c.t_sqslo[k] > c.t_qslo[k], "k = {k}");
        }
        assert!(c.t_sqslo[2000] / c.t_qslo[2000] > 1.05);
        assert_eq!(c.t_qslo[0], 0.0);
        assert_eq!(c.t_sqslo[0], 0.0);
    }

    #[test]
    fn modular_run_saturates() {
        let scn = EntanglementScenario::new(0.1, 1.0, 0.0, TimeGrid::new(1.0, 2000).unwrap()).unwrap();
        let run = modular_run(&scn).unwrap();
        assert!((run.delta_h - 0.8).abs() < 1e-10);
        for k in 100..scn.grid.len() {
            let t = scn.grid.point(k);
            assert!((run.curve.t_sqslo[k] - t).abs() / t < 1e-6);
            assert!(run.curve.t_qslo[k] < run.curve.t_sqslo[k]);
        }
        assert!(run.corrections.iter().flatten().skip(1).all(|c| c.saturated));
    }

    #[test]
    fn closed_form_reports_agree() {
        let scn = EntanglementScenario::new(0.3, 0.5, 0.2, TimeGrid::new(2.0, 400).unwrap()).unwrap();
        for report in entanglement_closed_form_reports(&scn).unwrap() {
            assert!(report.max_abs_error() < 1e-8, "{}", report.quantity);
        }
        for report in modular_closed_form_reports(&scn).unwrap() {
            assert!(report.max_abs_error() < 1e-8, "{}", report.quantity);
        }
    }

    #[test]
    fn modular_perpendicular_state_is_time_dependent() {
        let scn = EntanglementScenario::new(0.1, 1.0, 0.0, TimeGrid::new(1.0, 4).unwrap()).unwrap();
        let k0 = scn.modular_operator().unwrap();
        let psi = scn.initial_state();
        let h = scn.hamiltonian();
        let at = |t: f64| {
            let kt = crate::dynamics::heisenberg_evolve(&propagator(&h, t).unwrap(), &k0).unwrap();
            perpendicular_state(&kt, &psi).unwrap()
        };
        // The orthogonal complement of ψ inside span{|00⟩, |11⟩} is one
        // dimensional, so only the phase of ψ⊥ moves.
        let (a, b) = (at(0.2), at(0.5));
        assert!(a.equals_up_to_phase(&b, 1e-12));
        assert!((a.inner(&b) - C64::new(1.0, 0.0)).norm() > 1e-3);
    }
}
