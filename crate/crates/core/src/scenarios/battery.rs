use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::bounds::{observable_bound, BoundCurve, ObservableRun};
use crate::dynamics::{track_observable, OperatorTrajectory, TimeGrid};
use crate::error::{Error, Result};
use crate::operator::{pauli, tensor_hermitian, HermitianOperator};
use crate::state::PureState;
use crate::C64;

use super::ClosedFormReport;

/// Labels for the charging protocols. The physics is set by `(ω, Ω, J)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatteryMode {
    Parallel,
    Collective,
    Coupled,
    Decoupled,
}

impl BatteryMode {
    pub const ALL: [BatteryMode; 4] = [
        BatteryMode::Coupled,
        BatteryMode::Decoupled,
        BatteryMode::Parallel,
        BatteryMode::Collective,
    ];

    /// `(ω, Ω, J)` used for this protocol in the case study.
    pub fn default_parameters(self) -> (f64, f64, f64) {
        match self {
            BatteryMode::Coupled => (2.0, 1.0, 1.0),
            BatteryMode::Decoupled => (2.0, 4.0, 1.0),
            BatteryMode::Parallel => (2.0, 1.0, 0.0),
            BatteryMode::Collective => (2.0, 1.0, 1.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BatteryMode::Parallel => "parallel",
            BatteryMode::Collective => "collective",
            BatteryMode::Coupled => "coupled",
            BatteryMode::Decoupled => "decoupled",
        }
    }
}

impl fmt::Display for BatteryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BatteryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BatteryMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown battery mode `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct BatteryHamiltonians {
    pub h_b: HermitianOperator,
    pub h_c: HermitianOperator,
    pub h_int: HermitianOperator,
    pub h_t: HermitianOperator,
}

/// `H_B = ω Σσᶻ`, `H_C = Ω Σσˣ`, `H_int = J(σˣσˣ + σʸσʸ + σᶻσᶻ)` and their sum.
/// Basis order `↑↑, ↑↓, ↓↑, ↓↓` with `σᶻ|↑⟩ = |↑⟩`.
pub fn battery_hamiltonians(omega: f64, omega_drive: f64, j: f64) -> BatteryHamiltonians {
    let id = pauli::identity();
    let local = |op: HermitianOperator| {
        tensor_hermitian(&op, &id)
            .add(&tensor_hermitian(&id, &op))
            .expect("4x4 operands")
    };
    let h_b = local(pauli::z()).scale(omega);
    let h_c = local(pauli::x()).scale(omega_drive);
    let h_int = [pauli::x(), pauli::y(), pauli::z()]
        .iter()
        .map(|s| tensor_hermitian(s, s))
        .reduce(|a, b| a.add(&b).expect("4x4 operands"))
        .expect("three terms")
        .scale(j);
    let h_t = h_b
        .add(&h_c)
        .and_then(|h| h.add(&h_int))
        .expect("4x4 operands");
    BatteryHamiltonians {
        h_b,
        h_c,
        h_int,
        h_t,
    }
}

/// Product state with amplitudes `(μ, ν, η, δ)` on `↑↑, ↑↓, ↓↑, ↓↓`.
pub fn general_product_state(theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> Result<PureState> {
    for (name, v) in [("theta1", theta1), ("theta2", theta2)] {
        if !(0.0..=PI).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, π]")));
        }
    }
    for (name, v) in [("phi1", phi1), ("phi2", phi2)] {
        if !(0.0..=TAU).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 2π]")));
        }
    }
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    let e = |phi: f64| C64::from_polar(1.0, phi);
    PureState::normalized(vec![
        e(phi1 + phi2) * (s1 * s2),
        e(phi1) * (s1 * c2),
        e(phi2) * (c1 * s2),
        C64::new(c1 * c2, 0.0),
    ])
}

/// `E(t) = 4ωΩ²/(ω² + Ω²) sin²(√(ω² + Ω²) t)` for the empty initial state.
pub fn ergotropy_closed_form(omega: f64, omega_drive: f64, t: f64) -> f64 {
    let nu2 = omega * omega + omega_drive * omega_drive;
    if nu2 == 0.0 {
        return 0.0;
    }
    4.0 * omega * omega_drive * omega_drive / nu2 * (nu2.sqrt() * t).sin().powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatteryScenario {
    pub omega: f64,
    pub omega_drive: f64,
    pub j: f64,
    pub mode: BatteryMode,
    /// `(θ₁, θ₂, φ₁, φ₂)`.
    pub angles: (f64, f64, f64, f64),
    pub grid: TimeGrid,
}

impl BatteryScenario {
    /// Empty initial battery, `θ₁ = θ₂ = 0`.
    pub fn new(omega: f64, omega_drive: f64, j: f64, mode: BatteryMode, grid: TimeGrid) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if !(omega_drive.is_finite() && omega_drive >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Omega must be non-negative, got {omega_drive}"
            )));
        }
        if !j.is_finite() {
            return Err(Error::InvalidParameter(format!("J must be finite, got {j}")));
        }
        Ok(Self {
            omega,
            omega_drive,
            j,
            mode,
            angles: (0.0, 0.0, 0.0, 0.0),
            grid,
        })
    }

    pub fn from_mode(mode: BatteryMode, grid: TimeGrid) -> Self {
        let (omega, omega_drive, j) = mode.default_parameters();
        Self::new(omega, omega_drive, j, mode, grid).expect("default parameters are valid")
    }

    pub fn with_angles(mut self, theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> Result<Self> {
        general_product_state(theta1, theta2, phi1, phi2)?;
        self.angles = (theta1, theta2, phi1, phi2);
        Ok(self)
    }

    pub fn hamiltonians(&self) -> BatteryHamiltonians {
        battery_hamiltonians(self.omega, self.omega_drive, self.j)
    }

    pub fn initial_state(&self) -> PureState {
        let (t1, t2, p1, p2) = self.angles;
        general_product_state(t1, t2, p1, p2).expect("validated angles")
    }

    fn is_empty_start(&self) -> bool {
        self.angles.0 == 0.0 && self.angles.1 == 0.0
    }
}

fn shift_means(traj: &mut OperatorTrajectory) {
    let e0 = traj.samples[0].mean;
    for s in &mut traj.samples {
        s.mean -= e0;
    }
}

/// `E(t) = ⟨Ψ(0)|H_B(t) − H_B(0)|Ψ(0)⟩` with spread `ΔH_B(t)`.
pub fn ergotropy_trajectory(scn: &BatteryScenario) -> Result<OperatorTrajectory> {
    let hs = scn.hamiltonians();
    let mut traj = track_observable(&hs.h_t, &hs.h_b, &scn.initial_state(), &scn.grid)?;
    shift_means(&mut traj);
    Ok(traj)
}

/// Bounds with `A = H_B(t)`, `B = H_T`; mean values are `E(t)`.
pub fn battery_run(scn: &BatteryScenario) -> Result<ObservableRun> {
    let hs = scn.hamiltonians();
    let mut run = observable_bound(&hs.h_t, &hs.h_b, &scn.initial_state(), &scn.grid)?;
    shift_means(&mut run.trajectory);
    run.curve.mean_values = run.trajectory.means();
    Ok(run)
}

pub fn run_battery_scenario(scn: &BatteryScenario) -> Result<BoundCurve> {
    Ok(battery_run(scn)?.curve)
}

/// Numeric `E(t)` against the closed form. Requires the empty initial state.
pub fn ergotropy_closed_form_report(scn: &BatteryScenario) -> Result<ClosedFormReport> {
    if !scn.is_empty_start() {
        return Err(Error::InvalidParameter(
            "the ergotropy closed form assumes the empty initial state".into(),
        ));
    }
    let traj = ergotropy_trajectory(scn)?;
    Ok(ClosedFormReport::from_pairs(
        "E",
        traj.samples.iter().enumerate().map(|(k, s)| {
            let t = scn.grid.point(k);
            (t, ergotropy_closed_form(scn.omega, scn.omega_drive, t), s.mean)
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::capacity_of_entanglement;
    use crate::operator::Subsystem;
    use crate::state::{moments, reduced_state};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn hamiltonian_examples() {
        let hs = battery_hamiltonians(2.0, 1.0, 0.0);
        assert_eq!(hs.h_int.matrix().max_abs(), 0.0);
        let eig = hs.h_b.eig().unwrap();
        let expected = [-4.0, 0.0, 0.0, 4.0];
        for (a, b) in eig.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let hs = battery_hamiltonians(2.0, 1.0, 1.0);
        let sum = hs.h_b.add(&hs.h_c).unwrap().add(&hs.h_int).unwrap();
        assert_eq!(sum.matrix().max_abs_diff(hs.h_t.matrix()), 0.0);
        let empty = general_product_state(0.0, 0.0, 0.0, 0.0).unwrap();
        let dh = moments(&hs.h_t, &empty).unwrap().std_dev;
        assert!((dh - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn product_state_examples() {
        let empty = general_product_state(0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(empty.equals_up_to_phase(&PureState::basis(4, 3).unwrap(), 1e-15));
        let full = general_product_state(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0).unwrap();
        assert!(full.equals_up_to_phase(&PureState::basis(4, 0).unwrap(), 1e-15));
        for (a, b, c, d) in [(0.3, 2.0, 1.0, 5.0), (1.1, 0.4, 6.0, 0.2)] {
            let psi = general_product_state(a, b, c, d).unwrap();
            let rho = reduced_state(&psi, (2, 2), Subsystem::A).unwrap();
            assert!(capacity_of_entanglement(&rho) < 1e-12);
        }
        assert!(general_product_state(4.0, 0.0, 0.0, 0.0).is_err());
        assert!(general_product_state(0.0, 0.0, 7.0, 0.0).is_err());
    }

    #[test]
    fn ergotropy_matches_closed_form_and_ignores_j() {
        let grid = TimeGrid::new(3.0, 600).unwrap();
        let a = BatteryScenario::new(2.0, 1.0, 1.0, BatteryMode::Collective, grid).unwrap();
        let b = BatteryScenario::new(2.0, 1.0, 0.0, BatteryMode::Parallel, grid).unwrap();
        assert!(ergotropy_closed_form_report(&a).unwrap().max_abs_error() < 1e-8);
        let (ta, tb) = (ergotropy_trajectory(&a).unwrap(), ergotropy_trajectory(&b).unwrap());
        for (x, y) in ta.samples.iter().zip(&tb.samples) {
            assert!((x.mean - y.mean).abs() < 1e-10);
        }
        assert_eq!(ta.samples[0].mean, 0.0);
        let peak = ergotropy_closed_form(2.0, 1.0, PI / (2.0 * 5f64.sqrt()));
        assert!((peak - 1.6).abs() < 1e-12);
    }

    #[test]
    fn closed_form_report_needs_empty_start() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let scn = BatteryScenario::from_mode(BatteryMode::Coupled, grid)
            .with_angles(0.5, 0.0, 0.0, 0.0)
            .unwrap();
        assert!(ergotropy_closed_form_report(&scn).is_err());
    }

    #[test]
    fn stationary_battery_is_rejected() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let scn = BatteryScenario::new(2.0, 0.0, 1.0, BatteryMode::Parallel, grid).unwrap();
        assert!(run_battery_scenario(&scn).is_err());
    }

    #[test]
    fn coupled_run_saturates() {
        let grid = TimeGrid::with_density(2.0, 2000).unwrap();
        let run = battery_run(&BatteryScenario::from_mode(BatteryMode::Coupled, grid)).unwrap();
        for k in 1..grid.len() {
            let t = grid.point(k);
            if t >= 0.05 {
                assert!((run.curve.t_sqslo[k] - t).abs() / t < 1e-6, "t = {t}");
            }
        }
        assert!(run.curve.hierarchy_violations().is_empty());
        assert!(!run.curve.warnings.is_empty());
    }

    #[test]
    fn mode_parsing() {
        for m in BatteryMode::ALL {
            assert_eq!(m.as_str().parse::<BatteryMode>().unwrap(), m);
        }
        assert!("serial".parse::<BatteryMode>().is_err());
    }
}
