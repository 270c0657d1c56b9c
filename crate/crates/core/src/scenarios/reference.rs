//! Printed closed forms for `R(t)` and `ψ⊥(t)` compared against the numerical
//! pipeline.
//!
//! Each fixture is evaluated at a handful of times and classified. Fixtures
//! that disagree are recorded, not enforced.

use std::f64::consts::SQRT_2;
use std::fmt;

use crate::bounds::{correction_branches, correction_r, Branch};
use crate::dynamics::{evolve_state, heisenberg_evolve, propagator};
use crate::error::Result;
use crate::info::{extend_left, modular_hamiltonian};
use crate::operator::{HermitianOperator, Subsystem};
use crate::state::{perpendicular_state, reduced_state, PureState};
use crate::C64;

use super::{battery_hamiltonians, initial_schmidt_state, EntanglementScenario};
use crate::dynamics::TimeGrid;

/// Times at which every fixture is sampled.
pub const FIXTURE_TIMES: [f64; 5] = [0.1, 0.3, 0.7, 1.2, 2.0];
/// Tolerance for fixtures printed with exact coefficients.
pub const EXACT_TOL: f64 = 1e-6;
/// Tolerance for fixtures printed with two-digit coefficients.
pub const ROUNDED_TOL: f64 = 5e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureStatus {
    /// Agrees with the selected branch (or `ψ⊥` up to phase).
    Match,
    /// Agrees only with the `∓` branch that the selection rule rejects.
    MatchOtherBranch,
    KnownDiscrepancy,
}

impl fmt::Display for FixtureStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixtureStatus::Match => "MATCH",
            FixtureStatus::MatchOtherBranch => "MATCH-OTHER-BRANCH",
            FixtureStatus::KnownDiscrepancy => "KNOWN-DISCREPANCY",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureResult {
    pub name: &'static str,
    pub status: FixtureStatus,
    /// Status the fixture is documented to have.
    pub expected: FixtureStatus,
    /// Largest deviation over the sample times for the reported status.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub note: &'static str,
}

impl FixtureResult {
    pub fn as_expected(&self) -> bool {
        self.status == self.expected
    }
}

/// Pipeline values at one time: the selected `R`, the rejected branch, and
/// the prescribed `ψ⊥`.
struct PipelinePoint {
    r_selected: f64,
    r_other: f64,
    perp: PureState,
}

fn pipeline_point(a: &HermitianOperator, b: &HermitianOperator, psi: &PureState) -> Result<PipelinePoint> {
    let sample = correction_r(a, b, psi)?;
    let (minus, plus) = correction_branches(a, b, psi)?;
    let r_other = match sample.sign_branch {
        Branch::Minus => plus,
        Branch::Plus => minus,
    };
    Ok(PipelinePoint {
        r_selected: sample.r,
        r_other,
        perp: perpendicular_state(a, psi)?,
    })
}

/// Heisenberg picture: `A = U†(K_A(0) ⊗ I)U`, state fixed.
fn modular_point(p: f64, theta: f64, t: f64) -> Result<PipelinePoint> {
    let scn = EntanglementScenario::new(p, theta, 0.0, TimeGrid::new(1.0, 2)?)?;
    let h = scn.hamiltonian();
    let a = heisenberg_evolve(&propagator(&h, t)?, &scn.modular_operator()?)?;
    pipeline_point(&a, &h, &scn.initial_state())
}

/// Schrödinger picture: `A = K_A(t) ⊗ I`, state `Ψ(t)`.
fn entanglement_point(p: f64, theta: f64, mu3: f64, t: f64) -> Result<PipelinePoint> {
    let scn = EntanglementScenario::new(p, theta, mu3, TimeGrid::new(1.0, 2)?)?;
    let h = scn.hamiltonian();
    let psi = evolve_state(&propagator(&h, t)?, &initial_schmidt_state(p)?)?;
    let rho_a = reduced_state(&psi, (2, 2), Subsystem::A)?;
    let a = extend_left(&modular_hamiltonian(&rho_a), 2);
    pipeline_point(&a, &h, &psi)
}

fn battery_point(omega: f64, omega_drive: f64, j: f64, t: f64) -> Result<PipelinePoint> {
    let hs = battery_hamiltonians(omega, omega_drive, j);
    let a = heisenberg_evolve(&propagator(&hs.h_t, t)?, &hs.h_b)?;
    let empty = PureState::basis(4, 3)?;
    pipeline_point(&a, &hs.h_t, &empty)
}

fn classify_r(
    points: &[PipelinePoint],
    printed: impl Fn(f64) -> f64,
    tol: f64,
) -> (FixtureStatus, f64) {
    let mut sel_max = 0.0_f64;
    let mut either_max = 0.0_f64;
    for (p, &t) in points.iter().zip(&FIXTURE_TIMES) {
        let v = printed(t);
        let d_sel = (v - p.r_selected).abs();
        let d_other = (v - p.r_other).abs();
        sel_max = sel_max.max(d_sel);
        either_max = either_max.max(d_sel.min(d_other));
    }
    if sel_max <= tol {
        (FixtureStatus::Match, sel_max)
    } else if either_max <= tol {
        (FixtureStatus::MatchOtherBranch, either_max)
    } else {
        (FixtureStatus::KnownDiscrepancy, either_max)
    }
}

/// Deviation is the larger of `|1 − |⟨ψ⊥|φ⟩| / ‖φ‖|` and `|‖φ‖ − 1|`; the
/// printed vectors are meant to be normalized.
fn classify_perp(points: &[PipelinePoint], printed: impl Fn(f64) -> [C64; 4], tol: f64) -> (FixtureStatus, f64) {
    let mut worst = 0.0_f64;
    for (p, &t) in points.iter().zip(&FIXTURE_TIMES) {
        let v = printed(t);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let overlap = p
            .perp
            .amplitudes()
            .iter()
            .zip(&v)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm();
        let dev = if norm.is_finite() && norm > 0.0 {
            (1.0 - overlap / norm).abs().max((norm - 1.0).abs())
        } else {
            f64::INFINITY
        };
        worst = worst.max(dev);
    }
    let status = if worst <= tol {
        FixtureStatus::Match
    } else {
        FixtureStatus::KnownDiscrepancy
    };
    (status, worst)
}

fn points(f: impl Fn(f64) -> Result<PipelinePoint>) -> Result<Vec<PipelinePoint>> {
    FIXTURE_TIMES.iter().map(|&t| f(t)).collect()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn r_modular_01_1(t: f64) -> f64 {
    let s = (0.68 - 0.32 * (4.0 * t).cos()).sqrt();
    let z = c(1.89 - 0.89 * (4.0 * t).cos() + 2.78 * s * (2.0 * t).sin(), 1.67 * s * (2.0 * t).cos());
    0.63 * z.norm_sqr() / (2.13 - (4.0 * t).cos()).powi(2)
}

fn r_modular_01_05(t: f64) -> f64 {
    let s = (0.68 - 0.32 * (2.0 * t).cos()).sqrt();
    let (sn, cs) = t.sin_cos();
    let z = c(cs * cs + sn * (2.78 * s + 2.78 * sn), 1.67 * s * cs);
    -0.15 * z.norm_sqr() / (-1.18 + (2.0 * t).cos() - 0.12 * (4.0 * t).cos())
}

fn r_modular_04_1(t: f64) -> f64 {
    let d = -49.0 + (4.0 * t).cos();
    let s = (0.98 - 0.02 * (4.0 * t).cos()).sqrt();
    let inner = c((2.0 * t).cos(), -2.04 * t.cos() * t.sin());
    let z = (c(d, 0.0) - c(0.0, 48.99) * s * inner) / d;
    0.5 * z.norm_sqr()
}

fn r_modular_04_05(t: f64) -> f64 {
    let s = (0.98 - 0.02 * (2.0 * t).cos()).sqrt();
    let (sn, cs) = t.sin_cos();
    let z = c(cs * cs + sn * (1.04 * s + 1.04 * sn), -1.02 * s * cs);
    -11.76 * z.norm_sqr() / (-24.51 + (2.0 * t).cos() - 0.005 * (4.0 * t).cos())
}

fn r_entanglement(p: f64, theta: f64, t: f64) -> f64 {
    let alpha = (2.0 * p - 1.0) * (2.0 * theta * t).cos();
    let beta = -1.0 - 4.0 * p * (1.0 - p) + (1.0 - 2.0 * p).powi(2) * (4.0 * theta * t).cos();
    let at = alpha.atanh();
    let root = c(-at * at * beta, 0.0).sqrt() / SQRT_2;
    let sign = ((1.0 - 2.0 * p) * theta).signum();
    let tail = c(-(2.0 * theta * t).sin(), -2.0 * (p * (1.0 - p)).sqrt() * (2.0 * theta * t).cos());
    (root + tail * (at * sign)).norm_sqr() / (at * at * beta).abs()
}

fn r_battery_piecewise(freq: f64, amp: f64, offset: f64, t: f64) -> f64 {
    let q = amp * (freq * t).cos() / (offset + (2.0 * freq * t).cos()).sqrt();
    if (freq * t).sin() < 0.0 {
        0.5 * (2.0 - q)
    } else {
        0.5 * (2.0 + q)
    }
}

fn r_coupled(t: f64) -> f64 {
    r_battery_piecewise(5f64.sqrt(), 2.0 * 10f64.sqrt(), 9.0, t)
}

fn r_decoupled(t: f64) -> f64 {
    r_battery_piecewise(2.0 * SQRT_2, 4.0, 3.0, t)
}

fn r_parallel(t: f64) -> f64 {
    let x = 5f64.sqrt() * t;
    0.5 * (2.0 + 2.0 * 10f64.sqrt() * x.sin().abs() / x.tan() / (9.0 + (2.0 * x).cos()).sqrt())
}

fn perp_modular(p: f64, theta: f64, t: f64) -> [C64; 4] {
    let l = (1.0 / p - 1.0).ln();
    let (s, cs) = (2.0 * theta * t).sin_cos();
    let q = l * l * (4.0 * (1.0 - p) * p * cs * cs + s * s);
    let a = c(2.0 * (1.0 - p) * p.sqrt() * cs, -(1.0 - p).sqrt() * s) * l / q.sqrt();
    let d = c(-2.0 * ((1.0 - p) * p).sqrt() * cs, s) * l / (q / p).sqrt();
    let z = c(0.0, 0.0);
    [a, z, z, d]
}

/// `first` is the function printed in the leading component.
fn perp_entanglement(p: f64, theta: f64, mu3: f64, t: f64, first: fn(f64) -> f64) -> [C64; 4] {
    let arg = (2.0 * p - 1.0) * (2.0 * theta * t).cos();
    let den = (-arg.atanh().powi(2)
        * (-1.0 + 4.0 * (p - 1.0) * p + (1.0 - 2.0 * p).powi(2) * (4.0 * theta * t).cos()))
    .sqrt();
    let phase = C64::from_polar(SQRT_2, -mu3 * t);
    let (s, cs) = (theta * t).sin_cos();
    let a = phase * first(arg) * (-1.0 + arg) * c(p.sqrt() * cs, -(1.0 - p).sqrt() * s) / den;
    let d = phase * arg.atanh() * (1.0 + arg) * c((1.0 - p).sqrt() * cs, -p.sqrt() * s) / den;
    let z = c(0.0, 0.0);
    [a, z, z, d]
}

fn symmetric(v: C64) -> [C64; 4] {
    let z = c(0.0, 0.0);
    [z, v, v, z]
}

fn perp_coupled(t: f64) -> [C64; 4] {
    let r5 = 5f64.sqrt();
    let x = 2.0 * r5 * t;
    symmetric(
        c(2.0 - 2.0 * x.cos(), -r5 * x.sin())
            / (2.0 * (r5 * t).sin().abs() * (9.0 + x.cos()).sqrt()),
    )
}

/// `i_factor` multiplies `√5 sin(4√5t)`; the print shows `t` there.
fn perp_decoupled(t: f64, literal: bool) -> [C64; 4] {
    let r5 = 5f64.sqrt();
    let x = 4.0 * r5 * t;
    let num = if literal {
        c(1.0 - x.cos() - t * r5 * x.sin(), 0.0)
    } else {
        c(1.0 - x.cos(), -r5 * x.sin())
    };
    symmetric(num / (2.0 * (2.0 * r5 * t).sin().abs() * (6.0 + 4.0 * x.cos()).sqrt()))
}

/// Exponents read as `e^{−2i√5t}`, `e^{2i√5t}`, `e^{4i√5t}`.
fn perp_parallel(t: f64) -> [C64; 4] {
    let r5 = 5f64.sqrt();
    let e = |k: f64| C64::from_polar(1.0, k * r5 * t);
    let num = e(-2.0) * (c(-2.0 + r5, 0.0) + e(2.0) * 4.0 - e(4.0) * (2.0 + r5));
    symmetric(num / (4.0 * (r5 * t).sin().abs() * (9.0 + (2.0 * r5 * t).cos()).sqrt()))
}

/// Evaluates every printed fixture against the pipeline.
pub fn evaluate_fixtures() -> Result<Vec<FixtureResult>> {
    use FixtureStatus::*;

    let mod_01_1 = points(|t| modular_point(0.1, 1.0, t))?;
    let mod_01_05 = points(|t| modular_point(0.1, 0.5, t))?;
    let mod_04_1 = points(|t| modular_point(0.4, 1.0, t))?;
    let mod_04_05 = points(|t| modular_point(0.4, 0.5, t))?;
    let ent = points(|t| entanglement_point(0.1, 1.0, 0.3, t))?;
    let coupled = points(|t| battery_point(2.0, 1.0, 1.0, t))?;
    let decoupled = points(|t| battery_point(2.0, 4.0, 1.0, t))?;
    let parallel = points(|t| battery_point(2.0, 1.0, 0.0, t))?;

    let mut out = Vec::new();
    let mut push = |name, (status, max_deviation): (FixtureStatus, f64), expected, tolerance, note| {
        out.push(FixtureResult {
            name,
            status,
            expected,
            max_deviation,
            tolerance,
            note,
        })
    };

    let other = "printed form is the rejected sign branch";
    push("modular-r-p0.1-theta1", classify_r(&mod_01_1, r_modular_01_1, ROUNDED_TOL), MatchOtherBranch, ROUNDED_TOL, other);
    push("modular-r-p0.1-theta0.5", classify_r(&mod_01_05, r_modular_01_05, ROUNDED_TOL), MatchOtherBranch, ROUNDED_TOL, other);
    push("modular-r-p0.4-theta1", classify_r(&mod_04_1, r_modular_04_1, ROUNDED_TOL), MatchOtherBranch, ROUNDED_TOL, other);
    push("modular-r-p0.4-theta0.5", classify_r(&mod_04_05, r_modular_04_05, ROUNDED_TOL), MatchOtherBranch, ROUNDED_TOL, other);
    push(
        "modular-psi-perp",
        classify_perp(&mod_01_1, |t| perp_modular(0.1, 1.0, t), EXACT_TOL),
        Match,
        EXACT_TOL,
        "",
    );
    push(
        "entanglement-r",
        classify_r(&ent, |t| r_entanglement(0.1, 1.0, t), EXACT_TOL),
        MatchOtherBranch,
        EXACT_TOL,
        other,
    );
    push(
        "entanglement-psi-perp",
        classify_perp(&ent, |t| perp_entanglement(0.1, 1.0, 0.3, t, f64::atanh), EXACT_TOL),
        Match,
        EXACT_TOL,
        "leading component read with arctanh",
    );
    push(
        "entanglement-psi-perp-literal",
        classify_perp(&ent, |t| perp_entanglement(0.1, 1.0, 0.3, t, f64::atan), EXACT_TOL),
        KnownDiscrepancy,
        EXACT_TOL,
        "leading component printed with arctan",
    );
    push("battery-coupled-r", classify_r(&coupled, r_coupled, EXACT_TOL), MatchOtherBranch, EXACT_TOL, other);
    push(
        "battery-decoupled-r",
        classify_r(&decoupled, r_decoupled, EXACT_TOL),
        KnownDiscrepancy,
        EXACT_TOL,
        "printed frequencies 2√2 do not match √(ω² + Ω²) = 2√5",
    );
    push("battery-parallel-r", classify_r(&parallel, r_parallel, EXACT_TOL), MatchOtherBranch, EXACT_TOL, other);
    push("battery-coupled-psi-perp", classify_perp(&coupled, perp_coupled, EXACT_TOL), Match, EXACT_TOL, "");
    push(
        "battery-decoupled-psi-perp",
        classify_perp(&decoupled, |t| perp_decoupled(t, false), EXACT_TOL),
        Match,
        EXACT_TOL,
        "factor t before √5 read as i",
    );
    push(
        "battery-decoupled-psi-perp-literal",
        classify_perp(&decoupled, |t| perp_decoupled(t, true), EXACT_TOL),
        KnownDiscrepancy,
        EXACT_TOL,
        "factor t before √5 taken literally",
    );
    push(
        "battery-parallel-psi-perp",
        classify_perp(&parallel, perp_parallel, EXACT_TOL),
        Match,
        EXACT_TOL,
        "exponents read as multiples of i√5t",
    );
    Ok(out)
}
