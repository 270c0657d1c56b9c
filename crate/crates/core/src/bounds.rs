//! Correction factor of the product-form stronger uncertainty relation and
//! the observable speed-limit integrals built on it.
//!
//! For observables `A`, `B`, a state `ψ` and a unit vector `ψ⊥ ⟂ ψ`,
//!
//! ```text
//! R∓ = ½ |⟨ψ⊥| A/ΔA ∓ i B/ΔB |ψ⟩|²,   ΔA ΔB (1 − R∓) ≥ ±(i/2)⟨[A, B]⟩.
//! ```
//!
//! The bounds integrate `|d⟨O⟩/dt| / (ΔO η)` with `η = 1 − R`, `A = O(t)` and
//! `B = H`; dropping `η` gives the Robertson-based bound.

use nalgebra::DVector;

use crate::dynamics::{
    expectation_derivative_with, heisenberg_evolve, sample_grid, Bracket, ObservableSample,
    OperatorTrajectory, Propagator, TimeGrid,
};
use crate::error::{Error, Result};
use crate::operator::{commutator, spectral_norm, HermitianOperator};
use crate::quadrature::{cumulative_simpson, richardson_error};
use crate::state::{centered_action, moments, PureState, EPS_VAR};
use crate::C64;

/// Samples with `η ≤ EPS_ETA` are treated as singular.
pub const EPS_ETA: f64 = 1e-9;
/// Tolerance on `(1 − R) − rhs/(ΔAΔB)` for the saturation flag.
pub const SATURATION_TOL: f64 = 1e-8;
const RANGE_SLACK: f64 = 1e-9;
const RANGE_FAILURE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `R₋` paired with `+(i/2)⟨[A, B]⟩`.
    Minus,
    /// `R₊` paired with `−(i/2)⟨[A, B]⟩`.
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectionSample {
    pub r: f64,
    pub eta: f64,
    pub sign_branch: Branch,
    pub saturated: bool,
}

/// Centered data shared by the correction and uncertainty routines.
struct Pair {
    delta_a: f64,
    delta_b: f64,
    a_vec: DVector<C64>,
    b_vec: DVector<C64>,
    /// `Im⟨Āψ|B̄ψ⟩ / (ΔAΔB)`; `(i/2)⟨[A, B]⟩ = −y ΔAΔB`.
    y: f64,
}

fn centered_pair(a: &HermitianOperator, b: &HermitianOperator, psi: &PureState) -> Result<Pair> {
    let (_, a_vec) = centered_action(a, psi)?;
    let (_, b_vec) = centered_action(b, psi)?;
    let (var_a, var_b) = (a_vec.norm_squared(), b_vec.norm_squared());
    for variance in [var_a, var_b] {
        if variance <= EPS_VAR {
            return Err(Error::DegenerateVariance { variance });
        }
    }
    let (delta_a, delta_b) = (var_a.sqrt(), var_b.sqrt());
    let y = a_vec.dotc(&b_vec).im / (delta_a * delta_b);
    Ok(Pair {
        delta_a,
        delta_b,
        a_vec,
        b_vec,
        y,
    })
}

fn select_branch(pair: &Pair, perp: &PureState, psi: &PureState) -> Result<CorrectionSample> {
    if perp.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", perp.dim(), psi.dim())));
    }
    let overlap = perp.inner(psi).norm();
    if overlap > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "perpendicular state has overlap {overlap:e} with the state"
        )));
    }
    // ⟨ψ⊥|Aψ⟩ = ⟨ψ⊥|Āψ⟩ because ψ⊥ ⟂ ψ.
    let z = perp.amplitudes().dotc(&pair.a_vec) / pair.delta_a;
    let w = perp.amplitudes().dotc(&pair.b_vec) / pair.delta_b;
    let i = C64::new(0.0, 1.0);
    let options = [
        (Branch::Minus, 0.5 * (z - i * w).norm_sqr(), -pair.y),
        (Branch::Plus, 0.5 * (z + i * w).norm_sqr(), pair.y),
    ];
    let in_range = |r: f64| (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&r);
    let saturates = |r: f64, rhs: f64| ((1.0 - r) - rhs).abs() <= SATURATION_TOL;

    let by_r = |a: &&(Branch, f64, f64), b: &&(Branch, f64, f64)| a.1.total_cmp(&b.1);
    let chosen = options
        .iter()
        .filter(|o| in_range(o.1) && saturates(o.1, o.2))
        .min_by(by_r)
        .or_else(|| {
            options
                .iter()
                .filter(|o| in_range(o.1) && o.2 >= 0.0)
                .min_by(by_r)
        })
        .or_else(|| options.iter().filter(|o| in_range(o.1)).min_by(by_r));

    let (branch, r, rhs) = match chosen {
        Some(&o) => o,
        None => {
            let distance = |r: f64| (r - r.clamp(0.0, 1.0)).abs();
            let nearest = options
                .iter()
                .min_by(|a, b| distance(a.1).total_cmp(&distance(b.1)))
                .copied()
                .expect("two branches");
            if distance(nearest.1) > RANGE_FAILURE {
                return Err(Error::Numeric(format!(
                    "both branches out of range: R- = {}, R+ = {}",
                    options[0].1, options[1].1
                )));
            }
            nearest
        }
    };
    let r = r.clamp(0.0, 1.0 + RANGE_SLACK);
    Ok(CorrectionSample {
        r,
        eta: 1.0 - r,
        sign_branch: branch,
        saturated: saturates(r, rhs),
    })
}

/// `R` with `ψ⊥ = (A − ⟨A⟩)ψ / ΔA`.
pub fn correction_r(
    a: &HermitianOperator,
    b: &HermitianOperator,
    psi: &PureState,
) -> Result<CorrectionSample> {
    let pair = centered_pair(a, b, psi)?;
    let perp = PureState::renormalize(pair.a_vec.clone());
    select_branch(&pair, &perp, psi)
}

/// `(R₋, R₊)` with the prescription `ψ⊥ = (A − ⟨A⟩)ψ / ΔA`, before branch
/// selection.
pub fn correction_branches(
    a: &HermitianOperator,
    b: &HermitianOperator,
    psi: &PureState,
) -> Result<(f64, f64)> {
    let pair = centered_pair(a, b, psi)?;
    let perp = PureState::renormalize(pair.a_vec.clone());
    let z = perp.amplitudes().dotc(&pair.a_vec) / pair.delta_a;
    let w = perp.amplitudes().dotc(&pair.b_vec) / pair.delta_b;
    let i = C64::new(0.0, 1.0);
    Ok((0.5 * (z - i * w).norm_sqr(), 0.5 * (z + i * w).norm_sqr()))
}

/// `R` for a caller-supplied `ψ⊥`.
pub fn correction_r_with_perpendicular(
    a: &HermitianOperator,
    b: &HermitianOperator,
    psi: &PureState,
    perp: &PureState,
) -> Result<CorrectionSample> {
    let pair = centered_pair(a, b, psi)?;
    select_branch(&pair, perp, psi)
}

/// The `ψ⊥` that maximizes the in-range branch, `∝ (Ā/ΔA ± iB̄/ΔB)ψ`.
///
/// With it the relation holds with equality, `1 − R = |⟨[A, B]⟩| / (2ΔAΔB)`.
pub fn maximizing_perpendicular_state(
    a: &HermitianOperator,
    b: &HermitianOperator,
    psi: &PureState,
) -> Result<PureState> {
    let pair = centered_pair(a, b, psi)?;
    let sign = if pair.y >= 0.0 { 1.0 } else { -1.0 };
    let v = &pair.a_vec / C64::new(pair.delta_a, 0.0)
        + &pair.b_vec * C64::new(0.0, sign / pair.delta_b);
    if v.norm_squared() <= 1e-20 {
        // |y| = 1: every ψ⊥ gives R = 0 on this branch.
        return Ok(PureState::renormalize(pair.a_vec));
    }
    Ok(PureState::renormalize(v))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertaintyCheck {
    /// `ΔAΔB(1 − R)`.
    pub lhs: f64,
    /// `|⟨[A, B]⟩| / 2`.
    pub rhs: f64,
    pub holds: bool,
}

fn check_from(pair: &Pair, sample: &CorrectionSample) -> UncertaintyCheck {
    let scale = pair.delta_a * pair.delta_b;
    let lhs = scale * sample.eta;
    let rhs = scale * pair.y.abs();
    UncertaintyCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-9,
    }
}

/// Product-form relation evaluated with the perpendicular-state prescription.
pub fn uncertainty_check(
    a: &HermitianOperator,
    b: &HermitianOperator,
    psi: &PureState,
) -> Result<UncertaintyCheck> {
    let pair = centered_pair(a, b, psi)?;
    let perp = PureState::renormalize(pair.a_vec.clone());
    let sample = select_branch(&pair, &perp, psi)?;
    Ok(check_from(&pair, &sample))
}

pub fn uncertainty_check_with_perpendicular(
    a: &HermitianOperator,
    b: &HermitianOperator,
    psi: &PureState,
    perp: &PureState,
) -> Result<UncertaintyCheck> {
    let pair = centered_pair(a, b, psi)?;
    let sample = select_branch(&pair, perp, psi)?;
    Ok(check_from(&pair, &sample))
}

/// `|⟨[A, B]⟩| / 2` evaluated through the explicit commutator.
pub fn commutator_half(a: &HermitianOperator, b: &HermitianOperator, psi: &PureState) -> Result<f64> {
    let c = commutator(a.matrix(), b.matrix())?;
    Ok(0.5 * psi.expectation(&c)?.norm())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Warning {
    pub t: f64,
    pub reason: String,
}

/// Cumulative bounds on a grid. Entry `k` refers to the window `[0, t_k]`.
#[derive(Clone, Debug)]
pub struct BoundCurve {
    pub grid: TimeGrid,
    pub t_qslo: Vec<f64>,
    pub t_sqslo: Vec<f64>,
    pub mean_values: Vec<f64>,
    /// Running time average of `R` over `[0, t_k]`.
    pub r_bar: Vec<f64>,
    /// Quadrature error estimate of the larger bound at each prefix.
    pub error_estimate: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl BoundCurve {
    pub fn hierarchy_tolerance(&self, k: usize) -> f64 {
        (2.0 * self.error_estimate[k]).max(1e-6)
    }

    /// Indices violating `T ≥ t_sqslo ≥ t_qslo` beyond tolerance.
    pub fn hierarchy_violations(&self) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&k| {
                let t = self.grid.point(k);
                t < self.t_sqslo[k] - self.hierarchy_tolerance(k)
                    || self.t_sqslo[k] < self.t_qslo[k] - 1e-9
            })
            .collect()
    }

    /// Warnings recorded at times `≤ t_k`.
    pub fn warnings_up_to(&self, k: usize) -> usize {
        let t = self.grid.point(k);
        self.warnings.iter().filter(|w| w.t <= t).count()
    }
}

/// Replaces flagged samples by a one-sided linear extrapolation from the two
/// nearest regular samples on the left, else on the right, else by the
/// nearest regular value.
fn fill_singular(grid: &TimeGrid, values: &mut [f64], singular: &[bool]) -> Result<()> {
    let regular: Vec<usize> = (0..values.len()).filter(|&k| !singular[k]).collect();
    if regular.is_empty() {
        return Err(Error::Numeric("every sample is singular".into()));
    }
    for k in (0..values.len()).filter(|&k| singular[k]) {
        let split = regular.partition_point(|&j| j < k);
        let (left, right) = (&regular[..split], &regular[split..]);
        let line = |i: usize, j: usize| {
            let (ti, tj) = (grid.point(i), grid.point(j));
            let slope = (values[j] - values[i]) / (tj - ti);
            values[j] + slope * (grid.point(k) - tj)
        };
        let filled = if left.len() >= 2 {
            line(left[left.len() - 2], left[left.len() - 1])
        } else if right.len() >= 2 {
            line(right[1], right[0])
        } else {
            let nearest = left.last().or(right.first()).copied().expect("non-empty");
            values[nearest]
        };
        values[k] = filled.max(0.0);
    }
    Ok(())
}

fn running_average(grid: &TimeGrid, values: &[f64]) -> Vec<f64> {
    let cum = cumulative_simpson(values, grid.step());
    (0..values.len())
        .map(|k| if k == 0 { values[0] } else { cum[k] / grid.point(k) })
        .collect()
}

fn check_delta_h(delta_h: f64) -> Result<()> {
    if !(delta_h.is_finite() && delta_h > 0.0) {
        return Err(Error::InvalidParameter(format!("ΔH must be positive, got {delta_h}")));
    }
    Ok(())
}

/// `t_qslo(T) = (1/2ΔH) ∫₀ᵀ |d⟨O⟩/dt| / ΔO dt` and `t_sqslo` with the extra
/// `1/η` factor. Without corrections `t_sqslo = t_qslo`.
pub fn qsl_integral(
    traj: &OperatorTrajectory,
    corrections: Option<&[Option<CorrectionSample>]>,
    delta_h: f64,
) -> Result<BoundCurve> {
    check_delta_h(delta_h)?;
    let grid = traj.grid;
    let n = grid.len();
    if let Some(c) = corrections {
        if c.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} corrections for {n} samples",
                c.len()
            )));
        }
    }
    let mut warnings = Vec::new();
    let mut base = vec![0.0; n];
    let mut strong = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut base_singular = vec![false; n];
    let mut strong_singular = vec![false; n];
    let mut r_missing = vec![false; n];

    for (k, s) in traj.samples.iter().enumerate() {
        let t = grid.point(k);
        let regular = s.std_dev * s.std_dev > EPS_VAR;
        if regular {
            base[k] = s.derivative.abs() / s.std_dev;
        } else {
            base_singular[k] = true;
            warnings.push(Warning {
                t,
                reason: format!("degenerate variance {:e}", s.std_dev * s.std_dev),
            });
        }
        let Some(corrections) = corrections else {
            continue;
        };
        match corrections[k] {
            Some(c) => {
                r[k] = c.r;
                if c.eta <= EPS_ETA {
                    strong_singular[k] = true;
                    if regular {
                        warnings.push(Warning {
                            t,
                            reason: format!("eta {:e} below threshold", c.eta),
                        });
                    }
                } else if regular {
                    strong[k] = base[k] / c.eta;
                } else {
                    strong_singular[k] = true;
                }
            }
            None => {
                strong_singular[k] = true;
                r_missing[k] = true;
            }
        }
    }

    if base_singular.iter().all(|&b| b) {
        if traj.samples.iter().any(|s| s.derivative.abs() > 1e-12) {
            return Err(Error::Numeric(
                "all samples have degenerate variance but the mean moves".into(),
            ));
        }
        // Stationary observable in an eigenstate: nothing to bound.
        base_singular.iter_mut().for_each(|b| *b = false);
        strong_singular.iter_mut().for_each(|b| *b = false);
        strong.iter_mut().for_each(|s| *s = 0.0);
    }
    fill_singular(&grid, &mut base, &base_singular)?;
    if corrections.is_some() {
        fill_singular(&grid, &mut strong, &strong_singular)?;
        if r_missing.iter().any(|&m| m) && !r_missing.iter().all(|&m| m) {
            fill_singular(&grid, &mut r, &r_missing)?;
        }
        for (s, b) in strong.iter_mut().zip(&base) {
            *s = s.max(*b);
        }
    } else {
        strong.copy_from_slice(&base);
    }

    let h = grid.step();
    let scale = 0.5 / delta_h;
    let t_qslo: Vec<f64> = cumulative_simpson(&base, h).iter().map(|v| v * scale).collect();
    let t_sqslo: Vec<f64> = cumulative_simpson(&strong, h).iter().map(|v| v * scale).collect();
    let err_q = richardson_error(&base, h);
    let err_s = richardson_error(&strong, h);
    let error_estimate = err_q.iter().zip(&err_s).map(|(a, b)| a.max(*b) * scale).collect();
    Ok(BoundCurve {
        grid,
        t_qslo,
        t_sqslo,
        mean_values: traj.means(),
        r_bar: running_average(&grid, &r),
        error_estimate,
        warnings,
    })
}

/// Ratio form `T |m(T) − m(0)| / (2ΔH ∫₀ᵀ s η dt)`, with `s` the spread of
/// the observable whose mean is `m`. Without `η` it gives `t_qslo`.
pub fn time_average_bound(
    grid: &TimeGrid,
    mean_values: &[f64],
    spreads: &[f64],
    corrections: &[Option<CorrectionSample>],
    delta_h: f64,
) -> Result<BoundCurve> {
    check_delta_h(delta_h)?;
    let n = grid.len();
    if mean_values.len() != n || spreads.len() != n || corrections.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "grid {n}, means {}, spreads {}, corrections {}",
            mean_values.len(),
            spreads.len(),
            corrections.len()
        )));
    }
    let mut warnings = Vec::new();
    let mut weighted = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut r_missing = vec![false; n];
    for k in 0..n {
        match corrections[k] {
            Some(c) => {
                r[k] = c.r;
                weighted[k] = spreads[k] * c.eta.clamp(0.0, 1.0);
            }
            None => {
                r_missing[k] = true;
                weighted[k] = spreads[k];
                warnings.push(Warning {
                    t: grid.point(k),
                    reason: "no correction factor (degenerate variance)".into(),
                });
            }
        }
    }
    if r_missing.iter().all(|&m| m) {
        r_missing.iter_mut().for_each(|m| *m = false);
    }
    fill_singular(grid, &mut r, &r_missing)?;

    let h = grid.step();
    let den_q = cumulative_simpson(spreads, h);
    let den_s = cumulative_simpson(&weighted, h);
    let err_q = richardson_error(spreads, h);
    let err_s = richardson_error(&weighted, h);
    let ratio = |k: usize, den: f64| {
        let num = grid.point(k) * (mean_values[k] - mean_values[0]).abs();
        if den > 0.0 {
            num / (2.0 * delta_h * den)
        } else {
            0.0
        }
    };
    let mut t_qslo = vec![0.0; n];
    let mut t_sqslo = vec![0.0; n];
    let mut error_estimate = vec![0.0; n];
    for k in 1..n {
        t_qslo[k] = ratio(k, den_q[k]);
        t_sqslo[k] = ratio(k, den_s[k]);
        let rel = |den: f64, err: f64| if den > 0.0 { err / den } else { 0.0 };
        error_estimate[k] =
            (t_qslo[k] * rel(den_q[k], err_q[k])).max(t_sqslo[k] * rel(den_s[k], err_s[k]));
    }
    Ok(BoundCurve {
        grid: *grid,
        t_qslo,
        t_sqslo,
        mean_values: mean_values.to_vec(),
        r_bar: running_average(grid, &r),
        error_estimate,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaBound {
    pub value: f64,
    pub r_bar: f64,
    pub lambda: f64,
    pub warning: Option<String>,
}

/// `Λ(T)/(2ΔH) ∫₀ᵀ |d⟨O⟩/dt| / ΔO dt` with `Λ = 1/(1 − R̄)` over the full window.
pub fn lambda_form_bound(
    traj: &OperatorTrajectory,
    corrections: &[Option<CorrectionSample>],
    delta_h: f64,
) -> Result<LambdaBound> {
    if corrections.len() != traj.grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} corrections for {} samples",
            corrections.len(),
            traj.grid.len()
        )));
    }
    let curve = qsl_integral(traj, None, delta_h)?;
    let base = *curve.t_qslo.last().expect("non-empty grid");
    let mut r: Vec<f64> = corrections.iter().map(|c| c.map_or(0.0, |c| c.r)).collect();
    let missing: Vec<bool> = corrections.iter().map(Option::is_none).collect();
    if missing.iter().all(|&m| m) {
        return Err(Error::Numeric("no correction factor available".into()));
    }
    fill_singular(&traj.grid, &mut r, &missing)?;
    let r_bar = *running_average(&traj.grid, &r).last().expect("non-empty grid");
    if r_bar >= 1.0 - 1e-12 {
        return Ok(LambdaBound {
            value: f64::INFINITY,
            r_bar,
            lambda: f64::INFINITY,
            warning: Some(format!("time-averaged R = {r_bar} makes Λ singular")),
        });
    }
    let lambda = 1.0 / (1.0 - r_bar);
    Ok(LambdaBound {
        value: lambda * base,
        r_bar,
        lambda,
        warning: None,
    })
}

/// `(Λ/ΔH) |arcsin √p(T) − arcsin √p(0)|` for a projector observable.
pub fn projector_speed_limit(p0: f64, p_t: f64, delta_h: f64, lambda: f64) -> Result<f64> {
    for (name, p) in [("p(0)", p0), ("p(T)", p_t)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("{name} = {p} outside [0, 1]")));
        }
    }
    check_delta_h(delta_h)?;
    if lambda.is_nan() || lambda < 1.0 {
        return Err(Error::InvalidParameter(format!("Λ must be at least 1, got {lambda}")));
    }
    Ok(lambda / delta_h * (p_t.sqrt().asin() - p0.sqrt().asin()).abs())
}

/// `2 √C_E ΔH (1 − R)`, the ceiling on the entanglement rate.
pub fn entanglement_rate_bound(c_e: f64, delta_h: f64, r: f64) -> Result<f64> {
    if c_e.is_nan() || c_e < -1e-12 {
        return Err(Error::InvalidParameter(format!("capacity must be non-negative, got {c_e}")));
    }
    check_delta_h(delta_h)?;
    if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&r) {
        return Err(Error::InvalidParameter(format!("R = {r} outside [0, 1]")));
    }
    Ok(2.0 * c_e.max(0.0).sqrt() * delta_h * (1.0 - r).max(0.0))
}

/// `‖H‖ ln d`. Entanglement rates are known to stay below `c‖H‖ ln d` for a
/// constant `c ∈ [1, 2]`.
pub fn norm_rate_comparison(h: &HermitianOperator, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("subsystem dimension must be positive".into()));
    }
    Ok(spectral_norm(h)? * (d as f64).ln())
}

/// Trajectory, per-sample corrections and bounds for `O(t) = U†O₀U` in a
/// fixed state.
#[derive(Clone, Debug)]
pub struct ObservableRun {
    pub trajectory: OperatorTrajectory,
    pub corrections: Vec<Option<CorrectionSample>>,
    pub delta_h: f64,
    pub curve: BoundCurve,
}

/// Evaluates both bounds for `O₀` under `H` with `A = O(t)`, `B = H`.
pub fn observable_bound(
    h: &HermitianOperator,
    o0: &HermitianOperator,
    psi: &PureState,
    grid: &TimeGrid,
) -> Result<ObservableRun> {
    observable_bound_with(commutator, h, o0, psi, grid)
}

pub fn observable_bound_with(
    bracket: Bracket,
    h: &HermitianOperator,
    o0: &HermitianOperator,
    psi: &PureState,
    grid: &TimeGrid,
) -> Result<ObservableRun> {
    if h.dim() != o0.dim() || h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "H {}, O {}, psi {}",
            h.dim(),
            o0.dim(),
            psi.dim()
        )));
    }
    let delta_h = moments(h, psi)?.std_dev;
    if delta_h * delta_h <= EPS_VAR {
        return Err(Error::InvalidParameter(
            "state is stationary under H (ΔH = 0)".into(),
        ));
    }
    let prop = Propagator::new(h)?;
    let per_sample = sample_grid(grid, |t| {
        let o_t = heisenberg_evolve(&prop.at(t), o0)?;
        let m = moments(&o_t, psi)?;
        let sample = ObservableSample {
            mean: m.mean,
            std_dev: m.std_dev,
            derivative: expectation_derivative_with(bracket, h, &o_t, psi)?,
        };
        let correction = match correction_r(&o_t, h, psi) {
            Ok(c) => Some(c),
            Err(Error::DegenerateVariance { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok((sample, correction))
    })?;
    let (samples, corrections): (Vec<_>, Vec<_>) = per_sample.into_iter().unzip();
    let trajectory = OperatorTrajectory::new(*grid, samples)?;
    let curve = qsl_integral(&trajectory, Some(&corrections), delta_h)?;
    Ok(ObservableRun {
        trajectory,
        corrections,
        delta_h,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{pauli, tensor_hermitian};
    use crate::state::perpendicular_state;
    use crate::testing::{random_hermitian, random_state};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus() -> PureState {
        PureState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    /// Direct evaluation of both branches from the definition.
    fn branch_oracle(
        a: &HermitianOperator,
        b: &HermitianOperator,
        psi: &PureState,
        perp: &PureState,
    ) -> (f64, f64) {
        let ma = moments(a, psi).unwrap();
        let mb = moments(b, psi).unwrap();
        let av = a.matrix().apply(psi.amplitudes()).unwrap() / c(ma.std_dev, 0.0);
        let bv = b.matrix().apply(psi.amplitudes()).unwrap() * c(0.0, 1.0 / mb.std_dev);
        let minus = perp.amplitudes().dotc(&(&av - &bv)).norm_sqr() / 2.0;
        let plus = perp.amplitudes().dotc(&(&av + &bv)).norm_sqr() / 2.0;
        (minus, plus)
    }

    #[test]
    fn commuting_pair_gives_unit_r() {
        let s = correction_r(&pauli::x(), &pauli::x(), &PureState::basis(2, 0).unwrap()).unwrap();
        assert!((s.r - 1.0).abs() < 1e-12);
        assert!(s.eta.abs() < 1e-12);
        assert!(s.saturated);

        let check = uncertainty_check(&pauli::z(), &pauli::z(), &plus()).unwrap();
        assert!(check.lhs.abs() < 1e-12 && check.rhs.abs() < 1e-12 && check.holds);
    }

    #[test]
    fn degenerate_variance_is_reported() {
        assert!(matches!(
            correction_r(&pauli::z(), &pauli::x(), &PureState::basis(2, 0).unwrap()),
            Err(Error::DegenerateVariance { .. })
        ));
    }

    #[test]
    fn branches_match_definition() {
        for seed in 0..50 {
            let a = random_hermitian(4, seed);
            let b = random_hermitian(4, seed + 1000);
            let psi = random_state(4, seed + 2000);
            let perp = perpendicular_state(&a, &psi).unwrap();
            let (minus, plus) = branch_oracle(&a, &b, &psi, &perp);
            let s = correction_r(&a, &b, &psi).unwrap();
            let expected = match s.sign_branch {
                Branch::Minus => minus,
                Branch::Plus => plus,
            };
            assert!((s.r - expected).abs() < 1e-12);
            assert!(s.r <= minus.min(plus) + 1e-12);
        }
    }

    #[test]
    fn qubit_prescription_saturates() {
        for seed in 0..200 {
            let a = random_hermitian(2, seed);
            let b = random_hermitian(2, seed + 500);
            let psi = random_state(2, seed + 900);
            let s = correction_r(&a, &b, &psi).unwrap();
            assert!(s.saturated, "seed {seed}");
            let check = uncertainty_check(&a, &b, &psi).unwrap();
            assert!((check.lhs - check.rhs).abs() < 1e-8);
            let dual = commutator_half(&a, &b, &psi).unwrap();
            assert!((dual - check.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn maximizing_state_saturates() {
        for seed in 0..200 {
            let d = [4, 8][seed as usize % 2];
            let a = random_hermitian(d, seed);
            let b = random_hermitian(d, seed + 500);
            let psi = random_state(d, seed + 900);
            let perp = maximizing_perpendicular_state(&a, &b, &psi).unwrap();
            assert!(perp.inner(&psi).norm() < 1e-10);
            let check = uncertainty_check_with_perpendicular(&a, &b, &psi, &perp).unwrap();
            assert!(check.holds);
            assert!((check.lhs - check.rhs).abs() < 1e-8);
            let prescribed = uncertainty_check(&a, &b, &psi).unwrap();
            assert!(prescribed.holds);
            assert!(prescribed.lhs >= check.lhs - 1e-12);
        }
    }

    #[test]
    fn rejects_non_perpendicular_state() {
        let psi = plus();
        assert!(correction_r_with_perpendicular(&pauli::z(), &pauli::y(), &psi, &psi).is_err());
    }

    #[test]
    fn single_qubit_qslo_saturates() {
        let grid = TimeGrid::new(FRAC_PI_4, 400).unwrap();
        let run = observable_bound(&pauli::z(), &pauli::x(), &plus(), &grid).unwrap();
        assert!((run.delta_h - 1.0).abs() < 1e-12);
        for k in 0..grid.len() {
            let t = grid.point(k);
            assert!((run.curve.t_qslo[k] - t).abs() < 1e-6, "t = {t}");
            assert!((run.curve.mean_values[k] - (2.0 * t).cos()).abs() < 1e-12);
        }
        for s in run.corrections.iter().flatten() {
            assert!(s.r.abs() < 1e-10);
        }
        assert!(run.curve.hierarchy_violations().is_empty());
    }

    #[test]
    fn identity_observable_has_zero_bound() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let run = observable_bound(&pauli::z(), &HermitianOperator::identity(2), &plus(), &grid)
            .unwrap();
        assert!(run.curve.t_qslo.iter().all(|&v| v == 0.0));
        assert!(run.curve.t_sqslo.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singular_samples_are_extrapolated() {
        let grid = TimeGrid::new(1.0, 6).unwrap();
        let mut v = vec![9.0, 1.0, 2.0, 9.0, 4.0, 5.0, 9.0];
        let singular = [true, false, false, true, false, false, true];
        fill_singular(&grid, &mut v, &singular).unwrap();
        let expected = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(fill_singular(&grid, &mut v, &[true; 7]).is_err());
    }

    #[test]
    fn lambda_form_examples() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let samples: Vec<ObservableSample> = grid
            .points()
            .iter()
            .map(|&t| ObservableSample {
                mean: (2.0 * t).cos(),
                std_dev: (2.0 * t).sin().abs().max(0.1),
                derivative: -2.0 * (2.0 * t).sin(),
            })
            .collect();
        let traj = OperatorTrajectory::new(grid, samples).unwrap();
        let base = qsl_integral(&traj, None, 1.0).unwrap();
        let at = |r: f64| {
            let corr = vec![
                Some(CorrectionSample {
                    r,
                    eta: 1.0 - r,
                    sign_branch: Branch::Plus,
                    saturated: false
                });
                grid.len()
            ];
            lambda_form_bound(&traj, &corr, 1.0).unwrap()
        };
        let last = *base.t_qslo.last().unwrap();
        assert!((at(0.0).value - last).abs() < 1e-12);
        assert!((at(0.5).value - 2.0 * last).abs() < 1e-12);
        let singular = at(1.0);
        assert!(singular.value.is_infinite() && singular.warning.is_some());
    }

    #[test]
    fn projector_examples() {
        assert!((projector_speed_limit(1.0, 0.0, 2.0, 1.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert_eq!(projector_speed_limit(0.3, 0.3, 1.0, 1.5).unwrap(), 0.0);
        assert!((projector_speed_limit(1.0, 0.5, 1.0, 1.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(projector_speed_limit(1.2, 0.5, 1.0, 1.0).is_err());
        assert!(projector_speed_limit(1.0, 0.5, 1.0, 0.5).is_err());
    }

    #[test]
    fn rate_bound_examples() {
        assert_eq!(entanglement_rate_bound(0.0, 0.8, 0.3).unwrap(), 0.0);
        assert_eq!(entanglement_rate_bound(0.4, 0.8, 1.0).unwrap(), 0.0);
        assert!((entanglement_rate_bound(0.25, 1.0, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(entanglement_rate_bound(0.25, 1.0, 1.5).is_err());
    }

    #[test]
    fn norm_comparison_examples() {
        let xx = tensor_hermitian(&pauli::x(), &pauli::x());
        assert!((norm_rate_comparison(&xx, 2).unwrap() - 2f64.ln()).abs() < 1e-14);
        assert_eq!(norm_rate_comparison(&HermitianOperator::zeros(4), 2).unwrap(), 0.0);
    }
}
