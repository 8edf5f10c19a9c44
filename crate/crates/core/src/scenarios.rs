//! Worked scenarios: the closed-form optimal precisions under the two
//! saturability conditions, checked against the generic pipeline.
//!
//! Every result carries three sets of bounds:
//! * `closed_form` — the scenario's analytic formula;
//! * `pipeline` — exact `assemble_qfim -> crb_bounds` at the requested `N`;
//! * `leading_order` — the large-`N` limit of the pipeline built from the prefactors.
//!
//! Under condition I with `B = 0` the closed forms are exact at every `N`.
//! Under condition II they are large-`N` statements and match `leading_order`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::generators::{Condition, ConditionPreset, GeneratorCoeffs};
use crate::qfim::{analyze, leading_order_bounds, Analysis, PrecisionBounds, Prefactors, Scaling};
use crate::states::{InputEnsemble, MotionalState};

/// Relative tolerance for a scenario's own constraint equations.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    CondIFock,
    CondICoherent,
    CondIIBzero,
    CondIIDzero,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::CondIFock, Family::CondICoherent, Family::CondIIBzero, Family::CondIIDzero];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::CondIFock => "cond1-fock",
            Family::CondICoherent => "cond1-coherent",
            Family::CondIIBzero => "cond2-bzero",
            Family::CondIIDzero => "cond2-dzero",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Family::ALL.into_iter().find(|f| f.as_str() == s)
    }

    pub fn condition(&self) -> Condition {
        match self {
            Family::CondIFock | Family::CondICoherent => Condition::I,
            Family::CondIIBzero | Family::CondIIDzero => Condition::II,
        }
    }
}

/// Outcome of one scenario evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub family: Family,
    pub preset: ConditionPreset,
    pub coeffs: GeneratorCoeffs,
    pub ensemble: InputEnsemble,
    pub closed_form: PrecisionBounds,
    pub pipeline: PrecisionBounds,
    pub leading_order: PrecisionBounds,
    pub prefactors: Prefactors,
    pub b_residual: f64,
    pub d_residual: f64,
    pub commutator: f64,
    /// Which case of a branched formula applied, if any.
    pub branch: Option<String>,
    /// Named intermediate quantities, in a fixed order.
    pub details: Vec<(String, f64)>,
}

fn require_condition(preset: &ConditionPreset, which: Condition) -> Result<()> {
    if preset.which == which {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("scenario requires condition {which:?}, got {:?}", preset.which)))
    }
}

fn closed(var_omega_rel: f64, var_rotation_rel: f64, saturable: bool, scaling: (Scaling, Scaling)) -> PrecisionBounds {
    PrecisionBounds { var_omega_rel, var_rotation_rel, saturable, scaling_omega: None, scaling_rotation: None }
        .with_scaling(scaling)
}

/// Runs the generic pipeline and packages a result.
fn finish(
    family: Family,
    preset: &ConditionPreset,
    ensemble: InputEnsemble,
    closed_form: (f64, f64),
    scaling: (Scaling, Scaling),
    branch: Option<String>,
    details: Vec<(String, f64)>,
) -> Result<ScenarioResult> {
    let coeffs = preset.coeffs();
    let Analysis { prefactors, bounds, commutator, b_residual, d_residual, .. } =
        analyze(&ensemble, &coeffs, preset.omega0, preset.rotation0)?;
    let leading_order = leading_order_bounds(&prefactors, ensemble.particles(), preset.omega0, preset.rotation0)?;
    Ok(ScenarioResult {
        family,
        preset: *preset,
        coeffs,
        closed_form: closed(closed_form.0, closed_form.1, bounds.saturable, scaling),
        pipeline: bounds,
        leading_order,
        prefactors,
        b_residual,
        d_residual,
        commutator,
        branch,
        details,
        ensemble,
    })
}

/// Scale against which a `B = 0` residual is judged.
fn b_scale(ens: &InputEnsemble, c: &GeneratorCoeffs) -> f64 {
    2.0 * (c.k1.norm() * ens.mean_a_sz().norm() + c.k2.norm() * ens.mean_a().norm())
        + c.lambda.abs()
        + c.tau_n * ens.mean_n_sz().abs()
}

fn require_b_zero(ens: &InputEnsemble, c: &GeneratorCoeffs) -> Result<()> {
    let residual = crate::qfim::check_b_zero(ens, c);
    if residual.abs() <= CONSTRAINT_TOL * b_scale(ens, c).max(1e-300) {
        Ok(())
    } else {
        Err(Error::InvalidState(format!("constructed state violates B = 0 (residual {residual:e})")))
    }
}

/// `delta²W_r = 1 / (16 pi² mu⁴ W0² N²)`, common to every condition I state with `B = 0`.
pub fn cond1_rotation_bound(mu: f64, rotation0: f64, particles: u32) -> f64 {
    let n = particles as f64;
    1.0 / (16.0 * PI * PI * mu.powi(4) * rotation0 * rotation0 * n * n)
}

// ---------------------------------------------------------------------------
// Condition I, Fock states

/// How strictly the Fock gap `n2 - n1 = 2 W0 mu² / kappa` is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapMode {
    /// The gap must be a non-negative integer and match `n2 - n1` exactly.
    Strict,
    /// Any `(n1, n2)` is accepted; the nonzero `B` residual is reported.
    NearestInteger,
}

/// The required Fock gap as a real number.
pub fn fock_gap(preset: &ConditionPreset) -> f64 {
    2.0 * preset.rotation0 * preset.mu() * preset.mu() / preset.kappa as f64
}

/// The gap rounded to an integer, if it is one.
pub fn integer_gap(preset: &ConditionPreset) -> Result<u64> {
    let gap = fock_gap(preset);
    let rounded = gap.round();
    if gap.is_finite() && rounded >= 0.0 && (gap - rounded).abs() <= CONSTRAINT_TOL * gap.abs().max(1.0) {
        Ok(rounded as u64)
    } else {
        Err(Error::NonIntegerGap { gap })
    }
}

/// `(n1, n2)` with `n1 + n2 = budget` and the exact gap.
pub fn fock_pair_for_budget(preset: &ConditionPreset, budget: u64) -> Result<(u64, u64)> {
    let gap = integer_gap(preset)?;
    if budget < gap {
        return Err(Error::InsufficientEnergy { budget: budget as f64, floor: gap as f64 });
    }
    if !(budget - gap).is_multiple_of(2) {
        let n1 = (budget - gap) / 2;
        return Err(Error::GapMismatch { n_up: n1, n_down: budget - n1, gap: gap as f64 });
    }
    let n1 = (budget - gap) / 2;
    Ok((n1, n1 + gap))
}

/// Closed-form optimal `delta²w_r` for Fock inputs with total level `n = n1 + n2`.
pub fn cond1_fock_omega_bound(preset: &ConditionPreset, n: f64, particles: u32) -> f64 {
    let (mu, w0, big) = (preset.mu(), preset.omega0, preset.rotation0);
    let kappa = preset.kappa as f64;
    let bracket = (n + 1.0) * (w0 + 4.0 * kappa * kappa * big * big / w0) - 8.0 * mu * mu * big * big;
    1.0 / (particles as f64 * 4.0 * mu * mu * PI * PI * bracket)
}

/// Condition I with `|psi_up> = |n1>`, `|psi_down> = |n2>`.
pub fn cond1_fock(preset: &ConditionPreset, n1: u64, n2: u64, particles: u32, mode: GapMode) -> Result<ScenarioResult> {
    require_condition(preset, Condition::I)?;
    require_positive("Omega0", preset.rotation0)?;
    if mode == GapMode::Strict {
        let gap = integer_gap(preset)?;
        if n2 < n1 || n2 - n1 != gap {
            return Err(Error::GapMismatch { n_up: n1, n_down: n2, gap: gap as f64 });
        }
    }
    let ensemble = InputEnsemble::new(MotionalState::Fock(n1), MotionalState::Fock(n2), particles)?;
    let n = (n1 + n2) as f64;
    let omega = cond1_fock_omega_bound(preset, n, particles);
    let rotation = cond1_rotation_bound(preset.mu(), preset.rotation0, particles);
    let details = vec![("gap".to_string(), fock_gap(preset)), ("n".to_string(), n)];
    let result = finish(Family::CondIFock, preset, ensemble, (omega, rotation), (Scaling::SQL, Scaling::HL), None, details)?;
    if mode == GapMode::Strict {
        require_b_zero(&result.ensemble, &result.coeffs)?;
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Condition I, coherent states

/// Which case of the optimal coherent-state choice applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoherentBranch {
    /// `w0 > 2 kappa W0`: `theta2 = pi/2`, `r2 = r1 + 2 mu W0 / sqrt(w0)`.
    Above,
    /// `w0 < 2 kappa W0`: `theta2 = -pi/2`, `r2 = r1 + mu sqrt(w0) / kappa`.
    Below,
}

impl CoherentBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoherentBranch::Above => "omega0>2kappa*Omega0",
            CoherentBranch::Below => "omega0<2kappa*Omega0",
        }
    }

    pub fn select(preset: &ConditionPreset) -> Result<Self> {
        let edge = 2.0 * preset.kappa as f64 * preset.rotation0;
        let diff = preset.omega0 - edge;
        if diff.abs() <= 1e-12 * preset.omega0.abs().max(edge.abs()) {
            Err(Error::BranchBoundary)
        } else if diff > 0.0 {
            Ok(CoherentBranch::Above)
        } else {
            Ok(CoherentBranch::Below)
        }
    }

    /// Amplitude offset `r2 - r1`.
    pub fn offset(&self, preset: &ConditionPreset) -> f64 {
        let (mu, w0) = (preset.mu(), preset.omega0);
        match self {
            CoherentBranch::Above => 2.0 * mu * preset.rotation0 / w0.sqrt(),
            CoherentBranch::Below => mu * w0.sqrt() / preset.kappa as f64,
        }
    }

    /// Smallest budget `r1² + r2²` the branch can realise: `offset² / 2`.
    pub fn budget_floor(&self, preset: &ConditionPreset) -> f64 {
        0.5 * self.offset(preset).powi(2)
    }
}

/// How the coherent amplitude is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoherentInput {
    /// Signed `r1`; `alpha1 = -i r1`.
    Amplitude(f64),
    /// Total budget `n = r1² + r2²`.
    Budget(f64),
}

/// Closed-form optimal `delta²w_r` for coherent inputs at amplitude `r1`.
pub fn cond1_coherent_omega_bound(preset: &ConditionPreset, r1: f64, particles: u32) -> f64 {
    let (mu, w0, big) = (preset.mu(), preset.omega0, preset.rotation0);
    let kappa = preset.kappa as f64;
    let bracket = 2.0 * kappa * r1 + mu * (w0.sqrt() + 2.0 * kappa * big / w0.sqrt());
    1.0 / (particles as f64 * 4.0 * PI * PI * bracket * bracket)
}

/// The same bound written in terms of the budget `n = r1² + r2²`.
pub fn cond1_coherent_budget_bound(preset: &ConditionPreset, branch: CoherentBranch, n: f64, particles: u32) -> f64 {
    let (mu, w0, big) = (preset.mu(), preset.omega0, preset.rotation0);
    let kappa = preset.kappa as f64;
    let root = ((n - branch.budget_floor(preset)) / 2.0).sqrt();
    let shift = match branch {
        CoherentBranch::Above => mu * w0.sqrt() / (2.0 * kappa),
        CoherentBranch::Below => mu * big / w0.sqrt(),
    };
    1.0 / (particles as f64 * 16.0 * PI * PI * kappa * kappa * (root + shift).powi(2))
}

/// Condition I with the optimal coherent pair `alpha1 = -i r1`, `alpha2 = ±i r2`.
pub fn cond1_coherent(preset: &ConditionPreset, input: CoherentInput, particles: u32) -> Result<ScenarioResult> {
    require_condition(preset, Condition::I)?;
    require_positive("Omega0", preset.rotation0)?;
    let branch = CoherentBranch::select(preset)?;
    let g = branch.offset(preset);
    let r1 = match input {
        CoherentInput::Amplitude(r1) if r1.is_finite() => r1,
        CoherentInput::Amplitude(r1) => return Err(Error::InvalidParameter(format!("r1 must be finite, got {r1}"))),
        CoherentInput::Budget(n) => {
            let floor = branch.budget_floor(preset);
            if !(n >= floor) {
                return Err(Error::InsufficientEnergy { budget: n, floor });
            }
            -0.5 * g + ((n - floor) / 2.0).sqrt()
        }
    };
    let r2 = r1 + g;
    let alpha1 = C64::new(0.0, -r1);
    let alpha2 = match branch {
        CoherentBranch::Above => C64::new(0.0, r2),
        CoherentBranch::Below => C64::new(0.0, -r2),
    };
    let budget = r1 * r1 + r2 * r2;
    let ensemble = InputEnsemble::new(MotionalState::Coherent(alpha1), MotionalState::Coherent(alpha2), particles)?;
    let omega = cond1_coherent_omega_bound(preset, r1, particles);
    let rotation = cond1_rotation_bound(preset.mu(), preset.rotation0, particles);
    let details = vec![
        ("r1".to_string(), r1),
        ("r2".to_string(), r2),
        ("budget".to_string(), budget),
        ("budget_floor".to_string(), branch.budget_floor(preset)),
        ("budget_form".to_string(), cond1_coherent_budget_bound(preset, branch, budget, particles)),
    ];
    let result = finish(
        Family::CondICoherent,
        preset,
        ensemble,
        (omega, rotation),
        (Scaling::SQL, Scaling::HL),
        Some(branch.as_str().to_string()),
        details,
    )?;
    require_b_zero(&result.ensemble, &result.coeffs)?;
    Ok(result)
}

// ---------------------------------------------------------------------------
// Fock versus coherent map

/// One cell of the Fock-versus-coherent comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig2Cell {
    pub omega0: f64,
    pub kappa: u32,
    /// `log10(coherent / Fock)`; positive means the Fock input is better. NaN when invalid.
    pub log10_ratio: f64,
    pub valid: bool,
}

/// Evaluates `log10[(delta²w_r)_coherent / (delta²w_r)_Fock]` at equal budget
/// on the grid `omegas × kappas` (row-major in `kappa`, then `omega0`).
/// A cell is valid when an integer Fock pair realises the gap within the
/// budget and the coherent branch is defined and affordable.
pub fn fig2_grid(mu: f64, rotation0: f64, budget: u64, omegas: &[f64], kappas: &[u32]) -> Result<Vec<Fig2Cell>> {
    require_positive("mu", mu)?;
    require_positive("Omega0", rotation0)?;
    let cells: Vec<(u32, f64)> = kappas.iter().flat_map(|&k| omegas.iter().map(move |&w| (k, w))).collect();
    Ok(cells
        .par_iter()
        .map(|&(kappa, omega0)| {
            let ratio = fig2_cell(mu, rotation0, budget, omega0, kappa).ok();
            Fig2Cell { omega0, kappa, log10_ratio: ratio.unwrap_or(f64::NAN), valid: ratio.is_some() }
        })
        .collect())
}

fn fig2_cell(mu: f64, rotation0: f64, budget: u64, omega0: f64, kappa: u32) -> Result<f64> {
    let preset = ConditionPreset::new(Condition::I, kappa, omega0, rotation0, mu)?;
    let (n1, n2) = fock_pair_for_budget(&preset, budget)?;
    let fock = cond1_fock_omega_bound(&preset, (n1 + n2) as f64, 1);
    let branch = CoherentBranch::select(&preset)?;
    let n = budget as f64;
    let floor = branch.budget_floor(&preset);
    if n < floor {
        return Err(Error::InsufficientEnergy { budget: n, floor });
    }
    let coherent = cond1_coherent_budget_bound(&preset, branch, n, 1);
    Ok((coherent / fock).log10())
}

// ---------------------------------------------------------------------------
// Condition II, B = 0

/// The `x2` that makes `B = 0` given `x1`, with `y1 + y2 = 2 mu W0 / sqrt(w0)`.
pub fn cond2_bzero_x2(preset: &ConditionPreset, x1: f64) -> Result<f64> {
    let (mu, w0, big) = (preset.mu(), preset.omega0, preset.rotation0);
    let k0 = 2.0 * preset.kappa as f64 + 1.0;
    let root_w = w0.sqrt();
    let lin = mu * (-w0 + k0 * big);
    let discriminant = PI * PI * x1 * x1 * k0.powi(4) * w0 + lin * lin
        - 2.0 * PI * x1 * k0 * k0 * mu * root_w * (w0 + k0 * big);
    if discriminant < 0.0 {
        return Err(Error::NegativeDiscriminant { discriminant });
    }
    Ok((lin + discriminant.sqrt()) / (PI * k0 * k0 * root_w))
}

/// `A` and `D` for a coherent pair, written directly in the generator coefficients.
pub fn coherent_prefactors_ad(c: &GeneratorCoeffs, alpha1: C64, alpha2: C64) -> (f64, f64) {
    let a = 0.5
        * ((alpha1 * c.tau_n + c.k2.conj() - c.k1.conj()).norm_sqr()
            + (alpha2 * c.tau_n - c.k1.conj() - c.k2.conj()).norm_sqr());
    let d = (c.delta2 + (c.delta1 * (alpha1 - alpha2)).re).powi(2);
    (a, d)
}

/// Condition II coherent pair with `B = 0`: `alpha1 = x1 + i y1`, `x2` from the closed form.
pub fn cond2_bzero(preset: &ConditionPreset, x1: f64, y1: f64, particles: u32) -> Result<ScenarioResult> {
    require_condition(preset, Condition::II)?;
    if !(x1.is_finite() && y1.is_finite()) || preset.rotation0 == 0.0 {
        return Err(Error::InvalidParameter("x1, y1 must be finite and Omega0 nonzero".into()));
    }
    let (mu, w0, big) = (preset.mu(), preset.omega0, preset.rotation0);
    let y2 = 2.0 * mu * big / w0.sqrt() - y1;
    let x2 = cond2_bzero_x2(preset, x1)?;
    let (alpha1, alpha2) = (C64::new(x1, y1), C64::new(x2, y2));
    let ensemble = InputEnsemble::new(MotionalState::Coherent(alpha1), MotionalState::Coherent(alpha2), particles)?;
    let coeffs = preset.coeffs();
    let (a, d) = coherent_prefactors_ad(&coeffs, alpha1, alpha2);
    let n = particles as f64;
    let omega = 1.0 / (n * 4.0 * w0 * w0 * a);
    let rotation = 1.0 / (n * n * 4.0 * big * big * d);
    let details = vec![
        ("x2".to_string(), x2),
        ("y2".to_string(), y2),
        ("A".to_string(), a),
        ("D".to_string(), d),
        ("energy".to_string(), alpha1.norm_sqr() + alpha2.norm_sqr()),
    ];
    let result = finish(Family::CondIIBzero, preset, ensemble, (omega, rotation), (Scaling::SQL, Scaling::HL), None, details)?;
    require_b_zero(&result.ensemble, &result.coeffs)?;
    Ok(result)
}

// ---------------------------------------------------------------------------
// Condition II, D = 0

/// Smallest trapping energy `r²` for the `D = 0` construction.
pub fn cond2_dzero_floor(mu: f64, omega0: f64, rotation0: f64) -> f64 {
    mu * mu * PI * PI * omega0 / 2.0 + 2.0 * mu * mu * rotation0 * rotation0 / omega0
}

/// `r0 = sqrt((r² - floor)/2)`, the largest `|x0|` the energy allows.
pub fn cond2_dzero_r0(mu: f64, omega0: f64, rotation0: f64, r2: f64) -> Result<f64> {
    let floor = cond2_dzero_floor(mu, omega0, rotation0);
    if !(r2 >= floor) {
        return Err(Error::InsufficientEnergy { budget: r2, floor });
    }
    Ok(((r2 - floor) / 2.0).sqrt())
}

/// Large-`N` optimal `delta²w_r` on the `D = 0` branch, `kappa0 = 2 kappa + 1`.
pub fn cond2_dzero_omega_bound(mu: f64, omega0: f64, rotation0: f64, r0: f64, kappa0: f64, particles: u32) -> f64 {
    let n = particles as f64;
    let bracket = (-2.0 / kappa0 + PI * PI * kappa0) * omega0.sqrt() * r0 + mu * PI * rotation0;
    1.0 / (n * n * 4.0 * mu * mu * bracket * bracket)
}

/// Condition II coherent pair with `D = 0` at trapping energy `r² = |alpha1|² + |alpha2|²`.
pub fn cond2_dzero(preset: &ConditionPreset, r2: f64, particles: u32) -> Result<ScenarioResult> {
    require_condition(preset, Condition::II)?;
    if preset.rotation0 == 0.0 {
        return Err(Error::InvalidParameter("Omega0 must be nonzero".into()));
    }
    let (mu, w0, big) = (preset.mu(), preset.omega0, preset.rotation0);
    let r0 = cond2_dzero_r0(mu, w0, big, r2)?;
    let half_shift = 0.5 * mu * PI * w0.sqrt();
    let x1 = -r0 + half_shift;
    let x2 = x1 - 2.0 * half_shift;
    let y = mu * big / w0.sqrt();
    let ensemble = InputEnsemble::new(MotionalState::Coherent(C64::new(x1, y)), MotionalState::Coherent(C64::new(x2, y)), particles)?;
    let kappa0 = 2.0 * preset.kappa as f64 + 1.0;
    let n = particles as f64;
    let omega = cond2_dzero_omega_bound(mu, w0, big, r0, kappa0, particles);
    let rotation = w0 / (16.0 * mu * mu * big * big * n);
    let b = mu * mu / (4.0 * w0 * w0)
        * (2.0 * PI * mu * big + 2.0 * w0.sqrt() * r0 * (-2.0 / kappa0 + PI * PI * kappa0)).powi(2);
    let details = vec![
        ("r0".to_string(), r0),
        ("x1".to_string(), x1),
        ("x2".to_string(), x2),
        ("y".to_string(), y),
        ("B".to_string(), b),
        ("C".to_string(), 4.0 * mu * mu / w0),
    ];
    finish(Family::CondIIDzero, preset, ensemble, (omega, rotation), (Scaling::HL, Scaling::SQL), None, details)
}

/// Closed-form and numeric optimum of the `D = 0` bound over `(w0, W0)` at fixed energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DzeroOptimum {
    pub omega0_closed: f64,
    pub rotation0_closed: f64,
    pub bound_closed: f64,
    pub omega0_numeric: f64,
    pub rotation0_numeric: f64,
    pub bound_numeric: f64,
}

/// Optimal true values for the `D = 0` branch given `mu`, `r²`, odd `kappa0`.
pub fn cond2_dzero_optimum(mu: f64, r2: f64, kappa0: u32, particles: u32) -> Result<DzeroOptimum> {
    require_positive("mu", mu)?;
    require_positive("r^2", r2)?;
    if kappa0.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("kappa0 must be a positive odd integer, got {kappa0}")));
    }
    if particles == 0 {
        return Err(Error::InvalidParameter("particle number N must be >= 1".into()));
    }
    let k0 = kappa0 as f64;
    let poly = PI.powi(4) * k0.powi(4) - 3.0 * PI * PI * k0 * k0 + 4.0;
    let omega0_closed = r2 / (PI * PI * mu * mu);
    let rotation0_closed = k0 * r2 / (2.0 * mu * mu * poly.sqrt());
    let n = particles as f64;
    let bound_closed = PI * PI * k0 * k0 / (n * n * r2 * r2 * poly);

    // Maximise the bracket g(w0, W0) = c sqrt(w0) r0 + mu pi W0 (concave in W0 for fixed w0).
    let c = PI * PI * k0 - 2.0 / k0;
    let bracket = |w0: f64, big: f64| {
        let slack = r2 - cond2_dzero_floor(mu, w0, big);
        if slack < 0.0 {
            f64::NEG_INFINITY
        } else {
            c * w0.sqrt() * (slack / 2.0).sqrt() + mu * PI * big
        }
    };
    let best_rotation = |w0: f64| {
        let top = ((r2 - mu * mu * PI * PI * w0 / 2.0) * w0 / (2.0 * mu * mu)).max(0.0).sqrt();
        golden_max(|big| bracket(w0, big), 0.0, top, 1e-12)
    };
    let w_max = 2.0 * r2 / (mu * mu * PI * PI);
    let samples = 400;
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 1..samples {
        let w0 = w_max * i as f64 / samples as f64;
        let (big, value) = best_rotation(w0);
        if value > best.2 {
            best = (w0, big, value);
        }
    }
    let step = w_max / samples as f64;
    let (omega0_numeric, value) =
        golden_max(|w0| best_rotation(w0).1, (best.0 - step).max(0.0), (best.0 + step).min(w_max), 1e-12);
    let (rotation0_numeric, _) = best_rotation(omega0_numeric);
    let bound_numeric = 1.0 / (n * n * 4.0 * mu * mu * value * value);
    Ok(DzeroOptimum { omega0_closed, rotation0_closed, bound_closed, omega0_numeric, rotation0_numeric, bound_numeric })
}

/// Golden-section maximisation of a unimodal function on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (hi - lo).abs() <= rel_tol * (lo.abs() + hi.abs()).max(1e-300) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

// ---------------------------------------------------------------------------
// Condition II versus condition I at equal trapping energy

/// Which true value a condition II/I comparison curve sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fig3Sweep {
    /// Sweep `W0` at fixed `w0`.
    Rotation { omega0: f64, values: Vec<f64> },
    /// Sweep `w0` at fixed `W0`.
    Trap { rotation0: f64, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Config {
    pub mu: f64,
    pub kappa: u32,
    pub y1: f64,
    pub x1s: Vec<f64>,
    pub sweep: Fig3Sweep,
    pub particles: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig3Point {
    pub sweep_value: f64,
    pub x1: f64,
    /// `delta²w` (condition II, `B = 0`) over `delta²w` (condition I coherent, same energy). NaN if undefined.
    pub ratio_omega: f64,
    /// `delta²W` (condition II, `B = 0`) over `delta²W` (condition I). NaN if undefined.
    pub ratio_rotation: f64,
}

/// Ratio curves, ordered by `x1` (outer) then sweep value (inner).
pub fn fig3_curves(cfg: &Fig3Config) -> Result<Vec<Fig3Point>> {
    require_positive("mu", cfg.mu)?;
    if cfg.kappa == 0 {
        return Err(Error::InvalidParameter("kappa must be >= 1 so that both conditions share it".into()));
    }
    let values = match &cfg.sweep {
        Fig3Sweep::Rotation { values, .. } | Fig3Sweep::Trap { values, .. } => values,
    };
    let jobs: Vec<(f64, f64)> = cfg.x1s.iter().flat_map(|&x1| values.iter().map(move |&v| (x1, v))).collect();
    Ok(jobs
        .par_iter()
        .map(|&(x1, v)| {
            let (w0, big) = match cfg.sweep {
                Fig3Sweep::Rotation { omega0, .. } => (omega0, v),
                Fig3Sweep::Trap { rotation0, .. } => (v, rotation0),
            };
            let (ratio_omega, ratio_rotation) = fig3_point(cfg, w0, big, x1);
            Fig3Point { sweep_value: v, x1, ratio_omega, ratio_rotation }
        })
        .collect())
}

fn fig3_point(cfg: &Fig3Config, omega0: f64, rotation0: f64, x1: f64) -> (f64, f64) {
    let two = ConditionPreset::new(Condition::II, cfg.kappa, omega0, rotation0, cfg.mu)
        .and_then(|p| cond2_bzero(&p, x1, cfg.y1, cfg.particles));
    let Ok(two) = two else {
        return (f64::NAN, f64::NAN);
    };
    let ratio_rotation = two.closed_form.var_rotation_rel / cond1_rotation_bound(cfg.mu, rotation0, cfg.particles);
    let energy = two.ensemble.moments(crate::time_integrals::Spin::Up).m_n
        + two.ensemble.moments(crate::time_integrals::Spin::Down).m_n;
    let ratio_omega = ConditionPreset::new(Condition::I, cfg.kappa, omega0, rotation0, cfg.mu)
        .and_then(|p| cond1_coherent(&p, CoherentInput::Budget(energy), cfg.particles))
        .map(|one| two.closed_form.var_omega_rel / one.closed_form.var_omega_rel)
        .unwrap_or(f64::NAN);
    (ratio_omega, ratio_rotation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfim::check_b_zero;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn preset(which: Condition, kappa: u32, w0: f64, big: f64, mu: f64) -> ConditionPreset {
        ConditionPreset::new(which, kappa, w0, big, mu).unwrap()
    }

    #[test]
    fn fock_example() {
        let p = preset(Condition::I, 1, 1.0, 0.5, 1.0);
        let r = cond1_fock(&p, 0, 1, 1, GapMode::Strict).unwrap();
        assert!(rel(r.closed_form.var_omega_rel, 1.0 / (8.0 * PI * PI)) < 1e-12);
        assert!(rel(r.pipeline.var_omega_rel, r.closed_form.var_omega_rel) < 1e-10);
        assert!(rel(r.closed_form.var_rotation_rel, 1.0 / (4.0 * PI * PI)) < 1e-12);
        assert!(rel(r.pipeline.var_rotation_rel, r.closed_form.var_rotation_rel) < 1e-10);
        assert!(r.pipeline.saturable);
    }

    #[test]
    fn fock_gap_errors() {
        let p = preset(Condition::I, 3, 1.0, 0.5, 1.0);
        assert!(matches!(cond1_fock(&p, 0, 1, 1, GapMode::Strict), Err(Error::NonIntegerGap { .. })));
        let r = cond1_fock(&p, 0, 1, 1, GapMode::NearestInteger).unwrap();
        assert!(r.b_residual.abs() > 1e-3);
        let p = preset(Condition::I, 1, 1.0, 1.0, 1.0);
        assert!(matches!(cond1_fock(&p, 0, 1, 1, GapMode::Strict), Err(Error::GapMismatch { .. })));
        assert_eq!(fock_pair_for_budget(&p, 2).unwrap(), (0, 2));
        assert!(fock_pair_for_budget(&p, 3).is_err());
    }

    #[test]
    fn coherent_example() {
        let p = preset(Condition::I, 1, 2.0, 0.5, 1.0);
        let r = cond1_coherent(&p, CoherentInput::Amplitude(0.3), 2).unwrap();
        assert_eq!(r.branch.as_deref(), Some(CoherentBranch::Above.as_str()));
        assert!((r.details[1].1 - (0.3 + 1.0 / 2f64.sqrt())).abs() < 1e-14);
        assert!(rel(r.pipeline.var_omega_rel, r.closed_form.var_omega_rel) < 1e-10);
        let budget_form = r.details[4].1;
        assert!(rel(budget_form, r.closed_form.var_omega_rel) < 1e-12);
    }

    #[test]
    fn coherent_boundary_and_floor() {
        let p = preset(Condition::I, 1, 1.0, 0.5, 1.0);
        assert!(matches!(cond1_coherent(&p, CoherentInput::Amplitude(1.0), 1), Err(Error::BranchBoundary)));
        let p = preset(Condition::I, 2, 1.0, 0.7, 1.0);
        let floor = CoherentBranch::select(&p).unwrap().budget_floor(&p);
        let r = cond1_coherent(&p, CoherentInput::Budget(floor), 1).unwrap();
        assert!(r.closed_form.var_omega_rel.is_finite());
        assert!(matches!(cond1_coherent(&p, CoherentInput::Budget(0.9 * floor), 1), Err(Error::InsufficientEnergy { .. })));
    }

    #[test]
    fn bzero_construction() {
        let p = preset(Condition::II, 2, 1.1, 0.3, 0.9);
        let r = cond2_bzero(&p, -1.5, 2.0, 3).unwrap();
        assert!(check_b_zero(&r.ensemble, &r.coeffs).abs() < 1e-9);
        assert!(rel(r.leading_order.var_omega_rel, r.closed_form.var_omega_rel) < 1e-9);
        assert!(rel(r.leading_order.var_rotation_rel, r.closed_form.var_rotation_rel) < 1e-9);
        assert!(r.pipeline.saturable);
        // x1 < 0 beats condition I for W.
        assert!(r.prefactors.d > r.coeffs.delta2.powi(2));
    }

    #[test]
    fn dzero_construction() {
        let p = preset(Condition::II, 1, 1.3, 0.4, 1.0);
        let r = cond2_dzero(&p, 30.0, 5).unwrap();
        assert!(r.d_residual.abs() < 1e-12);
        assert!(rel(r.prefactors.c, 4.0 / 1.3) < 1e-12);
        assert!(rel(r.prefactors.b, r.details[4].1) < 1e-10);
        assert!(rel(r.leading_order.var_omega_rel, r.closed_form.var_omega_rel) < 1e-9);
        assert!(rel(r.leading_order.var_rotation_rel, r.closed_form.var_rotation_rel) < 1e-9);
        let floor = cond2_dzero_floor(1.0, 1.3, 0.4);
        assert_eq!(cond2_dzero(&p, floor, 1).unwrap().details[0].1, 0.0);
        assert!(matches!(cond2_dzero(&p, 0.5 * floor, 1), Err(Error::InsufficientEnergy { .. })));
    }

    #[test]
    fn optimum_example() {
        let o = cond2_dzero_optimum(1.0, 100.0, 3, 1).unwrap();
        assert!((o.omega0_closed - 100.0 / (PI * PI)).abs() < 1e-12);
        assert!(rel(o.omega0_numeric, o.omega0_closed) < 0.05);
        assert!(rel(o.rotation0_numeric, o.rotation0_closed) < 0.05);
        assert!(cond2_dzero_optimum(1.0, 100.0, 2, 1).is_err());
    }

    #[test]
    fn fig2_orders_cells() {
        let cells = fig2_grid(1.0, 10.0, 100, &[1.0, 5.0], &[1, 2, 3]).unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!((cells[1].kappa, cells[1].omega0), (1, 5.0));
        assert!(!cells[4].valid && cells[4].log10_ratio.is_nan());
        assert!(cells.iter().filter(|c| c.valid).all(|c| c.log10_ratio > 0.0));
    }
}
