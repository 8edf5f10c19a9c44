//! Quantum Fisher information matrix, Cramér-Rao bounds and their N-scaling.
//!
//! For the GHZ ensemble every generator covariance splits exactly into a
//! single-particle part and a pair part:
//!
//! ```text
//! Cov(H_i, H_j)(N) = N Cov1(i, j) + (N^2 - N) Pair(i, j)
//! ```
//!
//! so `Δ²H_w = A N + B N²`, `Δ²H_W = C N + D N²`, `Cov = G N + H N²` with
//! `A = Var1 - Pair`, `B = Pair` and so on. The determinant combination
//! `Δ²H_w Δ²H_W - Cov²` is then `E N² + F N³` with `E = AC - G²` and
//! `F = AD + BC - 2GH`; the `N⁴` coefficient `BD - H²` vanishes identically
//! because every pair term is a product of branch differences.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{commutator_expectation, GeneratorCoeffs, Param, SATURABILITY_TOL};
use crate::states::{ghz_pair_covariance, ghz_single_covariance, InputEnsemble};

/// A QFIM is singular when `det <= SINGULAR_TOL * max|F_ij|²`.
pub const SINGULAR_TOL: f64 = 1e-12;
/// An `N²` prefactor counts as zero when `|B| N_ref <= ZERO_TOL * |A|`.
pub const ZERO_TOL: f64 = 1e-9;

/// Symmetric 2x2 Fisher matrix for `(w, W)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qfim {
    pub f_ww: f64,
    pub f_rr: f64,
    pub f_wr: f64,
    pub particles: u32,
}

impl Qfim {
    pub fn det(&self) -> f64 {
        self.f_ww * self.f_rr - self.f_wr * self.f_wr
    }

    pub fn max_abs(&self) -> f64 {
        self.f_ww.abs().max(self.f_rr.abs()).max(self.f_wr.abs())
    }

    /// Inverse, refusing matrices that are not of full rank.
    pub fn inverse(&self) -> Result<[[f64; 2]; 2]> {
        let det = self.det();
        let scale = self.max_abs().powi(2);
        if !(det > SINGULAR_TOL * scale) {
            return Err(Error::SingularQfim { det, scale });
        }
        Ok([[self.f_rr / det, -self.f_wr / det], [-self.f_wr / det, self.f_ww / det]])
    }
}

/// Scaling class of a variance with particle number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scaling {
    /// Heisenberg limit, variance ∝ 1/N².
    HL,
    /// Standard quantum limit, variance ∝ 1/N.
    SQL,
    Other,
}

impl Scaling {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scaling::HL => "HL",
            Scaling::SQL => "SQL",
            Scaling::Other => "other",
        }
    }
}

/// Exact polynomial coefficients of the generator moments in `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prefactors {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    /// `N` coefficient of `Cov(H_w, H_W)`.
    pub g: f64,
    /// `N²` coefficient of `Cov(H_w, H_W)`.
    pub h: f64,
}

impl Prefactors {
    pub fn var_omega(&self, n: f64) -> f64 {
        self.a * n + self.b * n * n
    }

    pub fn var_rotation(&self, n: f64) -> f64 {
        self.c * n + self.d * n * n
    }

    pub fn cov(&self, n: f64) -> f64 {
        self.g * n + self.h * n * n
    }

    pub fn det_combination(&self, n: f64) -> f64 {
        self.e * n * n + self.f * n * n * n
    }

    pub fn b_is_zero(&self, n_ref: f64) -> bool {
        negligible(self.b, self.a, n_ref)
    }

    pub fn d_is_zero(&self, n_ref: f64) -> bool {
        negligible(self.d, self.c, n_ref)
    }

    pub fn f_is_zero(&self, n_ref: f64) -> bool {
        let scale = self.e.abs() + (self.a * self.d).abs() + (self.b * self.c).abs();
        self.f.abs() * n_ref <= ZERO_TOL * scale
    }
}

fn negligible(high: f64, low: f64, n_ref: f64) -> bool {
    high.abs() * n_ref <= ZERO_TOL * (low.abs() + high.abs()) || high == 0.0
}

/// Cramér-Rao lower limits on the relative variances, for one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionBounds {
    /// `δ²w / w0²`
    pub var_omega_rel: f64,
    /// `δ²W / W0²`
    pub var_rotation_rel: f64,
    pub saturable: bool,
    pub scaling_omega: Option<Scaling>,
    pub scaling_rotation: Option<Scaling>,
}

impl PrecisionBounds {
    /// Bounds after `nu` independent repetitions (every variance divides by `nu`).
    pub fn over_repetitions(&self, nu: u32) -> Self {
        let nu = nu.max(1) as f64;
        Self { var_omega_rel: self.var_omega_rel / nu, var_rotation_rel: self.var_rotation_rel / nu, ..*self }
    }

    pub fn with_scaling(self, (w, r): (Scaling, Scaling)) -> Self {
        Self { scaling_omega: Some(w), scaling_rotation: Some(r), ..self }
    }
}

/// `F_ij = 4 [N Cov1 + (N² - N) Pair]`.
pub fn assemble_qfim(ens: &InputEnsemble, c: &GeneratorCoeffs) -> Qfim {
    let n = ens.particles() as f64;
    let element = |w1: Param, w2: Param| {
        4.0 * (n * ghz_single_covariance(ens, c, w1, c, w2) + (n * n - n) * ghz_pair_covariance(ens, c, w1, c, w2))
    };
    Qfim {
        f_ww: element(Param::Trap, Param::Trap),
        f_rr: element(Param::Rotation, Param::Rotation),
        f_wr: element(Param::Trap, Param::Rotation),
        particles: ens.particles(),
    }
}

/// Relative-variance bounds `(F^-1)_ii / theta_i²` at `nu = 1`.
pub fn crb_bounds(q: &Qfim, omega0: f64, rotation0: f64, saturable: bool) -> Result<PrecisionBounds> {
    require_nonzero("omega0", omega0)?;
    require_nonzero("Omega0", rotation0)?;
    let inv = q.inverse()?;
    Ok(PrecisionBounds {
        var_omega_rel: inv[0][0] / (omega0 * omega0),
        var_rotation_rel: inv[1][1] / (rotation0 * rotation0),
        saturable,
        scaling_omega: None,
        scaling_rotation: None,
    })
}

fn require_nonzero(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value != 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and nonzero for a relative variance, got {value}")))
    }
}

/// Exact decomposition into the `N` and `N²` coefficients.
pub fn prefactors(ens: &InputEnsemble, c: &GeneratorCoeffs) -> Prefactors {
    let split = |w1: Param, w2: Param| {
        let pair = ghz_pair_covariance(ens, c, w1, c, w2);
        (ghz_single_covariance(ens, c, w1, c, w2) - pair, pair)
    };
    let (a, b) = split(Param::Trap, Param::Trap);
    let (cc, d) = split(Param::Rotation, Param::Rotation);
    let (g, h) = split(Param::Trap, Param::Rotation);
    Prefactors { a, b, c: cc, d, e: a * cc - g * g, f: a * d + b * cc - 2.0 * g * h, g, h }
}

/// Large-`N` bounds keeping only the leading power of numerator and denominator.
pub fn leading_order_bounds(p: &Prefactors, particles: u32, omega0: f64, rotation0: f64) -> Result<PrecisionBounds> {
    require_nonzero("omega0", omega0)?;
    require_nonzero("Omega0", rotation0)?;
    let n = particles as f64;
    let den = if p.f_is_zero(n) { p.e * n * n } else { p.f * n * n * n };
    if !(den > 0.0) {
        return Err(Error::SingularQfim { det: den, scale: p.e.abs() + p.f.abs() });
    }
    let num_w = if p.d_is_zero(n) { p.c * n } else { p.d * n * n };
    let num_r = if p.b_is_zero(n) { p.a * n } else { p.b * n * n };
    Ok(PrecisionBounds {
        var_omega_rel: 0.25 * num_w / den / (omega0 * omega0),
        var_rotation_rel: 0.25 * num_r / den / (rotation0 * rotation0),
        saturable: false,
        scaling_omega: None,
        scaling_rotation: None,
    }
    .with_scaling(classify_scaling(p, n)))
}

/// Left minus right side of the `B = 0` condition; `B` equals its square.
pub fn check_b_zero(ens: &InputEnsemble, c: &GeneratorCoeffs) -> f64 {
    2.0 * (c.k1 * ens.mean_a_sz() - c.k2 * ens.mean_a()).re + c.lambda - c.tau_n * ens.mean_n_sz()
}

/// Left side of the `D = 0` condition; `D` equals four times its square.
pub fn check_d_zero(ens: &InputEnsemble, c: &GeneratorCoeffs) -> f64 {
    0.5 * c.delta2 + (c.delta1 * ens.mean_a_sz()).re
}

/// Single-particle `<[H_w, H_W]>` on the ensemble.
pub fn commutator_on(ens: &InputEnsemble, c: &GeneratorCoeffs) -> C64 {
    commutator_expectation(c, 0.0, ens.mean_a())
}

/// Whether both diagonal bounds are simultaneously attainable.
pub fn saturability(ens: &InputEnsemble, c: &GeneratorCoeffs) -> bool {
    commutator_on(ens, c).norm() < SATURABILITY_TOL
}

/// Classifies `δ²w ∝ (C N + D N²)/(E N² + F N³)` and
/// `δ²W ∝ (A N + B N²)/(E N² + F N³)` by their net large-`N` exponent:
/// `-1` is the SQL, `-2` the HL, anything else [`Scaling::Other`].
///
/// Prefactors are judged zero relative to their companions at `n_ref`.
/// `B = D = 0` forces `F = 0`, so a double HL cannot arise.
pub fn classify_scaling(p: &Prefactors, n_ref: f64) -> (Scaling, Scaling) {
    let den = if !p.f_is_zero(n_ref) {
        Some(3)
    } else if p.e.abs() > 0.0 {
        Some(2)
    } else {
        None
    };
    let num = |high_zero: bool, low: f64| {
        if !high_zero {
            Some(2)
        } else if low.abs() > 0.0 {
            Some(1)
        } else {
            None
        }
    };
    let class = |num: Option<i32>| match (num, den) {
        (Some(n), Some(d)) if n - d == -1 => Scaling::SQL,
        (Some(n), Some(d)) if n - d == -2 => Scaling::HL,
        _ => Scaling::Other,
    };
    (class(num(p.d_is_zero(n_ref), p.c)), class(num(p.b_is_zero(n_ref), p.a)))
}

/// Everything the generic pipeline produces for one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub qfim: Qfim,
    pub prefactors: Prefactors,
    pub bounds: PrecisionBounds,
    pub commutator: f64,
    pub b_residual: f64,
    pub d_residual: f64,
}

/// `assemble_qfim -> crb_bounds`, with prefactors, scaling and saturability.
pub fn analyze(ens: &InputEnsemble, c: &GeneratorCoeffs, omega0: f64, rotation0: f64) -> Result<Analysis> {
    let qfim = assemble_qfim(ens, c);
    let prefactors = prefactors(ens, c);
    let commutator = commutator_on(ens, c).im;
    let saturable = commutator.abs() < SATURABILITY_TOL;
    let bounds = crb_bounds(&qfim, omega0, rotation0, saturable)?
        .with_scaling(classify_scaling(&prefactors, ens.particles() as f64));
    Ok(Analysis {
        qfim,
        prefactors,
        bounds,
        commutator,
        b_residual: check_b_zero(ens, c),
        d_residual: check_d_zero(ens, c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{Condition, ConditionPreset};
    use crate::states::{ghz_single_variance, MotionalState};
    use std::f64::consts::PI;

    fn coherent(a1: C64, a2: C64, n: u32) -> InputEnsemble {
        InputEnsemble::new(MotionalState::Coherent(a1), MotionalState::Coherent(a2), n).unwrap()
    }

    #[test]
    fn assembly_arithmetic() {
        let c = GeneratorCoeffs {
            k1: C64::new(0.0, 0.0),
            k2: C64::new(0.0, 0.0),
            lambda: 0.5,
            tau_n: 0.0,
            delta1: C64::new(0.0, 0.0),
            delta2: 1.0,
        };
        let ens = InputEnsemble::new(MotionalState::Fock(0), MotionalState::Fock(0), 2).unwrap();
        let q = assemble_qfim(&ens, &c);
        // Var1(lambda sz) = 1/4, pair = 1/4  ->  2/4 + 2/4 = 1
        assert!((q.f_ww - 4.0).abs() < 1e-14);
        let q1 = assemble_qfim(&ens.with_particles(1).unwrap(), &c);
        assert!((q1.f_rr - 4.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_inverse() {
        let q = Qfim { f_ww: 8.0, f_rr: 2.0, f_wr: 0.0, particles: 1 };
        let b = crb_bounds(&q, 1.0, 1.0, true).unwrap();
        assert!((b.var_omega_rel - 0.125).abs() < 1e-15);
        let singular = Qfim { f_ww: 1.0, f_rr: 1.0, f_wr: 1.0, particles: 1 };
        assert!(matches!(crb_bounds(&singular, 1.0, 1.0, true), Err(Error::SingularQfim { .. })));
    }

    #[test]
    fn condition1_rotation_bound_and_prefactors() {
        // Fock gap n2 - n1 = 2 W0 mu^2 / kappa = 1 makes B vanish.
        let preset = ConditionPreset::new(Condition::I, 1, 1.0, 0.5, 1.0).unwrap();
        let c = preset.coeffs();
        let ens = InputEnsemble::new(MotionalState::Fock(0), MotionalState::Fock(1), 1).unwrap();
        let an = analyze(&ens, &c, 1.0, 0.5).unwrap();
        assert!(an.b_residual.abs() < 1e-12);
        assert!((an.bounds.var_rotation_rel - 1.0 / (4.0 * PI * PI)).abs() < 1e-12);
        assert_eq!(an.bounds.scaling_rotation, Some(Scaling::HL));
        assert_eq!(an.bounds.scaling_omega, Some(Scaling::SQL));
        let p = an.prefactors;
        assert!(p.c.abs() < 1e-12 && p.e.abs() < 1e-10);
        assert!((p.d - c.delta2 * c.delta2).abs() < 1e-12);
        assert!((p.a * p.d - p.f).abs() < 1e-10 * p.f.abs());
        assert!(an.bounds.saturable);
    }

    #[test]
    fn polynomial_identity_over_n() {
        let preset = ConditionPreset::new(Condition::II, 2, 1.3, 0.4, 0.8).unwrap();
        let c = preset.coeffs();
        let base = coherent(C64::new(0.3, 0.9), C64::new(-0.4, 0.1), 1);
        let p = prefactors(&base, &c);
        for n in 1..=10 {
            let ens = base.with_particles(n).unwrap();
            let q = assemble_qfim(&ens, &c);
            let nf = n as f64;
            assert!((q.f_ww - 4.0 * p.var_omega(nf)).abs() <= 1e-12 * q.f_ww.abs());
            assert!((q.f_rr - 4.0 * p.var_rotation(nf)).abs() <= 1e-12 * q.f_rr.abs());
            assert!((q.f_wr - 4.0 * p.cov(nf)).abs() <= 1e-12 * q.max_abs());
            assert!((q.det() - 16.0 * p.det_combination(nf)).abs() <= 1e-9 * q.max_abs().powi(2));
            assert!((ghz_single_variance(&ens, &c, Param::Trap) - p.a - p.b).abs() < 1e-10 * (p.a + p.b));
        }
    }

    #[test]
    fn residuals_square_to_prefactors() {
        let preset = ConditionPreset::new(Condition::II, 1, 0.9, 0.7, 1.1).unwrap();
        let c = preset.coeffs();
        let ens = coherent(C64::new(0.2, -0.3), C64::new(1.4, 0.6), 1);
        let p = prefactors(&ens, &c);
        assert!((check_b_zero(&ens, &c).powi(2) - p.b).abs() < 1e-12 * p.b.abs().max(1.0));
        assert!(((2.0 * check_d_zero(&ens, &c)).powi(2) - p.d).abs() < 1e-12 * p.d.abs().max(1.0));
    }

    #[test]
    fn condition1_d_never_zero() {
        let preset = ConditionPreset::new(Condition::I, 2, 1.5, 0.3, 1.2).unwrap();
        let ens = coherent(C64::new(0.2, -0.3), C64::new(1.4, 0.6), 1);
        assert!((check_d_zero(&ens, &preset.coeffs()) - 1.2 * 1.2 * PI).abs() < 1e-12);
    }

    #[test]
    fn classification_examples() {
        let sql_hl = Prefactors { a: 2.0, b: 0.0, c: 0.0, d: 4.0, e: 0.0, f: 8.0, g: 0.0, h: 0.0 };
        assert_eq!(classify_scaling(&sql_hl, 10.0), (Scaling::SQL, Scaling::HL));
        let hl_sql = Prefactors { a: 2.0, b: 3.0, c: 1.0, d: 0.0, e: 1.0, f: 3.0, g: 1.0, h: 0.0 };
        assert_eq!(classify_scaling(&hl_sql, 10.0), (Scaling::HL, Scaling::SQL));
        let both_zero = Prefactors { a: 2.0, b: 0.0, c: 1.0, d: 0.0, e: 1.5, f: 0.0, g: 0.5, h: 0.0 };
        assert_eq!(classify_scaling(&both_zero, 10.0), (Scaling::SQL, Scaling::SQL));
    }

    #[test]
    fn repetitions_divide() {
        let b = PrecisionBounds { var_omega_rel: 1.0, var_rotation_rel: 2.0, saturable: true, scaling_omega: None, scaling_rotation: None };
        let r = b.over_repetitions(4);
        assert_eq!((r.var_omega_rel, r.var_rotation_rel), (0.25, 0.5));
    }
}
