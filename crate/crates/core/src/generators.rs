//! Single-particle generators of the two encoded parameters.
//!
//! For one particle the generators take the form
//!
//! ```text
//! H_w = (K1 a + K1* a†) - (K2 a + K2* a†) sigma_z + lambda sigma_z - tau a†a
//! H_W = (delta1 a + delta1* a†) + delta2 sigma_z
//! ```
//!
//! where `w` is the trap frequency and `W` the platform rotation rate.
//! The minus sign in front of the `K2` block belongs to the operator, not to the
//! stored value. Terms proportional to the identity are dropped: they shift
//! expectation values but never variances or covariances.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::time_integrals::{
    eval_dp_domega, eval_dq_domega, eval_lambda, eval_p, eval_q, PhysicalScale, QuadratureConfig, SweepProfile,
};

/// Tolerance used for every "equals zero" saturability test, in coefficient units.
pub const SATURABILITY_TOL: f64 = 1e-9;

/// Coefficients of the two single-particle generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorCoeffs {
    pub k1: C64,
    pub k2: C64,
    pub lambda: f64,
    /// Weight of `-a†a` in `H_w`; equals the sweep duration.
    pub tau_n: f64,
    pub delta1: C64,
    pub delta2: f64,
}

/// Which of the two generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Param {
    /// Trap frequency `w`.
    Trap,
    /// Platform rotation rate `W`.
    Rotation,
}

impl Param {
    pub const BOTH: [Param; 2] = [Param::Trap, Param::Rotation];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// `sin(w0 tau / 2) = 0`: `tau = 2 pi kappa / w0`, constant `w_p = w0 / (2 kappa)`.
    I,
    /// `cos(w0 tau / 2) = 0`: `tau = pi (2 kappa + 1) / w0`, constant `w_p = w0 / (2 kappa + 1)`.
    II,
}

/// Evolution-time preset that makes the Cramér-Rao bound saturable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionPreset {
    pub which: Condition,
    /// Positive for condition I; any natural number (including 0) for condition II.
    pub kappa: u32,
    pub omega0: f64,
    pub rotation0: f64,
    pub scale: PhysicalScale,
}

impl ConditionPreset {
    pub fn new(which: Condition, kappa: u32, omega0: f64, rotation0: f64, mu: f64) -> Result<Self> {
        require_positive("omega0", omega0)?;
        if !rotation0.is_finite() {
            return Err(Error::InvalidParameter(format!("Omega0 must be finite, got {rotation0}")));
        }
        if which == Condition::I && kappa == 0 {
            return Err(Error::InvalidParameter("condition I requires kappa >= 1".into()));
        }
        Ok(Self { which, kappa, omega0, rotation0, scale: PhysicalScale::new(mu)? })
    }

    pub fn mu(&self) -> f64 {
        self.scale.mu()
    }

    /// Number of half trap periods covered by the sweep: `2 kappa` or `2 kappa + 1`.
    pub fn half_periods(&self) -> f64 {
        match self.which {
            Condition::I => 2.0 * self.kappa as f64,
            Condition::II => 2.0 * self.kappa as f64 + 1.0,
        }
    }

    pub fn tau(&self) -> f64 {
        PI * self.half_periods() / self.omega0
    }

    pub fn sweep_rate(&self) -> f64 {
        self.omega0 / self.half_periods()
    }

    pub fn profile(&self) -> SweepProfile {
        SweepProfile::constant(self.sweep_rate(), self.tau()).expect("preset sweep closes the loop by construction")
    }

    pub fn coeffs(&self) -> GeneratorCoeffs {
        match self.which {
            Condition::I => coeffs_condition1(self),
            Condition::II => coeffs_condition2(self),
        }
    }
}

/// Generator coefficients for an arbitrary sweep profile, evaluated at the
/// true values `(omega0, rotation0)` with the sweep held fixed.
pub fn coeffs_general(
    profile: &SweepProfile,
    omega0: f64,
    rotation0: f64,
    scale: PhysicalScale,
    quad: &QuadratureConfig,
) -> Result<GeneratorCoeffs> {
    require_positive("omega0", omega0)?;
    let mu = scale.mu();
    let tau = profile.duration();
    let root = omega0.sqrt();
    let q = eval_q(omega0, tau);
    let dq = eval_dq_domega(omega0, tau);
    let p = eval_p(profile, omega0, quad)?;
    let dp = eval_dp_domega(profile, omega0, quad)?;
    let i = C64::i();
    let half_inv = 1.0 / (2.0 * omega0);

    let k1 = mu * root * rotation0 * ((tau - i * half_inv) * q.conj() - i * dq.conj());
    let k2 = mu * root * ((i * half_inv - tau) * p.conj() + i * dp.conj());
    let lambda = eval_lambda(profile, omega0, rotation0, scale, quad)?;
    let delta1 = -i * (2.0 * mu / root) * (0.5 * omega0 * tau).sin() * C64::from_polar(1.0, -0.5 * omega0 * tau);
    // ∫ w_p(t) cos(w (tau - t)) dt = Re(e^{i w tau} p*)
    let cos_integral = (C64::from_polar(1.0, omega0 * tau) * p.conj()).re;
    let delta2 = 2.0 * PI * mu * mu * (1.0 - cos_integral / PI);

    Ok(GeneratorCoeffs { k1, k2, lambda, tau_n: tau, delta1, delta2 })
}

/// Closed-form coefficients under condition I.
pub fn coeffs_condition1(preset: &ConditionPreset) -> GeneratorCoeffs {
    let (mu, w0, big) = (preset.mu(), preset.omega0, preset.rotation0);
    let kappa = preset.kappa as f64;
    GeneratorCoeffs {
        k1: C64::new(0.0, -2.0 * mu * PI * kappa * big / w0.powf(1.5)),
        k2: C64::new(0.0, mu * PI / w0.sqrt()),
        lambda: -2.0 * mu * mu * PI * big / w0,
        tau_n: 2.0 * PI * kappa / w0,
        delta1: C64::new(0.0, 0.0),
        delta2: 2.0 * mu * mu * PI,
    }
}

/// Closed-form coefficients under condition II.
pub fn coeffs_condition2(preset: &ConditionPreset) -> GeneratorCoeffs {
    let (mu, w0, big) = (preset.mu(), preset.omega0, preset.rotation0);
    let k0 = 2.0 * preset.kappa as f64 + 1.0;
    GeneratorCoeffs {
        k1: big * mu / w0.powf(1.5) * C64::new(1.0, -k0 * PI),
        k2: mu / w0.sqrt() * C64::new(-1.0 / k0, PI),
        lambda: -2.0 * mu * mu * PI * big / w0,
        tau_n: PI * k0 / w0,
        delta1: C64::new(-2.0 * mu / w0.sqrt(), 0.0),
        delta2: 2.0 * mu * mu * PI,
    }
}

/// `<[H_w, H_W]>` for a single particle given `<sigma_z>` and `<a>`.
///
/// The commutator is anti-hermitian, so the result is purely imaginary.
pub fn commutator_expectation(c: &GeneratorCoeffs, sigma_z: f64, a_mean: C64) -> C64 {
    let constant = c.k1 * c.delta1.conj() - c.k1.conj() * c.delta1;
    let spin = c.delta1 * c.k2.conj() - c.delta1.conj() * c.k2;
    let boson = c.tau_n * (c.delta1 * a_mean - c.delta1.conj() * a_mean.conj());
    // Each bracket is z - z*; drop the rounding residue in the real part.
    C64::new(0.0, (constant + spin * sigma_z + boson).im)
}

/// Sweep durations `tau = 2 pi kappa / w0` that zero `delta1`, for `kappa = 1..=kappa_max`.
pub fn solve_condition1_times(omega0: f64, kappa_max: u32) -> Result<Vec<(u32, f64)>> {
    require_positive("omega0", omega0)?;
    if kappa_max == 0 {
        return Err(Error::InvalidParameter("kappa_max must be >= 1".into()));
    }
    Ok((1..=kappa_max).map(|k| (k, 2.0 * PI * k as f64 / omega0)).collect())
}

/// Condition II: `mu W0 / sqrt(w0) sin(w0 tau/2) = Re(e^{-i w0 tau/2} <a>)`,
/// with both sides nonzero.
pub fn check_condition2(omega0: f64, rotation0: f64, tau: f64, a_mean: C64, mu: f64) -> bool {
    let phase = 0.5 * omega0 * tau;
    let lhs = mu * rotation0 / omega0.sqrt() * phase.sin();
    let rhs = (C64::from_polar(1.0, -phase) * a_mean).re;
    (lhs - rhs).abs() <= SATURABILITY_TOL && lhs.abs() > SATURABILITY_TOL && rhs.abs() > SATURABILITY_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn condition1_general_matches_printed_values() {
        let preset = ConditionPreset::new(Condition::I, 1, 1.0, 1.0, 1.0).unwrap();
        let c = coeffs_general(&preset.profile(), 1.0, 1.0, preset.scale, &QuadratureConfig::default()).unwrap();
        assert!(close(c.k1, C64::new(0.0, -2.0 * PI), 1e-12));
        assert!(close(c.k2, C64::new(0.0, PI), 1e-12));
        assert!((c.lambda + 2.0 * PI).abs() < 1e-12);
        assert!(c.delta1.norm() < 1e-12);
        assert!((c.delta2 - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn condition2_general_matches_printed_values() {
        let preset = ConditionPreset::new(Condition::II, 0, 1.0, 1.0, 1.0).unwrap();
        let c = coeffs_general(&preset.profile(), 1.0, 1.0, preset.scale, &QuadratureConfig::default()).unwrap();
        assert!(close(c.k2, C64::new(-1.0, PI), 1e-12));
        assert!(close(c.delta1, C64::new(-2.0, 0.0), 1e-12));
        assert!((c.delta2 - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn zero_rotation_kills_k1_and_lambda() {
        let prof = SweepProfile::closing_constant(2.3).unwrap();
        let c = coeffs_general(&prof, 1.4, 0.0, PhysicalScale::new(0.9).unwrap(), &QuadratureConfig::default())
            .unwrap();
        assert_eq!(c.k1, C64::new(0.0, 0.0));
        assert_eq!(c.lambda, 0.0);
    }

    #[test]
    fn preset_examples() {
        let one = ConditionPreset::new(Condition::I, 2, 4.0, 1.0, 1.0).unwrap();
        let c = coeffs_condition1(&one);
        assert!(close(c.k1, C64::new(0.0, -PI / 2.0), 1e-15));
        assert!((c.delta2 - 2.0 * PI).abs() < 1e-15);

        let two = ConditionPreset::new(Condition::II, 1, 1.0, 2.0, 1.0).unwrap();
        let c = coeffs_condition2(&two);
        assert!(close(c.k1, C64::new(2.0, -6.0 * PI), 1e-15));
        assert!(close(c.k2, C64::new(-1.0 / 3.0, PI), 1e-15));
    }

    #[test]
    fn commutator_vanishes_without_delta1() {
        let preset = ConditionPreset::new(Condition::I, 3, 2.2, 0.7, 1.1).unwrap();
        let c = preset.coeffs();
        assert_eq!(commutator_expectation(&c, 0.4, C64::new(1.5, -2.0)), C64::new(0.0, 0.0));
    }

    #[test]
    fn commutator_vanishes_on_condition2_state() {
        let (mu, w0, big): (f64, f64, f64) = (1.2, 0.8, 0.5);
        let preset = ConditionPreset::new(Condition::II, 2, w0, big, mu).unwrap();
        let a = C64::new(3.7, mu * big / w0.sqrt());
        let value = commutator_expectation(&preset.coeffs(), 0.0, a);
        assert!(value.norm() < 1e-12);
        assert!(commutator_expectation(&preset.coeffs(), 0.0, a + C64::new(0.0, 0.1)).norm() > 1e-3);
    }

    #[test]
    fn condition1_times() {
        let times = solve_condition1_times(2.0 * PI, 3).unwrap();
        assert_eq!(times.len(), 3);
        for (i, (k, t)) in times.iter().enumerate() {
            assert_eq!(*k, i as u32 + 1);
            assert!((t - (i + 1) as f64).abs() < 1e-15);
        }
        let times = solve_condition1_times(1.0, 1).unwrap();
        assert!((times[0].1 - 2.0 * PI).abs() < 1e-15);
        assert!(solve_condition1_times(1.0, 0).is_err());
    }

    #[test]
    fn condition1_times_zero_delta1() {
        let scale = PhysicalScale::new(0.6).unwrap();
        for (_, tau) in solve_condition1_times(1.7, 5).unwrap() {
            let prof = SweepProfile::closing_constant(tau).unwrap();
            let c = coeffs_general(&prof, 1.7, 0.3, scale, &QuadratureConfig::default()).unwrap();
            assert!(c.delta1.norm() < 1e-12);
        }
    }

    #[test]
    fn condition2_check() {
        let (mu, w0, big): (f64, f64, f64) = (1.0, 1.3, 0.4);
        let y = mu * big / w0.sqrt();
        for kappa in 0..4 {
            let tau = PI * (2 * kappa + 1) as f64 / w0;
            assert!(check_condition2(w0, big, tau, C64::new(-2.0, y), mu));
            assert!(!check_condition2(w0, big, 2.0 * PI * (kappa + 1) as f64 / w0, C64::new(-2.0, y), mu));
        }
        assert!(!check_condition2(w0, big, PI / w0, C64::new(0.0, 0.0), mu));
    }

    #[test]
    fn kappa_zero_rejected_for_condition1() {
        assert!(ConditionPreset::new(Condition::I, 0, 1.0, 1.0, 1.0).is_err());
        assert!(ConditionPreset::new(Condition::II, 0, 1.0, 1.0, 1.0).is_ok());
    }
}
