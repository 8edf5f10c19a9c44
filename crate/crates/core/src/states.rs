//! GHZ-type input ensembles and the generator moments evaluated on them.
//!
//! The input is `(|up>^N |psi_up>^N + |down>^N |psi_down>^N) / sqrt(2)`. Both
//! generators are diagonal in every particle's `sigma_z`, so each one acts on a
//! spin branch as a purely bosonic operator with `sigma_z` replaced by `±1`.
//!
//! Why the GHZ cross terms vanish: take any product of single-particle
//! operators `O = ⊗_k (O_k^up ⊗ |up><up| + O_k^down ⊗ |down><down|)`. Then
//! `<up...up| O |down...down>` contains the factor `<up|up><up|down> = 0` for every
//! particle, so only the two diagonal branch terms survive, each with weight 1/2.
//! For `N >= 2` the same argument shows that the one-particle reduced state is
//! an equal-weight mixture of the two branches.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{GeneratorCoeffs, Param};
use crate::time_integrals::Spin;

/// Default Fock cutoff for truncated vector states.
pub const DEFAULT_CUTOFF: usize = 64;
/// Largest population tolerated on the top level of a truncated vector.
pub const LEAKAGE_LIMIT: f64 = 1e-8;
/// Allowed deviation of a vector state's norm from 1.
pub const NORM_TOL: f64 = 1e-12;

/// Motional state of one particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MotionalState {
    Fock(u64),
    Coherent(C64),
    /// Amplitudes in the number basis `|0>, |1>, ..., |d-1>`.
    Vector(Vec<C64>),
}

impl MotionalState {
    /// Validated vector state; the norm must be 1 within [`NORM_TOL`].
    pub fn vector(amplitudes: Vec<C64>) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("vector state has squared norm {norm2}, expected 1")));
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidState("vector state has non-finite amplitudes".into()));
        }
        Ok(Self::Vector(amplitudes))
    }

    /// Vector state from arbitrary nonzero amplitudes, rescaled to unit norm.
    pub fn vector_normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("cannot normalise a zero or non-finite vector".into()));
        }
        amplitudes.iter_mut().for_each(|c| *c /= norm);
        Self::vector(amplitudes)
    }

    /// The coherent state `|alpha>` expanded on `cutoff` number states and renormalised.
    pub fn coherent_truncated(alpha: C64, cutoff: usize) -> Result<Self> {
        Self::vector_normalized(coherent_amplitudes(alpha, cutoff))
    }

    /// Exact moments, or truncated-basis contractions for vector states.
    pub fn moments(&self) -> Result<BranchMoments> {
        match self {
            MotionalState::Fock(n) => {
                let n = *n as f64;
                Ok(BranchMoments { m_a: C64::new(0.0, 0.0), m_aa: C64::new(0.0, 0.0), m_n: n, m_nn: n * n, m_an: C64::new(0.0, 0.0) })
            }
            MotionalState::Coherent(alpha) => {
                let n = alpha.norm_sqr();
                Ok(BranchMoments { m_a: *alpha, m_aa: alpha * alpha, m_n: n, m_nn: n * n + n, m_an: alpha * (n + 1.0) })
            }
            MotionalState::Vector(psi) => vector_moments(psi),
        }
    }
}

/// Number-basis amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` for `n < cutoff`, unnormalised.
pub fn coherent_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff);
    let mut amp = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        out.push(amp);
        amp *= alpha / ((n + 1) as f64).sqrt();
    }
    out
}

fn vector_moments(psi: &[C64]) -> Result<BranchMoments> {
    let d = psi.len();
    let leakage = psi[d - 1].norm_sqr();
    if leakage > LEAKAGE_LIMIT {
        return Err(Error::TruncationLeak { leakage, limit: LEAKAGE_LIMIT });
    }
    let mut m = BranchMoments { m_a: C64::new(0.0, 0.0), m_aa: C64::new(0.0, 0.0), m_n: 0.0, m_nn: 0.0, m_an: C64::new(0.0, 0.0) };
    for n in 0..d {
        let nf = n as f64;
        let p = psi[n].norm_sqr();
        m.m_n += nf * p;
        m.m_nn += nf * nf * p;
        if n >= 1 {
            // <n-1| a |n> = sqrt(n)
            let overlap = psi[n - 1].conj() * psi[n] * nf.sqrt();
            m.m_a += overlap;
            m.m_an += overlap * nf;
        }
        if n >= 2 {
            m.m_aa += psi[n - 2].conj() * psi[n] * (nf * (nf - 1.0)).sqrt();
        }
    }
    Ok(m)
}

/// Moments of one spin branch's motional state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchMoments {
    /// `<a>`
    pub m_a: C64,
    /// `<a^2>`
    pub m_aa: C64,
    /// `<a†a>`
    pub m_n: f64,
    /// `<(a†a)^2>`
    pub m_nn: f64,
    /// `<a a†a>`
    pub m_an: C64,
}

/// A generator restricted to one spin branch: `k a + k* a† + t a†a + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOperator {
    pub k: C64,
    pub t: f64,
    pub c: f64,
}

impl BranchOperator {
    pub fn new(coeffs: &GeneratorCoeffs, which: Param, spin: Spin) -> Self {
        let s = spin.sign();
        match which {
            Param::Trap => Self { k: coeffs.k1 - s * coeffs.k2, t: -coeffs.tau_n, c: s * coeffs.lambda },
            Param::Rotation => Self { k: coeffs.delta1, t: 0.0, c: s * coeffs.delta2 },
        }
    }

    /// The same operator plus `shift` times the identity.
    pub fn shifted(self, shift: f64) -> Self {
        Self { c: self.c + shift, ..self }
    }
}

impl BranchMoments {
    pub fn expect(&self, o: &BranchOperator) -> f64 {
        2.0 * (o.k * self.m_a).re + o.t * self.m_n + o.c
    }

    /// `Re <O P>`, i.e. the symmetrised product `<{O, P}>/2` for hermitian `O, P`.
    pub fn product(&self, o: &BranchOperator, p: &BranchOperator) -> f64 {
        let m = self;
        // <n a> = <a n> - <a>, <a† n> = <n a>*, <n a†> = <a n>*
        let na = m.m_an - m.m_a;
        let quad = o.k * p.k * m.m_aa
            + o.k * p.k.conj() * (m.m_n + 1.0)
            + o.k.conj() * p.k * m.m_n
            + o.k.conj() * p.k.conj() * m.m_aa.conj();
        let quad_n = o.t * (p.k * na + p.k.conj() * m.m_an.conj());
        let n_quad = p.t * (o.k * m.m_an + o.k.conj() * na.conj());
        let fluct = (quad + quad_n + n_quad).re + o.t * p.t * m.m_nn;
        let (o0, p0) = (self.expect(o) - o.c, self.expect(p) - p.c);
        fluct + o.c * p0 + p.c * o0 + o.c * p.c
    }
}

/// The GHZ-type input state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEnsemble {
    up: MotionalState,
    down: MotionalState,
    particles: u32,
    moments_up: BranchMoments,
    moments_down: BranchMoments,
}

impl InputEnsemble {
    pub fn new(up: MotionalState, down: MotionalState, particles: u32) -> Result<Self> {
        if particles == 0 {
            return Err(Error::InvalidParameter("particle number N must be >= 1".into()));
        }
        let moments_up = up.moments()?;
        let moments_down = down.moments()?;
        Ok(Self { up, down, particles, moments_up, moments_down })
    }

    /// The same motional states with a different particle number.
    pub fn with_particles(&self, particles: u32) -> Result<Self> {
        if particles == 0 {
            return Err(Error::InvalidParameter("particle number N must be >= 1".into()));
        }
        Ok(Self { particles, ..self.clone() })
    }

    pub fn up(&self) -> &MotionalState {
        &self.up
    }

    pub fn down(&self) -> &MotionalState {
        &self.down
    }

    pub fn state(&self, spin: Spin) -> &MotionalState {
        match spin {
            Spin::Up => &self.up,
            Spin::Down => &self.down,
        }
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn moments(&self, spin: Spin) -> &BranchMoments {
        match spin {
            Spin::Up => &self.moments_up,
            Spin::Down => &self.moments_down,
        }
    }

    /// Single-particle `<a>`; `<sigma_z>` is always 0.
    pub fn mean_a(&self) -> C64 {
        0.5 * (self.moments_up.m_a + self.moments_down.m_a)
    }

    /// Single-particle `<a sigma_z>`.
    pub fn mean_a_sz(&self) -> C64 {
        0.5 * (self.moments_up.m_a - self.moments_down.m_a)
    }

    /// Single-particle `<a†a sigma_z>`.
    pub fn mean_n_sz(&self) -> f64 {
        0.5 * (self.moments_up.m_n - self.moments_down.m_n)
    }

    fn branch_expectations(&self, c: &GeneratorCoeffs, which: Param) -> (f64, f64) {
        let up = self.moments_up.expect(&BranchOperator::new(c, which, Spin::Up));
        let down = self.moments_down.expect(&BranchOperator::new(c, which, Spin::Down));
        (up, down)
    }
}

/// `<H^(k)>` for one particle of the ensemble.
pub fn ghz_single_expectation(ens: &InputEnsemble, c: &GeneratorCoeffs, which: Param) -> f64 {
    let (up, down) = ens.branch_expectations(c, which);
    0.5 * (up + down)
}

/// Symmetrised single-particle covariance `Cov(O^(k), P^(k))`.
pub fn ghz_single_covariance(ens: &InputEnsemble, c1: &GeneratorCoeffs, w1: Param, c2: &GeneratorCoeffs, w2: Param) -> f64 {
    let second: f64 = Spin::BOTH
        .iter()
        .map(|&s| ens.moments(s).product(&BranchOperator::new(c1, w1, s), &BranchOperator::new(c2, w2, s)))
        .sum::<f64>()
        * 0.5;
    second - ghz_single_expectation(ens, c1, w1) * ghz_single_expectation(ens, c2, w2)
}

/// Single-particle variance `Δ² H^(k)`.
pub fn ghz_single_variance(ens: &InputEnsemble, c: &GeneratorCoeffs, which: Param) -> f64 {
    ghz_single_covariance(ens, c, which, c, which)
}

/// Covariance between particle `k1` and a different particle `k2`:
/// `(o_up - o_down)(p_up - p_down) / 4`.
pub fn ghz_pair_covariance(ens: &InputEnsemble, c1: &GeneratorCoeffs, w1: Param, c2: &GeneratorCoeffs, w2: Param) -> f64 {
    let (o_up, o_down) = ens.branch_expectations(c1, w1);
    let (p_up, p_down) = ens.branch_expectations(c2, w2);
    0.25 * (o_up - o_down) * (p_up - p_down)
}

/// Per-particle trap energy difference between the branches, `w0 <a†a sigma_z>`.
pub fn mean_energy_gap(ens: &InputEnsemble, omega0: f64) -> f64 {
    omega0 * ens.mean_n_sz()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> GeneratorCoeffs {
        GeneratorCoeffs {
            k1: C64::new(0.0, 0.0),
            k2: C64::new(0.0, 0.0),
            lambda: 0.0,
            tau_n: 0.0,
            delta1: C64::new(0.0, 0.0),
            delta2: 0.0,
        }
    }

    fn fock(a: u64, b: u64) -> InputEnsemble {
        InputEnsemble::new(MotionalState::Fock(a), MotionalState::Fock(b), 1).unwrap()
    }

    #[test]
    fn fock_and_coherent_moments() {
        let m = MotionalState::Fock(3).moments().unwrap();
        assert_eq!((m.m_n, m.m_nn, m.m_a), (3.0, 9.0, C64::new(0.0, 0.0)));
        let m = MotionalState::Coherent(C64::new(1.0, 0.0)).moments().unwrap();
        assert_eq!((m.m_n, m.m_nn, m.m_an), (1.0, 2.0, C64::new(2.0, 0.0)));
    }

    #[test]
    fn truncated_coherent_matches_exact() {
        let alpha = C64::new(0.0, 0.5);
        let exact = MotionalState::Coherent(alpha).moments().unwrap();
        let vec = MotionalState::coherent_truncated(alpha, 40).unwrap().moments().unwrap();
        for (x, y) in [(exact.m_a, vec.m_a), (exact.m_aa, vec.m_aa), (exact.m_an, vec.m_an)] {
            assert!((x - y).norm() < 1e-10);
        }
        assert!((exact.m_n - vec.m_n).abs() < 1e-10 && (exact.m_nn - vec.m_nn).abs() < 1e-10);
    }

    #[test]
    fn vector_validation_and_leakage() {
        assert!(MotionalState::vector(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
        let leaky = MotionalState::coherent_truncated(C64::new(3.0, 0.0), 10).unwrap();
        assert!(matches!(leaky.moments(), Err(Error::TruncationLeak { .. })));
        assert!(matches!(InputEnsemble::new(leaky, MotionalState::Fock(0), 1), Err(Error::TruncationLeak { .. })));
    }

    #[test]
    fn single_expectation_examples() {
        let c = GeneratorCoeffs { lambda: 3.0, ..zero() };
        assert_eq!(ghz_single_expectation(&fock(1, 4), &c, Param::Trap), 0.0);
        let c = GeneratorCoeffs { tau_n: 1.3, ..zero() };
        assert!((ghz_single_expectation(&fock(0, 2), &c, Param::Trap) + 1.3).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let c = GeneratorCoeffs { delta2: 1.7, ..zero() };
        assert!((ghz_single_variance(&fock(2, 5), &c, Param::Rotation) - 1.7 * 1.7).abs() < 1e-14);
        let c = GeneratorCoeffs { delta1: C64::new(0.3, -0.4), ..zero() };
        assert!((ghz_single_variance(&fock(0, 0), &c, Param::Rotation) - 0.25).abs() < 1e-15);
        // Fock branches: |delta1|^2 (2 n_s + 1) averaged, plus delta2^2
        let c = GeneratorCoeffs { delta1: C64::new(0.0, 2.0), delta2: 0.5, ..zero() };
        let expected = 4.0 * 0.5 * ((2.0 * 1.0 + 1.0) + (2.0 * 3.0 + 1.0)) + 0.25;
        assert!((ghz_single_variance(&fock(1, 3), &c, Param::Rotation) - expected).abs() < 1e-13);
    }

    #[test]
    fn pair_covariance_examples() {
        let c = GeneratorCoeffs { tau_n: -1.0, ..zero() };
        assert!((ghz_pair_covariance(&fock(0, 1), &c, Param::Trap, &c, Param::Trap) - 0.25).abs() < 1e-15);
        let c = GeneratorCoeffs { lambda: 1.0, ..zero() };
        assert!((ghz_pair_covariance(&fock(3, 7), &c, Param::Trap, &c, Param::Trap) - 1.0).abs() < 1e-15);
        let c = GeneratorCoeffs { k1: C64::new(1.0, 2.0), ..zero() };
        let ens = InputEnsemble::new(MotionalState::Coherent(C64::new(0.4, 1.0)), MotionalState::Coherent(C64::new(0.4, 1.0)), 3).unwrap();
        assert_eq!(ghz_pair_covariance(&ens, &c, Param::Trap, &c, Param::Trap), 0.0);
    }

    #[test]
    fn energy_gap_examples() {
        assert_eq!(mean_energy_gap(&fock(0, 1), 1.0), -0.5);
        assert_eq!(mean_energy_gap(&fock(4, 4), 2.0), 0.0);
        let ens = InputEnsemble::new(MotionalState::Coherent(C64::new(1.0, 0.0)), MotionalState::Coherent(C64::new(0.0, 3f64.sqrt())), 1).unwrap();
        assert!((mean_energy_gap(&ens, 1.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_shift_leaves_covariance_unchanged() {
        let m = MotionalState::Coherent(C64::new(0.7, -0.2)).moments().unwrap();
        let o = BranchOperator { k: C64::new(0.3, 1.1), t: -2.0, c: 0.4 };
        let p = BranchOperator { k: C64::new(-0.5, 0.2), t: 0.7, c: -1.0 };
        let cov = |o: &BranchOperator, p: &BranchOperator| m.product(o, p) - m.expect(o) * m.expect(p);
        assert!((cov(&o, &p) - cov(&o.shifted(5.0), &p.shifted(-3.0))).abs() < 1e-12);
    }

    #[test]
    fn particle_number_validation() {
        assert!(InputEnsemble::new(MotionalState::Fock(0), MotionalState::Fock(1), 0).is_err());
    }
}
