//! Time integrals of the sweep schedule.
//!
//! Everything the generator coefficients depend on reduces to a handful of
//! oscillatory integrals over the sweep window `[0, tau]`:
//!
//! * `q(w) = ∫ e^{iwt} dt` and its w-derivative,
//! * `p(w) = ∫ w_p(t) e^{iwt} dt` and its w-derivative,
//! * the displacement amplitude `eta` and the geometric phase `Phi` of each spin branch,
//! * the sigma_z weight `lambda` of the trap-frequency generator.
//!
//! Constant sweep rates use closed forms throughout. Sampled schedules are
//! linearly interpolated between knots and integrated with composite
//! quadrature whose panel count is doubled until successive estimates agree
//! to `abs_tol`.
//!
//! Units: hbar = 1 and `mu = sqrt(m / 2 hbar) R`, so `mu^2` carries units of
//! time and frequencies are naturally measured in `mu^-2`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Tolerance on the loop-closure integral `∫ w_p dt = pi`.
pub const CLOSURE_TOL: f64 = 1e-9;

/// Below this `|w tau|` the q integral is evaluated by its Taylor series.
const Q_SERIES_CUTOFF: f64 = 1e-8;
/// Below this `|w tau|` the w-derivative of q is evaluated by its Taylor series.
const DQ_SERIES_CUTOFF: f64 = 0.5;

/// Spin branch of a particle. `Up` has sigma_z eigenvalue +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

/// The composite scale `mu = sqrt(m / 2 hbar) R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScale(f64);

impl PhysicalScale {
    pub fn new(mu: f64) -> Result<Self> {
        require_positive("mu", mu)?;
        Ok(Self(mu))
    }

    pub fn mu(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepKind {
    Constant { rate: f64 },
    /// `(time, rate)` knots, linearly interpolated.
    Sampled { knots: Vec<(f64, f64)> },
}

/// Relative rotation schedule `w_p(t)` on `[0, tau]`.
///
/// Constructors enforce the closure of the two counter-propagating paths,
/// `∫_0^tau w_p(t) dt = pi` within [`CLOSURE_TOL`]. Negative rates on part of
/// the window are accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepProfile {
    kind: SweepKind,
    duration: f64,
}

impl SweepProfile {
    pub fn constant(rate: f64, duration: f64) -> Result<Self> {
        require_positive("sweep duration", duration)?;
        if !rate.is_finite() {
            return Err(Error::InvalidProfile(format!("rate {rate} is not finite")));
        }
        let integral = rate * duration;
        if (integral - PI).abs() > CLOSURE_TOL {
            return Err(Error::ClosureViolation { integral });
        }
        Ok(Self { kind: SweepKind::Constant { rate }, duration })
    }

    /// Constant rate `pi / tau`, which closes the loop by construction.
    pub fn closing_constant(duration: f64) -> Result<Self> {
        require_positive("sweep duration", duration)?;
        Self::constant(PI / duration, duration)
    }

    pub fn sampled(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidProfile("need at least two knots".into()));
        }
        if knots[0].0 != 0.0 {
            return Err(Error::InvalidProfile(format!("first knot at t = {}, expected 0", knots[0].0)));
        }
        if knots.iter().any(|&(t, w)| !t.is_finite() || !w.is_finite()) {
            return Err(Error::InvalidProfile("non-finite knot".into()));
        }
        if knots.windows(2).any(|pair| pair[1].0 <= pair[0].0) {
            return Err(Error::InvalidProfile("knot times must be strictly increasing".into()));
        }
        let duration = knots[knots.len() - 1].0;
        let profile = Self { kind: SweepKind::Sampled { knots }, duration };
        let integral = profile.rate_integral();
        if (integral - PI).abs() > CLOSURE_TOL {
            return Err(Error::ClosureViolation { integral });
        }
        Ok(profile)
    }

    /// Tabulates `rate(t)` at `samples + 1` equispaced knots and rescales the
    /// table so that it closes the loop exactly.
    pub fn sampled_from_fn(duration: f64, samples: usize, rate: impl Fn(f64) -> f64) -> Result<Self> {
        require_positive("sweep duration", duration)?;
        if samples == 0 {
            return Err(Error::InvalidProfile("need at least one sample interval".into()));
        }
        let dt = duration / samples as f64;
        let mut knots: Vec<(f64, f64)> = (0..=samples)
            .map(|i| {
                let t = if i == samples { duration } else { i as f64 * dt };
                (t, rate(t))
            })
            .collect();
        let raw: f64 = knots.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
        if raw.abs() < f64::EPSILON {
            return Err(Error::InvalidProfile("rate integrates to zero; cannot normalise".into()));
        }
        let scale = PI / raw;
        knots.iter_mut().for_each(|k| k.1 *= scale);
        Self::sampled(knots)
    }

    pub fn kind(&self) -> &SweepKind {
        &self.kind
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn constant_rate(&self) -> Option<f64> {
        match self.kind {
            SweepKind::Constant { rate } => Some(rate),
            SweepKind::Sampled { .. } => None,
        }
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        match &self.kind {
            SweepKind::Constant { rate } => *rate,
            SweepKind::Sampled { knots } => {
                let idx = knots.partition_point(|k| k.0 <= t);
                if idx == 0 {
                    return knots[0].1;
                }
                if idx >= knots.len() {
                    return knots[knots.len() - 1].1;
                }
                let (t0, w0) = knots[idx - 1];
                let (t1, w1) = knots[idx];
                w0 + (w1 - w0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Exact integral of the interpolated rate over the window.
    pub fn rate_integral(&self) -> f64 {
        match &self.kind {
            SweepKind::Constant { rate } => rate * self.duration,
            SweepKind::Sampled { knots } => {
                knots.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum()
            }
        }
    }

    /// Points where the interpolant has kinks; panels never straddle them.
    fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            SweepKind::Constant { .. } => vec![0.0, self.duration],
            SweepKind::Sampled { knots } => knots.iter().map(|k| k.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuadratureScheme {
    /// Composite Gauss-Legendre with `order` nodes per panel.
    GaussLegendre { order: usize },
    /// Composite Simpson, one parabola per panel.
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub scheme: QuadratureScheme,
    /// Initial number of panels across the whole window.
    pub panels: usize,
    pub abs_tol: f64,
    /// Panel doublings allowed before giving up.
    pub max_doublings: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            scheme: QuadratureScheme::GaussLegendre { order: 8 },
            panels: 16,
            abs_tol: 1e-12,
            max_doublings: 14,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 8 {
            return Err(Error::InvalidQuadrature(format!("panels must be >= 8, got {}", self.panels)));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidQuadrature(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if let QuadratureScheme::GaussLegendre { order } = self.scheme {
            if order == 0 {
                return Err(Error::InvalidQuadrature("Gauss-Legendre order must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Nodes and weights of one panel rule on `[-1, 1]`.
struct PanelRule {
    pairs: Vec<(f64, f64)>,
}

impl PanelRule {
    fn new(scheme: QuadratureScheme) -> Self {
        let pairs = match scheme {
            QuadratureScheme::GaussLegendre { order } => {
                let order = NonZeroUsize::new(order).unwrap_or(NonZeroUsize::MIN);
                GaussLegendre::new(order).as_node_weight_pairs().to_vec()
            }
            QuadratureScheme::Simpson => vec![(-1.0, 1.0 / 3.0), (0.0, 4.0 / 3.0), (1.0, 1.0 / 3.0)],
        };
        Self { pairs }
    }

    /// Mapped `(node, weight)` pairs on `[a, b]`.
    fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }
}

/// Splits the window into roughly `panels` sub-panels, at least one per knot interval.
fn panel_edges(breaks: &[f64], panels: usize) -> Vec<f64> {
    let total = breaks[breaks.len() - 1] - breaks[0];
    let mut edges = vec![breaks[0]];
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        let m = ((panels as f64 * len / total).ceil() as usize).max(1);
        let h = len / m as f64;
        for j in 1..m {
            edges.push(w[0] + j as f64 * h);
        }
        edges.push(w[1]);
    }
    edges
}

/// Doubles the panel count until successive estimates agree to `abs_tol`.
fn converge<F>(cfg: &QuadratureConfig, breaks: &[f64], mut estimate: F) -> Result<C64>
where
    F: FnMut(&PanelRule, &[f64]) -> C64,
{
    cfg.validate()?;
    let rule = PanelRule::new(cfg.scheme);
    let mut panels = cfg.panels;
    let mut prev = estimate(&rule, &panel_edges(breaks, panels));
    let mut delta = f64::INFINITY;
    for _ in 0..cfg.max_doublings {
        panels *= 2;
        let next = estimate(&rule, &panel_edges(breaks, panels));
        delta = (next - prev).norm();
        if delta <= cfg.abs_tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergence { panels, delta })
}

fn composite(rule: &PanelRule, edges: &[f64], f: impl Fn(f64) -> C64) -> C64 {
    edges
        .windows(2)
        .map(|w| rule.on(w[0], w[1]).map(|(t, wt)| f(t) * wt).sum::<C64>())
        .sum()
}

/// Adaptive composite quadrature of `f` over the profile window.
pub fn integrate_over(profile: &SweepProfile, cfg: &QuadratureConfig, f: impl Fn(f64) -> C64) -> Result<C64> {
    converge(cfg, &profile.breakpoints(), |rule, edges| composite(rule, edges, &f))
}

/// `q(w, tau) = ∫_0^tau e^{iwt} dt`.
pub fn eval_q(omega: f64, tau: f64) -> C64 {
    let x = omega * tau;
    if x.abs() < Q_SERIES_CUTOFF {
        return tau * C64::new(1.0 - x * x / 6.0, 0.5 * x);
    }
    // (e^{ix} - 1) / (i w) written without cancellation.
    let half = (0.5 * x).sin();
    C64::new(x.sin(), 2.0 * half * half) / omega
}

/// `∂q/∂w = ∫_0^tau i t e^{iwt} dt`.
pub fn eval_dq_domega(omega: f64, tau: f64) -> C64 {
    let x = omega * tau;
    if x.abs() < DQ_SERIES_CUTOFF {
        // i tau^2 * sum_k (ix)^k / (k! (k + 2))
        let mut term = C64::new(1.0, 0.0);
        let mut sum = C64::new(0.5, 0.0);
        for k in 1..40 {
            term *= C64::new(0.0, x) / k as f64;
            let contrib = term / (k + 2) as f64;
            sum += contrib;
            if contrib.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        return C64::i() * tau * tau * sum;
    }
    (tau * C64::from_polar(1.0, x) - eval_q(omega, tau)) / omega
}

/// `p(w, tau) = ∫_0^tau w_p(t) e^{iwt} dt`.
pub fn eval_p(profile: &SweepProfile, omega: f64, quad: &QuadratureConfig) -> Result<C64> {
    let tau = profile.duration();
    match profile.kind() {
        SweepKind::Constant { rate } => Ok(*rate * eval_q(omega, tau)),
        SweepKind::Sampled { .. } => {
            integrate_over(profile, quad, |t| profile.rate_at(t) * C64::from_polar(1.0, omega * t))
        }
    }
}

/// `∂p/∂w = ∫_0^tau i t w_p(t) e^{iwt} dt`.
pub fn eval_dp_domega(profile: &SweepProfile, omega: f64, quad: &QuadratureConfig) -> Result<C64> {
    let tau = profile.duration();
    match profile.kind() {
        SweepKind::Constant { rate } => Ok(*rate * eval_dq_domega(omega, tau)),
        SweepKind::Sampled { .. } => integrate_over(profile, quad, |t| {
            C64::new(0.0, t * profile.rate_at(t)) * C64::from_polar(1.0, omega * t)
        }),
    }
}

fn require_trap_frequency(omega: f64) -> Result<()> {
    require_positive("trap frequency omega", omega)
}

/// Displacement amplitude of one spin branch,
/// `eta = -mu sqrt(w) [Omega q(w) + s p(w)]`.
pub fn eval_eta(
    profile: &SweepProfile,
    omega: f64,
    rotation: f64,
    spin: Spin,
    scale: PhysicalScale,
    quad: &QuadratureConfig,
) -> Result<C64> {
    require_trap_frequency(omega)?;
    let q = eval_q(omega, profile.duration());
    let p = eval_p(profile, omega, quad)?;
    Ok(-scale.mu() * omega.sqrt() * (rotation * q + spin.sign() * p))
}

/// `(x - sin x) / w^2` with `x = w tau`, i.e. `∫_0^tau ∫_0^t1 sin(w (t1 - t2)) dt2 dt1`.
fn sine_kernel_integral(omega: f64, tau: f64) -> f64 {
    let x = omega * tau;
    let numer = if x.abs() < 1e-3 {
        let x3 = x * x * x;
        x3 / 6.0 - x3 * x * x / 120.0 + x3 * x3 * x / 5040.0
    } else {
        x - x.sin()
    };
    numer / (omega * omega)
}

/// Geometric phase of one spin branch,
/// `Phi = ∫_0^tau ∫_0^t1 f(t1) f(t2) sin(w (t1 - t2)) dt2 dt1` with
/// `f(t) = mu sqrt(w) (Omega + s w_p(t))`.
pub fn eval_phi(
    profile: &SweepProfile,
    omega: f64,
    rotation: f64,
    spin: Spin,
    scale: PhysicalScale,
    quad: &QuadratureConfig,
) -> Result<f64> {
    require_trap_frequency(omega)?;
    let amp = scale.mu() * omega.sqrt();
    let s = spin.sign();
    match profile.kind() {
        SweepKind::Constant { rate } => {
            let c = amp * (rotation + s * rate);
            Ok(c * c * sine_kernel_integral(omega, profile.duration()))
        }
        SweepKind::Sampled { .. } => {
            let f = |t: f64| amp * (rotation + s * profile.rate_at(t));
            // Phi = ∫ f(t1) Im(e^{iw t1} G(t1)) dt1 with G(t) = ∫_0^t f e^{-iw t2} dt2,
            // G tabulated panel by panel in a single sweep.
            let value = converge(quad, &profile.breakpoints(), |rule, edges| {
                let mut running = C64::new(0.0, 0.0);
                let mut total = 0.0;
                for w in edges.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    for (t1, wt) in rule.on(a, b) {
                        let partial: C64 =
                            rule.on(a, t1).map(|(t2, w2)| f(t2) * C64::from_polar(w2, -omega * t2)).sum();
                        let g = running + partial;
                        total += wt * f(t1) * (C64::from_polar(1.0, omega * t1) * g).im;
                    }
                    running += rule.on(a, b).map(|(t2, w2)| f(t2) * C64::from_polar(w2, -omega * t2)).sum::<C64>();
                }
                C64::new(total, 0.0)
            })?;
            Ok(value.re)
        }
    }
}

/// sigma_z weight of the trap-frequency generator,
/// `lambda = mu^2 Omega { (1/w) ∫ w_p [cos w(t - tau) - cos wt] dt + 2 ∫ w_p (t - tau) sin(wt) dt }`.
pub fn eval_lambda(
    profile: &SweepProfile,
    omega: f64,
    rotation: f64,
    scale: PhysicalScale,
    quad: &QuadratureConfig,
) -> Result<f64> {
    require_trap_frequency(omega)?;
    let mu2 = scale.mu() * scale.mu();
    let tau = profile.duration();
    match profile.kind() {
        // The cosine difference integrates to zero for a constant rate.
        SweepKind::Constant { rate } => Ok(-2.0 * mu2 * rotation * rate * sine_kernel_integral(omega, tau)),
        SweepKind::Sampled { .. } => {
            let braces = integrate_over(profile, quad, |t| {
                let wp = profile.rate_at(t);
                let cosine = ((omega * (t - tau)).cos() - (omega * t).cos()) / omega;
                let sine = 2.0 * (t - tau) * (omega * t).sin();
                C64::new(wp * (cosine + sine), 0.0)
            })?;
            Ok(mu2 * rotation * braces.re)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ramp(tau: f64) -> SweepProfile {
        SweepProfile::sampled_from_fn(tau, 7, |t| 0.3 + t).unwrap()
    }

    #[test]
    fn q_examples() {
        let q = eval_q(0.0, 5.0);
        assert_eq!(q, C64::new(5.0, 0.0));
        assert!(eval_q(1.0, 2.0 * PI).norm() < 1e-15);
        let q = eval_q(1.0, PI);
        assert!((q - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn q_is_continuous_through_zero() {
        let tau = 3.0;
        for &w in &[1e-9, 1e-7, 1e-5] {
            let series = eval_q(w, tau);
            let exact = (C64::from_polar(1.0, w * tau) - 1.0) / C64::new(0.0, w);
            assert!((series - exact).norm() < 1e-6 * tau, "w = {w}");
        }
    }

    #[test]
    fn p_constant_examples() {
        let quad = QuadratureConfig::default();
        let half = SweepProfile::constant(0.5, 2.0 * PI).unwrap();
        assert!(eval_p(&half, 1.0, &quad).unwrap().norm() < 1e-15);
        let unit = SweepProfile::constant(1.0, PI).unwrap();
        assert!((eval_p(&unit, 1.0, &quad).unwrap() - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn dq_full_period() {
        let d = eval_dq_domega(1.0, 2.0 * PI);
        assert!((d - C64::new(2.0 * PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn dq_matches_central_difference() {
        let (w, tau, h) = (0.7, 3.0, 1e-5);
        let fd = (eval_q(w + h, tau) - eval_q(w - h, tau)) / (2.0 * h);
        let d = eval_dq_domega(w, tau);
        assert!((fd - d).norm() <= 1e-6 * d.norm());
    }

    #[test]
    fn dq_series_and_closed_form_agree_at_switch() {
        let tau = 2.0;
        let below = eval_dq_domega(DQ_SERIES_CUTOFF / tau * (1.0 - 1e-15), tau);
        let above = eval_dq_domega(DQ_SERIES_CUTOFF / tau * (1.0 + 1e-15), tau);
        assert!((below - above).norm() < 1e-12, "{below} vs {above}");
    }

    #[test]
    fn dp_constant_is_scaled_dq() {
        let quad = QuadratureConfig::default();
        let prof = SweepProfile::closing_constant(2.5).unwrap();
        let c = prof.constant_rate().unwrap();
        let d = eval_dp_domega(&prof, 1.3, &quad).unwrap();
        assert!((d - c * eval_dq_domega(1.3, 2.5)).norm() < 1e-15);
    }

    #[test]
    fn eta_examples() {
        let quad = QuadratureConfig::default();
        let mu = PhysicalScale::new(1.0).unwrap();
        let half = SweepProfile::constant(0.5, 2.0 * PI).unwrap();
        assert!(eval_eta(&half, 1.0, 0.0, Spin::Up, mu, &quad).unwrap().norm() < 1e-15);
        assert!(eval_eta(&half, 1.0, 0.3, Spin::Up, mu, &quad).unwrap().norm() < 1e-15);
        let unit = SweepProfile::constant(1.0, PI).unwrap();
        assert!(eval_eta(&unit, 1.0, 1.0, Spin::Down, mu, &quad).unwrap().norm() < 1e-15);
    }

    #[test]
    fn phi_examples() {
        let quad = QuadratureConfig::default();
        let mu = PhysicalScale::new(1.0).unwrap();
        let half = SweepProfile::constant(0.5, 2.0 * PI).unwrap();
        let phi = eval_phi(&half, 1.0, 0.0, Spin::Up, mu, &quad).unwrap();
        assert_relative_eq!(phi, PI / 2.0, max_relative = 1e-14);
        // Omega + s w_p = 0 on the down branch.
        let phi = eval_phi(&half, 1.0, 0.5, Spin::Down, mu, &quad).unwrap();
        assert_eq!(phi, 0.0);
    }

    #[test]
    fn lambda_vanishes_without_rotation() {
        let quad = QuadratureConfig::default();
        let mu = PhysicalScale::new(1.3).unwrap();
        assert_eq!(eval_lambda(&ramp(2.0), 1.1, 0.0, mu, &quad).unwrap(), 0.0);
        let prof = SweepProfile::closing_constant(2.0).unwrap();
        assert_eq!(eval_lambda(&prof, 1.1, 0.0, mu, &quad).unwrap(), 0.0);
    }

    #[test]
    fn lambda_condition_presets() {
        let quad = QuadratureConfig::default();
        let mu = PhysicalScale::new(0.8).unwrap();
        let (w0, big) = (1.7, 0.4);
        for kappa in 1..4u32 {
            let k = kappa as f64;
            let expected = -2.0 * 0.64 * PI * big / w0;
            let one = SweepProfile::constant(w0 / (2.0 * k), 2.0 * PI * k / w0).unwrap();
            assert_relative_eq!(eval_lambda(&one, w0, big, mu, &quad).unwrap(), expected, max_relative = 1e-12);
            let two = SweepProfile::constant(w0 / (2.0 * k + 1.0), PI * (2.0 * k + 1.0) / w0).unwrap();
            assert_relative_eq!(eval_lambda(&two, w0, big, mu, &quad).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn sampled_ramp_agrees_across_schemes() {
        let prof = ramp(2.0);
        let gl = QuadratureConfig::default();
        let simpson = QuadratureConfig { scheme: QuadratureScheme::Simpson, panels: 32, abs_tol: 1e-10, max_doublings: 16 };
        let a = eval_p(&prof, 1.0, &gl).unwrap();
        let b = eval_p(&prof, 1.0, &simpson).unwrap();
        assert!((a - b).norm() <= 1e-9);
    }

    #[test]
    fn closure_is_enforced() {
        assert!(matches!(SweepProfile::constant(1.0, 3.0), Err(Error::ClosureViolation { .. })));
        let bad = SweepProfile::sampled(vec![(0.0, 1.0), (1.0, 1.0)]);
        assert!(matches!(bad, Err(Error::ClosureViolation { .. })));
        assert!(SweepProfile::sampled(vec![(0.0, PI), (0.5, PI), (0.5, PI)]).is_err());
        assert!(SweepProfile::sampled(vec![(0.1, PI), (1.0, PI)]).is_err());
        assert!(SweepProfile::constant(PI, -1.0).is_err());
    }

    #[test]
    fn quadrature_config_is_validated() {
        let prof = ramp(1.0);
        let few = QuadratureConfig { panels: 4, ..QuadratureConfig::default() };
        assert!(matches!(eval_p(&prof, 1.0, &few), Err(Error::InvalidQuadrature(_))));
        let zero = QuadratureConfig { abs_tol: 0.0, ..QuadratureConfig::default() };
        assert!(matches!(eval_p(&prof, 1.0, &zero), Err(Error::InvalidQuadrature(_))));
    }

    #[test]
    fn non_convergence_is_reported() {
        let prof = ramp(1.0);
        let hopeless = QuadratureConfig { abs_tol: 1e-30, max_doublings: 2, ..QuadratureConfig::default() };
        assert!(matches!(eval_p(&prof, 40.0, &hopeless), Err(Error::QuadratureNonConvergence { .. })));
    }
}
