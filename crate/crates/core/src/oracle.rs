//! Brute-force reference computations on a truncated Fock space.
//!
//! Nothing here uses the generator coefficients or the branch-moment
//! reduction: unitaries are built either by time-ordered propagation of the
//! Hamiltonian or from the displacement-operator form, states live in the full
//! `(2d)^N` space, and the Fisher matrix comes from finite differences of the
//! output state.
//!
//! Single-particle layout is spin-major: indices `0..d` hold `|up, n>`,
//! indices `d..2d` hold `|down, n>`. The two-particle state is stored as a
//! `2d x 2d` matrix `M` with `|psi> = Σ M_ij |i>|j>`, so `U ⊗ U` acts as
//! `M -> U M Uᵀ` and `A ⊗ B` as `M -> A M Bᵀ`.
//!
//! Per spin branch `s = ±1` the Hamiltonian is
//! `H_s(t) = w a†a + i f_s(t) (a - a†)` with `f_s(t) = mu sqrt(w) (W + s w_p(t))`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::generators::{GeneratorCoeffs, Param};
use crate::qfim::Qfim;
use crate::states::{coherent_amplitudes, BranchOperator, MotionalState};
use crate::time_integrals::{eval_eta, eval_phi, PhysicalScale, QuadratureConfig, Spin, SweepProfile};

pub type CMatrix = DMatrix<C64>;

pub const MIN_CUTOFF: usize = 8;
/// Default midpoint step count before adaptive doubling.
pub const DEFAULT_STEPS: usize = 4096;
/// Largest `|U_2n - U_n|` accepted as converged.
pub const STEP_TOL: f64 = 1e-8;
pub const MAX_STEP_DOUBLINGS: u32 = 8;
pub const UNITARITY_TOL: f64 = 1e-8;
/// Largest population tolerated on the top two levels.
pub const LEAKAGE_TOL: f64 = 1e-8;
/// Relative agreement required between finite differences at `h` and `h/2`.
pub const RICHARDSON_TOL: f64 = 1e-4;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Truncated single-particle basis and particle count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedBasis {
    cutoff: usize,
    particles: u32,
}

impl TruncatedBasis {
    pub fn new(cutoff: usize, particles: u32) -> Result<Self> {
        if cutoff < MIN_CUTOFF {
            return Err(Error::InvalidParameter(format!("cutoff must be >= {MIN_CUTOFF}, got {cutoff}")));
        }
        if !(1..=2).contains(&particles) {
            return Err(Error::InvalidParameter(format!("the oracle supports 1 or 2 particles, got {particles}")));
        }
        Ok(Self { cutoff, particles })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    /// Single-particle dimension `2d`.
    pub fn single_dim(&self) -> usize {
        2 * self.cutoff
    }

    /// Total dimension `(2d)^N`.
    pub fn dim(&self) -> usize {
        self.single_dim().pow(self.particles)
    }
}

/// Truncated annihilation operator on `d` levels.
pub fn annihilation(d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Number operator on `d` levels.
pub fn number(d: usize) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |n, _| C64::new(n as f64, 0.0)))
}

/// Block-diagonal single-particle operator from its up and down blocks.
pub fn spin_blocks(up: &CMatrix, down: &CMatrix) -> CMatrix {
    let d = up.nrows();
    let mut out = CMatrix::zeros(2 * d, 2 * d);
    out.view_mut((0, 0), (d, d)).copy_from(up);
    out.view_mut((d, d), (d, d)).copy_from(down);
    out
}

fn spin_index(spin: Spin) -> usize {
    match spin {
        Spin::Up => 0,
        Spin::Down => 1,
    }
}

fn block(m: &CMatrix, spin: Spin) -> CMatrix {
    let d = m.nrows() / 2;
    let o = spin_index(spin) * d;
    m.view((o, o), (d, d)).into_owned()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |U†U - 1|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    max_abs(&(u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())))
}

/// `max |G - G†|`.
pub fn hermiticity_defect(g: &CMatrix) -> f64 {
    max_abs(&(g - g.adjoint()))
}

fn matrix_power(m: &CMatrix, mut k: usize) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &base * &result;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Midpoint-rule product `Π exp(-i H(t_mid) dt)` for one branch with coupling `f(t)`.
/// Runs of identical midpoint Hamiltonians are combined by repeated squaring.
fn propagate_branch(d: usize, omega: f64, tau: f64, steps: usize, coupling: impl Fn(f64) -> f64) -> CMatrix {
    let a = annihilation(d);
    let v = (&a - a.adjoint()) * C64::i();
    let n = number(d);
    let dt = tau / steps as f64;
    let mid = |k: usize| coupling((k as f64 + 0.5) * dt);
    let mut u = CMatrix::identity(d, d);
    let mut k = 0;
    while k < steps {
        let f = mid(k);
        let mut run = 1;
        while k + run < steps && mid(k + run) == f {
            run += 1;
        }
        let h = &n * C64::new(omega, 0.0) + &v * C64::new(f, 0.0);
        let step = (h * C64::new(0.0, -dt)).exp();
        u = matrix_power(&step, run) * u;
        k += run;
    }
    u
}

fn top_population_single(u: &CMatrix, d: usize) -> f64 {
    // Evolved vacuum of each branch: column 0 of each block.
    Spin::BOTH
        .iter()
        .map(|&s| {
            let b = block(u, s);
            (d - 2..d).map(|n| b[(n, 0)].norm_sqr()).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Converged time-ordered single-particle propagator.
#[derive(Debug, Clone)]
pub struct PropagatorResult {
    /// `2d x 2d` block-diagonal unitary.
    pub unitary: CMatrix,
    /// Population on the top two levels of the evolved vacuum.
    pub leakage: f64,
    pub steps: usize,
    /// `max |U_steps - U_steps/2|`, the convergence evidence.
    pub step_delta: f64,
    pub unitarity_defect: f64,
}

fn propagate_fixed(basis: &TruncatedBasis, tau: f64, omega: f64, steps: usize, rate: &dyn Fn(f64) -> f64, rotation: f64, mu: f64) -> CMatrix {
    let d = basis.cutoff();
    let amp = mu * omega.sqrt();
    let up = propagate_branch(d, omega, tau, steps, |t| amp * (rotation + rate(t)));
    let down = propagate_branch(d, omega, tau, steps, |t| amp * (rotation - rate(t)));
    spin_blocks(&up, &down)
}

fn propagate_rate(
    basis: &TruncatedBasis,
    tau: f64,
    rate: &dyn Fn(f64) -> f64,
    omega: f64,
    rotation: f64,
    mu: f64,
    steps: usize,
) -> Result<PropagatorResult> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    let mut steps = steps;
    let mut coarse = propagate_fixed(basis, tau, omega, steps, rate, rotation, mu);
    for _ in 0..MAX_STEP_DOUBLINGS {
        let fine = propagate_fixed(basis, tau, omega, 2 * steps, rate, rotation, mu);
        let step_delta = max_abs(&(&fine - &coarse));
        steps *= 2;
        if step_delta < STEP_TOL {
            let unitarity_defect = unitarity_defect(&fine);
            if unitarity_defect > UNITARITY_TOL {
                return Err(Error::StepNonConvergence { what: "propagator unitarity", detail: format!("defect {unitarity_defect:e}") });
            }
            let leakage = top_population_single(&fine, basis.cutoff());
            if leakage > LEAKAGE_TOL {
                return Err(Error::TruncationLeak { leakage, limit: LEAKAGE_TOL });
            }
            return Ok(PropagatorResult { unitary: fine, leakage, steps, step_delta, unitarity_defect });
        }
        coarse = fine;
    }
    Err(Error::StepNonConvergence { what: "midpoint propagation", detail: format!("not converged at {steps} steps") })
}

/// Time-ordered propagation of the single-particle Hamiltonian over the sweep.
pub fn propagate(
    basis: &TruncatedBasis,
    profile: &SweepProfile,
    omega: f64,
    rotation: f64,
    mu: f64,
    steps: usize,
) -> Result<PropagatorResult> {
    propagate_rate(basis, profile.duration(), &|t| profile.rate_at(t), omega, rotation, mu, steps)
}

/// `e^{-i w a†a tau} e^{i Phi_s} D[eta_s]` per branch, block-diagonal.
pub fn analytic_unitary(
    basis: &TruncatedBasis,
    profile: &SweepProfile,
    omega: f64,
    rotation: f64,
    mu: f64,
    quad: &QuadratureConfig,
) -> Result<CMatrix> {
    let d = basis.cutoff();
    let scale = PhysicalScale::new(mu)?;
    let a = annihilation(d);
    let tau = profile.duration();
    let rot = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |n, _| C64::from_polar(1.0, -omega * n as f64 * tau)));
    let mut blocks = Vec::with_capacity(2);
    for spin in Spin::BOTH {
        let eta = eval_eta(profile, omega, rotation, spin, scale, quad)?;
        let phi = eval_phi(profile, omega, rotation, spin, scale, quad)?;
        let displacement = (a.adjoint() * eta - &a * eta.conj()).exp();
        blocks.push(&rot * displacement * C64::from_polar(1.0, phi));
    }
    Ok(spin_blocks(&blocks[0], &blocks[1]))
}

/// Number-basis amplitudes of a motional state on `d` levels.
pub fn to_vector(state: &MotionalState, d: usize) -> Result<Vec<C64>> {
    let mut v = vec![ZERO; d];
    match state {
        MotionalState::Fock(n) => {
            let n = *n as usize;
            if n + 2 >= d {
                return Err(Error::TruncationLeak { leakage: 1.0, limit: LEAKAGE_TOL });
            }
            v[n] = C64::new(1.0, 0.0);
        }
        MotionalState::Coherent(alpha) => {
            v = coherent_amplitudes(*alpha, d);
            let kept: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            let leakage = (1.0 - kept).max(0.0) + v[d - 2].norm_sqr() + v[d - 1].norm_sqr();
            if leakage > LEAKAGE_TOL {
                return Err(Error::TruncationLeak { leakage, limit: LEAKAGE_TOL });
            }
            let norm = kept.sqrt();
            v.iter_mut().for_each(|c| *c /= norm);
        }
        MotionalState::Vector(psi) => {
            let leakage: f64 = psi.iter().skip(d.saturating_sub(2)).map(|c| c.norm_sqr()).sum();
            if leakage > LEAKAGE_TOL {
                return Err(Error::TruncationLeak { leakage, limit: LEAKAGE_TOL });
            }
            for (dst, src) in v.iter_mut().zip(psi) {
                *dst = *src;
            }
        }
    }
    Ok(v)
}

/// GHZ state in the full `(2d)^N` space.
#[derive(Debug, Clone, PartialEq)]
pub enum GhzState {
    /// `N = 1`: a `2d` column.
    One(CMatrix),
    /// `N = 2`: the `2d x 2d` amplitude matrix `M`.
    Two(CMatrix),
}

impl GhzState {
    pub fn new(basis: &TruncatedBasis, up: &MotionalState, down: &MotionalState) -> Result<Self> {
        let d = basis.cutoff();
        let mut v_up = CMatrix::zeros(2 * d, 1);
        let mut v_down = CMatrix::zeros(2 * d, 1);
        for (n, c) in to_vector(up, d)?.into_iter().enumerate() {
            v_up[(n, 0)] = c;
        }
        for (n, c) in to_vector(down, d)?.into_iter().enumerate() {
            v_down[(d + n, 0)] = c;
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ok(match basis.particles() {
            1 => GhzState::One((v_up + v_down) * C64::new(s, 0.0)),
            _ => GhzState::Two((&v_up * v_up.transpose() + &v_down * v_down.transpose()) * C64::new(s, 0.0)),
        })
    }

    /// Applies `U^{⊗N}`.
    pub fn evolve(&self, u: &CMatrix) -> Self {
        match self {
            GhzState::One(v) => GhzState::One(u * v),
            GhzState::Two(m) => GhzState::Two(u * m * u.transpose()),
        }
    }

    fn amplitudes(&self) -> &CMatrix {
        match self {
            GhzState::One(v) | GhzState::Two(v) => v,
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes().iter().zip(other.amplitudes().iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Population with any particle on one of the top two levels.
    pub fn top_population(&self, d: usize) -> f64 {
        let top = |i: usize| i % d >= d - 2;
        match self {
            GhzState::One(v) => (0..v.nrows()).filter(|&i| top(i)).map(|i| v[(i, 0)].norm_sqr()).sum(),
            GhzState::Two(m) => {
                let mut p = 0.0;
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        if top(i) || top(j) {
                            p += m[(i, j)].norm_sqr();
                        }
                    }
                }
                p
            }
        }
    }

    /// `<A ⊗ B>` for `N = 2`, or `<A B>` for `N = 1`.
    fn expect_product(&self, a: &CMatrix, b: &CMatrix) -> C64 {
        match self {
            GhzState::One(v) => (v.adjoint() * a * b * v)[(0, 0)],
            GhzState::Two(m) => m.iter().zip((a * m * b.transpose()).iter()).map(|(x, y)| x.conj() * y).sum(),
        }
    }

    /// `<Σ_k O_k>` for a single-particle operator `O`.
    pub fn expect_total(&self, o: &CMatrix) -> f64 {
        let id = CMatrix::identity(o.nrows(), o.ncols());
        match self {
            GhzState::One(_) => self.expect_product(o, &id).re,
            GhzState::Two(_) => (self.expect_product(o, &id) + self.expect_product(&id, o)).re,
        }
    }

    /// Symmetrised `Cov(Σ_k O_k, Σ_k P_k)`.
    pub fn covariance_total(&self, o: &CMatrix, p: &CMatrix) -> f64 {
        let id = CMatrix::identity(o.nrows(), o.ncols());
        let second = match self {
            GhzState::One(_) => self.expect_product(o, p).re,
            GhzState::Two(_) => {
                let op = o * p;
                (self.expect_product(&op, &id) + self.expect_product(o, p) + self.expect_product(p, o) + self.expect_product(&id, &op)).re
            }
        };
        second - self.expect_total(o) * self.expect_total(p)
    }

    /// `<O_1>`: expectation of a single-particle operator on particle 1.
    pub fn expect_first(&self, o: &CMatrix) -> C64 {
        let id = CMatrix::identity(o.nrows(), o.ncols());
        self.expect_product(o, &id)
    }
}

/// Which construction supplies the unitary inside the finite-difference QFIM.
#[derive(Debug, Clone, Copy)]
pub enum UnitarySource<'a> {
    Analytic(&'a QuadratureConfig),
    /// Midpoint propagation; the step count is fixed after converging at the centre point.
    Propagated { steps: usize },
}

/// Finite-difference steps for the QFIM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    pub h_omega: f64,
    pub h_rotation: f64,
    pub max_halvings: u32,
}

impl FdOptions {
    /// Relative steps `1e-4` of the true values (absolute `1e-5` for a vanishing `W0`).
    pub fn for_values(omega0: f64, rotation0: f64) -> Self {
        let h = |x: f64| if x.abs() > 0.1 { 1e-4 * x.abs() } else { 1e-5 };
        Self { h_omega: h(omega0), h_rotation: h(rotation0), max_halvings: 4 }
    }
}

/// Finite-difference QFIM with its convergence evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct FdQfim {
    pub qfim: Qfim,
    /// Norm-relative change between steps `h` and `h/2`.
    pub richardson_delta: f64,
    /// Top-two-level population of the evolved state.
    pub leakage: f64,
    pub h_omega: f64,
    pub h_rotation: f64,
}

/// `F_ij = 4 Re(<∂_i psi|∂_j psi> - <∂_i psi|psi><psi|∂_j psi>)` by central
/// differences in `(w, W)` at fixed sweep duration and schedule.
#[allow(clippy::too_many_arguments)]
pub fn qfim_fd(
    basis: &TruncatedBasis,
    up: &MotionalState,
    down: &MotionalState,
    profile: &SweepProfile,
    omega0: f64,
    rotation0: f64,
    mu: f64,
    source: UnitarySource<'_>,
    opts: FdOptions,
) -> Result<FdQfim> {
    let input = GhzState::new(basis, up, down)?;
    let d = basis.cutoff();
    let unitary: Box<dyn Fn(f64, f64) -> Result<CMatrix>> = match source {
        UnitarySource::Analytic(quad) => {
            let quad = *quad;
            Box::new(move |w, r| analytic_unitary(basis, profile, w, r, mu, &quad))
        }
        UnitarySource::Propagated { steps } => {
            let converged = propagate(basis, profile, omega0, rotation0, mu, steps)?.steps;
            let rate = move |t: f64| profile.rate_at(t);
            Box::new(move |w, r| Ok(propagate_fixed(basis, profile.duration(), w, converged, &rate, r, mu)))
        }
    };
    let state = |w: f64, r: f64| -> Result<GhzState> { Ok(input.evolve(&unitary(w, r)?)) };

    let centre = state(omega0, rotation0)?;
    let leakage = centre.top_population(d);
    if leakage > LEAKAGE_TOL {
        return Err(Error::TruncationLeak { leakage, limit: LEAKAGE_TOL });
    }
    let fisher = |hw: f64, hr: f64| -> Result<Qfim> {
        let diff = |plus: GhzState, minus: GhzState, h: f64| {
            let scale = C64::new(0.5 / h, 0.0);
            match (plus, minus) {
                (GhzState::One(p), GhzState::One(m)) => GhzState::One((p - m) * scale),
                (GhzState::Two(p), GhzState::Two(m)) => GhzState::Two((p - m) * scale),
                _ => unreachable!("stencil states share the particle count"),
            }
        };
        let dw = diff(state(omega0 + hw, rotation0)?, state(omega0 - hw, rotation0)?, hw);
        let dr = diff(state(omega0, rotation0 + hr)?, state(omega0, rotation0 - hr)?, hr);
        let f = |x: &GhzState, y: &GhzState| 4.0 * (x.inner(y) - x.inner(&centre) * centre.inner(y)).re;
        Ok(Qfim { f_ww: f(&dw, &dw), f_rr: f(&dr, &dr), f_wr: f(&dw, &dr), particles: basis.particles() })
    };

    let (mut hw, mut hr) = (opts.h_omega, opts.h_rotation);
    let mut coarse = fisher(hw, hr)?;
    let mut delta = f64::INFINITY;
    for _ in 0..=opts.max_halvings {
        hw *= 0.5;
        hr *= 0.5;
        let fine = fisher(hw, hr)?;
        let change = (fine.f_ww - coarse.f_ww).abs().max((fine.f_rr - coarse.f_rr).abs()).max((fine.f_wr - coarse.f_wr).abs());
        delta = change / fine.max_abs().max(f64::MIN_POSITIVE);
        if delta < RICHARDSON_TOL {
            return Ok(FdQfim { qfim: fine, richardson_delta: delta, leakage, h_omega: hw, h_rotation: hr });
        }
        coarse = fine;
    }
    Err(Error::StepNonConvergence { what: "finite-difference QFIM", detail: format!("relative change {delta:e} at h_omega {hw:e}") })
}

/// Numeric single-particle generator `i (∂U†) U` from central differences of the analytic unitary.
#[allow(clippy::too_many_arguments)]
pub fn generator_numeric(
    basis: &TruncatedBasis,
    profile: &SweepProfile,
    omega0: f64,
    rotation0: f64,
    mu: f64,
    which: Param,
    h: f64,
    quad: &QuadratureConfig,
) -> Result<CMatrix> {
    let u = |w: f64, r: f64| analytic_unitary(basis, profile, w, r, mu, quad);
    let (plus, minus) = match which {
        Param::Trap => (u(omega0 + h, rotation0)?, u(omega0 - h, rotation0)?),
        Param::Rotation => (u(omega0, rotation0 + h)?, u(omega0, rotation0 - h)?),
    };
    let centre = u(omega0, rotation0)?;
    let du_dag = (plus - minus).adjoint() * C64::new(0.5 / h, 0.0);
    Ok(du_dag * centre * C64::i())
}

/// The coefficient-form generator as a `2d x 2d` matrix.
pub fn generator_matrix(c: &GeneratorCoeffs, which: Param, d: usize) -> CMatrix {
    let a = annihilation(d);
    let n = number(d);
    let id = CMatrix::identity(d, d);
    let branch = |spin| {
        let o = BranchOperator::new(c, which, spin);
        &a * o.k + a.adjoint() * o.k.conj() + &n * C64::new(o.t, 0.0) + &id * C64::new(o.c, 0.0)
    };
    spin_blocks(&branch(Spin::Up), &branch(Spin::Down))
}

/// Largest entry of the difference of two single-particle operators on the
/// levels `< levels` of each branch, after removing the best identity offset,
/// relative to the largest entry of `reference` there.
pub fn traceless_mismatch(numeric: &CMatrix, reference: &CMatrix, levels: usize) -> f64 {
    let d = numeric.nrows() / 2;
    let idx: Vec<usize> = (0..levels.min(d)).chain(d..d + levels.min(d)).collect();
    let pick = |m: &CMatrix| CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
    let (x, y) = (pick(numeric), pick(reference));
    let mut diff = &x - &y;
    let offset = diff.trace() / idx.len() as f64;
    for i in 0..idx.len() {
        diff[(i, i)] -= offset;
    }
    max_abs(&diff) / max_abs(&y).max(f64::MIN_POSITIVE)
}

/// Single-particle `<[G_w, G_W]>` on the `N = 1` GHZ state built from dense matrices.
pub fn commutator_dense(state: &GhzState, g_omega: &CMatrix, g_rotation: &CMatrix) -> C64 {
    let comm = g_omega * g_rotation - g_rotation * g_omega;
    state.expect_first(&comm)
}
