//! Inner ADMM solver for the smooth-component subproblem: given the current
//! iterates and fresh factors, minimizes
//! `||x - s - P(x - s_prev)||_F^2 + lambda ||s||_TV1 + rho ||s - s_prev||_F^2`
//! over `s`, where `P` is the multilinear projection onto the factor
//! subspaces. The split form alternates a soft-thresholding step on the
//! stacked differences, an FFT-diagonalized quadratic solve, and a multiplier
//! update with an adaptive penalty.

use crate::error::{Error, Result};
use crate::tensor::{fro_norm, multi_project, Tensor3};
use crate::tucker::FactorSet;
use crate::tv::{diff_adjoint, diff_apply, solve_s_step, spectral_denominator, tv1_norm, DiffField, SpectralDenominator};

/// Parameters of the inner ADMM loop.
#[derive(Debug, Clone)]
pub struct AdmmConfig {
    /// Multiplier step scale.
    pub gamma: f64,
    /// Penalty inflation factor.
    pub c1: f64,
    /// Residual decrease ratio below which the penalty is kept.
    pub c2: f64,
    /// Relative-change stopping tolerance on `s`.
    pub tol: f64,
    /// Sweep cap.
    pub max_iter: usize,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self { gamma: 1.1, c1: 1.15, c2: 0.95, tol: 1e-6, max_iter: 100 }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.c1 > 1.0) {
            return Err(Error::InvalidConfig(format!("c1 must be > 1, got {}", self.c1)));
        }
        if !(self.c2 > 0.0 && self.c2 < 1.0) {
            return Err(Error::InvalidConfig(format!("c2 must be in (0, 1), got {}", self.c2)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Mutable state carried across ADMM sweeps.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub s: Tensor3,
    pub f: DiffField,
    pub lambda_f: DiffField,
    pub beta_f: f64,
    pub err_prev: f64,
}

/// Result of one subproblem solve.
#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    pub s: Tensor3,
    /// Number of sweeps performed.
    pub sweeps: usize,
    /// `||f - D vec(s)||_2` at termination.
    pub primal_residual: f64,
}

/// Elementwise `sign(a) * max(|a| - tau, 0)`.
#[inline]
pub fn soft_threshold(a: f64, tau: f64) -> f64 {
    if a > tau {
        a - tau
    } else if a < -tau {
        a + tau
    } else {
        0.0
    }
}

/// Penalty initialization `10 / mean(|x|)`, guarded against near-zero means.
pub fn initial_beta(x: &Tensor3) -> f64 {
    10.0 / x.mean_abs().max(1e-6)
}

/// Quadratic anchor of the subproblem:
/// `E = (x - P(x - s) + rho s) / (1 + rho)`.
pub fn compute_e(x_k: &Tensor3, s_k: &Tensor3, factors: &FactorSet, rho: f64) -> Result<Tensor3> {
    if !(rho > 0.0) {
        return Err(Error::InvalidConfig(format!("rho must be > 0, got {rho}")));
    }
    let projected = multi_project(&x_k.sub(s_k)?, factors)?;
    let numerator = x_k.sub(&projected)?.add(&s_k.scale(rho))?;
    Ok(numerator.scale(1.0 / (1.0 + rho)))
}

/// Soft-thresholding step on the stacked differences:
/// `f = soft(D vec(s) + lambda_f / beta_f, lambda / ((1 + rho) beta_f))`.
pub fn f_step(
    s: &Tensor3,
    lambda_f: &DiffField,
    beta_f: f64,
    lambda: f64,
    rho: f64,
) -> Result<DiffField> {
    if !(beta_f > 0.0) {
        return Err(Error::InvalidConfig(format!("beta_f must be > 0, got {beta_f}")));
    }
    let tau = lambda / ((1.0 + rho) * beta_f);
    let shifted = diff_apply(s).zip_map(lambda_f, |d, l| d + l / beta_f)?;
    Ok(shifted.map(|a| soft_threshold(a, tau)))
}

/// Quadratic step: solves `(2 I + beta_f D* D) vec(s) = 2 vec(e) + D*(beta_f f - lambda_f)`.
///
/// `denom` must have been built with the same `beta_f`.
pub fn s_step(
    e: &Tensor3,
    f: &DiffField,
    lambda_f: &DiffField,
    beta_f: f64,
    denom: &SpectralDenominator,
) -> Result<Tensor3> {
    if denom.beta() != beta_f {
        return Err(Error::InvalidConfig(format!(
            "spectral denominator built for beta {} but s_step called with {}",
            denom.beta(),
            beta_f
        )));
    }
    let scaled = f.zip_map(lambda_f, |fi, li| beta_f * fi - li)?;
    let rhs = e.scale(2.0).add(&diff_adjoint(&scaled))?;
    solve_s_step(&rhs, denom)
}

/// Multiplier update `lambda_f <- lambda_f - gamma beta_f (f - D vec(s))` and
/// adaptive penalty: `beta_f <- c1 beta_f` when the residual has not dropped
/// below `c2` times the previous one. When the penalty changes the caller
/// must rebuild the spectral denominator before the next quadratic step.
pub fn multiplier_and_beta_update(
    state: AdmmState,
    s_new: Tensor3,
    f_new: DiffField,
    cfg: &AdmmConfig,
) -> Result<AdmmState> {
    let residual = f_new.zip_map(&diff_apply(&s_new), |fi, di| fi - di)?;
    let err = residual.l2_norm();
    let lambda_f = state
        .lambda_f
        .zip_map(&residual, |l, r| l - cfg.gamma * state.beta_f * r)?;
    let beta_f = if err >= cfg.c2 * state.err_prev {
        cfg.c1 * state.beta_f
    } else {
        state.beta_f
    };
    Ok(AdmmState { s: s_new, f: f_new, lambda_f, beta_f, err_prev: err })
}

/// Full subproblem solve: warm-started at `s_k`, zero multipliers, penalty
/// from [`initial_beta`]; sweeps until the relative change of `s` falls to
/// `cfg.tol` or `cfg.max_iter` sweeps have run.
pub fn solve_s_subproblem(
    x_k: &Tensor3,
    s_k: &Tensor3,
    factors: &FactorSet,
    lambda: f64,
    rho: f64,
    cfg: &AdmmConfig,
) -> Result<AdmmOutcome> {
    cfg.validate()?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda must be > 0, got {lambda}")));
    }
    let dims = x_k.dims();
    let e = compute_e(x_k, s_k, factors, rho)?;

    let mut state = AdmmState {
        s: s_k.clone(),
        f: DiffField::zeros(dims),
        lambda_f: DiffField::zeros(dims),
        beta_f: initial_beta(x_k),
        err_prev: f64::INFINITY,
    };
    let mut denom = spectral_denominator(dims, state.beta_f)?;

    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let f_new = f_step(&state.s, &state.lambda_f, state.beta_f, lambda, rho)?;
        let s_new = s_step(&e, &f_new, &state.lambda_f, state.beta_f, &denom)?;
        if !s_new.is_finite() || !f_new.is_finite() {
            return Err(Error::Numerical("inner solver produced non-finite iterate".into()));
        }
        let relchg = fro_norm(&s_new.sub(&state.s)?) / fro_norm(&state.s).max(1.0);

        let beta_before = state.beta_f;
        state = multiplier_and_beta_update(state, s_new, f_new, cfg)?;
        if state.beta_f != beta_before {
            denom = spectral_denominator(dims, state.beta_f)?;
        }
        if relchg <= cfg.tol || sweeps >= cfg.max_iter {
            break;
        }
    }
    let primal_residual = state.err_prev;
    Ok(AdmmOutcome { s: state.s, sweeps, primal_residual })
}

/// Objective of the proximal subproblem the ADMM solves:
/// `||x - s - P(x - s_anchor)||_F^2 + lambda ||s||_TV1 + rho ||s - s_anchor||_F^2`.
pub fn s_subproblem_objective(
    x_k: &Tensor3,
    s_anchor: &Tensor3,
    factors: &FactorSet,
    s: &Tensor3,
    lambda: f64,
    rho: f64,
) -> Result<f64> {
    let projected = multi_project(&x_k.sub(s_anchor)?, factors)?;
    let fit = fro_norm(&x_k.sub(s)?.sub(&projected)?).powi(2);
    let prox = fro_norm(&s.sub(s_anchor)?).powi(2);
    Ok(fit + lambda * tv1_norm(s) + rho * prox)
}
