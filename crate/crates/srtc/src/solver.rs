//! Outer solver: block-coordinate proximal alternating minimization over the
//! factor subspaces, the smooth component, and the completed tensor, with an
//! inner ADMM for the smooth block and full per-iteration diagnostics.

use crate::admm::{solve_s_subproblem, AdmmConfig};
use crate::data::ObservationMask;
use crate::error::{Error, Result};
use crate::metrics::rel_change;
use crate::tensor::{fro_norm, multi_project, Tensor3};
use crate::tucker::{build_phi, build_psi, hosvd_init, orthonormality_error, top_eigvectors, FactorSet};
use crate::tv::tv1_norm;
use std::time::Instant;

/// All solver hyperparameters.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Smoothness weight on the foreground.
    pub lambda: f64,
    /// Proximal coefficient on every block.
    pub rho: f64,
    /// Tucker ranks; `None` applies `(ceil(0.8 H), ceil(0.8 W), 1)`.
    pub ranks: Option<(usize, usize, usize)>,
    /// Stop when the relative change of the completed tensor falls below this.
    pub outer_tol: f64,
    pub outer_max_iter: usize,
    pub admm: AdmmConfig,
    /// Reserved for randomized tie-breaking; the core path is deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            rho: 0.001,
            ranks: None,
            outer_tol: 1e-6,
            outer_max_iter: 50,
            admm: AdmmConfig::default(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Ranks actually used for `dims`, applying the default rule when unset.
    pub fn resolved_ranks(&self, dims: (usize, usize, usize)) -> (usize, usize, usize) {
        self.ranks.unwrap_or_else(|| {
            let spatial = |n: usize| ((0.8 * n as f64).ceil() as usize).clamp(1, n);
            (spatial(dims.0), spatial(dims.1), 1)
        })
    }

    pub fn validate(&self, dims: (usize, usize, usize)) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidConfig(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.rho > 0.0) {
            return Err(Error::InvalidConfig(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.outer_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("outer_tol must be > 0, got {}", self.outer_tol)));
        }
        if self.outer_max_iter == 0 {
            return Err(Error::InvalidConfig("outer_max_iter must be >= 1".into()));
        }
        let ranks = self.resolved_ranks(dims);
        let dims_arr = [dims.0, dims.1, dims.2];
        for (mode, r) in [ranks.0, ranks.1, ranks.2].into_iter().enumerate() {
            if r == 0 || r > dims_arr[mode] {
                return Err(Error::RankExceedsDim { mode: mode + 1, rank: r, dim: dims_arr[mode] });
            }
        }
        self.admm.validate()
    }
}

/// Per-iteration diagnostics of one solve.
#[derive(Debug, Clone, Default)]
pub struct SolveTrace {
    /// Objective at the initial point, before the first iteration.
    pub initial_objective: f64,
    pub objective: Vec<f64>,
    pub relchg_x: Vec<f64>,
    pub relchg_l: Vec<f64>,
    pub relchg_s: Vec<f64>,
    pub relchg_u1: Vec<f64>,
    pub relchg_u2: Vec<f64>,
    pub relchg_u3: Vec<f64>,
    /// `||P_observed(x - f)||_F / max(1, ||f||_F)`; identically zero because
    /// the x-update copies observed entries, recorded for transparency.
    pub literal_fit: Vec<f64>,
    pub inner_iters: Vec<usize>,
    pub elapsed_seconds: Vec<f64>,
    /// Worst `||U^T U - I||_F` over the three factors, per iteration.
    pub orthonormality_error: Vec<f64>,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.objective.len()
    }
}

/// Output of a solve: completed tensor, smooth foreground, low-rank
/// background, final factors, and the iteration trace.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Tensor3,
    pub s: Tensor3,
    pub l: Tensor3,
    pub factors: FactorSet,
    pub trace: SolveTrace,
}

/// Sequential per-mode factor update: for each mode the trace matrix is built
/// with already-updated factors for earlier modes and previous factors for
/// later ones, the proximal penalty is absorbed, and the top eigenvectors are
/// taken.
pub fn update_factors(
    x_k: &Tensor3,
    s_k: &Tensor3,
    factors_k: &FactorSet,
    rho: f64,
) -> Result<FactorSet> {
    let ranks = [factors_k.ranks().0, factors_k.ranks().1, factors_k.ranks().2];
    let mut mixed = factors_k.clone();
    for mode in 1..=3 {
        let psi = build_psi(mode, x_k, s_k, &mixed)?;
        let phi = build_phi(&psi, factors_k.factor(mode), rho)?;
        let updated = top_eigvectors(&phi, ranks[mode - 1])?;
        mixed.set_factor(mode, updated)?;
    }
    Ok(mixed)
}

/// Closed-form x-update: observed entries are copied from `f` bit-for-bit,
/// unobserved entries take `(s + P(x_k - s) + rho x_k) / (1 + rho)`.
pub fn update_x(
    x_k: &Tensor3,
    s_next: &Tensor3,
    factors_next: &FactorSet,
    f: &Tensor3,
    mask: &ObservationMask,
    rho: f64,
) -> Result<Tensor3> {
    mask.check_congruent(x_k.dims())?;
    if f.dims() != x_k.dims() {
        return Err(Error::DimMismatch(format!(
            "observed tensor dims {:?} vs iterate dims {:?}",
            f.dims(),
            x_k.dims()
        )));
    }
    let projected = multi_project(&x_k.sub(s_next)?, factors_next)?;
    let f_tilde = s_next.add(&projected)?;
    let mut out = Tensor3::zeros(x_k.dims());
    for i in 0..out.len() {
        out.data_mut()[i] = if mask.is_observed(i) {
            f.data()[i]
        } else {
            (f_tilde.data()[i] + rho * x_k.data()[i]) / (1.0 + rho)
        };
    }
    Ok(out)
}

/// The projected objective: `||(x - s) - P(x - s)||_F^2 + lambda ||s||_TV1`.
pub fn objective(factors: &FactorSet, s: &Tensor3, x: &Tensor3, lambda: f64) -> Result<f64> {
    let diff = x.sub(s)?;
    let projected = multi_project(&diff, factors)?;
    Ok(fro_norm(&diff.sub(&projected)?).powi(2) + lambda * tv1_norm(s))
}

/// Relative change of the projector `U U^T` between two factor bases.
pub fn projector_rel_change(u_new: &crate::tensor::Matrix, u_old: &crate::tensor::Matrix) -> f64 {
    let diff = u_new.gram().sub(&u_old.gram()).expect("same row count");
    diff.fro_norm() / u_old.gram().fro_norm().max(1.0)
}

/// Runs the full solve: initialization by masking and HOSVD, then the outer
/// alternating loop until `relchg_x <= outer_tol` or the iteration cap.
///
/// The iterates live on an internally normalized scale: the observed data is
/// divided by its largest magnitude before solving and the outputs are scaled
/// back, so the hyperparameter defaults (which presume unit-scale
/// intensities) behave identically for 8-bit-range and unit-range inputs.
/// Observed entries of the returned tensor are copied from the input
/// verbatim. The trace reports the normalized-scale objective.
pub fn run(f: &Tensor3, mask: &ObservationMask, cfg: &SolverConfig) -> Result<SolveResult> {
    let x0 = prepare_initial(f, mask, cfg)?;
    let ranks = cfg.resolved_ranks(f.dims());
    let (factors, _) = hosvd_init(&x0, ranks)?;
    run_with_factors(f, mask, cfg, factors)
}

/// As [`run`] but with caller-supplied initial factors (any orthonormal basis
/// of the desired ranks); used to probe gauge invariance.
pub fn run_with_factors(
    f: &Tensor3,
    mask: &ObservationMask,
    cfg: &SolverConfig,
    init_factors: FactorSet,
) -> Result<SolveResult> {
    let x0_raw = prepare_initial(f, mask, cfg)?;
    let dims = f.dims();
    init_factors.check_dims(dims)?;
    if init_factors.ranks() != cfg.resolved_ranks(dims) {
        return Err(Error::InvalidConfig(format!(
            "initial factor ranks {:?} do not match configured ranks {:?}",
            init_factors.ranks(),
            cfg.resolved_ranks(dims)
        )));
    }

    let scale = observed_peak(f, mask).max(f64::MIN_POSITIVE);
    let f_scaled = f.scale(1.0 / scale);
    let x0 = x0_raw.scale(1.0 / scale);

    let norm_f = fro_norm(&f_scaled);
    let mut factors = init_factors;
    let mut x = x0;
    let mut l = multi_project(&x, &factors)?;
    let mut s = x.sub(&l)?;

    let mut trace = SolveTrace {
        initial_objective: objective(&factors, &s, &x, cfg.lambda)?,
        ..SolveTrace::default()
    };

    for _iter in 0..cfg.outer_max_iter {
        let started = Instant::now();

        let factors_next = update_factors(&x, &s, &factors, cfg.rho)?;
        let admm_out = solve_s_subproblem(&x, &s, &factors_next, cfg.lambda, cfg.rho, &cfg.admm)?;
        let s_next = admm_out.s;
        let x_next = update_x(&x, &s_next, &factors_next, &f_scaled, mask, cfg.rho)?;
        if !x_next.is_finite() {
            return Err(Error::Numerical("solver produced non-finite iterate".into()));
        }

        let l_next = multi_project(&x_next.sub(&s_next)?, &factors_next)?;
        let relchg_x = rel_change(&x_next, &x)?;
        trace.relchg_x.push(relchg_x);
        trace.relchg_s.push(rel_change(&s_next, &s)?);
        trace.relchg_l.push(rel_change(&l_next, &l)?);
        for mode in 1..=3 {
            let rc = projector_rel_change(factors_next.factor(mode), factors.factor(mode));
            match mode {
                1 => trace.relchg_u1.push(rc),
                2 => trace.relchg_u2.push(rc),
                3 => trace.relchg_u3.push(rc),
                _ => unreachable!(),
            }
        }
        trace.objective.push(objective(&factors_next, &s_next, &x_next, cfg.lambda)?);
        trace.literal_fit.push(observed_residual(&x_next, &f_scaled, mask) / norm_f.max(1.0));
        trace.inner_iters.push(admm_out.sweeps);
        trace.orthonormality_error.push(
            (1..=3)
                .map(|m| orthonormality_error(factors_next.factor(m)))
                .fold(0.0, f64::max),
        );
        trace.elapsed_seconds.push(started.elapsed().as_secs_f64());

        factors = factors_next;
        x = x_next;
        s = s_next;
        l = l_next;

        if relchg_x <= cfg.outer_tol {
            break;
        }
    }

    // back to input units; observed entries are the input values verbatim
    let mut x = x.scale(scale);
    for i in 0..x.len() {
        if mask.is_observed(i) {
            x.data_mut()[i] = f.data()[i];
        }
    }
    let s = s.scale(scale);
    let l = l.scale(scale);

    Ok(SolveResult { x, s, l, factors, trace })
}

fn observed_peak(f: &Tensor3, mask: &ObservationMask) -> f64 {
    let mut peak = 0.0f64;
    for i in 0..f.len() {
        if mask.is_observed(i) {
            peak = peak.max(f.data()[i].abs());
        }
    }
    peak
}

fn prepare_initial(f: &Tensor3, mask: &ObservationMask, cfg: &SolverConfig) -> Result<Tensor3> {
    cfg.validate(f.dims())?;
    mask.check_congruent(f.dims())?;
    if mask.observed_count() == 0 {
        return Err(Error::EmptyMask);
    }
    if !f.is_finite() {
        return Err(Error::NonFinite("input tensor".into()));
    }
    // x0 = observed entries of f, zeros elsewhere
    let mut x0 = Tensor3::zeros(f.dims());
    for i in 0..f.len() {
        if mask.is_observed(i) {
            x0.data_mut()[i] = f.data()[i];
        }
    }
    Ok(x0)
}

fn observed_residual(x: &Tensor3, f: &Tensor3, mask: &ObservationMask) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        if mask.is_observed(i) {
            let d = x.data()[i] - f.data()[i];
            acc += d * d;
        }
    }
    acc.sqrt()
}
