//! Acceptance suite: one test per shipping criterion, each printing a PASS
//! line with the measured values (run with `--nocapture` to see them).
//!
//! Reference computations (dense solves, naive differences, proximal-gradient
//! minimization) are implemented locally in this file so they stay
//! independent of the library paths they check.

use rand::Rng;
use srtc::admm::{solve_s_subproblem, AdmmConfig};
use srtc::data::{apply_missing, synth_scene, BlobShape, BlobSpec, ObservationMask, Scene, SceneSpec};
use srtc::metrics::{foreground_mask, prf, video_metrics, ThresholdPolicy};
use srtc::solver::{run, run_with_factors, SolveResult, SolverConfig};
use srtc::tensor::{fro_norm, inner, multi_project, Matrix, Tensor3};
use srtc::test_util::{random_orthogonal, random_orthonormal, random_tensor, seeded_rng};
use srtc::tucker::{build_phi, build_psi, core_from, hosvd_init, procrustes_align, FactorSet};
use srtc::tv::{diff_adjoint, diff_apply, solve_s_step, spectral_denominator, tv1_norm};
use std::sync::OnceLock;

// ---------------------------------------------------------------------------
// shared fixtures
// ---------------------------------------------------------------------------

struct ConvergenceCase {
    ratio: f64,
    observed: Tensor3,
    mask: ObservationMask,
    result: SolveResult,
}

/// 32x32x16 low-rank scene, no foreground, no noise; solved at the pinned
/// hyperparameters for the three missing ratios.
fn convergence_cases() -> &'static Vec<ConvergenceCase> {
    static CASES: OnceLock<Vec<ConvergenceCase>> = OnceLock::new();
    CASES.get_or_init(|| {
        let spec = SceneSpec {
            dims: (32, 32, 16),
            background_rank: (2, 2, 1),
            blobs: vec![],
            noise_sigma: 0.0,
            seed: 2028,
        };
        let scene = synth_scene(&spec).expect("scene");
        let cfg = SolverConfig {
            lambda: 0.5,
            rho: 0.001,
            ranks: Some((26, 26, 1)),
            outer_tol: 1e-6,
            outer_max_iter: 50,
            admm: AdmmConfig::default(),
            seed: 0,
        };
        [0.1, 0.5, 0.9]
            .into_iter()
            .map(|ratio| {
                let (observed, mask) = apply_missing(&scene.video, ratio, 77).expect("mask");
                let result = run(&observed, &mask, &cfg).expect("solve");
                ConvergenceCase { ratio, observed, mask, result }
            })
            .collect()
    })
}

struct SeparationCase {
    ratio: f64,
    result: SolveResult,
}

/// 48x48x24 scene with a rank-(2,2,1) background and one moving blob under
/// sigma = 2 noise, solved at the three evaluation ratios.
fn separation_cases() -> &'static (Scene, Vec<SeparationCase>) {
    static CASES: OnceLock<(Scene, Vec<SeparationCase>)> = OnceLock::new();
    CASES.get_or_init(|| {
        let spec = SceneSpec {
            dims: (48, 48, 24),
            background_rank: (2, 2, 1),
            blobs: vec![BlobSpec {
                shape: BlobShape::Rectangle,
                size: 8.0,
                intensity: 120.0,
                velocity: (1.0, 1.0),
                start: (10.0, 10.0),
            }],
            noise_sigma: 2.0,
            seed: 33,
        };
        let scene = synth_scene(&spec).expect("scene");
        let cfg = SolverConfig {
            lambda: 0.07,
            ranks: Some((2, 2, 1)),
            outer_max_iter: 150,
            ..SolverConfig::default()
        };
        let cases = [0.5, 0.7, 0.9]
            .into_iter()
            .map(|ratio| {
                let (observed, mask) = apply_missing(&scene.video, ratio, 34).expect("mask");
                let result = run(&observed, &mask, &cfg).expect("solve");
                SeparationCase { ratio, result }
            })
            .collect();
        (scene, cases)
    })
}

fn random_factors(
    rng: &mut impl rand::Rng,
    dims: (usize, usize, usize),
    ranks: (usize, usize, usize),
) -> FactorSet {
    FactorSet::new(
        random_orthonormal(rng, dims.0, ranks.0),
        random_orthonormal(rng, dims.1, ranks.1),
        random_orthonormal(rng, dims.2, ranks.2),
    )
    .expect("orthonormal factors")
}

// ---------------------------------------------------------------------------
// criteria 1-4: convergence behavior of the full solver
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_monotone_objective() {
    for case in convergence_cases() {
        let trace = &case.result.trace;
        let slack = 1e-9 * (1.0 + trace.initial_objective.abs());
        let mut prev = trace.initial_objective;
        for (k, &obj) in trace.objective.iter().enumerate() {
            assert!(
                obj <= prev + slack,
                "missing {:.0}%: objective rose at iteration {}: {prev} -> {obj}",
                case.ratio * 100.0,
                k + 1
            );
            prev = obj;
        }
    }
    println!("criterion 01 PASS: objective nonincreasing at 10/50/90% missing");
}

// Known failure at the 90% ratio: with 16 frames a 90% mask leaves ~18.5% of
// pixels unobserved in every frame (0.9^16), and the rank-26-of-32 projector
// re-injects most of the zero-fill error each pass, so the per-iteration
// changes contract at only ~0.9 per iteration and sit near 2e-3 at iteration
// 50 regardless of scene content. The 10% and 50% ratios meet the threshold
// comfortably.
#[test]
fn criterion_02_vanishing_increments() {
    let mut violations = Vec::new();
    for case in convergence_cases() {
        let trace = &case.result.trace;
        let last = trace.iterations() - 1;
        let checks = [
            ("relchg_x", trace.relchg_x[last]),
            ("relchg_s", trace.relchg_s[last]),
            ("relchg_u1", trace.relchg_u1[last]),
            ("relchg_u2", trace.relchg_u2[last]),
            ("relchg_u3", trace.relchg_u3[last]),
        ];
        for (name, value) in checks {
            if !(value < 1e-4) {
                violations.push(format!(
                    "missing {:.0}%: {name} = {value:.3e} at iteration {}",
                    case.ratio * 100.0,
                    last + 1
                ));
            }
        }
    }
    if violations.is_empty() {
        println!("criterion 02 PASS: all relative changes below 1e-4 within 50 iterations");
    } else {
        println!("criterion 02 FAIL: {}", violations.join("; "));
        panic!("vanishing-increment threshold missed: {}", violations.join("; "));
    }
}

#[test]
fn criterion_03_observed_entry_feasibility() {
    for case in convergence_cases() {
        for (k, &lit) in case.result.trace.literal_fit.iter().enumerate() {
            assert_eq!(
                lit,
                0.0,
                "missing {:.0}%: observed residual nonzero at iteration {}",
                case.ratio * 100.0,
                k + 1
            );
        }
        for i in 0..case.observed.len() {
            if case.mask.is_observed(i) {
                assert_eq!(
                    case.result.x.data()[i].to_bits(),
                    case.observed.data()[i].to_bits(),
                    "missing {:.0}%: observed entry {i} differs",
                    case.ratio * 100.0
                );
            }
        }
    }
    println!("criterion 03 PASS: observed entries preserved bit-exactly after every update");
}

#[test]
fn criterion_04_factor_orthonormality() {
    for case in convergence_cases() {
        for (k, &err) in case.result.trace.orthonormality_error.iter().enumerate() {
            assert!(
                err < 1e-10,
                "missing {:.0}%: orthonormality error {err:.3e} at iteration {}",
                case.ratio * 100.0,
                k + 1
            );
        }
    }
    println!("criterion 04 PASS: every factor orthonormal to 1e-10 at every iteration");
}

// ---------------------------------------------------------------------------
// criterion 5: the closed-form core matches the projected objective
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_closed_form_core_consistency() {
    let mut rng = seeded_rng(505);
    let lambda = 0.7;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let dims = (5, 4, 3);
        let x = random_tensor(&mut rng, dims);
        let s = random_tensor(&mut rng, dims);
        let factors = random_factors(&mut rng, dims, (2, 2, 1));

        let core = core_from(&x, &s, &factors).expect("core");
        let rec = core.reconstruct(&factors).expect("reconstruct");
        let with_core =
            fro_norm(&x.sub(&s).unwrap().sub(&rec).unwrap()).powi(2) + lambda * tv1_norm(&s);

        let diff = x.sub(&s).unwrap();
        let projected = multi_project(&diff, &factors).expect("project");
        let with_projector =
            fro_norm(&diff.sub(&projected).unwrap()).powi(2) + lambda * tv1_norm(&s);

        let rel = (with_core - with_projector).abs() / with_projector.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        assert!(rel < 1e-10, "objective routes disagree by {rel:.3e}");
    }
    println!("criterion 05 PASS: core/projector objectives agree, worst relative gap {worst:.2e}");
}

// ---------------------------------------------------------------------------
// criterion 6: the proximal absorption shifts the trace by a constant
// ---------------------------------------------------------------------------

fn trace_quadratic(v: &Matrix, m: &Matrix) -> f64 {
    let mv = m.matmul(v).expect("shapes");
    let mut acc = 0.0;
    for c in 0..v.cols() {
        for r in 0..v.rows() {
            acc += v.get(r, c) * mv.get(r, c);
        }
    }
    acc
}

#[test]
fn criterion_06_penalty_absorption_shift_constancy() {
    let mut rng = seeded_rng(606);
    let rho = 0.3;
    let mut worst = 0.0f64;
    for instance in 0..3 {
        let dims = (6, 5, 4);
        let x = random_tensor(&mut rng, dims);
        let s = random_tensor(&mut rng, dims);
        let factors = random_factors(&mut rng, dims, (2, 2, 2));
        let psi = build_psi(1, &x, &s, &factors).expect("psi");
        let u_prev = random_orthonormal(&mut rng, 6, 2);
        let phi = build_phi(&psi, &u_prev, rho).expect("phi");

        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for _ in 0..50 {
            let v = random_orthonormal(&mut rng, 6, 2);
            let proj_dist = {
                let d = v.gram().sub(&u_prev.gram()).unwrap();
                d.fro_norm().powi(2)
            };
            let shift = trace_quadratic(&v, &phi) - (trace_quadratic(&v, &psi) - rho * proj_dist);
            lo = lo.min(shift);
            hi = hi.max(shift);
        }
        let spread = hi - lo;
        worst = worst.max(spread);
        assert!(spread < 1e-9, "instance {instance}: shift spread {spread:.3e}");
    }
    println!("criterion 06 PASS: trace shift constant over candidates, worst spread {worst:.2e}");
}

// ---------------------------------------------------------------------------
// criterion 7: inner solver against a proximal-gradient reference
// ---------------------------------------------------------------------------

/// Naive forward differences (periodic), local to the reference path.
fn ref_diff(s: &Tensor3) -> [Tensor3; 3] {
    let (i1, i2, i3) = s.dims();
    let mut out = [Tensor3::zeros(s.dims()), Tensor3::zeros(s.dims()), Tensor3::zeros(s.dims())];
    for c in 0..i3 {
        for b in 0..i2 {
            for a in 0..i1 {
                let cur = s.get(a, b, c);
                out[0].set(a, b, c, s.get((a + 1) % i1, b, c) - cur);
                out[1].set(a, b, c, s.get(a, (b + 1) % i2, c) - cur);
                out[2].set(a, b, c, s.get(a, b, (c + 1) % i3) - cur);
            }
        }
    }
    out
}

fn ref_diff_adjoint(f: &[Tensor3; 3]) -> Tensor3 {
    let (i1, i2, i3) = f[0].dims();
    let mut out = Tensor3::zeros(f[0].dims());
    for c in 0..i3 {
        for b in 0..i2 {
            for a in 0..i1 {
                let acc = (f[0].get((a + i1 - 1) % i1, b, c) - f[0].get(a, b, c))
                    + (f[1].get(a, (b + i2 - 1) % i2, c) - f[1].get(a, b, c))
                    + (f[2].get(a, b, (c + i3 - 1) % i3) - f[2].get(a, b, c));
                out.set(a, b, c, acc);
            }
        }
    }
    out
}

fn ref_tv(s: &Tensor3) -> f64 {
    let d = ref_diff(s);
    d.iter()
        .map(|t| t.data().iter().map(|v| v.abs()).sum::<f64>())
        .sum()
}

/// Objective of the proximal subproblem, evaluated locally.
fn ref_subproblem_objective(
    x: &Tensor3,
    s_anchor: &Tensor3,
    projected: &Tensor3,
    s: &Tensor3,
    lambda: f64,
    rho: f64,
) -> f64 {
    let fit = fro_norm(&x.sub(s).unwrap().sub(projected).unwrap()).powi(2);
    let prox = fro_norm(&s.sub(s_anchor).unwrap()).powi(2);
    fit + lambda * ref_tv(s) + rho * prox
}

/// prox of `t * ||D .||_1` at `z`, solved by projected gradient on the dual.
fn ref_tv_prox(z: &Tensor3, weight: f64, inner_iters: usize) -> Tensor3 {
    let dims = z.dims();
    let mut p = [Tensor3::zeros(dims), Tensor3::zeros(dims), Tensor3::zeros(dims)];
    let step = 1.0 / 12.0; // ||D||^2 <= 12 for three periodic differences
    for _ in 0..inner_iters {
        let primal = z.sub(&ref_diff_adjoint(&p)).unwrap();
        let grad = ref_diff(&primal);
        for d in 0..3 {
            for (pv, gv) in p[d].data_mut().iter_mut().zip(grad[d].data()) {
                *pv = (*pv + step * gv).clamp(-weight, weight);
            }
        }
    }
    z.sub(&ref_diff_adjoint(&p)).unwrap()
}

#[test]
fn criterion_07_inner_solver_matches_proximal_gradient_reference() {
    let mut rng = seeded_rng(707);
    let dims = (4, 4, 3);
    let (lambda, rho) = (0.5, 0.001);
    // unit-scale instance, the regime the solver feeds the inner loop
    let x = Tensor3::from_fn(dims, |_, _, _| rng.gen_range(0.0..1.0));
    let s_anchor = Tensor3::from_fn(dims, |_, _, _| rng.gen_range(0.0..1.0));
    let factors = random_factors(&mut rng, dims, (2, 2, 1));
    let projected = multi_project(&x.sub(&s_anchor).unwrap(), &factors).expect("projection");

    let admm = solve_s_subproblem(&x, &s_anchor, &factors, lambda, rho, &AdmmConfig::default())
        .expect("admm");

    // proximal gradient with step 1/L on the smooth part
    let lip = 2.0 + 2.0 * rho;
    let step = 1.0 / lip;
    let mut s = s_anchor.clone();
    for _ in 0..20_000 {
        let grad = x
            .sub(&s)
            .unwrap()
            .sub(&projected)
            .unwrap()
            .scale(-2.0)
            .add(&s.sub(&s_anchor).unwrap().scale(2.0 * rho))
            .unwrap();
        let z = s.sub(&grad.scale(step)).unwrap();
        s = ref_tv_prox(&z, step * lambda, 80);
    }

    let f_admm = ref_subproblem_objective(&x, &s_anchor, &projected, &admm.s, lambda, rho);
    let f_ref = ref_subproblem_objective(&x, &s_anchor, &projected, &s, lambda, rho);
    let rel = (f_admm - f_ref).abs() / f_ref.abs().max(f64::MIN_POSITIVE);
    assert!(
        rel < 1e-4,
        "inner solver objective {f_admm} vs reference {f_ref} (relative gap {rel:.3e})"
    );
    println!(
        "criterion 07 PASS: inner solver within {rel:.2e} of the proximal-gradient reference"
    );
}

// ---------------------------------------------------------------------------
// criterion 8: FFT solve against dense solves on all small shapes
// ---------------------------------------------------------------------------

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-12, "singular reference system");
        for row in (col + 1)..n {
            let factor = a[row][col] / p;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

#[test]
fn criterion_08_fft_solve_equals_dense_solve() {
    let mut rng = seeded_rng(808);
    let mut worst = 0.0f64;
    for d1 in 2..=4 {
        for d2 in 2..=4 {
            for d3 in 2..=4 {
                let dims = (d1, d2, d3);
                let n = d1 * d2 * d3;
                let rhs = random_tensor(&mut rng, dims);
                for beta in [0.1, 1.0, 10.0] {
                    // dense assembly of (2 I + beta D^T D) column by column
                    let mut a = vec![vec![0.0; n]; n];
                    for j in 0..n {
                        let mut e = Tensor3::zeros(dims);
                        e.data_mut()[j] = 1.0;
                        let col = e
                            .scale(2.0)
                            .add(&ref_diff_adjoint(&ref_diff(&e)).scale(beta))
                            .unwrap();
                        for (i, row) in a.iter_mut().enumerate() {
                            row[j] = col.data()[i];
                        }
                    }
                    let dense = gauss_solve(a, rhs.data().to_vec());
                    let dense = Tensor3::new(dims, dense).unwrap();

                    let denom = spectral_denominator(dims, beta).expect("denominator");
                    let fft = solve_s_step(&rhs, &denom).expect("fft solve");

                    let err = fro_norm(&fft.sub(&dense).unwrap()) / fro_norm(&dense).max(1.0);
                    worst = worst.max(err);
                    assert!(err < 1e-8, "dims {dims:?} beta {beta}: error {err:.3e}");
                }
            }
        }
    }
    println!("criterion 08 PASS: FFT solve matches dense solve, worst error {worst:.2e}");
}

// ---------------------------------------------------------------------------
// criterion 9: adjoint identity
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_adjoint_identity() {
    let mut rng = seeded_rng(909);
    let sizes = [(3, 3, 3), (4, 3, 5), (2, 4, 2), (5, 5, 1), (1, 2, 6)];
    let mut worst = 0.0f64;
    for pair in 0..50 {
        let dims = sizes[pair % sizes.len()];
        let s = random_tensor(&mut rng, dims);
        let f = srtc::tv::DiffField {
            h: random_tensor(&mut rng, dims),
            v: random_tensor(&mut rng, dims),
            t: random_tensor(&mut rng, dims),
        };
        let lhs = diff_apply(&s).inner(&f).unwrap();
        let rhs = inner(&s, &diff_adjoint(&f)).unwrap();
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
        worst = worst.max(rel);
        assert!(rel < 1e-10, "pair {pair} dims {dims:?}: adjoint gap {rel:.3e}");
    }
    println!("criterion 09 PASS: adjoint identity over 50 pairs, worst gap {worst:.2e}");
}

// ---------------------------------------------------------------------------
// criteria 10-11: separation quality on the synthetic analogue
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_background_recovery_psnr() {
    let (scene, cases) = separation_cases();
    let mut reported = Vec::new();
    for case in cases {
        let metrics = video_metrics(&scene.background, &case.result.l).expect("metrics");
        reported.push((case.ratio, metrics.mean_psnr));
    }
    let at = |ratio: f64| {
        reported
            .iter()
            .find(|(r, _)| (*r - ratio).abs() < 1e-9)
            .map(|(_, p)| *p)
            .expect("ratio present")
    };
    let p50 = at(0.5);
    let p90 = at(0.9);
    assert!(p50 >= 35.0, "PSNR at 50% missing is {p50:.2} dB (< 35)");
    assert!(p90 >= 30.0, "PSNR at 90% missing is {p90:.2} dB (< 30)");
    println!(
        "criterion 10 PASS: background PSNR {:.2} dB at 50% and {:.2} dB at 90% missing",
        p50, p90
    );
}

#[test]
fn criterion_11_foreground_fmeasure() {
    let (scene, cases) = separation_cases();
    let case = cases
        .iter()
        .find(|c| (c.ratio - 0.7).abs() < 1e-9)
        .expect("70% case");
    let pred = foreground_mask(&case.result.s, ThresholdPolicy::Otsu);
    let (p, r, f) = prf(&pred, &scene.fg_mask).expect("prf");
    assert!(f >= 0.80, "F-measure at 70% missing is {f:.3} (< 0.80)");
    println!(
        "criterion 11 PASS: foreground F-measure {f:.3} at 70% missing (precision {p:.3}, recall {r:.3})"
    );
}

// ---------------------------------------------------------------------------
// criterion 12: alignment bound
// ---------------------------------------------------------------------------

#[test]
fn criterion_12_alignment_bound() {
    let mut rng = seeded_rng(1212);
    let mut worst_margin = f64::INFINITY;
    for (n, r) in [(8, 3), (16, 5)] {
        for pair in 0..100 {
            let u_k = random_orthonormal(&mut rng, n, r);
            let u_star = random_orthonormal(&mut rng, n, r);
            let aligned = procrustes_align(&u_k, &u_star).expect("alignment");
            let lhs = aligned.sub(&u_star).unwrap().fro_norm().powi(2);
            let rhs = {
                let d = u_k.gram().sub(&u_star.gram()).unwrap();
                d.fro_norm().powi(2)
            };
            worst_margin = worst_margin.min(rhs - lhs);
            assert!(
                lhs <= rhs + 1e-10,
                "size ({n},{r}) pair {pair}: {lhs} > {rhs}"
            );
        }
    }
    println!("criterion 12 PASS: alignment bound holds on 200 pairs, smallest margin {worst_margin:.2e}");
}

// ---------------------------------------------------------------------------
// criterion 13: gauge invariance of the trajectory
// ---------------------------------------------------------------------------

#[test]
fn criterion_13_gauge_invariance() {
    let spec = SceneSpec {
        dims: (24, 24, 10),
        background_rank: (2, 2, 1),
        blobs: vec![],
        noise_sigma: 0.0,
        seed: 13,
    };
    let scene = synth_scene(&spec).expect("scene");
    let (observed, mask) = apply_missing(&scene.video, 0.3, 13).expect("mask");
    let cfg = SolverConfig { outer_max_iter: 20, ..SolverConfig::default() };

    let baseline = run(&observed, &mask, &cfg).expect("baseline solve");

    // re-gauge the HOSVD initialization by random orthogonal factors
    let mut x0 = Tensor3::zeros(observed.dims());
    for i in 0..observed.len() {
        if mask.is_observed(i) {
            x0.data_mut()[i] = observed.data()[i];
        }
    }
    let (init, _) = hosvd_init(&x0, cfg.resolved_ranks(observed.dims())).expect("init");
    let mut rng = seeded_rng(1313);
    let mut gauged = init.clone();
    for mode in 1..=3 {
        let r = gauged.factor(mode).cols();
        let q = random_orthogonal(&mut rng, r);
        let rotated = gauged.factor(mode).matmul(&q).expect("rotation");
        gauged.set_factor(mode, rotated).expect("still orthonormal");
    }
    let regauged = run_with_factors(&observed, &mask, &cfg, gauged).expect("re-gauged solve");

    assert_eq!(
        baseline.trace.iterations(),
        regauged.trace.iterations(),
        "trajectories have different lengths"
    );
    let mut worst = 0.0f64;
    for (a, b) in baseline.trace.objective.iter().zip(&regauged.trace.objective) {
        let gap = (a - b).abs() / a.abs().max(1.0);
        worst = worst.max(gap);
        assert!(gap < 1e-6, "objective traces diverge: {a} vs {b}");
    }
    println!("criterion 13 PASS: objective traces agree under re-gauging, worst gap {worst:.2e}");
}

// ---------------------------------------------------------------------------
// criterion 14: end-to-end determinism of the CLI
// ---------------------------------------------------------------------------

#[test]
fn criterion_14_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_srtc");
    let dir = tempfile::tempdir().expect("tempdir");
    let scene_dir = dir.path().join("scene");

    let synth = std::process::Command::new(bin)
        .args([
            "synth", "--height", "32", "--width", "32", "--frames", "8", "--rank", "2,2,1",
            "--blobs", "1", "--noise", "2", "--seed", "5", "--ratio", "0.5",
        ])
        .arg("--out")
        .arg(&scene_dir)
        .status()
        .expect("synth runs");
    assert!(synth.success());

    let mut outputs = Vec::new();
    for name in ["run1", "run2"] {
        let out_dir = dir.path().join(name);
        let status = std::process::Command::new(bin)
            .args(["run", "--max-iter", "30"])
            .arg("--input")
            .arg(scene_dir.join("observed.srt1"))
            .arg("--mask")
            .arg(scene_dir.join("mask.srt1"))
            .arg("--out")
            .arg(&out_dir)
            .status()
            .expect("solver runs");
        assert!(status.success());
        outputs.push(out_dir);
    }

    for file in ["trace.csv", "x.srt1", "s.srt1", "l.srt1"] {
        let a = std::fs::read(outputs[0].join(file)).expect("first output");
        let b = std::fs::read(outputs[1].join(file)).expect("second output");
        assert_eq!(a, b, "{file} differs between identical invocations");
    }
    println!("criterion 14 PASS: identical invocations produce byte-identical trace.csv");
}
