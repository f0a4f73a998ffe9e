//! Command-line front end: synthetic scene generation, the completion solve
//! with trace and manifest output, metric evaluation, and frame export.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use srtc::admm::AdmmConfig;
use srtc::data::{apply_missing, synth_scene, BlobShape, BlobSpec, SceneSpec};
use srtc::error::Error;
use srtc::io::{export_frames, read_mask, read_tensor, write_mask, write_tensor};
use srtc::metrics::{foreground_mask, prf, psnr, ssim, ForegroundMask, ThresholdPolicy};
use srtc::solver::{run, SolveResult, SolverConfig};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "srtc",
    about = "Joint video recovery and background/foreground separation under missing pixels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene (video, background truth, foreground mask).
    Synth(SynthArgs),
    /// Solve: recover the tensor and split it into background + foreground.
    Run(RunArgs),
    /// Evaluate recovery (PSNR/SSIM) and optionally foreground detection.
    Eval(EvalArgs),
    /// Export a tensor as one PGM image per frame.
    Export(ExportArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 48)]
    height: usize,
    #[arg(long, default_value_t = 48)]
    width: usize,
    #[arg(long, default_value_t = 24)]
    frames: usize,
    /// Background Tucker rank as r1,r2,r3.
    #[arg(long, default_value = "2,2,1", value_parser = parse_ranks)]
    rank: (usize, usize, usize),
    /// Number of procedurally generated moving blobs.
    #[arg(long, default_value_t = 1)]
    blobs: usize,
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 2.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write observed.srt1 and mask.srt1 with this missing-pixel ratio.
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Observed video tensor (SRT1).
    #[arg(long)]
    input: PathBuf,
    /// Observation mask (0/1 SRT1).
    #[arg(long)]
    mask: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = 0.001)]
    rho: f64,
    /// "auto" for (ceil(0.8 H), ceil(0.8 W), 1) or explicit r1,r2,r3.
    #[arg(long, default_value = "auto")]
    ranks: String,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    admm_tol: f64,
    #[arg(long, default_value_t = 100)]
    admm_max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock seconds in trace.csv instead of the 0.000
    /// placeholder. Timings always go to manifest.json; the placeholder keeps
    /// default trace files byte-reproducible.
    #[arg(long, default_value_t = false)]
    timing: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Estimated tensor (SRT1), e.g. the recovered background.
    #[arg(long)]
    est: PathBuf,
    /// Ground-truth tensor (SRT1).
    #[arg(long)]
    truth: PathBuf,
    /// Estimated foreground tensor (SRT1); binarized before scoring.
    #[arg(long, requires = "fg_truth")]
    fg_est: Option<PathBuf>,
    /// Ground-truth foreground mask (0/1 SRT1).
    #[arg(long, requires = "fg_est")]
    fg_truth: Option<PathBuf>,
    /// Binarization threshold on |foreground|; Otsu when omitted.
    #[arg(long)]
    fg_threshold: Option<f64>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_ranks(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected r1,r2,r3 but got {s:?}"));
    }
    let mut vals = [0usize; 3];
    for (i, p) in parts.iter().enumerate() {
        vals[i] = p
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("bad rank component {p:?}: {e}"))?;
    }
    Ok((vals[0], vals[1], vals[2]))
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::InvalidMode(_) | Error::RankExceedsDim { .. } => EXIT_USAGE,
        Error::DimMismatch(_)
        | Error::EmptyMask
        | Error::Format(_)
        | Error::NonFinite(_)
        | Error::Io(_) => EXIT_DATA,
        Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Run(args) => cmd_run(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Export(args) => cmd_export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Procedural blob parameters drawn from the scene seed; every blob stays in
/// frame across the whole clip.
fn generate_blobs(count: usize, dims: (usize, usize, usize), seed: u64) -> Vec<BlobSpec> {
    let (h, w, t) = dims;
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(0x626c_6f62));
    let min_dim = h.min(w) as f64;
    let mut blobs = Vec::with_capacity(count);
    for i in 0..count {
        let size = (min_dim / 8.0 + rng.gen_range(0.0..min_dim / 8.0)).max(2.0);
        let intensity = rng.gen_range(60.0..110.0);
        let shape = if i % 2 == 0 { BlobShape::Rectangle } else { BlobShape::Disc };
        let dir: (f64, f64) = loop {
            let dh = rng.gen_range(-1i32..=1) as f64;
            let dw = rng.gen_range(-1i32..=1) as f64;
            if dh != 0.0 || dw != 0.0 {
                break (dh, dw);
            }
        };
        let frames = (t.max(2) - 1) as f64;
        let speed_cap = |extent: f64| ((extent - size - 2.0).max(0.0) / frames).min(1.0);
        let velocity = (dir.0 * speed_cap(h as f64), dir.1 * speed_cap(w as f64));
        let start_along = |extent: f64, v: f64| {
            let margin = size / 2.0 + 1.0;
            let lo = margin + if v < 0.0 { -v * frames } else { 0.0 };
            let hi = (extent - margin) - if v > 0.0 { v * frames } else { 0.0 };
            if hi > lo {
                lo + (hi - lo) * 0.5
            } else {
                extent / 2.0
            }
        };
        let start = (start_along(h as f64, velocity.0), start_along(w as f64, velocity.1));
        blobs.push(BlobSpec { shape, size, intensity, velocity, start });
    }
    blobs
}

fn cmd_synth(args: SynthArgs) -> Result<(), Error> {
    if let Some(ratio) = args.ratio {
        if !(0.0..1.0).contains(&ratio) {
            return Err(Error::InvalidConfig(format!("--ratio must be in [0, 1), got {ratio}")));
        }
    }
    let dims = (args.height, args.width, args.frames);
    let spec = SceneSpec {
        dims,
        background_rank: args.rank,
        blobs: generate_blobs(args.blobs, dims, args.seed),
        noise_sigma: args.noise,
        seed: args.seed,
    };
    let scene = synth_scene(&spec)?;
    fs::create_dir_all(&args.out)?;
    write_tensor(&args.out.join("video.srt1"), &scene.video)?;
    write_tensor(&args.out.join("background.srt1"), &scene.background)?;
    write_tensor(&args.out.join("fgmask.srt1"), &scene.fg_mask.to_tensor())?;
    if let Some(ratio) = args.ratio {
        let (observed, mask) = apply_missing(&scene.video, ratio, args.seed)?;
        write_tensor(&args.out.join("observed.srt1"), &observed)?;
        write_mask(&args.out.join("mask.srt1"), &mask)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ManifestInput {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct ManifestAdmm {
    gamma: f64,
    c1: f64,
    c2: f64,
    tol: f64,
    max_iter: usize,
}

#[derive(Serialize)]
struct ManifestConfig {
    lambda: f64,
    rho: f64,
    ranks: [usize; 3],
    outer_tol: f64,
    outer_max_iter: usize,
    admm: ManifestAdmm,
    seed: u64,
}

#[derive(Serialize)]
struct RunManifest {
    build_id: String,
    started_unix: u64,
    finished_unix: u64,
    input: ManifestInput,
    mask: ManifestInput,
    config: ManifestConfig,
    iterations: usize,
    converged: bool,
    timing_in_trace: bool,
    total_seconds: f64,
    per_iteration_seconds: Vec<f64>,
}

fn sha256_of(path: &Path) -> Result<String, Error> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        write!(hex, "{b:02x}").expect("writing to string");
    }
    Ok(hex)
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn format_float(v: f64) -> String {
    format!("{v}")
}

fn write_trace_csv(path: &Path, result: &SolveResult, timing: bool) -> Result<(), Error> {
    let trace = &result.trace;
    let mut out = String::new();
    out.push_str(
        "iter,objective,relchg_x,relchg_s,relchg_l,relchg_u1,relchg_u2,relchg_u3,literal_fit_criterion,inner_iters,seconds\n",
    );
    for i in 0..trace.iterations() {
        let seconds = if timing {
            format!("{:.3}", trace.elapsed_seconds[i])
        } else {
            "0.000".to_string()
        };
        let row = [
            (i + 1).to_string(),
            format_float(trace.objective[i]),
            format_float(trace.relchg_x[i]),
            format_float(trace.relchg_s[i]),
            format_float(trace.relchg_l[i]),
            format_float(trace.relchg_u1[i]),
            format_float(trace.relchg_u2[i]),
            format_float(trace.relchg_u3[i]),
            format_float(trace.literal_fit[i]),
            trace.inner_iters[i].to_string(),
            seconds,
        ]
        .join(",");
        out.push_str(&row);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let started_unix = unix_now();
    let started = Instant::now();

    let input = read_tensor(&args.input)?;
    let mask = read_mask(&args.mask)?;

    let ranks = if args.ranks.trim() == "auto" {
        None
    } else {
        Some(parse_ranks(&args.ranks).map_err(Error::InvalidConfig)?)
    };
    let cfg = SolverConfig {
        lambda: args.lambda,
        rho: args.rho,
        ranks,
        outer_tol: args.tol,
        outer_max_iter: args.max_iter,
        admm: AdmmConfig {
            tol: args.admm_tol,
            max_iter: args.admm_max_iter,
            ..AdmmConfig::default()
        },
        seed: args.seed,
    };
    cfg.validate(input.dims())?;

    let result = run(&input, &mask, &cfg)?;

    fs::create_dir_all(&args.out)?;
    write_tensor(&args.out.join("x.srt1"), &result.x)?;
    write_tensor(&args.out.join("s.srt1"), &result.s)?;
    write_tensor(&args.out.join("l.srt1"), &result.l)?;
    write_trace_csv(&args.out.join("trace.csv"), &result, args.timing)?;

    let resolved = cfg.resolved_ranks(input.dims());
    let converged = result
        .trace
        .relchg_x
        .last()
        .map(|&rc| rc <= cfg.outer_tol)
        .unwrap_or(false);
    let manifest = RunManifest {
        build_id: env!("SRTC_BUILD_ID").to_string(),
        started_unix,
        finished_unix: unix_now(),
        input: ManifestInput {
            path: args.input.display().to_string(),
            sha256: sha256_of(&args.input)?,
        },
        mask: ManifestInput {
            path: args.mask.display().to_string(),
            sha256: sha256_of(&args.mask)?,
        },
        config: ManifestConfig {
            lambda: cfg.lambda,
            rho: cfg.rho,
            ranks: [resolved.0, resolved.1, resolved.2],
            outer_tol: cfg.outer_tol,
            outer_max_iter: cfg.outer_max_iter,
            admm: ManifestAdmm {
                gamma: cfg.admm.gamma,
                c1: cfg.admm.c1,
                c2: cfg.admm.c2,
                tol: cfg.admm.tol,
                max_iter: cfg.admm.max_iter,
            },
            seed: cfg.seed,
        },
        iterations: result.trace.iterations(),
        converged,
        timing_in_trace: args.timing,
        total_seconds: started.elapsed().as_secs_f64(),
        per_iteration_seconds: result.trace.elapsed_seconds.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Format(format!("manifest serialization: {e}")))?;
    fs::write(args.out.join("manifest.json"), json)?;
    Ok(())
}

fn per_frame_prf(pred: &ForegroundMask, truth: &ForegroundMask, frame: usize) -> (f64, f64, f64) {
    let (h, w, _) = pred.dims();
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut f_n = 0u64;
    for b in 0..w {
        for a in 0..h {
            match (pred.get(a, b, frame), truth.get(a, b, frame)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => f_n += 1,
                (false, false) => {}
            }
        }
    }
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let p = ratio(tp, tp + fp);
    let r = ratio(tp, tp + f_n);
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f)
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let est = read_tensor(&args.est)?;
    let truth = read_tensor(&args.truth)?;
    if est.dims() != truth.dims() {
        return Err(Error::DimMismatch(format!(
            "estimate dims {:?} vs truth dims {:?}",
            est.dims(),
            truth.dims()
        )));
    }

    let fg = match (&args.fg_est, &args.fg_truth) {
        (Some(fg_est), Some(fg_truth)) => {
            let s = read_tensor(fg_est)?;
            let truth_mask = ForegroundMask::from_tensor(&read_tensor(fg_truth)?)?;
            if s.dims() != est.dims() || truth_mask.dims() != est.dims() {
                return Err(Error::DimMismatch(
                    "foreground tensors must match the video dims".into(),
                ));
            }
            let policy = match args.fg_threshold {
                Some(tau) => ThresholdPolicy::Fixed(tau),
                None => ThresholdPolicy::Otsu,
            };
            Some((foreground_mask(&s, policy), truth_mask))
        }
        (None, None) => None,
        // clap's `requires` rejects one-sided flag pairs before we get here
        _ => unreachable!(),
    };

    let frames = est.dims().2;
    let mut psnr_acc = 0.0;
    let mut ssim_acc = 0.0;
    let mut prf_acc = (0.0, 0.0, 0.0);

    if fg.is_some() {
        println!("frame,psnr,ssim,precision,recall,fmeasure");
    } else {
        println!("frame,psnr,ssim");
    }
    for t in 0..frames {
        let p = psnr(&truth.frame(t), &est.frame(t), 255.0)?;
        let s = ssim(&truth.frame(t), &est.frame(t))?;
        psnr_acc += p;
        ssim_acc += s;
        match &fg {
            Some((pred, truth_mask)) => {
                let (pr, rc, fm) = per_frame_prf(pred, truth_mask, t);
                prf_acc.0 += pr;
                prf_acc.1 += rc;
                prf_acc.2 += fm;
                println!(
                    "{t},{},{},{},{},{}",
                    format_float(p),
                    format_float(s),
                    format_float(pr),
                    format_float(rc),
                    format_float(fm)
                );
            }
            None => println!("{t},{},{}", format_float(p), format_float(s)),
        }
    }
    let n = frames as f64;
    match &fg {
        Some((pred, truth_mask)) => {
            let (vp, vr, vf) = prf(pred, truth_mask)?;
            println!(
                "mean,{},{},{},{},{}",
                format_float(psnr_acc / n),
                format_float(ssim_acc / n),
                format_float(prf_acc.0 / n),
                format_float(prf_acc.1 / n),
                format_float(prf_acc.2 / n)
            );
            // whole-video counts, alongside the per-frame means
            println!("video,,,{},{},{}", format_float(vp), format_float(vr), format_float(vf));
        }
        None => {
            println!("mean,{},{}", format_float(psnr_acc / n), format_float(ssim_acc / n));
        }
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<(), Error> {
    let tensor = read_tensor(&args.input)?;
    export_frames(&tensor, &args.out)?;
    Ok(())
}
