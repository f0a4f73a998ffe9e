//! End-to-end tests of the command-line interface: file outputs, exit codes,
//! and the CSV surfaces.

use srtc::io::{read_mask, read_tensor, write_mask, write_tensor};
use srtc::data::ObservationMask;
use srtc::metrics::{prf, ForegroundMask};
use srtc::tensor::Tensor3;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_srtc")
}

fn run_cli<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn files_equal(a: &Path, b: &Path) -> bool {
    std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
}

#[test]
fn synth_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let out = run_cli([
            "synth", "--height", "24", "--width", "20", "--frames", "6", "--blobs", "2",
            "--noise", "1.5", "--seed", "9", "--ratio", "0.25", "--out",
            dir.path().join(name).to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["video.srt1", "background.srt1", "fgmask.srt1", "observed.srt1", "mask.srt1"] {
        assert!(
            files_equal(&dir.path().join("a").join(file), &dir.path().join("b").join(file)),
            "{file} differs between identical seeds"
        );
    }

    let out = run_cli([
        "synth", "--height", "24", "--width", "20", "--frames", "6", "--blobs", "2",
        "--noise", "1.5", "--seed", "10", "--out",
        dir.path().join("c").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(!files_equal(
        &dir.path().join("a").join("video.srt1"),
        &dir.path().join("c").join("video.srt1")
    ));
}

#[test]
fn synth_without_blobs_or_noise_matches_background() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli([
        "synth", "--height", "16", "--width", "16", "--frames", "4", "--blobs", "0",
        "--noise", "0", "--seed", "3", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(files_equal(
        &dir.path().join("video.srt1"),
        &dir.path().join("background.srt1")
    ));
}

#[test]
fn synth_ratio_produces_exact_mask_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli([
        "synth", "--height", "10", "--width", "10", "--frames", "10", "--blobs", "0",
        "--noise", "0", "--seed", "4", "--ratio", "0.5", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mask = read_mask(&dir.path().join("mask.srt1")).unwrap();
    assert_eq!(mask.observed_count(), 500);
    assert_eq!(mask.len(), 1000);

    // observed.srt1 is the video with unobserved entries zeroed
    let video = read_tensor(&dir.path().join("video.srt1")).unwrap();
    let observed = read_tensor(&dir.path().join("observed.srt1")).unwrap();
    for i in 0..video.len() {
        if mask.is_observed(i) {
            assert_eq!(observed.data()[i], video.data()[i]);
        } else {
            assert_eq!(observed.data()[i], 0.0);
        }
    }
}

#[test]
fn run_constant_fully_observed_converges_fast() {
    let dir = tempfile::tempdir().unwrap();
    let dims = (12, 12, 4);
    let video = Tensor3::constant(dims, 99.0);
    write_tensor(&dir.path().join("video.srt1"), &video).unwrap();
    write_mask(&dir.path().join("mask.srt1"), &ObservationMask::all_observed(dims)).unwrap();

    let out_dir = dir.path().join("out");
    let out = run_cli([
        "run", "--input", dir.path().join("video.srt1").to_str().unwrap(),
        "--mask", dir.path().join("mask.srt1").to_str().unwrap(),
        "--ranks", "1,1,1", "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let rows: Vec<&str> = trace.lines().collect();
    assert_eq!(
        rows[0],
        "iter,objective,relchg_x,relchg_s,relchg_l,relchg_u1,relchg_u2,relchg_u3,literal_fit_criterion,inner_iters,seconds"
    );
    assert!(rows.len() - 1 <= 3, "took {} iterations", rows.len() - 1);
    let last: Vec<&str> = rows.last().unwrap().split(',').collect();
    let objective: f64 = last[1].parse().unwrap();
    assert!(objective < 1e-8, "objective = {objective}");

    // outputs exist and the recovery is exact
    let x = read_tensor(&out_dir.join("x.srt1")).unwrap();
    assert_eq!(x.data(), video.data());
    assert!(out_dir.join("manifest.json").exists());
    assert!(out_dir.join("s.srt1").exists());
    assert!(out_dir.join("l.srt1").exists());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["ranks"], serde_json::json!([1, 1, 1]));
    assert_eq!(manifest["config"]["lambda"], serde_json::json!(0.5));
    assert!(manifest["input"]["sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn run_trace_objective_is_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli([
        "synth", "--height", "20", "--width", "20", "--frames", "6", "--blobs", "1",
        "--noise", "1", "--seed", "8", "--ratio", "0.4", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out_dir = dir.path().join("out");
    let out = run_cli([
        "run", "--input", dir.path().join("observed.srt1").to_str().unwrap(),
        "--mask", dir.path().join("mask.srt1").to_str().unwrap(),
        "--max-iter", "20", "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let mut prev = f64::INFINITY;
    for line in trace.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let objective: f64 = fields[1].parse().unwrap();
        assert!(objective <= prev * (1.0 + 1e-9) + 1e-12, "objective rose: {prev} -> {objective}");
        // the literal stopping criterion is identically zero once recorded
        let literal: f64 = fields[8].parse().unwrap();
        assert_eq!(literal, 0.0);
        prev = objective;
    }
}

#[test]
fn run_rejects_out_of_range_ranks_with_usage_exit() {
    let dir = tempfile::tempdir().unwrap();
    let dims = (8, 8, 4);
    write_tensor(&dir.path().join("v.srt1"), &Tensor3::constant(dims, 1.0)).unwrap();
    write_mask(&dir.path().join("m.srt1"), &ObservationMask::all_observed(dims)).unwrap();
    let out = run_cli([
        "run", "--input", dir.path().join("v.srt1").to_str().unwrap(),
        "--mask", dir.path().join("m.srt1").to_str().unwrap(),
        "--ranks", "999,1,1", "--out", dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli([
        "run", "--input", dir.path().join("nope.srt1").to_str().unwrap(),
        "--mask", dir.path().join("nope2.srt1").to_str().unwrap(),
        "--out", dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_empty_mask_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let dims = (8, 8, 4);
    write_tensor(&dir.path().join("v.srt1"), &Tensor3::constant(dims, 1.0)).unwrap();
    let empty = ObservationMask::new(dims, vec![false; 256]).unwrap();
    write_mask(&dir.path().join("m.srt1"), &empty).unwrap();
    let out = run_cli([
        "run", "--input", dir.path().join("v.srt1").to_str().unwrap(),
        "--mask", dir.path().join("m.srt1").to_str().unwrap(),
        "--out", dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn eval_identical_tensors_report_capped_psnr_and_unit_ssim() {
    let dir = tempfile::tempdir().unwrap();
    let dims = (12, 12, 3);
    let t = Tensor3::from_fn(dims, |a, b, c| (a * 7 + b * 3 + c) as f64 % 200.0);
    write_tensor(&dir.path().join("t.srt1"), &t).unwrap();
    let out = run_cli([
        "eval", "--est", dir.path().join("t.srt1").to_str().unwrap(),
        "--truth", dir.path().join("t.srt1").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "frame,psnr,ssim");
    assert_eq!(lines.len(), 1 + 3 + 1); // header, three frames, mean
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1], "200");
        assert_eq!(fields[2], "1");
    }
}

#[test]
fn eval_foreground_scores_match_library_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let dims = (12, 12, 2);
    // deterministic synthetic foreground estimate and truth mask
    let s_est = Tensor3::from_fn(dims, |a, b, _| if a < 4 && b < 6 { 50.0 } else { 0.5 });
    let truth = ForegroundMask::new(
        dims,
        (0..288)
            .map(|i| {
                let a = i % 12;
                let b = (i / 12) % 12;
                a < 5 && b < 5
            })
            .collect(),
    )
    .unwrap();
    write_tensor(&dir.path().join("s.srt1"), &s_est).unwrap();
    write_tensor(&dir.path().join("truth.srt1"), &truth.to_tensor()).unwrap();
    write_tensor(&dir.path().join("bg.srt1"), &Tensor3::constant(dims, 100.0)).unwrap();

    let out = run_cli([
        "eval", "--est", dir.path().join("bg.srt1").to_str().unwrap(),
        "--truth", dir.path().join("bg.srt1").to_str().unwrap(),
        "--fg-est", dir.path().join("s.srt1").to_str().unwrap(),
        "--fg-truth", dir.path().join("truth.srt1").to_str().unwrap(),
        "--fg-threshold", "10",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let video_line = stdout
        .lines()
        .find(|l| l.starts_with("video,"))
        .expect("whole-video row");
    let fields: Vec<&str> = video_line.split(',').collect();
    let (p_cli, r_cli, f_cli): (f64, f64, f64) = (
        fields[3].parse().unwrap(),
        fields[4].parse().unwrap(),
        fields[5].parse().unwrap(),
    );

    let pred = srtc::metrics::foreground_mask(&s_est, srtc::metrics::ThresholdPolicy::Fixed(10.0));
    let (p, r, f) = prf(&pred, &truth).unwrap();
    assert!((p_cli - p).abs() < 1e-12);
    assert!((r_cli - r).abs() < 1e-12);
    assert!((f_cli - f).abs() < 1e-12);
}

#[test]
fn eval_one_sided_foreground_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let dims = (12, 12, 2);
    write_tensor(&dir.path().join("t.srt1"), &Tensor3::constant(dims, 1.0)).unwrap();
    let out = run_cli([
        "eval", "--est", dir.path().join("t.srt1").to_str().unwrap(),
        "--truth", dir.path().join("t.srt1").to_str().unwrap(),
        "--fg-est", dir.path().join("t.srt1").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn export_writes_one_pgm_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    let dims = (5, 6, 3);
    write_tensor(&dir.path().join("t.srt1"), &Tensor3::constant(dims, 128.0)).unwrap();
    let out_dir = dir.path().join("frames");
    let out = run_cli([
        "export", "--input", dir.path().join("t.srt1").to_str().unwrap(),
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut names: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, vec!["frame_0000.pgm", "frame_0001.pgm", "frame_0002.pgm"]);
    let bytes = std::fs::read(out_dir.join("frame_0000.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n6 5\n255\n"));
    assert!(bytes[b"P5\n6 5\n255\n".len()..].iter().all(|&b| b == 0x80));
}
