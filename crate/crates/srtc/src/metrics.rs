//! Evaluation indices: PSNR and single-scale SSIM per frame, foreground
//! precision/recall/F-measure, foreground binarization, and the relative
//! change / relative error convergence diagnostics.

use crate::error::{Error, Result};
use crate::tensor::{fro_norm, Matrix, Tensor3};

/// PSNR is capped here so identical inputs report a finite sentinel.
pub const PSNR_CAP_DB: f64 = 200.0;

/// Peak signal-to-noise ratio in dB: `10 log10(peak^2 / MSE)`.
pub fn psnr(reference: &Matrix, estimate: &Matrix, peak: f64) -> Result<f64> {
    if reference.rows() != estimate.rows() || reference.cols() != estimate.cols() {
        return Err(Error::DimMismatch(format!(
            "frames {}x{} vs {}x{}",
            reference.rows(),
            reference.cols(),
            estimate.rows(),
            estimate.cols()
        )));
    }
    if !(peak > 0.0) {
        return Err(Error::InvalidConfig(format!("peak must be > 0, got {peak}")));
    }
    let n = reference.data().len() as f64;
    let mse: f64 = reference
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (peak * peak / mse).log10()).min(PSNR_CAP_DB))
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const SSIM_DYNAMIC_RANGE: f64 = 255.0;

fn gaussian_window() -> [f64; SSIM_WINDOW * SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW * SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for j in 0..SSIM_WINDOW {
        for i in 0..SSIM_WINDOW {
            let d2 = (i as f64 - c).powi(2) + (j as f64 - c).powi(2);
            let v = (-d2 / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
            w[i + SSIM_WINDOW * j] = v;
            sum += v;
        }
    }
    for v in w.iter_mut() {
        *v /= sum;
    }
    w
}

/// Single-scale SSIM with the standard parameters: 11x11 Gaussian window
/// (sigma 1.5), K1 = 0.01, K2 = 0.03, dynamic range 255, averaged over all
/// fully interior windows. Frames must be at least 11x11.
pub fn ssim(reference: &Matrix, estimate: &Matrix) -> Result<f64> {
    if reference.rows() != estimate.rows() || reference.cols() != estimate.cols() {
        return Err(Error::DimMismatch(format!(
            "frames {}x{} vs {}x{}",
            reference.rows(),
            reference.cols(),
            estimate.rows(),
            estimate.cols()
        )));
    }
    let (rows, cols) = (reference.rows(), reference.cols());
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::DimMismatch(format!(
            "frame {rows}x{cols} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )));
    }
    let window = gaussian_window();
    let c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE).powi(2);

    let mut acc = 0.0;
    let mut count = 0usize;
    for wc in 0..=(cols - SSIM_WINDOW) {
        for wr in 0..=(rows - SSIM_WINDOW) {
            let mut mu_x = 0.0;
            let mut mu_y = 0.0;
            let mut xx = 0.0;
            let mut yy = 0.0;
            let mut xy = 0.0;
            for j in 0..SSIM_WINDOW {
                for i in 0..SSIM_WINDOW {
                    let w = window[i + SSIM_WINDOW * j];
                    let x = reference.get(wr + i, wc + j);
                    let y = estimate.get(wr + i, wc + j);
                    mu_x += w * x;
                    mu_y += w * y;
                    xx += w * x * x;
                    yy += w * y * y;
                    xy += w * x * y;
                }
            }
            let sigma_x = xx - mu_x * mu_x;
            let sigma_y = yy - mu_y * mu_y;
            let sigma_xy = xy - mu_x * mu_y;
            let num = (2.0 * mu_x * mu_y + c1) * (2.0 * sigma_xy + c2);
            let den = (mu_x * mu_x + mu_y * mu_y + c1) * (sigma_x + sigma_y + c2);
            acc += num / den;
            count += 1;
        }
    }
    Ok(acc / count as f64)
}

/// Per-frame PSNR/SSIM arrays with their means.
#[derive(Debug, Clone)]
pub struct FrameMetrics {
    pub psnr: Vec<f64>,
    pub ssim: Vec<f64>,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
}

/// Frame-by-frame PSNR and SSIM of an estimated video against a reference.
pub fn video_metrics(reference: &Tensor3, estimate: &Tensor3) -> Result<FrameMetrics> {
    if reference.dims() != estimate.dims() {
        return Err(Error::DimMismatch(format!(
            "videos {:?} vs {:?}",
            reference.dims(),
            estimate.dims()
        )));
    }
    let frames = reference.dims().2;
    let mut psnr_per = Vec::with_capacity(frames);
    let mut ssim_per = Vec::with_capacity(frames);
    for t in 0..frames {
        let r = reference.frame(t);
        let e = estimate.frame(t);
        psnr_per.push(psnr(&r, &e, 255.0)?);
        ssim_per.push(ssim(&r, &e)?);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(FrameMetrics {
        mean_psnr: mean(&psnr_per),
        mean_ssim: mean(&ssim_per),
        psnr: psnr_per,
        ssim: ssim_per,
    })
}

/// Binary foreground support congruent with a video tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundMask {
    dims: (usize, usize, usize),
    mask: Vec<bool>,
}

impl ForegroundMask {
    pub fn new(dims: (usize, usize, usize), mask: Vec<bool>) -> Result<Self> {
        if mask.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::DimMismatch(format!(
                "mask length {} does not match dims {dims:?}",
                mask.len()
            )));
        }
        Ok(Self { dims, mask })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> bool {
        self.mask[a + self.dims.0 * (b + self.dims.1 * c)]
    }

    #[inline]
    pub fn at(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn true_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn to_tensor(&self) -> Tensor3 {
        let data = self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Tensor3::new(self.dims, data).expect("same length")
    }

    pub fn from_tensor(t: &Tensor3) -> Result<Self> {
        let mut mask = Vec::with_capacity(t.len());
        for &v in t.data() {
            if v == 1.0 {
                mask.push(true);
            } else if v == 0.0 {
                mask.push(false);
            } else {
                return Err(Error::Format(format!("mask entries must be 0 or 1, found {v}")));
            }
        }
        Self::new(t.dims(), mask)
    }
}

/// Precision, recall, and F-measure of a predicted foreground mask, with the
/// 0/0 -> 0 convention.
pub fn prf(pred: &ForegroundMask, truth: &ForegroundMask) -> Result<(f64, f64, f64)> {
    if pred.dims != truth.dims {
        return Err(Error::DimMismatch(format!(
            "masks {:?} vs {:?}",
            pred.dims, truth.dims
        )));
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut f_n = 0u64;
    for (p, t) in pred.mask.iter().zip(&truth.mask) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => f_n += 1,
            (false, false) => {}
        }
    }
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + f_n);
    let f = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok((precision, recall, f))
}

/// How the foreground magnitude image is binarized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// Per-video Otsu threshold on `|s|`.
    Otsu,
    /// Entries with `|s| > tau` are foreground.
    Fixed(f64),
}

/// Binarizes a foreground tensor by magnitude under the chosen policy.
pub fn foreground_mask(s: &Tensor3, policy: ThresholdPolicy) -> ForegroundMask {
    let mask = match policy {
        ThresholdPolicy::Fixed(tau) => s.data().iter().map(|v| v.abs() > tau).collect(),
        ThresholdPolicy::Otsu => otsu_mask(s),
    };
    ForegroundMask { dims: s.dims(), mask }
}

fn otsu_mask(s: &Tensor3) -> Vec<bool> {
    const BINS: usize = 256;
    let max = s.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = s.data().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(max - min > f64::EPSILON * max.max(1.0)) {
        // constant magnitude offers no separation
        return vec![false; s.len()];
    }
    let bin_of = |v: f64| -> usize { ((v.abs() / max) * BINS as f64).min(BINS as f64 - 1.0) as usize };
    let mut hist = [0u64; BINS];
    for &v in s.data() {
        hist[bin_of(v)] += 1;
    }
    let total = s.len() as f64;
    let total_mean: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &h)| i as f64 * h as f64)
        .sum::<f64>()
        / total;

    // maximize between-class variance; ties resolve to the lowest threshold
    let mut best_k = 0usize;
    let mut best_var = -1.0f64;
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    for k in 0..BINS - 1 {
        w0 += hist[k] as f64 / total;
        sum0 += k as f64 * hist[k] as f64 / total;
        if w0 <= 0.0 || w0 >= 1.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let w1 = 1.0 - w0;
        let mu1 = (total_mean - sum0) / w1;
        let var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if var > best_var + 1e-12 {
            best_var = var;
            best_k = k;
        }
    }
    s.data().iter().map(|&v| bin_of(v) > best_k).collect()
}

/// `||a_k - a_prev||_F / max(1, ||a_prev||_F)`.
pub fn rel_change(a_k: &Tensor3, a_prev: &Tensor3) -> Result<f64> {
    let diff = a_k.sub(a_prev)?;
    Ok(fro_norm(&diff) / fro_norm(a_prev).max(1.0))
}

/// `||a_k - a_star||_F / max(1, ||a_star||_F)`.
pub fn rel_err(a_k: &Tensor3, a_star: &Tensor3) -> Result<f64> {
    let diff = a_k.sub(a_star)?;
    Ok(fro_norm(&diff) / fro_norm(a_star).max(1.0))
}
