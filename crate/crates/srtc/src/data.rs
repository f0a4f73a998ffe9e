//! Observation masks, synthetic scene generation, and missing-pixel
//! injection. Scenes are built so ground truth is exact: the background is an
//! exact low-rank Tucker tensor with values inside [0, 255], the foreground
//! is a set of constant-intensity blobs moving at constant velocity, and the
//! noise is seeded Gaussian.

use crate::error::{Error, Result};
use crate::metrics::ForegroundMask;
use crate::tensor::{mode_mul, Matrix, Tensor3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Index set of observed entries, stored densely and congruent with the
/// tensors it masks.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMask {
    dims: (usize, usize, usize),
    observed: Vec<bool>,
    observed_count: usize,
}

impl ObservationMask {
    pub fn new(dims: (usize, usize, usize), observed: Vec<bool>) -> Result<Self> {
        let len = dims.0 * dims.1 * dims.2;
        if observed.len() != len {
            return Err(Error::DimMismatch(format!(
                "mask length {} does not match dims {:?}",
                observed.len(),
                dims
            )));
        }
        let observed_count = observed.iter().filter(|&&b| b).count();
        Ok(Self { dims, observed, observed_count })
    }

    pub fn all_observed(dims: (usize, usize, usize)) -> Self {
        let len = dims.0 * dims.1 * dims.2;
        Self { dims, observed: vec![true; len], observed_count: len }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    /// Observedness at linear index `i` in `vec(·)` order.
    #[inline]
    pub fn is_observed(&self, i: usize) -> bool {
        self.observed[i]
    }

    pub fn observed_count(&self) -> usize {
        self.observed_count
    }

    pub fn check_congruent(&self, dims: (usize, usize, usize)) -> Result<()> {
        if self.dims != dims {
            return Err(Error::DimMismatch(format!(
                "mask dims {:?} vs tensor dims {dims:?}",
                self.dims
            )));
        }
        Ok(())
    }

    /// 0/1 tensor representation, the on-disk convention.
    pub fn to_tensor(&self) -> Tensor3 {
        let data = self.observed.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Tensor3::new(self.dims, data).expect("same length")
    }

    /// Parses a 0/1 tensor; any other value is rejected.
    pub fn from_tensor(t: &Tensor3) -> Result<Self> {
        let mut observed = Vec::with_capacity(t.len());
        for &v in t.data() {
            if v == 1.0 {
                observed.push(true);
            } else if v == 0.0 {
                observed.push(false);
            } else {
                return Err(Error::Format(format!("mask entries must be 0 or 1, found {v}")));
            }
        }
        Self::new(t.dims(), observed)
    }
}

/// Shape of a synthetic foreground blob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlobShape {
    Rectangle,
    Disc,
}

/// One moving foreground object: constant intensity over its support,
/// constant velocity in pixels per frame.
#[derive(Debug, Clone)]
pub struct BlobSpec {
    pub shape: BlobShape,
    /// Diameter (disc) or side length (rectangle), in pixels.
    pub size: f64,
    pub intensity: f64,
    /// (rows, cols) displacement per frame.
    pub velocity: (f64, f64),
    /// (row, col) center at frame 0.
    pub start: (f64, f64),
}

/// Full description of a synthetic scene.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub dims: (usize, usize, usize),
    pub background_rank: (usize, usize, usize),
    pub blobs: Vec<BlobSpec>,
    pub noise_sigma: f64,
    pub seed: u64,
}

/// Generated scene: noisy observed video, exact background truth, and the
/// true foreground support mask.
#[derive(Debug, Clone)]
pub struct Scene {
    pub video: Tensor3,
    pub background: Tensor3,
    pub fg_mask: ForegroundMask,
}

const BACKGROUND_LEVEL: f64 = 120.0;
const BACKGROUND_AMPLITUDE: f64 = 55.0;

/// Generates a scene: `video = clamp(background + foreground + noise, 0, 255)`.
///
/// The background is exactly Tucker rank `background_rank` with the all-ones
/// direction inside each factor's span, so it stays exactly low-rank after
/// the constant brightness offset; with temporal rank 1 every frame is
/// identical. Deterministic for a fixed seed.
pub fn synth_scene(spec: &SceneSpec) -> Result<Scene> {
    validate_spec(spec)?;
    let dims = spec.dims;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);

    let u1 = orthonormal_with_constant_column(&mut rng, dims.0, spec.background_rank.0);
    let u2 = orthonormal_with_constant_column(&mut rng, dims.1, spec.background_rank.1);
    let u3 = orthonormal_with_constant_column(&mut rng, dims.2, spec.background_rank.2);

    // deviation part: a random core with the DC entry zeroed
    let mut core = Tensor3::from_fn(spec.background_rank, |_, _, _| rng.gen_range(-1.0..1.0));
    core.set(0, 0, 0, 0.0);
    let mut dev = core;
    dev = mode_mul(&dev, &u1, 1)?;
    dev = mode_mul(&dev, &u2, 2)?;
    dev = mode_mul(&dev, &u3, 3)?;
    let peak = dev.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 { BACKGROUND_AMPLITUDE / peak } else { 0.0 };
    let background = Tensor3::from_fn(dims, |a, b, c| BACKGROUND_LEVEL + scale * dev.get(a, b, c));

    let mut foreground = Tensor3::zeros(dims);
    let mut mask = vec![false; background.len()];
    for (bi, blob) in spec.blobs.iter().enumerate() {
        for t in 0..dims.2 {
            let center = (
                blob.start.0 + blob.velocity.0 * t as f64,
                blob.start.1 + blob.velocity.1 * t as f64,
            );
            let mut support = 0usize;
            let half = blob.size / 2.0;
            for b in 0..dims.1 {
                for a in 0..dims.0 {
                    let dr = a as f64 - center.0;
                    let dc = b as f64 - center.1;
                    let inside = match blob.shape {
                        BlobShape::Rectangle => dr.abs() <= half && dc.abs() <= half,
                        BlobShape::Disc => dr * dr + dc * dc <= half * half,
                    };
                    if inside {
                        support += 1;
                        let idx = a + dims.0 * (b + dims.1 * t);
                        foreground.data_mut()[idx] += blob.intensity;
                        mask[idx] = true;
                    }
                }
            }
            if support == 0 {
                return Err(Error::InvalidConfig(format!(
                    "blob {bi} leaves the frame entirely at t = {t}"
                )));
            }
        }
    }

    let video = Tensor3::from_fn(dims, |a, b, c| {
        let noise = if spec.noise_sigma > 0.0 {
            spec.noise_sigma * standard_normal(&mut rng)
        } else {
            0.0
        };
        (background.get(a, b, c) + foreground.get(a, b, c) + noise).clamp(0.0, 255.0)
    });

    Ok(Scene { video, background, fg_mask: ForegroundMask::new(dims, mask)? })
}

fn validate_spec(spec: &SceneSpec) -> Result<()> {
    let (h, w, t) = spec.dims;
    let (r1, r2, r3) = spec.background_rank;
    if h == 0 || w == 0 || t == 0 {
        return Err(Error::InvalidConfig(format!("scene dims must be positive, got {:?}", spec.dims)));
    }
    for (mode, r, d) in [(1, r1, h), (2, r2, w), (3, r3, t)] {
        if r == 0 || r > d {
            return Err(Error::RankExceedsDim { mode, rank: r, dim: d });
        }
    }
    if !(spec.noise_sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!("noise sigma must be >= 0, got {}", spec.noise_sigma)));
    }
    for (i, blob) in spec.blobs.iter().enumerate() {
        if !(blob.size > 0.0) {
            return Err(Error::InvalidConfig(format!("blob {i} size must be > 0")));
        }
        if !(0.0..=255.0).contains(&blob.intensity) {
            return Err(Error::InvalidConfig(format!(
                "blob {i} intensity {} outside [0, 255]",
                blob.intensity
            )));
        }
    }
    Ok(())
}

/// Orthonormal `n x r` basis whose first column is the constant direction.
fn orthonormal_with_constant_column(rng: &mut impl Rng, n: usize, r: usize) -> Matrix {
    let mut m = Matrix::from_fn(n, r, |_, c| if c == 0 { 1.0 } else { 0.0 });
    for j in 1..r {
        for i in 0..n {
            m.set(i, j, standard_normal(rng));
        }
    }
    // modified Gram-Schmidt
    for j in 0..r {
        for k in 0..j {
            let dot: f64 = (0..n).map(|i| m.get(i, k) * m.get(i, j)).sum();
            for i in 0..n {
                let v = m.get(i, j) - dot * m.get(i, k);
                m.set(i, j, v);
            }
        }
        let norm: f64 = (0..n).map(|i| m.get(i, j).powi(2)).sum::<f64>().sqrt();
        assert!(norm > 1e-12, "degenerate basis column");
        for i in 0..n {
            m.set(i, j, m.get(i, j) / norm);
        }
    }
    m
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Marks `round(ratio * len)` entries as unobserved, chosen uniformly without
/// replacement from a seeded generator, and zeroes them in the returned
/// tensor. Deterministic for a fixed seed.
pub fn apply_missing(x: &Tensor3, ratio: f64, seed: u64) -> Result<(Tensor3, ObservationMask)> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::InvalidConfig(format!("missing ratio must be in [0, 1), got {ratio}")));
    }
    let len = x.len();
    let n_missing = (ratio * len as f64).round() as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // partial Fisher-Yates: the first n_missing slots are the sample
    let mut indices: Vec<usize> = (0..len).collect();
    for i in 0..n_missing {
        let j = rng.gen_range(i..len);
        indices.swap(i, j);
    }

    let mut observed = vec![true; len];
    let mut data = x.data().to_vec();
    for &idx in &indices[..n_missing] {
        observed[idx] = false;
        data[idx] = 0.0;
    }
    let mask = ObservationMask::new(x.dims(), observed)?;
    Ok((Tensor3::new(x.dims(), data)?, mask))
}
