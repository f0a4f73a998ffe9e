//! Periodic forward-difference operators along the three tensor directions,
//! the anisotropic TV norm they induce, and the FFT machinery that
//! diagonalizes `D* D` for the quadratic solve.
//!
//! Conventions: differences are "next minus current" with periodic wrap
//! (index `I - 1` pairs with index `0`), so the adjoint is the negated
//! backward difference. An axis of length 1 has an identically zero
//! difference operator.

use crate::error::{Error, Result};
use crate::tensor::Tensor3;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// The three difference images of a source tensor, stored unstacked.
#[derive(Debug, Clone)]
pub struct DiffField {
    /// Difference along the first (height) direction.
    pub h: Tensor3,
    /// Difference along the second (width) direction.
    pub v: Tensor3,
    /// Difference along the third (temporal) direction.
    pub t: Tensor3,
}

impl DiffField {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self {
            h: Tensor3::zeros(dims),
            v: Tensor3::zeros(dims),
            t: Tensor3::zeros(dims),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.h.dims()
    }

    pub fn check_congruent(&self, other: &DiffField) -> Result<()> {
        if self.h.dims() != other.h.dims() {
            return Err(Error::DimMismatch(format!(
                "difference fields {:?} vs {:?}",
                self.h.dims(),
                other.h.dims()
            )));
        }
        Ok(())
    }

    /// Entrywise map over all three components.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> DiffField {
        let apply = |t: &Tensor3, f: &mut dyn FnMut(f64) -> f64| {
            let data = t.data().iter().map(|&v| f(v)).collect();
            Tensor3::new(t.dims(), data).expect("same length")
        };
        DiffField {
            h: apply(&self.h, &mut f),
            v: apply(&self.v, &mut f),
            t: apply(&self.t, &mut f),
        }
    }

    /// Entrywise combine with another field.
    pub fn zip_map(&self, other: &DiffField, mut f: impl FnMut(f64, f64) -> f64) -> Result<DiffField> {
        self.check_congruent(other)?;
        let apply = |a: &Tensor3, b: &Tensor3, f: &mut dyn FnMut(f64, f64) -> f64| {
            let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
            Tensor3::new(a.dims(), data).expect("same length")
        };
        Ok(DiffField {
            h: apply(&self.h, &other.h, &mut f),
            v: apply(&self.v, &other.v, &mut f),
            t: apply(&self.t, &other.t, &mut f),
        })
    }

    /// Euclidean norm over the stacked components.
    pub fn l2_norm(&self) -> f64 {
        let sq = |t: &Tensor3| t.data().iter().map(|v| v * v).sum::<f64>();
        (sq(&self.h) + sq(&self.v) + sq(&self.t)).sqrt()
    }

    /// Inner product over the stacked components.
    pub fn inner(&self, other: &DiffField) -> Result<f64> {
        self.check_congruent(other)?;
        let dot = |a: &Tensor3, b: &Tensor3| -> f64 {
            a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
        };
        Ok(dot(&self.h, &other.h) + dot(&self.v, &other.v) + dot(&self.t, &other.t))
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.v.is_finite() && self.t.is_finite()
    }
}

/// Forward differences with periodic wrap along all three directions.
pub fn diff_apply(s: &Tensor3) -> DiffField {
    let (i1, i2, i3) = s.dims();
    let mut h = Tensor3::zeros(s.dims());
    let mut v = Tensor3::zeros(s.dims());
    let mut t = Tensor3::zeros(s.dims());
    for c in 0..i3 {
        for b in 0..i2 {
            for a in 0..i1 {
                let cur = s.get(a, b, c);
                h.set(a, b, c, s.get((a + 1) % i1, b, c) - cur);
                v.set(a, b, c, s.get(a, (b + 1) % i2, c) - cur);
                t.set(a, b, c, s.get(a, b, (c + 1) % i3) - cur);
            }
        }
    }
    DiffField { h, v, t }
}

/// Adjoint of [`diff_apply`]: `D* f = D_h^T f_h + D_v^T f_v + D_t^T f_t`,
/// where each transpose is the negated backward difference.
pub fn diff_adjoint(f: &DiffField) -> Tensor3 {
    let (i1, i2, i3) = f.dims();
    let mut out = Tensor3::zeros(f.dims());
    for c in 0..i3 {
        for b in 0..i2 {
            for a in 0..i1 {
                let acc = (f.h.get((a + i1 - 1) % i1, b, c) - f.h.get(a, b, c))
                    + (f.v.get(a, (b + i2 - 1) % i2, c) - f.v.get(a, b, c))
                    + (f.t.get(a, b, (c + i3 - 1) % i3) - f.t.get(a, b, c));
                out.set(a, b, c, acc);
            }
        }
    }
    out
}

/// Anisotropic total variation: the l1 norm of the stacked differences.
pub fn tv1_norm(s: &Tensor3) -> f64 {
    let (i1, i2, i3) = s.dims();
    let mut acc = 0.0;
    for c in 0..i3 {
        for b in 0..i2 {
            for a in 0..i1 {
                let cur = s.get(a, b, c);
                acc += (s.get((a + 1) % i1, b, c) - cur).abs();
                acc += (s.get(a, (b + 1) % i2, c) - cur).abs();
                acc += (s.get(a, b, (c + 1) % i3) - cur).abs();
            }
        }
    }
    acc
}

/// Per-frequency denominator `2 + beta * sum_d |fft(D_d kernel)|^2` of the
/// linear system `(2 I + beta D* D) vec(S) = vec(rhs)`.
///
/// Every entry is at least 2 and the zero-frequency entry is exactly 2,
/// since the difference kernels annihilate constants.
#[derive(Debug, Clone)]
pub struct SpectralDenominator {
    values: Tensor3,
    beta: f64,
}

impl SpectralDenominator {
    pub fn values(&self) -> &Tensor3 {
        &self.values
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.values.dims()
    }
}

/// Builds the [`SpectralDenominator`] for given dims and penalty `beta >= 0`.
///
/// The squared eigenvalue magnitude of a periodic forward difference along an
/// axis of length `n` at frequency `k` is `|e^{2 pi i k / n} - 1|^2 =
/// 2 - 2 cos(2 pi k / n)`; length-1 axes contribute zero.
pub fn spectral_denominator(dims: (usize, usize, usize), beta: f64) -> Result<SpectralDenominator> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidConfig(format!("beta must be >= 0, got {beta}")));
    }
    let eig = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect()
    };
    let (e1, e2, e3) = (eig(dims.0), eig(dims.1), eig(dims.2));
    let values = Tensor3::from_fn(dims, |a, b, c| 2.0 + beta * (e1[a] + e2[b] + e3[c]));
    Ok(SpectralDenominator { values, beta })
}

/// Solves `(2 I + beta D* D) vec(S) = vec(rhs)` by pointwise division in the
/// 3D Fourier domain; the imaginary residue of the inverse transform is
/// discarded.
pub fn solve_s_step(rhs: &Tensor3, denom: &SpectralDenominator) -> Result<Tensor3> {
    if rhs.dims() != denom.dims() {
        return Err(Error::DimMismatch(format!(
            "rhs dims {:?} vs denominator dims {:?}",
            rhs.dims(),
            denom.dims()
        )));
    }
    let dims = rhs.dims();
    let mut buf: Vec<Complex<f64>> = rhs.data().iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft3(&mut buf, dims, false);
    for (z, &d) in buf.iter_mut().zip(denom.values.data()) {
        *z /= d;
    }
    fft3(&mut buf, dims, true);
    let n = (dims.0 * dims.1 * dims.2) as f64;
    let data = buf.iter().map(|z| z.re / n).collect();
    Tensor3::new(dims, data)
}

/// In-place 3D FFT over the crate's first-index-fastest layout. The inverse
/// transform is unnormalized; callers divide by the element count.
fn fft3(buf: &mut [Complex<f64>], dims: (usize, usize, usize), inverse: bool) {
    let (i1, i2, i3) = dims;
    let mut planner = FftPlanner::new();
    let plan = |n: usize, planner: &mut FftPlanner<f64>| {
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    };

    // axis 0: contiguous fibers
    if i1 > 1 {
        let fft = plan(i1, &mut planner);
        for chunk in buf.chunks_exact_mut(i1) {
            fft.process(chunk);
        }
    }

    // axis 1: stride i1 within each (i1 x i2) slab
    if i2 > 1 {
        let fft = plan(i2, &mut planner);
        let mut fiber = vec![Complex::new(0.0, 0.0); i2];
        for c in 0..i3 {
            let slab = c * i1 * i2;
            for a in 0..i1 {
                for b in 0..i2 {
                    fiber[b] = buf[slab + a + i1 * b];
                }
                fft.process(&mut fiber);
                for b in 0..i2 {
                    buf[slab + a + i1 * b] = fiber[b];
                }
            }
        }
    }

    // axis 2: stride i1 * i2
    if i3 > 1 {
        let fft = plan(i3, &mut planner);
        let stride = i1 * i2;
        let mut fiber = vec![Complex::new(0.0, 0.0); i3];
        for ab in 0..stride {
            for c in 0..i3 {
                fiber[c] = buf[ab + stride * c];
            }
            fft.process(&mut fiber);
            for c in 0..i3 {
                buf[ab + stride * c] = fiber[c];
            }
        }
    }
}
