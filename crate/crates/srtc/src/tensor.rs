//! Dense order-3 tensors and the multilinear algebra primitives used by the
//! solver: mode-n unfolding/folding, mode-n products, inner products, and
//! multilinear projection onto a set of factor subspaces.
//!
//! # Memory layout
//!
//! A [`Tensor3`] with dims `(i1, i2, i3)` stores entry `(a, b, c)` at linear
//! index `a + i1 * (b + i2 * c)`: the first index varies fastest. `vec(·)`
//! means exactly this flattening, and every vectorized operator in the crate
//! (difference operators, FFT solves) is defined against it. [`Matrix`] is
//! column-major for the same reason, which makes the mode-1 unfolding a plain
//! reshape.
//!
//! Unfoldings follow the Kolda–Bader column ordering, so for a Tucker-form
//! tensor `X = C x1 U1 x2 U2 x3 U3` the identity
//! `X_(n) = U_n C_(n) (U3 ⊗ ... ⊗ U_{n+1} ⊗ U_{n-1} ⊗ ... ⊗ U1)^T` holds.

use crate::error::{Error, Result};
use crate::tucker::FactorSet;

/// Dense order-3 tensor of `f64`, first index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Tensor3 {
    /// Wraps a data vector; `data.len()` must equal the product of `dims`.
    pub fn new(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        let (i1, i2, i3) = dims;
        if i1 == 0 || i2 == 0 || i3 == 0 {
            return Err(Error::DimMismatch(format!("dims must be positive, got {dims:?}")));
        }
        let expected = i1
            .checked_mul(i2)
            .and_then(|p| p.checked_mul(i3))
            .ok_or_else(|| Error::DimMismatch(format!("dims {dims:?} overflow")))?;
        if data.len() != expected {
            return Err(Error::DimMismatch(format!(
                "data length {} does not match dims {:?} (expected {})",
                data.len(),
                dims,
                expected
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        let len = dims.0 * dims.1 * dims.2;
        Self { dims, data: vec![0.0; len] }
    }

    pub fn from_fn(dims: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        for c in 0..dims.2 {
            for b in 0..dims.1 {
                for a in 0..dims.0 {
                    let v = f(a, b, c);
                    t.data[a + dims.0 * (b + dims.1 * c)] = v;
                }
            }
        }
        t
    }

    pub fn constant(dims: (usize, usize, usize), value: f64) -> Self {
        let len = dims.0 * dims.1 * dims.2;
        Self { dims, data: vec![value; len] }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Slice view of the underlying storage in `vec(·)` order.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[a + self.dims.0 * (b + self.dims.1 * c)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[a + self.dims.0 * (b + self.dims.1 * c)] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_congruent(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(format!(
                "tensor dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_congruent(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dims: self.dims, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_congruent(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dims: self.dims, data })
    }

    pub fn scale(&self, s: f64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        Self { dims: self.dims, data }
    }

    /// Mean of the entries.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Mean of the absolute values of the entries.
    pub fn mean_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum::<f64>() / self.data.len() as f64
    }

    /// Frame `t` as an `I1 x I2` matrix.
    pub fn frame(&self, t: usize) -> Matrix {
        let (i1, i2, _) = self.dims;
        let offset = i1 * i2 * t;
        Matrix {
            rows: i1,
            cols: i2,
            data: self.data[offset..offset + i1 * i2].to_vec(),
        }
    }
}

/// Dense column-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimMismatch(format!("matrix dims must be positive, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + n * i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.data[r + rows * c] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column-major storage: entry `(r, c)` lives at `r + rows * c`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r + self.rows * c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r + self.rows * c] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.data[c + self.cols * r] = self.data[r + self.rows * c];
            }
        }
        out
    }

    /// `self * other`, deterministic loop order.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = other.data[k + other.rows * j];
                if b == 0.0 {
                    continue;
                }
                let a_col = &self.data[k * self.rows..(k + 1) * self.rows];
                for (o, a) in out_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Gram matrix `self * self^T`, exactly symmetric by construction.
    pub fn gram(&self) -> Matrix {
        let n = self.rows;
        let mut out = Matrix::zeros(n, n);
        for k in 0..self.cols {
            let col = &self.data[k * n..(k + 1) * n];
            for j in 0..n {
                let v = col[j];
                if v == 0.0 {
                    continue;
                }
                for i in 0..=j {
                    out.data[i + n * j] += col[i] * v;
                }
            }
        }
        // mirror the upper triangle
        for j in 0..n {
            for i in 0..j {
                out.data[j + n * i] = out.data[i + n * j];
            }
        }
        out
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimMismatch(format!(
                "matrix dims {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

fn dim_of(dims: (usize, usize, usize), mode: usize) -> usize {
    match mode {
        1 => dims.0,
        2 => dims.1,
        3 => dims.2,
        _ => unreachable!(),
    }
}

fn check_mode(mode: usize) -> Result<()> {
    if (1..=3).contains(&mode) {
        Ok(())
    } else {
        Err(Error::InvalidMode(mode))
    }
}

/// Mode-n unfolding `X_(n)` of shape `I_n x (prod of the other dims)` in the
/// Kolda–Bader column ordering.
pub fn unfold(x: &Tensor3, mode: usize) -> Result<Matrix> {
    check_mode(mode)?;
    let (i1, i2, i3) = x.dims();
    match mode {
        // first index fastest makes the mode-1 unfolding a reshape
        1 => Matrix::new(i1, i2 * i3, x.data().to_vec()),
        2 => {
            let mut m = Matrix::zeros(i2, i1 * i3);
            for c in 0..i3 {
                for b in 0..i2 {
                    for a in 0..i1 {
                        m.data[b + i2 * (a + i1 * c)] = x.data[a + i1 * (b + i2 * c)];
                    }
                }
            }
            Ok(m)
        }
        3 => {
            let mut m = Matrix::zeros(i3, i1 * i2);
            for c in 0..i3 {
                for b in 0..i2 {
                    for a in 0..i1 {
                        m.data[c + i3 * (a + i1 * b)] = x.data[a + i1 * (b + i2 * c)];
                    }
                }
            }
            Ok(m)
        }
        _ => unreachable!(),
    }
}

/// Inverse of [`unfold`]: refolds an `I_n x (prod others)` matrix into dims.
pub fn fold(m: &Matrix, mode: usize, dims: (usize, usize, usize)) -> Result<Tensor3> {
    check_mode(mode)?;
    let (i1, i2, i3) = dims;
    let others = i1 * i2 * i3 / dim_of(dims, mode);
    if m.rows() != dim_of(dims, mode) || m.cols() != others {
        return Err(Error::DimMismatch(format!(
            "fold mode {} expects {}x{}, got {}x{}",
            mode,
            dim_of(dims, mode),
            others,
            m.rows(),
            m.cols()
        )));
    }
    match mode {
        1 => Tensor3::new(dims, m.data().to_vec()),
        2 => {
            let mut t = Tensor3::zeros(dims);
            for c in 0..i3 {
                for b in 0..i2 {
                    for a in 0..i1 {
                        t.data[a + i1 * (b + i2 * c)] = m.data[b + i2 * (a + i1 * c)];
                    }
                }
            }
            Ok(t)
        }
        3 => {
            let mut t = Tensor3::zeros(dims);
            for c in 0..i3 {
                for b in 0..i2 {
                    for a in 0..i1 {
                        t.data[a + i1 * (b + i2 * c)] = m.data[c + i3 * (a + i1 * b)];
                    }
                }
            }
            Ok(t)
        }
        _ => unreachable!(),
    }
}

/// Mode-n product `X x_n U`: every mode-n fiber is multiplied by `U`.
///
/// `U` has shape `J x I_n`; the result replaces `I_n` by `J`.
pub fn mode_mul(x: &Tensor3, u: &Matrix, mode: usize) -> Result<Tensor3> {
    check_mode(mode)?;
    if u.cols() != dim_of(x.dims(), mode) {
        return Err(Error::DimMismatch(format!(
            "mode-{} product: matrix has {} cols, tensor dim is {}",
            mode,
            u.cols(),
            dim_of(x.dims(), mode)
        )));
    }
    let unfolded = unfold(x, mode)?;
    let product = u.matmul(&unfolded)?;
    let mut dims = x.dims();
    match mode {
        1 => dims.0 = u.rows(),
        2 => dims.1 = u.rows(),
        3 => dims.2 = u.rows(),
        _ => unreachable!(),
    }
    fold(&product, mode, dims)
}

/// Multilinear projection `X x1 U1 U1^T x2 U2 U2^T x3 U3 U3^T`.
///
/// Applied as `U_n^T` then `U_n` per mode, so the `I_n x I_n` projector
/// matrices are never materialized. Idempotent and norm-nonexpansive.
pub fn multi_project(x: &Tensor3, factors: &FactorSet) -> Result<Tensor3> {
    factors.check_dims(x.dims())?;
    let mut y = x.clone();
    for mode in 1..=3 {
        y = mode_mul(&y, &factors.factor(mode).transpose(), mode)?;
    }
    for mode in 1..=3 {
        y = mode_mul(&y, factors.factor(mode), mode)?;
    }
    Ok(y)
}

/// Tensor inner product: sum of entrywise products.
pub fn inner(x: &Tensor3, y: &Tensor3) -> Result<f64> {
    x.check_congruent(y)?;
    Ok(x.data.iter().zip(&y.data).map(|(a, b)| a * b).sum())
}

/// Frobenius norm, `sqrt(inner(x, x))`.
pub fn fro_norm(x: &Tensor3) -> f64 {
    x.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}
