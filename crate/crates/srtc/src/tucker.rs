//! Tucker factor machinery: orthonormal factor sets, HOSVD initialization,
//! the closed-form core, the trace-optimization matrices for the per-mode
//! factor update, and orthogonal-Procrustes alignment of factor bases.

use crate::error::{Error, Result};
use crate::tensor::{fro_norm, mode_mul, multi_project, unfold, Matrix, Tensor3};
use nalgebra::DMatrix;

/// Orthonormality slack accepted when constructing a [`FactorSet`].
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Three column-orthonormal factor matrices, one per tensor mode.
#[derive(Debug, Clone)]
pub struct FactorSet {
    u1: Matrix,
    u2: Matrix,
    u3: Matrix,
}

impl FactorSet {
    /// Builds a factor set, checking `||U^T U - I||_F < 1e-10` per factor.
    pub fn new(u1: Matrix, u2: Matrix, u3: Matrix) -> Result<Self> {
        for (mode, u) in [(1, &u1), (2, &u2), (3, &u3)] {
            let err = orthonormality_error(u);
            if !err.is_finite() || err >= ORTHONORMALITY_TOL {
                return Err(Error::Numerical(format!(
                    "factor {mode} is not column-orthonormal (||U^T U - I||_F = {err:.3e})"
                )));
            }
        }
        Ok(Self { u1, u2, u3 })
    }

    pub fn factor(&self, mode: usize) -> &Matrix {
        match mode {
            1 => &self.u1,
            2 => &self.u2,
            3 => &self.u3,
            _ => panic!("mode {mode} out of range"),
        }
    }

    /// Replaces one factor; the replacement must satisfy the same invariant.
    pub fn set_factor(&mut self, mode: usize, u: Matrix) -> Result<()> {
        let err = orthonormality_error(&u);
        if !err.is_finite() || err >= ORTHONORMALITY_TOL {
            return Err(Error::Numerical(format!(
                "replacement factor {mode} is not column-orthonormal (err = {err:.3e})"
            )));
        }
        match mode {
            1 => self.u1 = u,
            2 => self.u2 = u,
            3 => self.u3 = u,
            _ => return Err(Error::InvalidMode(mode)),
        }
        Ok(())
    }

    /// Column counts `(r1, r2, r3)`.
    pub fn ranks(&self) -> (usize, usize, usize) {
        (self.u1.cols(), self.u2.cols(), self.u3.cols())
    }

    /// Row counts, i.e. the tensor dims the factors apply to.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.u1.rows(), self.u2.rows(), self.u3.rows())
    }

    pub fn check_dims(&self, dims: (usize, usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::DimMismatch(format!(
                "factor row counts {:?} do not match tensor dims {:?}",
                self.dims(),
                dims
            )));
        }
        Ok(())
    }
}

/// `||U^T U - I||_F`.
pub fn orthonormality_error(u: &Matrix) -> f64 {
    let gram = u.transpose().gram();
    let r = gram.rows();
    let mut acc = 0.0;
    for j in 0..r {
        for i in 0..r {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = gram.get(i, j) - target;
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Core tensor of a Tucker decomposition; dims equal the factor ranks.
#[derive(Debug, Clone)]
pub struct CoreTensor {
    tensor: Tensor3,
}

impl CoreTensor {
    pub fn tensor(&self) -> &Tensor3 {
        &self.tensor
    }

    pub fn into_tensor(self) -> Tensor3 {
        self.tensor
    }

    /// Reconstruction `C x1 U1 x2 U2 x3 U3`.
    pub fn reconstruct(&self, factors: &FactorSet) -> Result<Tensor3> {
        if factors.ranks() != self.tensor.dims() {
            return Err(Error::DimMismatch(format!(
                "core dims {:?} do not match factor ranks {:?}",
                self.tensor.dims(),
                factors.ranks()
            )));
        }
        let mut y = self.tensor.clone();
        for mode in 1..=3 {
            y = mode_mul(&y, factors.factor(mode), mode)?;
        }
        Ok(y)
    }
}

/// Rank-`(r1, r2, r3)` HOSVD: each factor holds the top eigenvectors of the
/// Gram matrix of the corresponding unfolding, and the core is the
/// multilinear contraction of `x` by the factor transposes.
pub fn hosvd_init(x: &Tensor3, ranks: (usize, usize, usize)) -> Result<(FactorSet, CoreTensor)> {
    let dims = x.dims();
    let ranks_arr = [ranks.0, ranks.1, ranks.2];
    let dims_arr = [dims.0, dims.1, dims.2];
    for mode in 0..3 {
        if ranks_arr[mode] == 0 || ranks_arr[mode] > dims_arr[mode] {
            return Err(Error::RankExceedsDim {
                mode: mode + 1,
                rank: ranks_arr[mode],
                dim: dims_arr[mode],
            });
        }
    }
    let mut factors = Vec::with_capacity(3);
    for mode in 1..=3 {
        let gram = unfold(x, mode)?.gram();
        factors.push(top_eigvectors(&gram, ranks_arr[mode - 1])?);
    }
    let u3 = factors.pop().unwrap();
    let u2 = factors.pop().unwrap();
    let u1 = factors.pop().unwrap();
    let factors = FactorSet::new(u1, u2, u3)?;
    let core = core_from(x, &Tensor3::zeros(dims), &factors)?;
    Ok((factors, core))
}

/// Closed-form optimal core for fixed factors: `(x - s) x1 U1^T x2 U2^T x3 U3^T`.
pub fn core_from(x: &Tensor3, s: &Tensor3, factors: &FactorSet) -> Result<CoreTensor> {
    factors.check_dims(x.dims())?;
    let mut y = x.sub(s)?;
    for mode in 1..=3 {
        y = mode_mul(&y, &factors.factor(mode).transpose(), mode)?;
    }
    Ok(CoreTensor { tensor: y })
}

/// Trace-optimization matrix for the mode-`n` factor update:
/// the Gram matrix of the mode-`n` unfolding of `(x - s)` contracted by the
/// other modes' factor transposes. The caller supplies `factors` with the
/// desired already-updated/previous mixture; mode `n`'s own factor is unused.
///
/// The Kronecker product of the other factors is never formed; per-mode
/// products are applied to `(x - s)` and the unfolding is multiplied by its
/// own transpose, so the result is symmetric positive semidefinite exactly.
pub fn build_psi(mode: usize, x: &Tensor3, s: &Tensor3, factors: &FactorSet) -> Result<Matrix> {
    if !(1..=3).contains(&mode) {
        return Err(Error::InvalidMode(mode));
    }
    factors.check_dims(x.dims())?;
    let mut y = x.sub(s)?;
    for m in 1..=3 {
        if m != mode {
            y = mode_mul(&y, &factors.factor(m).transpose(), m)?;
        }
    }
    Ok(unfold(&y, mode)?.gram())
}

/// Absorbs the proximal penalty into the trace objective:
/// `Phi = Psi - 2 rho (I - U_prev U_prev^T)`.
pub fn build_phi(psi: &Matrix, u_prev: &Matrix, rho: f64) -> Result<Matrix> {
    let n = psi.rows();
    if psi.cols() != n {
        return Err(Error::DimMismatch(format!("psi must be square, got {}x{}", n, psi.cols())));
    }
    if u_prev.rows() != n {
        return Err(Error::DimMismatch(format!(
            "u_prev has {} rows, psi is {n}x{n}",
            u_prev.rows()
        )));
    }
    let proj = u_prev.gram();
    let mut phi = psi.clone();
    for j in 0..n {
        for i in 0..n {
            let eye = if i == j { 1.0 } else { 0.0 };
            let v = phi.get(i, j) - 2.0 * rho * (eye - proj.get(i, j));
            phi.set(i, j, v);
        }
    }
    Ok(phi)
}

/// Eigenvectors of a symmetric matrix for its `r` algebraically largest
/// eigenvalues, as columns, orthonormal.
///
/// Deterministic output: eigenvalues are ordered descending with index
/// tie-breaking, and each eigenvector is signed so its largest-magnitude
/// entry (lowest index on ties) is positive.
pub fn top_eigvectors(phi: &Matrix, r: usize) -> Result<Matrix> {
    let n = phi.rows();
    if phi.cols() != n {
        return Err(Error::DimMismatch(format!("matrix must be square, got {}x{}", n, phi.cols())));
    }
    if r == 0 || r > n {
        return Err(Error::RankExceedsDim { mode: 0, rank: r, dim: n });
    }
    if !phi.is_finite() {
        return Err(Error::NonFinite("eigendecomposition input".into()));
    }
    let m = DMatrix::from_column_slice(n, n, phi.data());
    let eig = m.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });

    let mut out = Matrix::zeros(n, r);
    for (col, &idx) in order.iter().take(r).enumerate() {
        let v = eig.eigenvectors.column(idx);
        // sign convention: largest-magnitude entry positive, ties to lowest index
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, &val) in v.iter().enumerate() {
            if val.abs() > best {
                best = val.abs();
                pivot = i;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            out.set(i, col, sign * v[i]);
        }
    }
    Ok(out)
}

/// Aligns `u_k` onto `u_star`'s gauge: returns `u_k * D` where the orthogonal
/// `D` minimizes `||u_star - u_k D||_F` (orthogonal Procrustes, solved from
/// the SVD of `u_k^T u_star`).
pub fn procrustes_align(u_k: &Matrix, u_star: &Matrix) -> Result<Matrix> {
    if u_k.rows() != u_star.rows() || u_k.cols() != u_star.cols() {
        return Err(Error::DimMismatch(format!(
            "procrustes shapes {}x{} vs {}x{}",
            u_k.rows(),
            u_k.cols(),
            u_star.rows(),
            u_star.cols()
        )));
    }
    let a = u_k.transpose().matmul(u_star)?;
    let r = a.rows();
    let svd = DMatrix::from_column_slice(r, a.cols(), a.data()).svd(true, true);
    let w = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let d_na = w * vt;
    let d = Matrix::from_fn(r, r, |i, j| d_na[(i, j)]);
    u_k.matmul(&d)
}

/// `||x - C x1 U1 x2 U2 x3 U3||_F` for the closed-form core: the HOSVD
/// truncation residual at the factor set's ranks.
pub fn reconstruction_error(x: &Tensor3, factors: &FactorSet) -> Result<f64> {
    let proj = multi_project(x, factors)?;
    Ok(fro_norm(&x.sub(&proj)?))
}
