//! Seeded generators shared by unit, integration, and acceptance tests.

use crate::tensor::{Matrix, Tensor3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut impl Rng, dims: (usize, usize, usize)) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| rng.gen_range(-1.0..1.0))
}

/// Random `rows x cols` matrix with orthonormal columns, via modified
/// Gram-Schmidt on a Gaussian draw. Requires `cols <= rows`.
pub fn random_orthonormal(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    assert!(cols <= rows);
    let mut m = Matrix::from_fn(rows, cols, |_, _| standard_normal(rng));
    for j in 0..cols {
        for k in 0..j {
            let dot: f64 = (0..rows).map(|i| m.get(i, k) * m.get(i, j)).sum();
            for i in 0..rows {
                let v = m.get(i, j) - dot * m.get(i, k);
                m.set(i, j, v);
            }
        }
        let norm: f64 = (0..rows).map(|i| m.get(i, j).powi(2)).sum::<f64>().sqrt();
        // a fresh Gaussian column is never degenerate in practice
        assert!(norm > 1e-12, "degenerate random column");
        for i in 0..rows {
            m.set(i, j, m.get(i, j) / norm);
        }
    }
    m
}

/// Random `n x n` orthogonal matrix.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Matrix {
    random_orthonormal(rng, n, n)
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
