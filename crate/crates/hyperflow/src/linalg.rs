//! Small dense helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Embed a 4x4 block at block index `k` of a zero `dim x dim` matrix.
pub fn embed_block(block: &DMatrix<f64>, k: usize, dim: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(dim, dim);
    out.view_mut((4 * k, 4 * k), (4, 4)).copy_from(block);
    out
}

pub fn block_diagonal(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let dim = 4 * blocks.len();
    let mut out = DMatrix::zeros(dim, dim);
    for (k, b) in blocks.iter().enumerate() {
        out.view_mut((4 * k, 4 * k), (4, 4)).copy_from(b);
    }
    out
}

/// Largest absolute entry outside the 4x4 diagonal blocks.
pub fn off_block_residual(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i / 4 != j / 4 {
                worst = worst.max(m[(i, j)].abs());
            }
        }
    }
    worst
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Haar-ish random orthogonal matrix from the QR factorization of a Gaussian matrix.
/// `proper = true` forces det = +1, otherwise det = -1.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize, proper: bool) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let want = if proper { 1.0 } else { -1.0 };
    if q.determinant() * want < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Orthonormal basis of the orthogonal complement of `v` in R^d (d = v.len()).
pub fn complement_basis(v: &DVector<f64>) -> Vec<DVector<f64>> {
    let d = v.len();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(d);
    let norm = v.norm();
    if norm > 0.0 {
        basis.push(v / norm);
    }
    for i in 0..d {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&e);
                e -= b * p;
            }
        }
        let n = e.norm();
        if n > 1e-8 {
            basis.push(e / n);
        }
        if basis.len() == d {
            break;
        }
    }
    if norm > 0.0 {
        basis.remove(0);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_orthogonal_has_requested_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for proper in [true, false] {
            let q = random_orthogonal(&mut rng, 4, proper);
            let err = max_abs(&(q.transpose() * &q - DMatrix::identity(4, 4)));
            assert!(err < 1e-13);
            let det = q.determinant();
            assert!((det - if proper { 1.0 } else { -1.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let v = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.5]);
        let basis = complement_basis(&v);
        assert_eq!(basis.len(), 3);
        for (i, a) in basis.iter().enumerate() {
            assert!(a.dot(&v).abs() < 1e-12);
            for (j, b) in basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((a.dot(b) - expect).abs() < 1e-12);
            }
        }
    }
}
