//! Quaternionic (hyperkähler) structures on Euclidean R^4n.
//!
//! With the Euclidean metric the complex structures, the symplectic forms and
//! their inverse-metric counterparts are all represented by the same
//! antisymmetric matrices, so a structure is just a triple `L_1, L_2, L_3` with
//!
//! ```text
//! L_a L_b = sum_c eps_abc L_c - delta_ab I,   L_a^T = -L_a.
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_diagonal, commutator, max_abs, off_block_residual};

/// Dense real square matrix, row-major in every external representation.
pub type SquareMatrix = DMatrix<f64>;

/// Threshold below which a Pfaffian is treated as zero.
pub const PFAFFIAN_TOL: f64 = 1e-9;

/// Tolerance used when an operation needs a valid structure as input.
pub const STRUCTURE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn dual(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

/// Levi-Civita symbol on indices 0..3.
pub fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructureTriple {
    matrices: [SquareMatrix; 3],
    signature: Vec<Orientation>,
}

impl ComplexStructureTriple {
    /// Wraps three matrices after checking shapes. The quaternionic relations
    /// are not checked here; see [`verify_quaternionic`].
    pub fn new(matrices: [SquareMatrix; 3]) -> Result<Self> {
        let dim = matrices[0].nrows();
        if dim == 0 || !dim.is_multiple_of(4) {
            return Err(Error::Structural(format!(
                "dimension {dim} is not a positive multiple of 4"
            )));
        }
        for m in &matrices {
            if !m.is_square() {
                return Err(Error::Structural("matrix is not square".into()));
            }
            if m.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows(),
                });
            }
        }
        Ok(Self {
            matrices,
            signature: Vec::new(),
        })
    }

    pub fn with_signature(mut self, signature: Vec<Orientation>) -> Result<Self> {
        if !signature.is_empty() && signature.len() != self.blocks() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks(),
                found: signature.len(),
            });
        }
        self.signature = signature;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn blocks(&self) -> usize {
        self.dim() / 4
    }

    pub fn matrices(&self) -> &[SquareMatrix; 3] {
        &self.matrices
    }

    /// `L_alpha` for alpha in 0..3.
    pub fn l(&self, alpha: usize) -> &SquareMatrix {
        &self.matrices[alpha]
    }

    /// Per-block orientations, empty when unknown.
    pub fn signature(&self) -> &[Orientation] {
        &self.signature
    }

    /// `sum_a c_a L_a`.
    pub fn combination(&self, c: &[f64; 3]) -> SquareMatrix {
        &self.matrices[0] * c[0] + &self.matrices[1] * c[1] + &self.matrices[2] * c[2]
    }

    pub fn is_block_diagonal(&self, tol: f64) -> bool {
        self.matrices.iter().all(|m| off_block_residual(m) <= tol)
    }

    /// The 4x4 triple sitting on diagonal block `k`.
    pub fn block(&self, k: usize) -> Result<ComplexStructureTriple> {
        if k >= self.blocks() {
            return Err(Error::Structural(format!(
                "block {k} out of range for {} blocks",
                self.blocks()
            )));
        }
        let pick = |m: &SquareMatrix| m.view((4 * k, 4 * k), (4, 4)).into_owned();
        let triple = ComplexStructureTriple::new([
            pick(&self.matrices[0]),
            pick(&self.matrices[1]),
            pick(&self.matrices[2]),
        ])?;
        match self.signature.get(k) {
            Some(&o) => triple.with_signature(vec![o]),
            None => Ok(triple),
        }
    }

    /// `R L_a R^T` for each alpha. The signature is kept only when `R` is proper.
    pub fn conjugate(&self, r: &SquareMatrix) -> Result<Self> {
        if r.nrows() != self.dim() || r.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: r.nrows(),
            });
        }
        let rt = r.transpose();
        let matrices = [
            r * &self.matrices[0] * &rt,
            r * &self.matrices[1] * &rt,
            r * &self.matrices[2] * &rt,
        ];
        Ok(Self {
            matrices,
            signature: Vec::new(),
        })
    }
}

fn from_rows4(rows: [[f64; 4]; 4]) -> SquareMatrix {
    DMatrix::from_fn(4, 4, |i, j| rows[i][j])
}

/// The standard 4x4 triple of the given orientation.
pub fn standard_triple(orientation: Orientation) -> ComplexStructureTriple {
    let matrices = match orientation {
        Orientation::Positive => [
            from_rows4([
                [0., 1., 0., 0.],
                [-1., 0., 0., 0.],
                [0., 0., 0., 1.],
                [0., 0., -1., 0.],
            ]),
            from_rows4([
                [0., 0., 0., 1.],
                [0., 0., 1., 0.],
                [0., -1., 0., 0.],
                [-1., 0., 0., 0.],
            ]),
            from_rows4([
                [0., 0., 1., 0.],
                [0., 0., 0., -1.],
                [-1., 0., 0., 0.],
                [0., 1., 0., 0.],
            ]),
        ],
        Orientation::Negative => [
            from_rows4([
                [0., 0., 1., 0.],
                [0., 0., 0., 1.],
                [-1., 0., 0., 0.],
                [0., -1., 0., 0.],
            ]),
            from_rows4([
                [0., 0., 0., -1.],
                [0., 0., 1., 0.],
                [0., -1., 0., 0.],
                [1., 0., 0., 0.],
            ]),
            from_rows4([
                [0., -1., 0., 0.],
                [1., 0., 0., 0.],
                [0., 0., 0., 1.],
                [0., 0., -1., 0.],
            ]),
        ],
    };
    ComplexStructureTriple {
        matrices,
        signature: vec![orientation],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuaternionicReport {
    pub ok: bool,
    pub max_residual: f64,
}

/// Checks skewness and the quaternionic relations. The residual is the largest
/// absolute entry over all `L_a L_b - sum_c eps_abc L_c + delta_ab I` and `L_a + L_a^T`.
pub fn verify_quaternionic(triple: &ComplexStructureTriple, tol: f64) -> QuaternionicReport {
    let dim = triple.dim();
    let id = DMatrix::<f64>::identity(dim, dim);
    let mut worst = 0.0_f64;
    for a in 0..3 {
        let la = triple.l(a);
        worst = worst.max(max_abs(&(la + la.transpose())));
        for b in 0..3 {
            let mut r = la * triple.l(b);
            for c in 0..3 {
                let e = levi_civita(a, b, c);
                if e != 0.0 {
                    r -= triple.l(c) * e;
                }
            }
            if a == b {
                r += &id;
            }
            worst = worst.max(max_abs(&r));
        }
    }
    QuaternionicReport {
        ok: worst <= tol,
        max_residual: worst,
    }
}

/// Pfaffian of a 4x4 antisymmetric matrix.
pub fn pfaffian4(m: &SquareMatrix) -> f64 {
    m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)]
}

/// Orientation of a 4x4 triple: the sign `s` in `(1/2) w_a ^ w_a = s Omega`,
/// which is the sign of the Pfaffian of each `L_a`.
pub fn orientation_of(triple: &ComplexStructureTriple) -> Result<Orientation> {
    if triple.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: triple.dim(),
        });
    }
    let mut sign = 0.0_f64;
    for a in 0..3 {
        let pf = pfaffian4(triple.l(a));
        if pf.abs() < PFAFFIAN_TOL {
            return Err(Error::Degenerate(format!(
                "Pfaffian of L_{} is {pf:e}",
                a + 1
            )));
        }
        if sign == 0.0 {
            sign = pf.signum();
        } else if pf.signum() != sign {
            return Err(Error::Degenerate(
                "the three forms define opposite orientations".into(),
            ));
        }
    }
    Ok(if sign > 0.0 {
        Orientation::Positive
    } else {
        Orientation::Negative
    })
}

/// Orientation of every diagonal block of a block-diagonal triple.
pub fn block_orientations(triple: &ComplexStructureTriple) -> Result<Vec<Orientation>> {
    if !triple.is_block_diagonal(STRUCTURE_TOL) {
        return Err(Error::Structural("structure is not block-diagonal".into()));
    }
    (0..triple.blocks())
        .map(|k| orientation_of(&triple.block(k)?))
        .collect()
}

/// Block-diagonal triple with block `k` equal to the standard triple of `signature[k]`.
pub fn assemble_block_structure(signature: &[Orientation]) -> Result<ComplexStructureTriple> {
    if signature.is_empty() {
        return Err(Error::Structural("empty orientation signature".into()));
    }
    let standards: Vec<_> = signature.iter().map(|&o| standard_triple(o)).collect();
    let pick = |a: usize| -> SquareMatrix {
        let blocks: Vec<_> = standards.iter().map(|t| t.l(a).clone()).collect();
        block_diagonal(&blocks)
    };
    Ok(ComplexStructureTriple {
        matrices: [pick(0), pick(1), pick(2)],
        signature: signature.to_vec(),
    })
}

/// Finds `R` in SO(4) with `R L_a R^T` equal to the standard triple of the
/// returned orientation.
///
/// Frame: `u_1 = e_1` and, for each alpha, the standard `T_a e_1 = s e_k`
/// dictates `u_k = s L_a u_1`. The rows of `R` are `u_1..u_4`.
pub fn canonical_reduction(
    triple: &ComplexStructureTriple,
) -> Result<(SquareMatrix, Orientation)> {
    if triple.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: triple.dim(),
        });
    }
    let report = verify_quaternionic(triple, STRUCTURE_TOL);
    if !report.ok {
        return Err(Error::InvalidStructure {
            residual: report.max_residual,
        });
    }
    let orientation = orientation_of(triple)?;
    let target = standard_triple(orientation);

    let mut seed = DVector::zeros(4);
    seed[0] = 1.0;
    let mut rows: [Option<DVector<f64>>; 4] = [Some(seed.clone()), None, None, None];
    for a in 0..3 {
        let col = target.l(a).column(0);
        let (k, s) = col
            .iter()
            .enumerate()
            .find(|(_, v)| v.abs() > 0.5)
            .map(|(k, v)| (k, v.signum()))
            .expect("standard matrices have a nonzero in every column");
        rows[k] = Some(triple.l(a) * &seed * s);
    }
    let mut r = DMatrix::zeros(4, 4);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_ref().expect("frame covers all four directions");
        r.row_mut(i).copy_from(&row.transpose());
    }

    let reduced = triple.conjugate(&r)?;
    let mismatch = (0..3)
        .map(|a| max_abs(&(reduced.l(a) - target.l(a))))
        .fold(0.0_f64, f64::max);
    let det = r.determinant();
    if mismatch > 1e-8 || (det - 1.0).abs() > 1e-8 {
        return Err(Error::Inconsistency(format!(
            "frame reduction failed (mismatch {mismatch:e}, det {det})"
        )));
    }
    Ok((r, orientation))
}

/// Blockwise reduction of a block-diagonal triple: returns a block-diagonal
/// `R` in SO(4) x ... x SO(4) and the per-block orientations.
pub fn canonical_reduction_blockwise(
    triple: &ComplexStructureTriple,
) -> Result<(SquareMatrix, Vec<Orientation>)> {
    if !triple.is_block_diagonal(STRUCTURE_TOL) {
        return Err(Error::Structural(
            "blockwise reduction needs a block-diagonal structure".into(),
        ));
    }
    let mut rotations = Vec::with_capacity(triple.blocks());
    let mut signature = Vec::with_capacity(triple.blocks());
    for k in 0..triple.blocks() {
        let (r, o) = canonical_reduction(&triple.block(k)?)?;
        rotations.push(r);
        signature.push(o);
    }
    Ok((block_diagonal(&rotations), signature))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommutationReport {
    pub ok: bool,
    pub max_residual: f64,
}

/// Largest entry of `[Y_a, Yhat_b]` over all a, b for the standard dual pair.
pub fn dual_commutation_check(tol: f64) -> CommutationReport {
    commutation_between(
        &standard_triple(Orientation::Positive),
        &standard_triple(Orientation::Negative),
        tol,
    )
}

/// Largest entry of `[A_a, B_b]` over all a, b.
pub fn commutation_between(
    a: &ComplexStructureTriple,
    b: &ComplexStructureTriple,
    tol: f64,
) -> CommutationReport {
    let mut worst = 0.0_f64;
    for x in a.matrices() {
        for y in b.matrices() {
            worst = worst.max(max_abs(&commutator(x, y)));
        }
    }
    CommutationReport {
        ok: worst <= tol,
        max_residual: worst,
    }
}

/// Parses a row-major array of rows into a matrix.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<SquareMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Structural("empty matrix".into()));
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::Structural(format!(
                "row of length {} in a {n}-row matrix",
                row.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthogonal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_matrices_match_reference_entries() {
        let pos = standard_triple(Orientation::Positive);
        let y1 = from_rows4([
            [0., 1., 0., 0.],
            [-1., 0., 0., 0.],
            [0., 0., 0., 1.],
            [0., 0., -1., 0.],
        ]);
        assert_eq!(pos.l(0), &y1);
        let neg = standard_triple(Orientation::Negative);
        let yhat3 = from_rows4([
            [0., -1., 0., 0.],
            [1., 0., 0., 0.],
            [0., 0., 0., 1.],
            [0., 0., -1., 0.],
        ]);
        assert_eq!(neg.l(2), &yhat3);
        assert_eq!(pos.l(0) * pos.l(1), *pos.l(2));
    }

    #[test]
    fn standard_triples_are_exact() {
        for o in [Orientation::Positive, Orientation::Negative] {
            let r = verify_quaternionic(&standard_triple(o), 0.0);
            assert!(r.ok);
            assert_eq!(r.max_residual, 0.0);
            assert_eq!(orientation_of(&standard_triple(o)).unwrap(), o);
        }
    }

    #[test]
    fn identity_triple_is_rejected() {
        let id = DMatrix::identity(4, 4);
        let t = ComplexStructureTriple::new([id.clone(), id.clone(), id]).unwrap();
        assert!(!verify_quaternionic(&t, 1e-9).ok);
    }

    #[test]
    fn mismatched_dimensions_are_structural_errors() {
        let err = ComplexStructureTriple::new([
            DMatrix::zeros(4, 4),
            DMatrix::zeros(8, 8),
            DMatrix::zeros(4, 4),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let err = ComplexStructureTriple::new([
            DMatrix::zeros(6, 6),
            DMatrix::zeros(6, 6),
            DMatrix::zeros(6, 6),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn degenerate_pfaffian_is_reported() {
        let z = DMatrix::zeros(4, 4);
        let t = ComplexStructureTriple::new([z.clone(), z.clone(), z]).unwrap();
        assert!(matches!(orientation_of(&t), Err(Error::Degenerate(_))));
    }

    #[test]
    fn assembled_blocks() {
        let single = assemble_block_structure(&[Orientation::Positive]).unwrap();
        assert_eq!(single, standard_triple(Orientation::Positive));

        let pp = assemble_block_structure(&[Orientation::Positive, Orientation::Positive]).unwrap();
        let y = standard_triple(Orientation::Positive);
        for a in 0..3 {
            assert_eq!(pp.l(a), &block_diagonal(&[y.l(a).clone(), y.l(a).clone()]));
        }

        let pn = assemble_block_structure(&[Orientation::Positive, Orientation::Negative]).unwrap();
        assert!(verify_quaternionic(&pn, 0.0).ok);
        assert_eq!(
            block_orientations(&pn).unwrap(),
            vec![Orientation::Positive, Orientation::Negative]
        );
        assert!(matches!(
            assemble_block_structure(&[]),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn reduction_of_standard_triples_is_identity() {
        for o in [Orientation::Positive, Orientation::Negative] {
            let (r, got) = canonical_reduction(&standard_triple(o)).unwrap();
            assert_eq!(got, o);
            assert!(max_abs(&(r - DMatrix::identity(4, 4))) == 0.0);
        }
    }

    #[test]
    fn reduction_round_trips_random_conjugates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for o in [Orientation::Positive, Orientation::Negative] {
            for _ in 0..20 {
                let q = random_orthogonal(&mut rng, 4, true);
                let t = standard_triple(o).conjugate(&q).unwrap();
                assert!(verify_quaternionic(&t, 1e-12).ok);
                let (r, got) = canonical_reduction(&t).unwrap();
                assert_eq!(got, o);
                let back = t.conjugate(&r).unwrap();
                for a in 0..3 {
                    assert!(max_abs(&(back.l(a) - standard_triple(o).l(a))) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn reduction_rejects_invalid_input() {
        let id = DMatrix::identity(4, 4);
        let t = ComplexStructureTriple::new([id.clone(), id.clone(), id]).unwrap();
        assert!(matches!(
            canonical_reduction(&t),
            Err(Error::InvalidStructure { .. })
        ));
    }

    #[test]
    fn dual_structures_commute() {
        let r = dual_commutation_check(0.0);
        assert!(r.ok);
        let pos = standard_triple(Orientation::Positive);
        let neg = standard_triple(Orientation::Negative);
        assert_eq!(max_abs(&commutator(pos.l(0), neg.l(1))), 0.0);

        let mut swapped = neg.matrices().clone();
        swapped[1] = pos.l(1).clone();
        let swapped = ComplexStructureTriple::new(swapped).unwrap();
        let r = commutation_between(&pos, &swapped, 1e-12);
        assert!(!r.ok);
        assert_eq!(r.max_residual, 2.0);
    }
}
