//! Linear symmetries of quaternionic oscillators.
//!
//! A skew `X` is an infinitesimal symmetry of `x' = sum c_a L_a x` when
//! `[X, L_a] = sum_b J_ab L_b` for a skew `J` fixing `c`. Solutions form
//! `so(2) + sp(n)`: the commutant of the structure (`J = 0`) plus one
//! rotation generator, normalized here so that `J_ab = sum_g eps_abg c_g`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::block_radii;
use crate::linalg::{commutator, complement_basis, embed_block};
use crate::structures::{
    canonical_reduction, levi_civita, standard_triple, verify_quaternionic, ComplexStructureTriple,
    SquareMatrix, STRUCTURE_TOL,
};

/// Relative singular-value cutoff of the null-space computation.
pub const NULL_TOL: f64 = 1e-10;
/// Central-difference step for Jacobians.
pub const FD_STEP: f64 = 1e-6;
/// Residual and consistency threshold of [`detect_oscillator`].
pub const DETECT_TOL: f64 = 1e-8;
/// Equivariance threshold of [`detect_oscillator`], relative to `max(1, |f|)`.
pub const EQUIVARIANCE_TOL: f64 = 1e-6;

/// One solution `(X, J)` of the infinitesimal invariance equation.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceSolution {
    pub x: SquareMatrix,
    pub j: DMatrix<f64>,
}

impl InvarianceSolution {
    /// Largest entry of `[X, L_a] - sum_b J_ab L_b` over `a`.
    pub fn residual(&self, s: &ComplexStructureTriple) -> f64 {
        (0..3)
            .map(|a| {
                let mut m = commutator(&self.x, s.l(a));
                for b in 0..3 {
                    m -= s.l(b) * self.j[(a, b)];
                }
                m.amax()
            })
            .fold(0.0, f64::max)
    }
}

/// `J_ab = sum_g eps_abg c_g`.
pub fn rotation_matrix(c: &[f64; 3]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |a, b| (0..3).map(|g| levi_civita(a, b, g) * c[g]).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularValueInfo {
    /// Largest singular value treated as zero (0 when there is none).
    pub largest_null: f64,
    /// Smallest singular value treated as nonzero.
    pub smallest_kept: f64,
    /// `smallest_kept / largest_null`, infinite when nothing was cut.
    pub gap: f64,
}

/// A basis of a matrix Lie algebra with structure constants
/// `[X_i, X_j] = sum_k C[i][j][k] X_k`.
#[derive(Clone, Debug)]
pub struct LieAlgebraBasis {
    pub dim: usize,
    pub basis: Vec<InvarianceSolution>,
    pub structure_constants: Vec<Vec<Vec<f64>>>,
    /// Largest distance of a bracket from the span of the basis.
    pub closure_residual: f64,
    pub singular_values: Option<SingularValueInfo>,
    coordinates: Vec<DVector<f64>>,
    c: [f64; 3],
}

impl LieAlgebraBasis {
    /// Wraps skew matrices with `J = 0`.
    pub fn from_matrices(matrices: Vec<SquareMatrix>) -> Result<Self> {
        let dim = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        let basis = matrices
            .into_iter()
            .map(|x| {
                if x.nrows() != dim || x.ncols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: x.nrows(),
                    });
                }
                Ok(InvarianceSolution {
                    x,
                    j: DMatrix::zeros(3, 3),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let (structure_constants, closure_residual) = structure_constants(&basis)?;
        Ok(Self {
            dim,
            basis,
            structure_constants,
            closure_residual,
            singular_values: None,
            coordinates: Vec::new(),
            c: [0.0; 3],
        })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// `X` parts of the basis.
    pub fn matrices(&self) -> Vec<&SquareMatrix> {
        self.basis.iter().map(|b| &b.x).collect()
    }
}

fn lower_index(dim: usize) -> Vec<(usize, usize)> {
    (0..dim).flat_map(|i| (0..i).map(move |j| (i, j))).collect()
}

fn skew_from(coords: &[f64], pairs: &[(usize, usize)], dim: usize) -> SquareMatrix {
    let mut x = DMatrix::zeros(dim, dim);
    for (v, &(i, j)) in coords.iter().zip(pairs) {
        x[(i, j)] = *v;
        x[(j, i)] = -*v;
    }
    x
}

/// Solves `[X, L_a] = sum_b J_ab L_b` with `X` skew and `J c = 0`.
///
/// Unknowns are the strictly lower entries of `X` and the scalar `t` in
/// `J = t eps.(c/|c|)`. The null space of the stacked linear system is taken
/// from its SVD.
pub fn solve_invariance(s: &ComplexStructureTriple, c: &[f64; 3]) -> Result<LieAlgebraBasis> {
    let report = verify_quaternionic(s, STRUCTURE_TOL);
    if !report.ok {
        return Err(Error::InvalidStructure {
            residual: report.max_residual,
        });
    }
    let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    if norm == 0.0 || norm.is_nan() {
        return Err(Error::Degenerate(
            "c = 0: the field vanishes and every skew matrix is a symmetry".into(),
        ));
    }
    let dim = s.dim();
    let pairs = lower_index(dim);
    let unknowns = pairs.len() + 1;
    let unit = [c[0] / norm, c[1] / norm, c[2] / norm];
    let e = rotation_matrix(&unit);

    // one column per unknown: the image of a unit change in that unknown
    let rows = 3 * dim * dim;
    let mut a = DMatrix::zeros(rows, unknowns);
    for (col, &(i, j)) in pairs.iter().enumerate() {
        let mut basis = DMatrix::zeros(dim, dim);
        basis[(i, j)] = 1.0;
        basis[(j, i)] = -1.0;
        for al in 0..3 {
            let img = commutator(&basis, s.l(al));
            a.view_mut((al * dim * dim, col), (dim * dim, 1))
                .copy_from_slice(img.as_slice());
        }
    }
    for al in 0..3 {
        let mut img = DMatrix::zeros(dim, dim);
        for b in 0..3 {
            img -= s.l(b) * e[(al, b)];
        }
        a.view_mut((al * dim * dim, unknowns - 1), (dim * dim, 1))
            .copy_from_slice(img.as_slice());
    }

    let (null, info) = null_space(a)?;
    log::debug!(
        "invariance system {rows}x{unknowns}: null space dimension {}, gap {:e}",
        null.len(),
        info.gap
    );
    let basis: Vec<InvarianceSolution> = null
        .iter()
        .map(|w| InvarianceSolution {
            x: skew_from(&w.as_slice()[..pairs.len()], &pairs, dim),
            j: &e * w[unknowns - 1],
        })
        .collect();
    let (structure_constants, closure_residual) = structure_constants(&basis)?;
    Ok(LieAlgebraBasis {
        dim,
        basis,
        structure_constants,
        closure_residual,
        singular_values: Some(info),
        coordinates: null,
        c: *c,
    })
}

/// Orthonormal null space of `a` (rows >= cols is not required).
fn null_space(a: DMatrix<f64>) -> Result<(Vec<DVector<f64>>, SingularValueInfo)> {
    let cols = a.ncols();
    // pad so that V^T is square
    let a = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(&a);
        p
    } else {
        a
    };
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Inconsistency("SVD did not return V".into()))?;
    let sv = &svd.singular_values;
    let top = sv.max();
    let cut = NULL_TOL * top.max(f64::MIN_POSITIVE);
    let mut null = Vec::new();
    let mut largest_null: f64 = 0.0;
    let mut smallest_kept = f64::INFINITY;
    for (i, s) in sv.iter().enumerate() {
        if *s <= cut {
            largest_null = largest_null.max(*s);
            null.push(v_t.row(i).transpose());
        } else {
            smallest_kept = smallest_kept.min(*s);
        }
    }
    let gap = if largest_null > 0.0 {
        smallest_kept / largest_null
    } else {
        f64::INFINITY
    };
    Ok((
        null,
        SingularValueInfo {
            largest_null,
            smallest_kept,
            gap,
        },
    ))
}

fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// Projects every bracket onto the span of the basis.
fn structure_constants(basis: &[InvarianceSolution]) -> Result<(Vec<Vec<Vec<f64>>>, f64)> {
    let m = basis.len();
    if m == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let gram = DMatrix::from_fn(m, m, |i, j| frobenius(&basis[i].x, &basis[j].x));
    let chol = gram.cholesky().ok_or_else(|| {
        Error::Degenerate("basis matrices are linearly dependent (singular Gram matrix)".into())
    })?;
    let mut consts = vec![vec![vec![0.0; m]; m]; m];
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let br = commutator(&basis[i].x, &basis[j].x);
            let rhs = DVector::from_fn(m, |k, _| frobenius(&basis[k].x, &br));
            let coef = chol.solve(&rhs);
            let mut rest = br;
            for k in 0..m {
                rest -= &basis[k].x * coef[k];
            }
            worst = worst.max(rest.amax());
            consts[i][j] = coef.iter().copied().collect();
        }
    }
    Ok((consts, worst))
}

/// The algebra split into the commutant of the structure and the rotation
/// generator.
#[derive(Clone, Debug)]
pub struct SplitAlgebra {
    pub commutant: Vec<InvarianceSolution>,
    pub rotation_generator: InvarianceSolution,
}

/// Separates the `J = 0` solutions from the single rotation generator, which
/// is scaled so that `J = eps.c`.
pub fn split_components(b: &LieAlgebraBasis) -> Result<SplitAlgebra> {
    if b.coordinates.len() != b.basis.len() || b.basis.is_empty() {
        return Err(Error::InvalidArgument(
            "split needs a basis produced by solve_invariance".into(),
        ));
    }
    let last = b.coordinates[0].len() - 1;
    let tau = DVector::from_iterator(b.coordinates.len(), b.coordinates.iter().map(|w| w[last]));
    let weight = tau.norm_squared();
    if weight <= NULL_TOL * NULL_TOL {
        return Err(Error::Inconsistency(
            "no solution with a nonzero rotation part".into(),
        ));
    }
    let combine = |coef: &DVector<f64>| -> InvarianceSolution {
        let mut x = DMatrix::zeros(b.dim, b.dim);
        let mut j = DMatrix::zeros(3, 3);
        for (k, s) in b.basis.iter().enumerate() {
            x += &s.x * coef[k];
            j += &s.j * coef[k];
        }
        InvarianceSolution { x, j }
    };
    let norm = (b.c[0] * b.c[0] + b.c[1] * b.c[1] + b.c[2] * b.c[2]).sqrt();
    let mut rotation_generator = combine(&(&tau * (norm / weight)));
    rotation_generator.j = rotation_matrix(&b.c);
    let commutant = complement_basis(&tau)
        .iter()
        .map(|v| {
            let mut s = combine(v);
            s.j = DMatrix::zeros(3, 3);
            s
        })
        .collect();
    Ok(SplitAlgebra {
        commutant,
        rotation_generator,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub max_residual: f64,
    /// Largest entry of `[X_rot, X]` over the commutant, when a split exists.
    pub rotation_commutation: Option<f64>,
    pub structure_constants: Vec<Vec<Vec<f64>>>,
}

/// Checks that brackets stay in the span and, for solver output, that the
/// commutant commutes with the rotation generator.
pub fn closure_check(b: &LieAlgebraBasis, tol: f64) -> Result<ClosureReport> {
    if b.basis.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    let rotation_commutation = if b.coordinates.is_empty() {
        None
    } else {
        let split = split_components(b)?;
        Some(
            split
                .commutant
                .iter()
                .map(|s| commutator(&split.rotation_generator.x, &s.x).amax())
                .fold(0.0, f64::max),
        )
    };
    let worst = b.closure_residual.max(rotation_commutation.unwrap_or(0.0));
    if worst > tol {
        return Err(Error::NonClosure { residual: worst });
    }
    Ok(ClosureReport {
        max_residual: b.closure_residual,
        rotation_commutation,
        structure_constants: b.structure_constants.clone(),
    })
}

/// Killing form `K_ij = tr(ad_i ad_j)` from structure constants.
pub fn killing_form(consts: &[Vec<Vec<f64>>]) -> DMatrix<f64> {
    let m = consts.len();
    let ad = |i: usize| DMatrix::from_fn(m, m, |k, j| consts[i][j][k]);
    let ads: Vec<_> = (0..m).map(ad).collect();
    DMatrix::from_fn(m, m, |i, j| (&ads[i] * &ads[j]).trace())
}

/// Largest distance of `m` from the span of the basis matrices.
pub fn span_residual(b: &LieAlgebraBasis, m: &SquareMatrix) -> f64 {
    let mats: Vec<&SquareMatrix> = b.matrices();
    projection_residual(&mats, m)
}

fn projection_residual(mats: &[&SquareMatrix], m: &SquareMatrix) -> f64 {
    let k = mats.len();
    if k == 0 {
        return m.amax();
    }
    let gram = DMatrix::from_fn(k, k, |i, j| frobenius(mats[i], mats[j]));
    let rhs = DVector::from_fn(k, |i, _| frobenius(mats[i], m));
    let coef = gram
        .pseudo_inverse(1e-12)
        .map(|g| g * rhs)
        .unwrap_or_else(|_| DVector::zeros(k));
    let mut rest = m.clone();
    for i in 0..k {
        rest -= mats[i] * coef[i];
    }
    rest.amax()
}

/// `max |A f(x) - Df(x) A x|` over samples and generators, `Df` by central
/// differences.
pub fn equivariance_check<F>(field: F, generators: &[SquareMatrix], samples: &[DVector<f64>]) -> f64
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut worst: f64 = 0.0;
    for x in samples {
        let fx = field(x);
        let n = x.len();
        let mut jac = DMatrix::zeros(fx.len(), n);
        for i in 0..n {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += FD_STEP;
            down[i] -= FD_STEP;
            let d = (field(&up) - field(&down)) / (2.0 * FD_STEP);
            jac.set_column(i, &d);
        }
        for a in generators {
            let r = a * &fx - &jac * (a * x);
            worst = worst.max(r.norm());
        }
    }
    worst
}

/// Coefficients recovered at one sample point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleEstimate {
    pub point: Vec<f64>,
    pub radii: Vec<f64>,
    /// `c_a` recovered from each block.
    pub block_coefficients: Vec<[f64; 3]>,
    /// `|f - reconstruction| / |f|`
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Oscillator,
    NotOscillator,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectionReport {
    pub estimates: Vec<SampleEstimate>,
    pub skipped: usize,
    pub max_residual: f64,
    /// Largest disagreement of recovered coefficients between blocks of one
    /// sample or between samples with equal radii.
    pub consistency_spread: f64,
    pub equivariance_residual: f64,
    pub verdict: Verdict,
}

/// Generators commuting with each block of `s`, embedded in the full space.
pub fn block_commutant_generators(s: &ComplexStructureTriple) -> Result<Vec<SquareMatrix>> {
    let dim = s.dim();
    let mut out = Vec::with_capacity(3 * s.blocks());
    for k in 0..s.blocks() {
        let (r, o) = canonical_reduction(&s.block(k)?)?;
        let dual = standard_triple(o.dual());
        for a in 0..3 {
            out.push(embed_block(&(r.transpose() * dual.l(a) * &r), k, dim));
        }
    }
    Ok(out)
}

/// Tests whether `field` is a quaternionic oscillator for the block-diagonal
/// structure `s`, by projecting onto `L_a x` blockwise and checking
/// reconstruction, radius consistency and equivariance.
pub fn detect_oscillator<F>(
    field: F,
    s: &ComplexStructureTriple,
    samples: &[DVector<f64>],
) -> Result<DetectionReport>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if !s.is_block_diagonal(STRUCTURE_TOL) {
        return Err(Error::Structural(
            "detection needs a block-diagonal structure".into(),
        ));
    }
    let dim = s.dim();
    let blocks: Vec<ComplexStructureTriple> =
        (0..s.blocks()).map(|k| s.block(k)).collect::<Result<_>>()?;
    let mut estimates = Vec::new();
    let mut kept = Vec::new();
    let mut skipped = 0;
    for x in samples {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        let radii = block_radii(x.as_slice());
        if radii.contains(&0.0) {
            log::warn!("skipping sample with a vanishing block: {:?}", x.as_slice());
            skipped += 1;
            continue;
        }
        let f = field(x);
        let mut rec = DVector::zeros(dim);
        let mut block_coefficients = Vec::with_capacity(blocks.len());
        for (k, b) in blocks.iter().enumerate() {
            let xk = x.rows(4 * k, 4).into_owned();
            let fk = f.rows(4 * k, 4).into_owned();
            let mut c = [0.0; 3];
            for (a, ca) in c.iter_mut().enumerate() {
                let lx = b.l(a) * &xk;
                *ca = fk.dot(&lx) / radii[k];
                rec.rows_mut(4 * k, 4).axpy(*ca, &lx, 1.0);
            }
            block_coefficients.push(c);
        }
        let fnorm = f.norm();
        let residual = if fnorm > 0.0 { (&f - rec).norm() / fnorm } else { 0.0 };
        estimates.push(SampleEstimate {
            point: x.as_slice().to_vec(),
            radii,
            block_coefficients,
            residual,
        });
        kept.push(x.clone());
    }

    let max_residual = estimates.iter().map(|e| e.residual).fold(0.0, f64::max);
    let spread = |a: &[f64; 3], b: &[f64; 3]| {
        (0..3)
            .map(|i| (a[i] - b[i]).abs() / a[i].abs().max(b[i].abs()).max(1.0))
            .fold(0.0, f64::max)
    };
    let mut consistency_spread: f64 = 0.0;
    for (i, e) in estimates.iter().enumerate() {
        let first = &e.block_coefficients[0];
        for c in &e.block_coefficients[1..] {
            consistency_spread = consistency_spread.max(spread(first, c));
        }
        for other in &estimates[i + 1..] {
            let same = e
                .radii
                .iter()
                .zip(&other.radii)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
            if same {
                consistency_spread =
                    consistency_spread.max(spread(first, &other.block_coefficients[0]));
            }
        }
    }

    let generators = block_commutant_generators(s)?;
    let scale = kept
        .iter()
        .map(|x| field(x).norm())
        .fold(1.0, f64::max);
    let equivariance_residual = equivariance_check(&field, &generators, &kept) / scale;

    let verdict = if !estimates.is_empty()
        && max_residual <= DETECT_TOL
        && consistency_spread <= DETECT_TOL
        && equivariance_residual <= EQUIVARIANCE_TOL
    {
        Verdict::Oscillator
    } else {
        Verdict::NotOscillator
    };
    Ok(DetectionReport {
        estimates,
        skipped,
        max_residual,
        consistency_spread,
        equivariance_residual,
        verdict,
    })
}

/// Sample points with prescribed block radii: for each radius vector,
/// `per_radius` points with random directions in every block.
pub fn samples_on_radii<R: rand::Rng + ?Sized>(
    rng: &mut R,
    radii: &[Vec<f64>],
    per_radius: usize,
) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(radii.len() * per_radius);
    for r in radii {
        if r.is_empty() || r.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radii must be nonnegative, got {r:?}"
            )));
        }
        for _ in 0..per_radius {
            let mut x = DVector::zeros(4 * r.len());
            for (k, rho) in r.iter().enumerate() {
                let u = crate::linalg::random_unit_vector(rng, 4) * rho.sqrt();
                x.rows_mut(4 * k, 4).copy_from(&u);
            }
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{oscillator_field, FrequencyProfile};
    use crate::linalg::block_diagonal;
    use crate::structures::{assemble_block_structure, Orientation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const GENERIC: [f64; 3] = [0.7, -1.3, 0.4];

    fn positive(n: usize) -> ComplexStructureTriple {
        assemble_block_structure(&vec![Orientation::Positive; n]).unwrap()
    }

    #[test]
    fn dimensions_follow_so2_plus_sp_n() {
        for n in 1..=3 {
            let b = solve_invariance(&positive(n), &GENERIC).unwrap();
            assert_eq!(b.len(), 1 + n * (2 * n + 1), "n = {n}");
            let split = split_components(&b).unwrap();
            assert_eq!(split.commutant.len(), n * (2 * n + 1));
            for s in b.basis.iter().chain(&split.commutant) {
                assert!(s.residual(&positive(n)) < 1e-10);
                assert!((&s.x + s.x.transpose()).amax() == 0.0);
            }
        }
        let b = solve_invariance(&positive(1), &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn mixed_signature_has_the_same_dimension() {
        let s = assemble_block_structure(&[Orientation::Positive, Orientation::Negative]).unwrap();
        assert_eq!(solve_invariance(&s, &GENERIC).unwrap().len(), 11);
    }

    #[test]
    fn zero_coefficients_are_degenerate() {
        assert!(matches!(
            solve_invariance(&positive(1), &[0.0; 3]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn rotation_generator_is_half_the_field_matrix() {
        for c in [[1.0, 0.0, 0.0], GENERIC] {
            let s = positive(1);
            let split = split_components(&solve_invariance(&s, &c).unwrap()).unwrap();
            let expect = s.combination(&c) * 0.5;
            assert!((&split.rotation_generator.x - expect).amax() < 1e-10);
            assert_eq!(split.rotation_generator.j, rotation_matrix(&c));
            assert!(split.rotation_generator.residual(&s) < 1e-10);
        }
    }

    #[test]
    fn commutant_is_the_dual_triple() {
        for o in [Orientation::Positive, Orientation::Negative] {
            let s = standard_triple(o);
            let b = solve_invariance(&s, &GENERIC).unwrap();
            let split = split_components(&b).unwrap();
            let comm = LieAlgebraBasis::from_matrices(
                split.commutant.iter().map(|c| c.x.clone()).collect(),
            )
            .unwrap();
            let dual = standard_triple(o.dual());
            for a in 0..3 {
                assert!(span_residual(&comm, dual.l(a)) < 1e-10);
            }
            // su(2): negative definite Killing form
            let k = killing_form(&comm.structure_constants);
            assert!(k.symmetric_eigenvalues().iter().all(|e| *e < -1e-8));
        }
    }

    #[test]
    fn eight_dimensional_basis_matrices_are_symmetries() {
        let b = solve_invariance(&positive(2), &GENERIC).unwrap();
        let z = DMatrix::zeros(4, 4);
        let hat = standard_triple(Orientation::Negative);
        let quad = |a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>| {
            let mut m = DMatrix::zeros(8, 8);
            m.view_mut((0, 0), (4, 4)).copy_from(a);
            m.view_mut((0, 4), (4, 4)).copy_from(b);
            m.view_mut((4, 0), (4, 4)).copy_from(c);
            m.view_mut((4, 4), (4, 4)).copy_from(d);
            m
        };
        for a in 0..3 {
            let y = hat.l(a);
            for m in [
                quad(y, &z, &z, &z),
                quad(&z, &z, &z, y),
                quad(&z, y, y, &z),
            ] {
                assert!(span_residual(&b, &m) < 1e-10);
            }
        }
        let id = DMatrix::identity(4, 4);
        assert!(span_residual(&b, &quad(&z, &id, &(-&id), &z)) < 1e-10);
        let report = closure_check(&b, 1e-10).unwrap();
        assert!(report.rotation_commutation.unwrap() < 1e-10);
    }

    #[test]
    fn singleton_closes() {
        let y1 = standard_triple(Orientation::Positive).l(0).clone();
        let b = LieAlgebraBasis::from_matrices(vec![y1]).unwrap();
        let r = closure_check(&b, 1e-14).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert!(r.rotation_commutation.is_none());
    }

    #[test]
    fn non_closing_pair_is_reported() {
        let p = standard_triple(Orientation::Positive);
        let b = LieAlgebraBasis::from_matrices(vec![p.l(0).clone(), p.l(1).clone()]).unwrap();
        assert!(matches!(closure_check(&b, 1e-10), Err(Error::NonClosure { .. })));
    }

    #[test]
    fn equivariance_examples() {
        let p = standard_triple(Orientation::Positive);
        let hat = standard_triple(Orientation::Negative);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<_> = (0..8).map(|_| crate::linalg::random_unit_vector(&mut rng, 4)).collect();

        let profile = FrequencyProfile::parse(["r1", "1", "1 - r1^2"], None, vec![Orientation::Positive]).unwrap();
        let osc = |x: &DVector<f64>| oscillator_field(&profile, &p, x.as_slice()).unwrap();
        assert!(equivariance_check(osc, hat.matrices(), &samples) <= 1e-6);

        let zero = |x: &DVector<f64>| DVector::zeros(x.len());
        assert_eq!(equivariance_check(zero, hat.matrices(), &samples), 0.0);

        let y1 = p.l(0).clone();
        let lin = |x: &DVector<f64>| &y1 * x;
        assert!(equivariance_check(lin, &[p.l(1).clone()], &samples) > 0.1);
    }

    #[test]
    fn detection_round_trip_and_rejections() {
        let s = positive(1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let radii: Vec<Vec<f64>> = [0.5, 1.0, 2.0].iter().map(|r| vec![*r]).collect();
        let samples = samples_on_radii(&mut rng, &radii, 4).unwrap();

        let profile = FrequencyProfile::parse(["r1", "0", "1 - r1"], None, vec![Orientation::Positive]).unwrap();
        let osc = |x: &DVector<f64>| oscillator_field(&profile, &s, x.as_slice()).unwrap();
        let r = detect_oscillator(osc, &s, &samples).unwrap();
        assert_eq!(r.verdict, Verdict::Oscillator);
        for e in &r.estimates {
            let rho = e.radii[0];
            let c = e.block_coefficients[0];
            assert!((c[0] - rho).abs() <= 1e-10 && c[1].abs() <= 1e-10);
            assert!((c[2] - (1.0 - rho)).abs() <= 1e-10);
        }

        let r = detect_oscillator(|x: &DVector<f64>| x.clone(), &s, &samples).unwrap();
        assert_eq!(r.verdict, Verdict::NotOscillator);
        assert!((r.max_residual - 1.0).abs() < 1e-12);

        let y1 = s.l(0).clone();
        let bad = |x: &DVector<f64>| &y1 * x * x[0];
        let r = detect_oscillator(bad, &s, &samples).unwrap();
        assert!(r.max_residual <= 1e-10);
        assert!(r.consistency_spread > 1e-3);
        assert_eq!(r.verdict, Verdict::NotOscillator);
    }

    #[test]
    fn origin_samples_are_skipped() {
        let s = positive(1);
        let samples = vec![DVector::zeros(4), DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0])];
        let y1 = s.l(0).clone();
        let r = detect_oscillator(|x: &DVector<f64>| &y1 * x, &s, &samples).unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.estimates.len(), 1);
    }

    #[test]
    fn block_commutant_of_a_rotated_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = crate::linalg::random_orthogonal(&mut rng, 4, true);
        let s = standard_triple(Orientation::Positive).conjugate(&r).unwrap();
        let s = ComplexStructureTriple::new([
            block_diagonal(&[s.l(0).clone()]),
            s.l(1).clone(),
            s.l(2).clone(),
        ])
        .unwrap();
        for g in block_commutant_generators(&s).unwrap() {
            for a in 0..3 {
                assert!(commutator(&g, s.l(a)).amax() < 1e-12);
            }
        }
    }
}
