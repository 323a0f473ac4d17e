//! Hamiltonian triples, frequency profiles and hyperhamiltonian vector fields.
//!
//! Expressions are polynomials in the coordinates `x1..x_{4n}` and in the
//! block radii `r1..rn`, where `r_k` stands for `|xi_(k)|^2`, the squared norm
//! of the k-th 4-dimensional block. Gradients are exact: `r_k` is expanded
//! into its quadratic form before differentiating.

mod parse;
pub mod poly;

use std::fmt;

use nalgebra::DVector;
use num::{BigInt, One};

pub use parse::{parse_polynomial, ParseError, ParseErrorKind};
use poly::{CompiledPolynomial, Polynomial, Rational};

use crate::error::{Error, Result};
use crate::invariants::block_radii;
use crate::structures::{ComplexStructureTriple, Orientation};

/// A parsed polynomial expression on R^{4n}.
#[derive(Clone)]
pub struct ScalarExpression {
    source: String,
    dim: usize,
    /// over `x1..x_dim, r1..r_n`
    mixed: Polynomial,
    /// over `x1..x_dim`, radii expanded
    expanded: Polynomial,
    value: CompiledPolynomial,
    partials: Vec<CompiledPolynomial>,
    mixed_value: CompiledPolynomial,
    /// over `r1..r_n`, present when no bare coordinate appears
    radial: Option<Polynomial>,
    radial_value: Option<CompiledPolynomial>,
}

impl fmt::Debug for ScalarExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarExpression")
            .field("source", &self.source)
            .field("dim", &self.dim)
            .finish()
    }
}

impl PartialEq for ScalarExpression {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.expanded == other.expanded
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_multiple_of(4) {
        return Err(Error::Structural(format!(
            "dimension {dim} is not a positive multiple of 4"
        )));
    }
    Ok(())
}

impl ScalarExpression {
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let mixed = parse_polynomial(text, dim)?;
        Ok(Self::build(text.trim().to_string(), dim, mixed))
    }

    /// Wraps a polynomial over `x1..x_dim, r1..r_{dim/4}`.
    pub fn from_mixed(mixed: Polynomial, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if mixed.nvars() != dim + dim / 4 {
            return Err(Error::DimensionMismatch {
                expected: dim + dim / 4,
                found: mixed.nvars(),
            });
        }
        let source = mixed.render(&|i| variable_name(i, dim));
        Ok(Self::build(source, dim, mixed))
    }

    /// Wraps a polynomial in the radii `r1..r_{dim/4}` only.
    pub fn from_radial(radial: &Polynomial, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let blocks = dim / 4;
        if radial.nvars() != blocks {
            return Err(Error::DimensionMismatch {
                expected: blocks,
                found: radial.nvars(),
            });
        }
        let nvars = dim + blocks;
        let images: Vec<_> = (0..blocks)
            .map(|k| Polynomial::variable(nvars, dim + k))
            .collect();
        Self::from_mixed(radial.compose(&images), dim)
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::from_mixed(Polynomial::zero(dim + dim / 4), dim)
    }

    pub fn constant(dim: usize, value: Rational) -> Result<Self> {
        Self::from_mixed(Polynomial::constant(dim + dim / 4, value), dim)
    }

    fn build(source: String, dim: usize, mixed: Polynomial) -> Self {
        let blocks = dim / 4;
        let nvars = dim + blocks;
        // r_k -> sum_i x_{4k+i}^2, x_j -> x_j
        let mut images: Vec<Polynomial> = (0..dim).map(|j| Polynomial::variable(dim, j)).collect();
        for k in 0..blocks {
            let rho = (0..4).fold(Polynomial::zero(dim), |acc, i| {
                acc.add(&Polynomial::variable(dim, 4 * k + i).pow(2))
            });
            images.push(rho);
        }
        let expanded = mixed.compose(&images);
        let partials = (0..dim).map(|j| expanded.derivative(j).compile()).collect();

        let radial = (0..dim).all(|j| !mixed.depends_on(j)).then(|| {
            let mut proj: Vec<Polynomial> = vec![Polynomial::zero(blocks); dim];
            proj.extend((0..blocks).map(|k| Polynomial::variable(blocks, k)));
            mixed.compose(&proj)
        });
        let radial_value = radial.as_ref().map(Polynomial::compile);
        debug_assert_eq!(mixed.nvars(), nvars);
        Self {
            source,
            dim,
            value: expanded.compile(),
            mixed_value: mixed.compile(),
            mixed,
            expanded,
            partials,
            radial,
            radial_value,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> usize {
        self.dim / 4
    }

    pub fn mixed(&self) -> &Polynomial {
        &self.mixed
    }

    pub fn expanded(&self) -> &Polynomial {
        &self.expanded
    }

    /// True when the expression depends on the point only through the radii.
    pub fn is_radial(&self) -> bool {
        self.radial.is_some()
    }

    /// The expression as a polynomial in `r1..rn`, if it is radial.
    pub fn radial_polynomial(&self) -> Option<&Polynomial> {
        self.radial.as_ref()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.value.eval(x)
    }

    /// Evaluates the unexpanded form, computing the radii first.
    pub fn eval_unexpanded(&self, x: &[f64]) -> f64 {
        let mut point = x.to_vec();
        point.extend(block_radii(x));
        self.mixed_value.eval(&point)
    }

    /// Value at the given block radii; `None` when the expression is not radial.
    pub fn radial_value(&self, radii: &[f64]) -> Option<f64> {
        self.radial_value.as_ref().map(|p| p.eval(radii))
    }

    /// Exact gradient evaluated at `x`.
    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(DVector::from_iterator(
            self.dim,
            self.partials.iter().map(|p| p.eval(x)),
        ))
    }
}

/// Name of mixed variable `i` for dimension `dim`.
pub fn variable_name(i: usize, dim: usize) -> String {
    if i < dim {
        format!("x{}", i + 1)
    } else {
        format!("r{}", i - dim + 1)
    }
}

fn parse_triple(texts: &[&str; 3], dim: usize) -> Result<[ScalarExpression; 3]> {
    Ok([
        ScalarExpression::parse(texts[0], dim)?,
        ScalarExpression::parse(texts[1], dim)?,
        ScalarExpression::parse(texts[2], dim)?,
    ])
}

/// Ordered triple of Hamiltonians.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianTriple {
    h: [ScalarExpression; 3],
}

impl HamiltonianTriple {
    pub fn new(h: [ScalarExpression; 3]) -> Result<Self> {
        let dim = h[0].dim();
        for e in &h[1..] {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
        }
        Ok(Self { h })
    }

    pub fn parse(texts: [&str; 3], dim: usize) -> Result<Self> {
        Self::new(parse_triple(&texts, dim)?)
    }

    pub fn dim(&self) -> usize {
        self.h[0].dim()
    }

    pub fn get(&self, alpha: usize) -> &ScalarExpression {
        &self.h[alpha]
    }

    pub fn expressions(&self) -> &[ScalarExpression; 3] {
        &self.h
    }
}

/// Coefficient functions `c_a(r1..rn)` of a quaternionic oscillator, with the
/// optional dual coefficients of a Dirac system.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyProfile {
    c: [ScalarExpression; 3],
    hatted: Option<[ScalarExpression; 3]>,
    signature: Vec<Orientation>,
}

impl FrequencyProfile {
    pub fn new(
        c: [ScalarExpression; 3],
        hatted: Option<[ScalarExpression; 3]>,
        signature: Vec<Orientation>,
    ) -> Result<Self> {
        let dim = c[0].dim();
        let all = c.iter().chain(hatted.iter().flatten());
        for e in all {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            if !e.is_radial() {
                return Err(Error::Structural(format!(
                    "coefficient `{}` depends on bare coordinates; only r1..rn are allowed",
                    e.source()
                )));
            }
        }
        if signature.len() != dim / 4 {
            return Err(Error::DimensionMismatch {
                expected: dim / 4,
                found: signature.len(),
            });
        }
        Ok(Self {
            c,
            hatted,
            signature,
        })
    }

    /// Parses coefficient texts for `n = signature.len()` blocks.
    pub fn parse(
        c: [&str; 3],
        hatted: Option<[&str; 3]>,
        signature: Vec<Orientation>,
    ) -> Result<Self> {
        let dim = 4 * signature.len();
        check_dim(dim)?;
        let c = parse_triple(&c, dim)?;
        let hatted = hatted.map(|h| parse_triple(&h, dim)).transpose()?;
        Self::new(c, hatted, signature)
    }

    pub fn blocks(&self) -> usize {
        self.signature.len()
    }

    pub fn dim(&self) -> usize {
        4 * self.blocks()
    }

    pub fn signature(&self) -> &[Orientation] {
        &self.signature
    }

    pub fn c(&self) -> &[ScalarExpression; 3] {
        &self.c
    }

    pub fn hatted(&self) -> Option<&[ScalarExpression; 3]> {
        self.hatted.as_ref()
    }

    /// `c_a` at the given block radii.
    pub fn coefficients(&self, radii: &[f64]) -> [f64; 3] {
        eval_radial_triple(&self.c, radii)
    }

    /// `chat_a` at the given block radii, zero when absent.
    pub fn hatted_coefficients(&self, radii: &[f64]) -> [f64; 3] {
        self.hatted
            .as_ref()
            .map(|h| eval_radial_triple(h, radii))
            .unwrap_or([0.0; 3])
    }
}

fn eval_radial_triple(t: &[ScalarExpression; 3], radii: &[f64]) -> [f64; 3] {
    let v = |e: &ScalarExpression| e.radial_value(radii).expect("validated as radial");
    [v(&t[0]), v(&t[1]), v(&t[2])]
}

/// Exact gradient of `expr` at `point`.
pub fn gradient(expr: &ScalarExpression, point: &[f64]) -> Result<DVector<f64>> {
    expr.gradient(point)
}

/// Hyperhamiltonian vector field `sum_a L_a grad H_a` (Euclidean metric).
pub fn hh_field(
    h: &HamiltonianTriple,
    s: &ComplexStructureTriple,
    point: &[f64],
) -> Result<DVector<f64>> {
    if h.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: h.dim(),
        });
    }
    let mut out = DVector::zeros(s.dim());
    for a in 0..3 {
        out += s.l(a) * h.get(a).gradient(point)?;
    }
    Ok(out)
}

/// Quaternionic oscillator field `sum_a c_a(rho_1..rho_n) L_a x`.
pub fn oscillator_field(
    p: &FrequencyProfile,
    s: &ComplexStructureTriple,
    point: &[f64],
) -> Result<DVector<f64>> {
    if p.dim() != s.dim() || point.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: if p.dim() != s.dim() { p.dim() } else { point.len() },
        });
    }
    let c = p.coefficients(&block_radii(point));
    let x = DVector::from_column_slice(point);
    Ok(s.combination(&c) * x)
}

/// Hamiltonians generating the oscillator of a sum-radial profile.
///
/// For `H = h(sigma)` with `sigma = r1 + ... + rn` the gradient is
/// `2 h'(sigma) x`, so the oscillator coefficient is `c = 2 h'`. Each
/// Hamiltonian is therefore `H_a(sigma) = (1/2) int_0^sigma c_a(s) ds`, which
/// reduces to `(1/2) c rho` for constant coefficients.
pub fn hamiltonians_from_profile(p: &FrequencyProfile) -> Result<HamiltonianTriple> {
    let blocks = p.blocks();
    let dim = p.dim();
    let mut out = Vec::with_capacity(3);
    for c in p.c() {
        let radial = c.radial_polynomial().expect("validated as radial");
        let along_sigma = sum_radial_part(radial).ok_or_else(|| {
            Error::NotRepresentable(format!(
                "`{}` is not a function of r1 + ... + r{blocks} alone",
                c.source()
            ))
        })?;
        let h = half_antiderivative(&along_sigma);
        let sigma = (0..blocks).fold(Polynomial::zero(blocks), |acc, k| {
            acc.add(&Polynomial::variable(blocks, k))
        });
        out.push(ScalarExpression::from_radial(&h.compose(&[sigma]), dim)?);
    }
    let [a, b, c]: [ScalarExpression; 3] = out.try_into().expect("three hamiltonians");
    HamiltonianTriple::new([a, b, c])
}

/// If `p(r1..rn) = q(r1 + ... + rn)`, returns the univariate `q`.
fn sum_radial_part(p: &Polynomial) -> Option<Polynomial> {
    let blocks = p.nvars();
    // q(s) = p(s, 0, ..., 0)
    let mut images = vec![Polynomial::zero(1); blocks];
    images[0] = Polynomial::variable(1, 0);
    let q = p.compose(&images);
    let sigma = (0..blocks).fold(Polynomial::zero(blocks), |acc, k| {
        acc.add(&Polynomial::variable(blocks, k))
    });
    q.compose(&[sigma]).sub(p).is_zero().then_some(q)
}

/// `(1/2) int_0^s q(u) du` for univariate `q`.
fn half_antiderivative(q: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(1);
    let s = Polynomial::variable(1, 0);
    for (m, c) in q.terms() {
        let k = m[0];
        let factor = Rational::new(BigInt::one(), BigInt::from(2 * (k + 1)));
        out = out.add(&s.pow(k + 1).scale(&(c * factor)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{assemble_block_structure, standard_triple};

    fn pos() -> ComplexStructureTriple {
        standard_triple(Orientation::Positive)
    }

    #[test]
    fn gradient_of_radius_is_twice_the_point() {
        let e = ScalarExpression::parse("r1", 4).unwrap();
        let x = [0.3, -1.2, 0.5, 2.0];
        let g = e.gradient(&x).unwrap();
        for i in 0..4 {
            assert_eq!(g[i], 2.0 * x[i]);
        }
    }

    #[test]
    fn gradient_of_mixed_monomial() {
        let e = ScalarExpression::parse("x1*x3", 4).unwrap();
        let g = e.gradient(&[1.0, 0.0, 2.0, 0.0]).unwrap();
        assert_eq!(g.as_slice(), &[2.0, 0.0, 1.0, 0.0]);
        assert!(matches!(
            e.gradient(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expanded_and_unexpanded_evaluation_agree() {
        let e = ScalarExpression::parse("r1*(1 - r1) + x2*r2^2 - 3/7*x5*x8", 8).unwrap();
        let x = [0.1, -0.7, 0.4, 1.1, 0.9, -0.3, 0.25, 0.6];
        let a = e.eval(&x);
        let b = e.eval_unexpanded(&x);
        assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
    }

    #[test]
    fn radial_detection() {
        assert!(ScalarExpression::parse("r1 + r2^2", 8).unwrap().is_radial());
        assert!(!ScalarExpression::parse("r1 + x1", 8).unwrap().is_radial());
        let e = ScalarExpression::parse("r1*(1 - r1)", 4).unwrap();
        assert_eq!(e.radial_value(&[0.5]), Some(0.25));
    }

    #[test]
    fn rendered_source_parses_back_to_the_same_polynomial() {
        let e = ScalarExpression::parse("(x1 - 2*r1)^3/5 - 7", 4).unwrap();
        let again = ScalarExpression::from_mixed(e.mixed().clone(), 4).unwrap();
        let reparsed = ScalarExpression::parse(again.source(), 4).unwrap();
        assert_eq!(reparsed.mixed(), e.mixed());
    }

    #[test]
    fn rotation_from_quarter_radius() {
        let h = HamiltonianTriple::parse(["r1/4", "0", "0"], 4).unwrap();
        let x = [0.3, -0.1, 0.8, 0.5];
        let v = hh_field(&h, &pos(), &x).unwrap();
        let expect = pos().l(0) * DVector::from_column_slice(&x) * 0.5;
        assert!((v - expect).amax() < 1e-15);
    }

    #[test]
    fn zero_hamiltonians_give_zero_field() {
        let h = HamiltonianTriple::parse(["0", "0", "0"], 4).unwrap();
        let v = hh_field(&h, &pos(), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(v.amax(), 0.0);
    }

    #[test]
    fn oscillator_field_examples() {
        let p = FrequencyProfile::parse(["1", "0", "0"], None, vec![Orientation::Positive]).unwrap();
        let v = oscillator_field(&p, &pos(), &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.as_slice(), &[0.0, -1.0, 0.0, 0.0]);

        let z = FrequencyProfile::parse(["0", "0", "0"], None, vec![Orientation::Positive]).unwrap();
        assert_eq!(oscillator_field(&z, &pos(), &[1.0, 2.0, 3.0, 4.0]).unwrap().amax(), 0.0);

        let sig = vec![Orientation::Positive, Orientation::Positive];
        let s = assemble_block_structure(&sig).unwrap();
        let p = FrequencyProfile::parse(["r1", "0", "r2"], None, sig).unwrap();
        let x = [1.0, 0.5, 0.0, 0.0, 0.0, 2.0, 0.0, 1.0];
        let v = oscillator_field(&p, &s, &x).unwrap();
        let (r1, r2) = (1.25, 5.0);
        let y = pos();
        let l = y.l(0) * r1 + y.l(2) * r2;
        let b1 = &l * DVector::from_column_slice(&x[..4]);
        let b2 = &l * DVector::from_column_slice(&x[4..]);
        for i in 0..4 {
            assert!((v[i] - b1[i]).abs() < 1e-15);
            assert!((v[4 + i] - b2[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn profile_rejects_bare_coordinates() {
        let err = FrequencyProfile::parse(["x1", "0", "0"], None, vec![Orientation::Positive]);
        assert!(matches!(err, Err(Error::Structural(_))));
    }

    #[test]
    fn constant_profile_gives_half_c_rho() {
        let p = FrequencyProfile::parse(["3", "0", "0"], None, vec![Orientation::Positive]).unwrap();
        let h = hamiltonians_from_profile(&p).unwrap();
        let expect = ScalarExpression::parse("3/2*r1", 4).unwrap();
        assert_eq!(h.get(0), &expect);
        assert!(h.get(1).expanded().is_zero());
    }

    #[test]
    fn linear_profile_gives_quarter_sigma_squared() {
        let sig = vec![Orientation::Positive, Orientation::Negative];
        let p = FrequencyProfile::parse(["r1 + r2", "0", "0"], None, sig).unwrap();
        let h = hamiltonians_from_profile(&p).unwrap();
        let expect = ScalarExpression::parse("(r1 + r2)^2/4", 8).unwrap();
        assert_eq!(h.get(0), &expect);
    }

    #[test]
    fn non_sum_radial_profile_is_rejected() {
        let sig = vec![Orientation::Positive, Orientation::Positive];
        let p = FrequencyProfile::parse(["r1", "0", "0"], None, sig).unwrap();
        assert!(matches!(
            hamiltonians_from_profile(&p),
            Err(Error::NotRepresentable(_))
        ));
    }
}
