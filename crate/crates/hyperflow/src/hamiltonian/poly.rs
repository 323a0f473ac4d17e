//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Exponent vector of a monomial, one entry per variable.
pub type Monomial = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    // invariant: no zero coefficients are stored
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, value: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], value);
        p
    }

    pub fn from_integer(nvars: usize, value: i64) -> Self {
        Self::constant(nvars, Rational::from_integer(BigInt::from(value)))
    }

    pub fn variable(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index out of range");
        let mut m = vec![0; nvars];
        m[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(m, Rational::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Value of a constant polynomial, `None` if any variable appears.
    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.iter().all(|&e| e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m[var] > 0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut result = Self::from_integer(self.nvars, 1);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact partial derivative with respect to `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m[var];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm[var] -= 1;
            out.add_term(dm, c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Substitutes `images[i]` for variable `i`. All images must share one
    /// variable count, which becomes the variable count of the result.
    pub fn compose(&self, images: &[Polynomial]) -> Polynomial {
        assert_eq!(images.len(), self.nvars);
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut cache: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|p| vec![Polynomial::from_integer(target, 1), p.clone()])
            .collect();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(target, c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let powers = &mut cache[i];
                while powers.len() <= e as usize {
                    let next = powers.last().unwrap().mul(&images[i]);
                    powers.push(next);
                }
                term = term.mul(&powers[e as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Float evaluation straight from the exact coefficients.
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.compile().eval(point)
    }

    pub fn compile(&self) -> CompiledPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let factors = m
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e as i32))
                    .collect();
                (rational_to_f64(c), factors)
            })
            .collect();
        CompiledPolynomial {
            nvars: self.nvars,
            terms,
        }
    }

    /// Renders the polynomial with the given variable names, in a form the
    /// expression parser accepts.
    pub fn render(&self, names: &dyn Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        // highest degree first reads more naturally
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (idx, (m, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let vars: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        names(i)
                    } else {
                        format!("{}^{e}", names(i))
                    }
                })
                .collect();
            let coeff_is_one = mag.is_one();
            if vars.is_empty() || !coeff_is_one {
                write!(out, "{}", render_rational(&mag)).unwrap();
                if !vars.is_empty() {
                    out.push('*');
                }
            }
            out.push_str(&vars.join("*"));
        }
        out
    }
}

fn render_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
    })
}

/// Float form of a polynomial, ready for repeated evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledPolynomial {
    nvars: usize,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPolynomial {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert!(point.len() >= self.nvars);
        self.terms
            .iter()
            .map(|(c, factors)| {
                factors
                    .iter()
                    .fold(*c, |acc, &(i, e)| acc * point[i].powi(e))
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn arithmetic_cancels_to_zero() {
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let a = x.add(&y).pow(2);
        let b = x.pow(2).add(&x.mul(&y).scale(&q(2, 1))).add(&y.pow(2));
        assert!(a.sub(&b).is_zero());
    }

    #[test]
    fn derivative_of_monomial() {
        let x = Polynomial::variable(1, 0);
        let p = x.pow(3).scale(&q(1, 2));
        let d = p.derivative(0);
        assert_eq!(d, x.pow(2).scale(&q(3, 2)));
        assert!(Polynomial::from_integer(1, 5).derivative(0).is_zero());
    }

    #[test]
    fn compose_substitutes_sum_of_squares() {
        // r -> x^2 + y^2
        let r = Polynomial::variable(1, 0).pow(2);
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let rho = x.pow(2).add(&y.pow(2));
        let out = r.compose(std::slice::from_ref(&rho));
        assert_eq!(out, rho.pow(2));
        assert_eq!(out.eval(&[1.0, 2.0]), 25.0);
    }

    #[test]
    fn render_is_readable() {
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let p = x.pow(2).scale(&q(-3, 2)).add(&y).add(&Polynomial::from_integer(2, 1));
        let names = |i: usize| ["x", "y"][i].to_string();
        assert_eq!(p.render(&names), "-3/2*x^2 + y + 1");
        assert_eq!(Polynomial::zero(2).render(&names), "0");
    }
}
