//! Oscillators perturbed by a radial gradient term,
//! `x' = f0(rho) x + sum c_a(rho) Y_a x + sum chat_a(rho) Yhat_a x`.
//!
//! The skew parts leave `rho = |x|^2` alone, so `rho' = 2 f0(rho) rho` and
//! trajectories settle on spheres at the stable zeros of `f0`, where the
//! motion is a Dirac oscillator.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::ScalarExpression;
use crate::structures::{standard_triple, ComplexStructureTriple, Orientation};

const ZERO_SAMPLES: usize = 4096;
const ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct AsymptoticSystem {
    f0: ScalarExpression,
    c: [ScalarExpression; 3],
    c_hat: [ScalarExpression; 3],
    positive: ComplexStructureTriple,
    negative: ComplexStructureTriple,
}

impl AsymptoticSystem {
    pub fn new(
        f0: ScalarExpression,
        c: [ScalarExpression; 3],
        c_hat: [ScalarExpression; 3],
    ) -> Result<Self> {
        for e in std::iter::once(&f0).chain(&c).chain(&c_hat) {
            if e.dim() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    found: e.dim(),
                });
            }
            if !e.is_radial() {
                return Err(Error::Structural(format!(
                    "`{}` must depend on r1 only",
                    e.source()
                )));
            }
        }
        Ok(Self {
            f0,
            c,
            c_hat,
            positive: standard_triple(Orientation::Positive),
            negative: standard_triple(Orientation::Negative),
        })
    }

    pub fn parse(f0: &str, c: [&str; 3], c_hat: [&str; 3]) -> Result<Self> {
        let p = |s: &str| ScalarExpression::parse(s, 4);
        Self::new(
            p(f0)?,
            [p(c[0])?, p(c[1])?, p(c[2])?],
            [p(c_hat[0])?, p(c_hat[1])?, p(c_hat[2])?],
        )
    }

    pub fn f0(&self) -> &ScalarExpression {
        &self.f0
    }

    pub fn velocity(&self, x: &DVector<f64>) -> DVector<f64> {
        asymptotic_field(self, x.as_slice())
    }

    /// `rho' = 2 f0(rho) rho`.
    pub fn radial_rate(&self, rho: f64) -> f64 {
        2.0 * radial(&self.f0, rho) * rho
    }
}

fn radial(e: &ScalarExpression, rho: f64) -> f64 {
    e.radial_value(&[rho]).expect("validated as radial")
}

/// Velocity of the perturbed system at `point` (dimension 4).
pub fn asymptotic_field(sys: &AsymptoticSystem, point: &[f64]) -> DVector<f64> {
    let rho: f64 = point.iter().map(|v| v * v).sum();
    let x = DVector::from_column_slice(point);
    let eval = |t: &[ScalarExpression; 3]| t.clone().map(|e| radial(&e, rho));
    let skew = sys.positive.combination(&eval(&sys.c)) + sys.negative.combination(&eval(&sys.c_hat));
    &x * radial(&sys.f0, rho) + skew * &x
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialZero {
    pub rho: f64,
    pub stable: bool,
}

/// Zeros of the radial polynomial `f0` in `[lo, hi]`, flagged stable when
/// `f0'(rho) < 0`.
///
/// Roots are found from sign changes on a dense grid and refined by bisection,
/// so zeros of even multiplicity are not reported.
pub fn stable_zeros(f0: &ScalarExpression, lo: f64, hi: f64) -> Result<Vec<RadialZero>> {
    let poly = f0
        .radial_polynomial()
        .filter(|p| p.nvars() == 1)
        .ok_or_else(|| Error::Structural(format!("`{}` is not a polynomial in r1", f0.source())))?;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "search interval [{lo}, {hi}] must satisfy 0 <= lo < hi"
        )));
    }
    let f = poly.compile();
    let df = poly.derivative(0).compile();
    let at = |r: f64| f.eval(&[r]);

    let mut roots = Vec::new();
    let grid: Vec<f64> = (0..=ZERO_SAMPLES)
        .map(|i| lo + (hi - lo) * i as f64 / ZERO_SAMPLES as f64)
        .collect();
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (at(a), at(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 || fb == 0.0 {
            continue;
        }
        let mut fa = fa;
        while b - a > ZERO_TOL {
            let m = 0.5 * (a + b);
            let fm = at(m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if at(hi) == 0.0 {
        roots.push(hi);
    }
    Ok(roots
        .into_iter()
        .map(|rho| RadialZero {
            rho,
            stable: df.eval(&[rho]) < 0.0,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{integrate_rk4, DiracSystem};

    fn zeros(f0: &str, lo: f64, hi: f64) -> Vec<RadialZero> {
        stable_zeros(&ScalarExpression::parse(f0, 4).unwrap(), lo, hi).unwrap()
    }

    #[test]
    fn zeros_and_stability() {
        let z = zeros("1 - r1", 0.0, 3.0);
        assert_eq!(z.len(), 1);
        assert!((z[0].rho - 1.0).abs() < 1e-12 && z[0].stable);

        let z = zeros("r1 - 1", 0.0, 3.0);
        assert_eq!(z.len(), 1);
        assert!(!z[0].stable);

        let z = zeros("(r1 - 1)*(r1 - 4)", 0.0, 5.0);
        assert_eq!(z.len(), 2);
        assert!((z[0].rho - 1.0).abs() < 1e-12 && z[0].stable);
        assert!((z[1].rho - 4.0).abs() < 1e-12 && !z[1].stable);

        assert!(zeros("1 + r1^2", 0.0, 10.0).is_empty());
    }

    #[test]
    fn rejects_bad_interval_and_coordinates() {
        let f = ScalarExpression::parse("1 - r1", 4).unwrap();
        assert!(stable_zeros(&f, 2.0, 1.0).is_err());
        assert!(stable_zeros(&f, -1.0, 1.0).is_err());
        let g = ScalarExpression::parse("x1", 4).unwrap();
        assert!(stable_zeros(&g, 0.0, 1.0).is_err());
    }

    #[test]
    fn vanishing_f0_gives_the_dirac_field() {
        let sys = AsymptoticSystem::parse("0", ["r1", "1", "0"], ["0", "2", "r1"]).unwrap();
        let dirac = DiracSystem::parse(["r1", "1", "0"], ["0", "2", "r1"], 4).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.2, 0.9, 0.4]);
        assert!((sys.velocity(&x) - dirac.velocity(&x)).amax() < 1e-15);
    }

    #[test]
    fn radial_law_holds_pointwise() {
        let sys = AsymptoticSystem::parse("1 - r1", ["r1", "0", "1"], ["2", "0", "0"]).unwrap();
        for x in [[0.3, -0.2, 0.9, 0.4], [1.0, 0.0, 0.0, 0.0], [0.1, 0.2, 0.3, 0.4]] {
            let x = DVector::from_column_slice(&x);
            let rho = x.norm_squared();
            let chain = 2.0 * x.dot(&sys.velocity(&x));
            assert!((chain - sys.radial_rate(rho)).abs() < 1e-12);
        }
    }

    #[test]
    fn radius_settles_on_the_stable_sphere() {
        let sys = AsymptoticSystem::parse("1 - r1", ["1", "0", "0"], ["0", "0", "1"]).unwrap();
        let s = 0.5_f64.sqrt() / 2.0;
        let x0 = DVector::from_vec(vec![s, s, s, s]);
        let traj = integrate_rk4(|x| sys.velocity(x), &x0, 20.0, 1e-3).unwrap();
        let rho = traj.last().unwrap().norm_squared();
        assert!((rho - 1.0).abs() < 1e-6);
    }
}
