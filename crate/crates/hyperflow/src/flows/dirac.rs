//! Dirac oscillators: the sum of a quaternionic oscillator on the positive
//! standard structure and one on the dual (negative) standard structure.
//!
//! The two fields commute, so the flow of the sum factors as
//! `A(t) = A_+(t) A_-(t)` with `A_± = cos(nu_± t) I + sin(nu_± t) K_±` and
//! `K_± = (1/nu_±) sum_a c_a^± L_a^±`.
//!
//! Systems with n > 1 blocks apply the 4-dimensional construction on every
//! block with the coefficients evaluated at all block radii. This blockwise
//! extension is experimental.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{check_times, integrate_rk4, Method, Trajectory, FREQUENCY_TOL};
use crate::error::{Error, Result};
use crate::hamiltonian::ScalarExpression;
use crate::invariants::block_radii;
use crate::linalg::{block_diagonal, commutator};
use crate::structures::{standard_triple, ComplexStructureTriple, Orientation};

#[derive(Clone, Debug)]
pub struct DiracSystem {
    c: [ScalarExpression; 3],
    c_hat: [ScalarExpression; 3],
    positive: ComplexStructureTriple,
    negative: ComplexStructureTriple,
}

impl DiracSystem {
    pub fn new(c: [ScalarExpression; 3], c_hat: [ScalarExpression; 3]) -> Result<Self> {
        let dim = c[0].dim();
        for e in c.iter().chain(c_hat.iter()) {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            if !e.is_radial() {
                return Err(Error::Structural(format!(
                    "coefficient `{}` must depend on the radii only",
                    e.source()
                )));
            }
        }
        let blocks = dim / 4;
        let tile = |o: Orientation| -> ComplexStructureTriple {
            let s = standard_triple(o);
            let pick = |a: usize| block_diagonal(&vec![s.l(a).clone(); blocks]);
            ComplexStructureTriple::new([pick(0), pick(1), pick(2)])
                .and_then(|t| t.with_signature(vec![o; blocks]))
                .expect("tiled standard triple is well formed")
        };
        Ok(Self {
            c,
            c_hat,
            positive: tile(Orientation::Positive),
            negative: tile(Orientation::Negative),
        })
    }

    pub fn parse(c: [&str; 3], c_hat: [&str; 3], dim: usize) -> Result<Self> {
        let p = |t: [&str; 3]| -> Result<[ScalarExpression; 3]> {
            Ok([
                ScalarExpression::parse(t[0], dim)?,
                ScalarExpression::parse(t[1], dim)?,
                ScalarExpression::parse(t[2], dim)?,
            ])
        };
        Self::new(p(c)?, p(c_hat)?)
    }

    pub fn dim(&self) -> usize {
        self.c[0].dim()
    }

    fn eval(t: &[ScalarExpression; 3], radii: &[f64]) -> [f64; 3] {
        let v = |e: &ScalarExpression| e.radial_value(radii).expect("validated as radial");
        [v(&t[0]), v(&t[1]), v(&t[2])]
    }

    /// `(c, chat)` at the radii of `x`.
    pub fn coefficients_at(&self, x: &[f64]) -> ([f64; 3], [f64; 3]) {
        let radii = block_radii(x);
        (Self::eval(&self.c, &radii), Self::eval(&self.c_hat, &radii))
    }

    /// Unnormalized generators `sum c_a Y_a` and `sum chat_a Yhat_a` at the radii of `x`.
    pub fn generators_at(&self, x: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let (c, ch) = self.coefficients_at(x);
        (self.positive.combination(&c), self.negative.combination(&ch))
    }

    /// `(nu_+, nu_-)` at the radii of `x`.
    pub fn frequencies_at(&self, x: &[f64]) -> (f64, f64) {
        let (c, ch) = self.coefficients_at(x);
        (norm3(&c), norm3(&ch))
    }

    pub fn velocity(&self, x: &DVector<f64>) -> DVector<f64> {
        let (p, m) = self.generators_at(x.as_slice());
        p * x + m * x
    }

    /// `A_+(t)` and `A_-(t)` for a trajectory starting at `x0`.
    pub fn factors(&self, x0: &[f64], t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let (c, ch) = self.coefficients_at(x0);
        (
            factor(&self.positive, &c, t),
            factor(&self.negative, &ch, t),
        )
    }
}

fn norm3(c: &[f64; 3]) -> f64 {
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

/// `cos(nu t) I + sin(nu t) K` with `K = sum (c_a / nu) L_a`; identity when `nu = 0`.
fn factor(s: &ComplexStructureTriple, c: &[f64; 3], t: f64) -> DMatrix<f64> {
    let dim = s.dim();
    let nu = norm3(c);
    if nu <= FREQUENCY_TOL {
        return DMatrix::identity(dim, dim);
    }
    let k = s.combination(&[c[0] / nu, c[1] / nu, c[2] / nu]);
    let (sn, cs) = (nu * t).sin_cos();
    DMatrix::identity(dim, dim) * cs + k * sn
}

/// Closed-form Dirac flow `x(t) = A_+(t) A_-(t) x0`.
pub fn dirac_flow(sys: &DiracSystem, x0: &DVector<f64>, times: &[f64]) -> Result<Trajectory> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: x0.len(),
        });
    }
    check_times(times)?;
    let states = times
        .iter()
        .map(|&t| {
            let (a_plus, a_minus) = sys.factors(x0.as_slice(), t);
            a_plus * (a_minus * x0)
        })
        .collect();
    Trajectory::new(times.to_vec(), states, Method::Dirac, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WalcherReport {
    /// max over sample points of `|[K_+, K_-] x|`
    pub commutator_residual: f64,
    /// `|A_-(A_+ x0) - A_+(A_- x0)|`
    pub flow_mismatch: f64,
    /// `|A_+ A_- x0 - RK4(x0)|` for the summed field at step `dt`
    pub integrator_mismatch: f64,
}

/// Checks the factorization of the Dirac flow into commuting factors.
pub fn walcher_check(sys: &DiracSystem, x0: &DVector<f64>, t: f64, dt: f64) -> Result<WalcherReport> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: x0.len(),
        });
    }
    let (a_plus, a_minus) = sys.factors(x0.as_slice(), t);
    let plus_then_minus = &a_minus * (&a_plus * x0);
    let minus_then_plus = &a_plus * (&a_minus * x0);
    let flow_mismatch = (&plus_then_minus - &minus_then_plus).norm();

    let samples = [
        x0.clone(),
        plus_then_minus.clone(),
        &a_plus * x0,
        &a_minus * x0,
    ];
    let commutator_residual = samples
        .iter()
        .map(|x| {
            let (kp, km) = sys.generators_at(x.as_slice());
            (commutator(&kp, &km) * x).norm()
        })
        .fold(0.0_f64, f64::max);

    let integrator_mismatch = if t > 0.0 {
        let traj = integrate_rk4(|x| sys.velocity(x), x0, t, dt)?;
        (traj.last().unwrap() - &minus_then_plus).norm()
    } else {
        0.0
    };
    Ok(WalcherReport {
        commutator_residual,
        flow_mismatch,
        integrator_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn explicit_factor_entries() {
        // A_+ and A_- written out entrywise
        let sys = DiracSystem::parse(["0.3", "-1.1", "0.7"], ["2", "0.5", "-0.4"], 4).unwrap();
        let x0 = [1.0, 0.0, 0.0, 0.0];
        let t = 0.9;
        let (ap, am) = sys.factors(&x0, t);
        let (c, ch) = sys.coefficients_at(&x0);
        let (np, nm) = (norm3(&c), norm3(&ch));
        let [c1, c2, c3] = c.map(|v| v / np);
        let [h1, h2, h3] = ch.map(|v| v / nm);
        let (sp, xp) = (np * t).sin_cos();
        let (sm, xm) = (nm * t).sin_cos();
        let expect_p = DMatrix::from_row_slice(4, 4, &[
            xp, c1 * sp, c3 * sp, c2 * sp,
            -c1 * sp, xp, c2 * sp, -c3 * sp,
            -c3 * sp, -c2 * sp, xp, c1 * sp,
            -c2 * sp, c3 * sp, -c1 * sp, xp,
        ]);
        let expect_m = DMatrix::from_row_slice(4, 4, &[
            xm, -h3 * sm, h1 * sm, -h2 * sm,
            h3 * sm, xm, h2 * sm, h1 * sm,
            -h1 * sm, -h2 * sm, xm, h3 * sm,
            h2 * sm, -h1 * sm, -h3 * sm, xm,
        ]);
        assert!(max_abs(&(ap - expect_p)) < 1e-15);
        assert!(max_abs(&(am - expect_m)) < 1e-15);
    }

    #[test]
    fn vanishing_dual_part_reduces_to_the_positive_oscillator() {
        let sys = DiracSystem::parse(["r1", "1", "0"], ["0", "0", "0"], 4).unwrap();
        let x0 = DVector::from_vec(vec![0.5, 0.1, -0.3, 0.9]);
        let traj = dirac_flow(&sys, &x0, &[0.0, 0.7]).unwrap();
        let (kp, _) = sys.generators_at(x0.as_slice());
        let expect = super::super::flow_matrix(&kp, 0.7).unwrap() * &x0;
        assert!((traj.last().unwrap() - expect).amax() < 1e-14);
        let report = walcher_check(&sys, &x0, 0.7, 1e-3).unwrap();
        assert_eq!(report.flow_mismatch, 0.0);
    }

    #[test]
    fn all_zero_coefficients_give_a_constant_trajectory() {
        let sys = DiracSystem::parse(["0", "0", "0"], ["0", "0", "0"], 4).unwrap();
        let x0 = DVector::from_vec(vec![0.5, 0.1, -0.3, 0.9]);
        let traj = dirac_flow(&sys, &x0, &[0.0, 1.0, 5.0]).unwrap();
        assert!(traj.states().iter().all(|s| s == &x0));
    }

    #[test]
    fn factors_commute_and_match_rk4() {
        let sys = DiracSystem::parse(["1", "0", "0"], ["0", "0", "2"], 4).unwrap();
        let x0 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let report = walcher_check(&sys, &x0, 0.4, 1e-3).unwrap();
        assert!(report.commutator_residual <= 1e-12);
        assert!(report.flow_mismatch <= 1e-12);
        assert!(report.integrator_mismatch <= 1e-8, "{report:?}");
    }

    #[test]
    fn blockwise_extension_conserves_block_radii() {
        let sys = DiracSystem::parse(["r1", "r2", "1"], ["0", "r1*r2", "1/2"], 8).unwrap();
        let x0 = DVector::from_vec(vec![0.5, 0.1, -0.3, 0.9, 1.0, 0.0, 0.2, -0.4]);
        let traj = dirac_flow(&sys, &x0, &[0.0, 0.5, 3.0]).unwrap();
        let r0 = block_radii(x0.as_slice());
        for s in traj.states() {
            let r = block_radii(s.as_slice());
            for k in 0..2 {
                assert!((r[k] - r0[k]).abs() < 1e-13);
            }
        }
    }
}
