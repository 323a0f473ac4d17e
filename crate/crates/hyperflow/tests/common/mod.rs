//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.abs().row_sum().max();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=20 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Solution of `rho' = 2 (1 - rho) rho` from `rho0`.
pub fn logistic(rho0: f64, t: f64) -> f64 {
    1.0 / (1.0 + (1.0 / rho0 - 1.0) * (-2.0 * t).exp())
}

/// 4x4 Pfaffian written out.
pub fn pfaffian(m: &DMatrix<f64>) -> f64 {
    m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)]
}

/// Cubic `a0 + a1 r + a2 r^2 + a3 r^3` rendered for the expression parser.
pub fn cubic_text(a: &[f64; 4], var: &str) -> String {
    format!(
        "{:.6} + {:.6}*{var} + {:.6}*{var}^2 + {:.6}*{var}^3",
        a[0], a[1], a[2], a[3]
    )
}

/// Same cubic evaluated from the rounded text coefficients.
pub fn cubic_value(a: &[f64; 4], r: f64) -> f64 {
    let q = |v: f64| format!("{v:.6}").parse::<f64>().unwrap();
    q(a[0]) + q(a[1]) * r + q(a[2]) * r * r + q(a[3]) * r * r * r
}

#[test]
fn expm_of_rotation_generator() {
    let t = 0.7_f64;
    let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
    let e = expm(&a);
    let want = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
    assert!((e - want).amax() < 1e-14);
}

#[test]
fn logistic_solves_its_ode() {
    let h = 1e-6;
    for t in [0.0, 0.5, 3.0] {
        let d = (logistic(0.3, t + h) - logistic(0.3, t - h)) / (2.0 * h);
        let r = logistic(0.3, t);
        assert!((d - 2.0 * (1.0 - r) * r).abs() < 1e-8);
    }
}
