//! Conserved quantities of quaternionic oscillators.
//!
//! The block radii `rho_k = |xi_k|^2` are conserved by every oscillator. On
//! R^4 with the standard positive structure the quadratic forms `Q2, Q3` and
//! `B_ij` below are conserved as well, with `c` frozen at `rho(x0)`. These
//! formulas do not carry over to the negative standard structure; reduce to
//! the positive one first.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flows::{frequency_of, OscillatorSystem, Trajectory, FREQUENCY_TOL};

/// Relative singular-value cutoff for [`independence_rank`].
pub const RANK_TOL: f64 = 1e-8;

pub const B_NAMES: [&str; 6] = ["B12", "B13", "B14", "B23", "B24", "B34"];

/// `rho_k = sum_i x_{4(k-1)+i}^2`.
pub fn block_radii(x: &[f64]) -> Vec<f64> {
    x.chunks(4).map(|b| b.iter().map(|v| v * v).sum()).collect()
}

/// `(Q2, Q3)` on R^4.
pub fn q_invariants(x: &[f64], c: &[f64; 3]) -> (f64, f64) {
    let [x1, x2, x3, x4] = four(x);
    let [c1, c2, c3] = *c;
    let q2 = c1 * (x1 * x1 + x2 * x2) + c2 * (x2 * x4 - x1 * x3) + c3 * (x1 * x4 + x2 * x3);
    let q3 = c3 * (x1 * x1 + x3 * x3) + c1 * (x2 * x3 - x1 * x4) + c2 * (x1 * x2 + x3 * x4);
    (q2, q3)
}

/// `(B12, B13, B14, B23, B24, B34)` on R^4.
pub fn b_invariants(x: &[f64], c: &[f64; 3]) -> [f64; 6] {
    let [x1, x2, x3, x4] = four(x);
    let [c1, c2, c3] = *c;
    [
        c1 * (x1 * x1 + x2 * x2) + c3 * (x2 * x3 + x1 * x4) + c2 * (x2 * x4 - x1 * x3),
        c3 * (x1 * x1 + x3 * x3) + c2 * (x1 * x2 + x3 * x4) + c1 * (x2 * x3 - x1 * x4),
        c2 * (x1 * x1 + x4 * x4) + c1 * (x1 * x3 + x2 * x4) - c3 * (x1 * x2 - x3 * x4),
        c2 * (x2 * x2 + x3 * x3) - c1 * (x1 * x3 + x2 * x4) + c3 * (x1 * x2 - x3 * x4),
        c3 * (x2 * x2 + x4 * x4) + c1 * (x1 * x4 - x2 * x3) - c2 * (x1 * x2 + x3 * x4),
        c1 * (x3 * x3 + x4 * x4) - c3 * (x2 * x3 + x1 * x4) + c2 * (x1 * x3 - x2 * x4),
    ]
}

fn four(x: &[f64]) -> [f64; 4] {
    assert_eq!(x.len(), 4, "expected a point of R^4");
    [x[0], x[1], x[2], x[3]]
}

/// Numerical rank of the Jacobian of `(rho, B12, ..., B34)` at `x`.
pub fn independence_rank(x: &[f64], c: &[f64; 3]) -> usize {
    let p = four(x);
    let mut jac = DMatrix::zeros(7, 4);
    for i in 0..4 {
        jac[(0, i)] = 2.0 * p[i];
        // the B are quadratic, so a unit central difference is exact
        let (mut up, mut down) = (p, p);
        up[i] += 1.0;
        down[i] -= 1.0;
        let (bu, bd) = (b_invariants(&up, c), b_invariants(&down, c));
        for r in 0..6 {
            jac[(r + 1, i)] = 0.5 * (bu[r] - bd[r]);
        }
    }
    let sv = jac.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * top).count()
}

/// Action-spin coordinates: block radii and unit 4-vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionSpin {
    pub actions: Vec<f64>,
    pub spins: Vec<[f64; 4]>,
}

pub fn action_spin(x: &[f64]) -> Result<ActionSpin> {
    if x.is_empty() || !x.len().is_multiple_of(4) {
        return Err(Error::Structural(format!(
            "dimension {} is not a positive multiple of 4",
            x.len()
        )));
    }
    let actions = block_radii(x);
    let mut spins = Vec::with_capacity(actions.len());
    for (k, (block, rho)) in x.chunks(4).zip(&actions).enumerate() {
        if *rho == 0.0 {
            return Err(Error::SingularCoordinates { block: k + 1 });
        }
        let r = rho.sqrt();
        spins.push([block[0] / r, block[1] / r, block[2] / r, block[3] / r]);
    }
    Ok(ActionSpin { actions, spins })
}

/// Inverse of [`action_spin`].
pub fn from_action_spin(a: &ActionSpin) -> Result<Vec<f64>> {
    if a.actions.len() != a.spins.len() {
        return Err(Error::DimensionMismatch {
            expected: a.actions.len(),
            found: a.spins.len(),
        });
    }
    if let Some(bad) = a.actions.iter().find(|i| i.is_nan() || **i < 0.0) {
        return Err(Error::InvalidArgument(format!("negative action {bad}")));
    }
    Ok(a.actions
        .iter()
        .zip(&a.spins)
        .flat_map(|(i, s)| {
            let r = i.sqrt();
            s.map(|v| v * r)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub name: String,
    pub values: Vec<f64>,
    /// `max |v(t) - v(0)| / max(1, |v(0)|)`
    pub max_drift: f64,
}

impl InvariantReport {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        let v0 = values.first().copied().unwrap_or(0.0);
        let scale = v0.abs().max(1.0);
        let max_drift = values
            .iter()
            .map(|v| (v - v0).abs() / scale)
            .fold(0.0, f64::max);
        Self {
            name: name.into(),
            values,
            max_drift,
        }
    }

    pub fn initial(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Drift of each `rho_k`, plus `Q2, Q3, B_ij` when `c` is given for an R^4
/// trajectory.
pub fn conservation_report(traj: &Trajectory, c: Option<[f64; 3]>) -> Vec<InvariantReport> {
    let states = traj.states();
    let radii: Vec<Vec<f64>> = states.iter().map(|x| block_radii(x.as_slice())).collect();
    let mut out: Vec<InvariantReport> = (0..traj.dim() / 4)
        .map(|k| InvariantReport::new(format!("rho{}", k + 1), radii.iter().map(|r| r[k]).collect()))
        .collect();
    if let (Some(c), 4) = (c, traj.dim()) {
        let q: Vec<(f64, f64)> = states.iter().map(|x| q_invariants(x.as_slice(), &c)).collect();
        out.push(InvariantReport::new("Q2", q.iter().map(|v| v.0).collect()));
        out.push(InvariantReport::new("Q3", q.iter().map(|v| v.1).collect()));
        let b: Vec<[f64; 6]> = states.iter().map(|x| b_invariants(x.as_slice(), &c)).collect();
        for (j, name) in B_NAMES.iter().enumerate() {
            out.push(InvariantReport::new(*name, b.iter().map(|v| v[j]).collect()));
        }
    }
    out
}

/// Largest distance of a block of the trajectory from the plane
/// `span{x0_k, L_k x0_k}` traced by the exact flow.
pub fn hopf_check(traj: &Trajectory, sys: &OscillatorSystem) -> Result<f64> {
    let x0 = traj
        .initial()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: x0.len(),
        });
    }
    let mut worst: f64 = 0.0;
    for (k, l) in sys.block_generators(x0.as_slice()).iter().enumerate() {
        let a = x0.rows(4 * k, 4).into_owned();
        if frequency_of(l) <= FREQUENCY_TOL || a.norm() == 0.0 {
            continue;
        }
        // L is skew, so L a is already orthogonal to a
        let e1 = &a / a.norm();
        let la = l * &a;
        let e2 = &la / la.norm();
        for s in traj.states() {
            let y: DVector<f64> = s.rows(4 * k, 4).into_owned();
            let proj = &e1 * e1.dot(&y) + &e2 * e2.dot(&y);
            worst = worst.max((y - proj).norm());
        }
    }
    Ok(worst)
}
