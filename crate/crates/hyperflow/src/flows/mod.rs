//! Flows of quaternionic and Dirac oscillators.
//!
//! Along an oscillator trajectory every block radius is conserved, so the
//! coefficient matrix `L = sum_a c_a(rho) L_a` is frozen at its initial value
//! and the flow is the exponential of a matrix with `L^2 = -nu^2 I`:
//!
//! ```text
//! exp(L t) = cos(nu t) I + (sin(nu t) / nu) L,   nu = |c|.
//! ```

mod asymptotic;
mod csv;
mod dirac;
mod rk4;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use asymptotic::{asymptotic_field, stable_zeros, AsymptoticSystem, RadialZero};
pub use csv::{parse_trajectory_csv, write_trajectory_csv, CsvColumns, CsvTable};
pub use dirac::{dirac_flow, walcher_check, DiracSystem, WalcherReport};
pub use rk4::{integrate_rk4, integrate_rk4_sampled};

use crate::error::{Error, Result};
use crate::hamiltonian::{oscillator_field, FrequencyProfile};
use crate::invariants::block_radii;
use crate::linalg::max_abs;
use crate::structures::{
    block_orientations, verify_quaternionic, ComplexStructureTriple, STRUCTURE_TOL,
};

/// Frequencies at or below this are treated as zero.
pub const FREQUENCY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Rk4,
    Dirac,
}

/// Time-stamped states with the method that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    method: Method,
    step: Option<f64>,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: Vec<DVector<f64>>,
        method: Method,
        step: Option<f64>,
    ) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: states.len(),
            });
        }
        check_times(&times)?;
        if let Some(first) = states.first() {
            if let Some(bad) = states.iter().find(|s| s.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        Ok(Self {
            times,
            states,
            method,
            step,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn step(&self) -> Option<f64> {
        self.step
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map(|s| s.len()).unwrap_or(0)
    }

    pub fn initial(&self) -> Option<&DVector<f64>> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&DVector<f64>> {
        self.states.last()
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite time stamp".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "time stamps must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `nu` inferred from a matrix expected to satisfy `L^2 = -nu^2 I`.
pub fn frequency_of(l: &DMatrix<f64>) -> f64 {
    (l.norm_squared() / l.nrows() as f64).sqrt()
}

/// `exp(L t)` for `L^2 = -nu^2 I`.
pub fn flow_matrix(l: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let dim = l.nrows();
    if !l.is_square() {
        return Err(Error::Structural("flow matrix must be square".into()));
    }
    let nu = frequency_of(l);
    if nu <= FREQUENCY_TOL {
        return Err(Error::ZeroFrequency { nu });
    }
    let id = DMatrix::<f64>::identity(dim, dim);
    let residual = max_abs(&(l * l + &id * (nu * nu)));
    if residual > 1e-9 * nu.max(1.0).powi(2) {
        return Err(Error::InvalidStructure { residual });
    }
    let (s, c) = (nu * t).sin_cos();
    Ok(id * c + l * (s / nu))
}

/// Quaternionic oscillator: block-diagonal structure plus coefficient profile.
#[derive(Clone, Debug)]
pub struct OscillatorSystem {
    structure: ComplexStructureTriple,
    profile: FrequencyProfile,
    blocks: Vec<ComplexStructureTriple>,
}

impl OscillatorSystem {
    pub fn new(structure: ComplexStructureTriple, profile: FrequencyProfile) -> Result<Self> {
        if structure.dim() != profile.dim() {
            return Err(Error::DimensionMismatch {
                expected: structure.dim(),
                found: profile.dim(),
            });
        }
        if profile.hatted().is_some() {
            return Err(Error::Structural(
                "profile carries dual coefficients; build a DiracSystem instead".into(),
            ));
        }
        let report = verify_quaternionic(&structure, STRUCTURE_TOL);
        if !report.ok {
            return Err(Error::InvalidStructure {
                residual: report.max_residual,
            });
        }
        let orientations = block_orientations(&structure)?;
        if orientations != profile.signature() {
            return Err(Error::Structural(format!(
                "structure orientations {orientations:?} differ from profile signature {:?}",
                profile.signature()
            )));
        }
        let blocks = (0..structure.blocks())
            .map(|k| structure.block(k))
            .collect::<Result<_>>()?;
        let structure = structure.with_signature(orientations)?;
        Ok(Self {
            structure,
            profile,
            blocks,
        })
    }

    pub fn structure(&self) -> &ComplexStructureTriple {
        &self.structure
    }

    pub fn profile(&self) -> &FrequencyProfile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    /// Coefficients `c_a` at the radii of `x`.
    pub fn coefficients_at(&self, x: &[f64]) -> [f64; 3] {
        self.profile.coefficients(&block_radii(x))
    }

    /// `L^(k) = sum_a c_a L_a^(k)` with `c` frozen at the radii of `x0`.
    pub fn block_generators(&self, x0: &[f64]) -> Vec<DMatrix<f64>> {
        let c = self.coefficients_at(x0);
        self.blocks.iter().map(|b| b.combination(&c)).collect()
    }

    pub fn velocity(&self, x: &DVector<f64>) -> DVector<f64> {
        oscillator_field(&self.profile, &self.structure, x.as_slice())
            .expect("dimensions validated at construction")
    }
}

/// Exact flow of a quaternionic oscillator sampled at `times`. Blocks with
/// zero frequency stay put.
pub fn closed_form_flow(
    sys: &OscillatorSystem,
    x0: &DVector<f64>,
    times: &[f64],
) -> Result<Trajectory> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: x0.len(),
        });
    }
    check_times(times)?;
    let generators = sys.block_generators(x0.as_slice());
    let states = times
        .iter()
        .map(|&t| {
            let mut x = x0.clone();
            for (k, l) in generators.iter().enumerate() {
                let block = x0.rows(4 * k, 4).into_owned();
                let moved = match flow_matrix(l, t) {
                    Ok(m) => m * block,
                    Err(Error::ZeroFrequency { .. }) => block,
                    Err(e) => return Err(e),
                };
                x.rows_mut(4 * k, 4).copy_from(&moved);
            }
            Ok(x)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), states, Method::ClosedForm, None)
}

/// `count + 1` evenly spaced times from 0 to `t_end`, the last one exact.
pub fn uniform_times(t_end: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    let mut times: Vec<f64> = (0..=count)
        .map(|i| t_end * i as f64 / count as f64)
        .collect();
    times[count] = t_end;
    times
}

/// Sample times `0, dt, 2 dt, ...` ending exactly at `t_end`, mirroring the
/// RK4 step grid.
pub fn step_times(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    let full = (t_end / dt).floor() as usize;
    let mut times: Vec<f64> = (0..=full).map(|i| i as f64 * dt).collect();
    let last = *times.last().unwrap();
    if t_end - last > 1e-12 * t_end {
        times.push(t_end);
    } else if full > 0 {
        *times.last_mut().unwrap() = t_end;
    } else {
        times.push(t_end);
    }
    Ok(times)
}
