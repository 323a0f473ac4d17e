use nalgebra::DVector;

use super::{step_times, Method, Trajectory};
use crate::error::{Error, Result};

/// Classical fixed-step RK4 from `t = 0` to `t_end`, recording every step.
/// The last step is shortened so the final state sits exactly at `t_end`.
pub fn integrate_rk4<F>(field: F, x0: &DVector<f64>, t_end: f64, dt: f64) -> Result<Trajectory>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    integrate_rk4_sampled(field, x0, t_end, dt, 1)
}

/// Same as [`integrate_rk4`] but keeps only every `stride`-th step, plus the
/// initial and final states.
pub fn integrate_rk4_sampled<F>(
    field: F,
    x0: &DVector<f64>,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let grid = step_times(t_end, dt)?;
    let stride = stride.max(1);
    let mut times = vec![0.0];
    let mut states = vec![x0.clone()];
    let mut x = x0.clone();
    let steps = grid.len() - 1;
    for i in 1..=steps {
        let h = grid[i] - grid[i - 1];
        let k1 = field(&x);
        let k2 = field(&(&x + &k1 * (h / 2.0)));
        let k3 = field(&(&x + &k2 * (h / 2.0)));
        let k4 = field(&(&x + &k3 * h));
        x += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: grid[i] });
        }
        if i % stride == 0 || i == steps {
            times.push(grid[i]);
            states.push(x.clone());
        }
    }
    Trajectory::new(times, states, Method::Rk4, Some(dt))
}
