// Dirac oscillator: the flow factors into two commuting quaternionic
// oscillators on dual structures, in either order.

use hyperflow::flows::{dirac_flow, integrate_rk4, walcher_check, DiracSystem};
use nalgebra::DVector;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sys = DiracSystem::parse(["1", "0", "r1"], ["0", "0.5", "2"], 4)?;
    let x0 = DVector::from_vec(vec![0.3, -0.2, 0.9, 0.4]);
    let (nu_plus, nu_minus) = sys.frequencies_at(x0.as_slice());
    println!("frequencies: nu+ = {nu_plus:.6}, nu- = {nu_minus:.6}");

    let report = walcher_check(&sys, &x0, 1.0, 1e-3)?;
    println!("{report:?}");

    let exact = dirac_flow(&sys, &x0, &[0.0, 0.5, 1.0])?;
    let num = integrate_rk4(|x| sys.velocity(x), &x0, 1.0, 1e-4)?;
    let gap = (exact.last().unwrap() - num.last().unwrap()).norm();
    println!("x(1) = {:.6?}", exact.last().unwrap().as_slice());
    println!("closed form vs RK4 at t = 1: {gap:.1e}");
    assert!(gap < 1e-7);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
