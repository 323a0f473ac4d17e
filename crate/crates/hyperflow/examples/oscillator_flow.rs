// Closed-form quaternionic oscillator on R^4: conserved quantities, the
// great-circle (Hopf) property and action-spin coordinates.

use hyperflow::flows::{closed_form_flow, uniform_times, OscillatorSystem};
use hyperflow::invariants::{action_spin, conservation_report, hopf_check};
use hyperflow::structures::standard_triple;
use hyperflow::{FrequencyProfile, Orientation};
use nalgebra::DVector;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let profile = FrequencyProfile::parse(["r1", "1 - r1", "r1^2/2"], None, vec![Orientation::Positive])?;
    let sys = OscillatorSystem::new(standard_triple(Orientation::Positive), profile)?;
    let x0 = DVector::from_vec(vec![0.5, 0.1, -0.3, 0.9]);
    let c = sys.coefficients_at(x0.as_slice());
    println!("c at x0: {c:?}");

    let traj = closed_form_flow(&sys, &x0, &uniform_times(10.0, 200))?;
    for r in conservation_report(&traj, Some(c)) {
        println!("{:>4}: initial {:+.6}, drift {:.1e}", r.name, r.initial(), r.max_drift);
    }
    let hopf = hopf_check(&traj, &sys)?;
    println!("distance from the great circle: {hopf:.1e}");

    let end = action_spin(traj.last().unwrap().as_slice())?;
    println!("action {:.6}, spin {:?}", end.actions[0], end.spins[0]);
    assert!(hopf < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
