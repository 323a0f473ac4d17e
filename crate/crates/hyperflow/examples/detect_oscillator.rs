// Deciding from samples whether a vector field is a quaternionic oscillator.

use hyperflow::hamiltonian::oscillator_field;
use hyperflow::structures::assemble_block_structure;
use hyperflow::symmetry::{detect_oscillator, samples_on_radii};
use hyperflow::{FrequencyProfile, Orientation};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sig = vec![Orientation::Positive, Orientation::Negative];
    let s = assemble_block_structure(&sig)?;
    let profile = FrequencyProfile::parse(["r1 + r2", "1", "r1*r2 - 1/2"], None, sig)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let radii = vec![vec![0.5, 1.0], vec![1.0, 1.0], vec![2.0, 0.3]];
    let samples = samples_on_radii(&mut rng, &radii, 3)?;

    let field = |x: &DVector<f64>| oscillator_field(&profile, &s, x.as_slice()).unwrap();
    let report = detect_oscillator(field, &s, &samples)?;
    println!("oscillator: {:?}, residual {:.1e}", report.verdict, report.max_residual);
    for e in report.estimates.iter().step_by(3) {
        println!("  radii {:?} -> c {:.6?}", e.radii, e.block_coefficients[0]);
    }

    let y = s.l(0).clone();
    let twisted = |x: &DVector<f64>| &y * x * x[0];
    let report = detect_oscillator(twisted, &s, &samples)?;
    println!(
        "x1 * L1 x: {:?}, residual {:.1e}, spread {:.1e}",
        report.verdict, report.max_residual, report.consistency_spread
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
