// Hamiltonians generating an oscillator profile, and the hyperhamiltonian
// field they produce.

use hyperflow::hamiltonian::{hamiltonians_from_profile, hh_field, oscillator_field};
use hyperflow::structures::assemble_block_structure;
use hyperflow::{FrequencyProfile, Orientation};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sig = vec![Orientation::Positive; 2];
    let s = assemble_block_structure(&sig)?;
    let profile = FrequencyProfile::parse(["r1 + r2", "2", "(r1 + r2)^2"], None, sig)?;
    let h = hamiltonians_from_profile(&profile)?;
    for (a, e) in h.expressions().iter().enumerate() {
        println!("H{} = {}", a + 1, e.source());
    }
    let x = [0.3, -0.1, 0.7, 0.2, 0.5, 0.4, -0.6, 0.1];
    let gap = (hh_field(&h, &s, &x)? - oscillator_field(&profile, &s, &x)?).amax();
    println!("hyperhamiltonian field vs oscillator field: {gap:.1e}");
    assert!(gap < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
