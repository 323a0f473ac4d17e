// Linear symmetries of quaternionic oscillators on R^4n: so(2) plus sp(n).

use hyperflow::structures::assemble_block_structure;
use hyperflow::symmetry::{closure_check, killing_form, solve_invariance, split_components};
use hyperflow::Orientation;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let c = [0.7, -1.3, 0.4];
    for n in 1..=3 {
        let s = assemble_block_structure(&vec![Orientation::Positive; n])?;
        let b = solve_invariance(&s, &c)?;
        let split = split_components(&b)?;
        let closure = closure_check(&b, 1e-10)?;
        println!(
            "n = {n}: dimension {} (commutant {}), closure {:.1e}",
            b.len(),
            split.commutant.len(),
            closure.max_residual
        );
        if let Some(sv) = &b.singular_values {
            println!("  singular values: largest null {:.1e}, smallest kept {:.1e}", sv.largest_null, sv.smallest_kept);
        }
    }

    // su(2) when n = 1: the commutant has a negative definite Killing form
    let s = assemble_block_structure(&[Orientation::Positive])?;
    let split = split_components(&solve_invariance(&s, &c)?)?;
    let comm = hyperflow::symmetry::LieAlgebraBasis::from_matrices(
        split.commutant.iter().map(|g| g.x.clone()).collect(),
    )?;
    let k = killing_form(&comm.structure_constants);
    println!("Killing form eigenvalues: {:?}", k.symmetric_eigenvalues().as_slice());
    println!("rotation generator J = {}", split.rotation_generator.j);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
