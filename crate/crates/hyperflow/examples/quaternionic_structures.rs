// Standard quaternionic triples, their orientations, and canonical reduction
// of a structure hidden behind a random rotation.

use hyperflow::linalg::random_orthogonal;
use hyperflow::structures::{
    canonical_reduction, dual_commutation_check, orientation_of, standard_triple,
    verify_quaternionic, STRUCTURE_TOL,
};
use hyperflow::Orientation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for o in [Orientation::Positive, Orientation::Negative] {
        let s = standard_triple(o);
        let report = verify_quaternionic(&s, 0.0);
        println!("{o:?}: quaternionic residual {:e}, orientation {:?}", report.max_residual, orientation_of(&s)?);
        println!("  L1 = {}", s.l(0));
    }
    let comm = dual_commutation_check(0.0);
    println!("[Y_a, Yhat_b] max entry: {:e}", comm.max_residual);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = random_orthogonal(&mut rng, 4, true);
    let hidden = standard_triple(Orientation::Negative).conjugate(&r)?;
    let (rot, o) = canonical_reduction(&hidden)?;
    let back = hidden.conjugate(&rot)?;
    let target = standard_triple(o);
    let residual = (0..3)
        .map(|a| (back.l(a) - target.l(a)).amax())
        .fold(0.0_f64, f64::max);
    println!("rotated structure reduces to the {o:?} standard triple, residual {residual:.2e}");
    assert!(residual < STRUCTURE_TOL);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
