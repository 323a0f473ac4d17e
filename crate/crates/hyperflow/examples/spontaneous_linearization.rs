// Radially damped Dirac system: trajectories collapse onto the stable sphere
// `rho = 1`, where the dynamics is an exact Dirac oscillator.

use hyperflow::flows::{integrate_rk4_sampled, stable_zeros, AsymptoticSystem};
use hyperflow::invariants::block_radii;
use hyperflow::linalg::random_unit_vector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sys = AsymptoticSystem::parse("(1 - r1)*(2 - r1)", ["1", "0", "0"], ["0", "0", "1"])?;
    for z in stable_zeros(sys.f0(), 0.0, 4.0)? {
        println!("f0 vanishes at rho = {:.6} ({})", z.rho, if z.stable { "stable" } else { "unstable" });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for rho0 in [0.1, 0.8, 1.7] {
        let x0 = random_unit_vector(&mut rng, 4) * f64::sqrt(rho0);
        let traj = integrate_rk4_sampled(|x| sys.velocity(x), &x0, 20.0, 1e-3, 5000)?;
        let radii: Vec<String> = traj
            .states()
            .iter()
            .map(|x| format!("{:.6}", block_radii(x.as_slice())[0]))
            .collect();
        println!("rho0 = {rho0}: {}", radii.join(" -> "));
        let end = block_radii(traj.last().unwrap().as_slice())[0];
        assert!((end - 1.0).abs() < 1e-6);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
