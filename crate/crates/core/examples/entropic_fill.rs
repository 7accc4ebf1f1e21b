//! Entropic fill of named states and of an entropy vector given by hand.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tetrafill::entanglement::BipartitionEntropies;
use tetrafill::fill::{entropic_fill, FillSolver};
use tetrafill::intertwiner::FourSpinState;
use tetrafill::su2::Spin;

fn main() {
    let mut ghz = FourSpinState::zeros([Spin::HALF; 4]);
    ghz.amplitudes_mut()[0] = Complex64::new(1.0, 0.0);
    ghz.amplitudes_mut()[15] = Complex64::new(1.0, 0.0);
    ghz.normalize();
    let r = entropic_fill(&ghz, 1e-12).unwrap();
    println!("GHZ: F4 = {:.12}, sigma = {:?}", r.fill, r.sigmas.sigma);

    let e = BipartitionEntropies::from_normalized([0.9, 0.8, 0.85, 0.95], [0.7, 0.6, 0.65]);
    let solver = FillSolver::new(1e-12, 32);
    let r = solver
        .fill_from_entropies(&e, &mut ChaCha20Rng::seed_from_u64(0))
        .unwrap();
    println!("hand-picked entropies:");
    println!("  sigma  = {:.6?}", r.sigmas.sigma);
    println!("  lambda = {:.6}", r.sigmas.lambda);
    println!(
        "  V = {:.6}, F4 = {:.6}, residual = {:.1e}",
        r.volume, r.fill, r.residual
    );
}
