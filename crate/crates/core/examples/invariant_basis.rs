//! Orthonormal bases of the invariant subspace for a few spin assignments.

use std::sync::Arc;
use tetrafill::intertwiner::{build_basis, embed, InvariantState};
use tetrafill::su2::{Rotation, Spin};

fn main() {
    let s = Spin::from_twice;
    for spins in [
        [s(1); 4],
        [s(2); 4],
        [s(3); 4],
        [s(6); 4],
        [s(1), s(2), s(2), s(3)],
    ] {
        let basis = build_basis(spins);
        let labels: Vec<String> = basis
            .channel_labels()
            .iter()
            .map(|k| k.to_string())
            .collect();
        println!(
            "spins ({}, {}, {}, {}): dimension {}, channel spins [{}]",
            spins[0],
            spins[1],
            spins[2],
            spins[3],
            basis.len(),
            labels.join(", ")
        );
    }

    // Invariance check on a random element of Inv(1,1,1,1).
    let basis = Arc::new(build_basis([s(2); 4]));
    let state = InvariantState::new(basis, vec![0.6.into(), 0.0.into(), 0.8.into()]).unwrap();
    let tensor = embed(&state);
    let rot = Rotation::from_euler_zyz(0.3, 1.1, -2.0);
    println!(
        "max |g.psi - psi| = {:.2e}",
        tensor.rotated(&rot).max_abs_diff(&tensor)
    );
}
