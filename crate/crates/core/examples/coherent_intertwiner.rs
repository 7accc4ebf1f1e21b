//! Coherent intertwiner of the regular tetrahedron, by projection and by
//! direct group averaging.

use std::sync::Arc;

use num_complex::Complex64;
use tetrafill::intertwiner::{
    build_basis, closure_defect, coherent_intertwiner, embed, group_average_quadrature,
    VectorConfiguration,
};
use tetrafill::su2::Spin;

fn main() {
    let j = Spin::ONE;
    let basis = Arc::new(build_basis([j; 4]));
    let config = VectorConfiguration::regular_tetrahedron();
    println!("closure defect: {:.2e}", closure_defect([j; 4], &config));

    let state = coherent_intertwiner(&basis, &config).unwrap();
    for (k, c) in basis.channel_labels().iter().zip(state.coefficients()) {
        println!("  channel k={k}: {:+.8} {:+.8}i", c.re, c.im);
    }

    let mut averaged = group_average_quadrature([j; 4], &config, 16).unwrap();
    averaged.normalize();
    let overlap: Complex64 = embed(&state).inner(&averaged);
    println!("|<projection|quadrature>| = {:.12}", overlap.norm());
}
