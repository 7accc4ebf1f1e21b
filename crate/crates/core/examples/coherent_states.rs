//! Coherent spin states and Wigner rotations.

use std::f64::consts::PI;

use tetrafill::su2::{
    clebsch_gordan, coherent_state, wigner_rotation, Rotation, SphericalDirection, Spin,
};

fn main() {
    let j: Spin = "3/2".parse().unwrap();
    let n = SphericalDirection::new(PI / 3.0, PI / 4.0).unwrap();
    let state = coherent_state(j, &n);
    println!("|j={j}, n=(pi/3, pi/4)> amplitudes, m descending:");
    for (m, a) in j.magnetic_indices().zip(&state.amplitudes) {
        println!("  m = {:>4}: {:+.6} {:+.6}i", m.value(), a.re, a.im);
    }

    // A coherent state is the highest-weight state rotated from z to n.
    let rot = Rotation::from_axis_angle([-n.phi().sin(), n.phi().cos(), 0.0], n.theta());
    let d = wigner_rotation(j, &rot);
    let rotated = d.column(0);
    let diff = rotated
        .iter()
        .zip(&state.amplitudes)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    println!("max |D(g)|j,j> - |j,n>| = {diff:.2e}");

    let half = Spin::HALF;
    let m = |t| tetrafill::su2::MagneticIndex::from_twice(t);
    println!(
        "<1/2 1/2; 1/2 -1/2 | 0 0> = {:.10}",
        clebsch_gordan(half, m(1), half, m(-1), Spin::from_twice(0), m(0))
    );
}
