//! Closed-configuration grid: where the fill peaks and the E13/E14 symmetry.

use tetrafill::experiments::{config_grid, theta_means};
use tetrafill::fill::FillSolver;
use tetrafill::su2::Spin;

fn main() {
    let (a, b) = (30, 30);
    let grid = config_grid(Spin::HALF, a, b, 0, &FillSolver::default(), 0);
    let best = grid
        .iter()
        .filter(|p| !p.evaluation.failed)
        .max_by(|x, y| x.evaluation.fill.total_cmp(&y.evaluation.fill))
        .unwrap();
    println!(
        "max F4 = {:.6} at theta = {:.4}, phi = {:.4} (regular: theta = {:.4}, phi in {{0, pi}})",
        best.evaluation.fill,
        best.theta,
        best.phi,
        (-1.0f64 / 3.0).acos()
    );

    let mut worst = 0.0f64;
    for t in 0..a {
        for k in 0..b {
            let e13 = grid[t * b + k].two_to_two()[1];
            let e14 = grid[t * b + (k + b / 2) % b].two_to_two()[2];
            worst = worst.max((e13 - e14).abs());
        }
    }
    println!("max |E13(theta, phi) - E14(theta, phi + pi)| = {worst:.2e}");

    println!("theta     <E12>    <E13>    <E14>    <F4>");
    for m in theta_means(&grid, b).iter().step_by(3) {
        let e = m.mean_two_to_two;
        println!(
            "{:.3}  {:.5}  {:.5}  {:.5}  {:.5}",
            m.theta, e[0], e[1], e[2], m.mean_fill
        );
    }
}
