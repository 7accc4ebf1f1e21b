//! Moving one normal of a closed base configuration away from closure.

use tetrafill::config::BaseConfig;
use tetrafill::experiments::base_perturbation;
use tetrafill::fill::FillSolver;
use tetrafill::su2::Spin;

fn main() {
    for base in [BaseConfig::Regular, BaseConfig::Disphenoid] {
        let (grid, points) =
            base_perturbation(Spin::HALF, base, 30, 30, 0, &FillSolver::default(), 0);
        let (i, k) = grid.closure_node;
        let at = &points[grid.row(i, k)];
        let ok: Vec<f64> = points
            .iter()
            .filter(|p| !p.evaluation.failed)
            .map(|p| p.evaluation.fill)
            .collect();
        let mean = ok.iter().sum::<f64>() / ok.len() as f64;
        println!(
            "{base:<11} closure node (cos {:+.4}, phi {:.4}): defect {:.1e}, F4 {:.8}; grid mean F4 {:.5}",
            at.cos_theta1, at.phi1, at.closure_defect, at.evaluation.fill, mean
        );
    }
}
