//! Mean entropic fill of the four random ensembles at one spin.

use tetrafill::experiments::{ensemble_mean, sample_ensemble};
use tetrafill::fill::FillSolver;
use tetrafill::sampling::EnsembleKind;
use tetrafill::su2::Spin;

fn main() {
    let j: Spin = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "1/2".into())
        .parse()
        .unwrap();
    let samples = 2000;
    let solver = FillSolver::default();
    println!("j = {j}, {samples} samples per ensemble");
    for kind in EnsembleKind::ALL {
        let records = sample_ensemble(kind, j, samples, 42, &solver, 0);
        let m = ensemble_mean(kind, j, &records);
        println!(
            "  {:<16} mean F4 = {:.5} +- {:.5}  ({} failed)",
            kind.tag(),
            m.mean,
            m.stderr,
            m.failed
        );
    }
}
