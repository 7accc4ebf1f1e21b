//! Bipartite entanglement entropies of a few four-qubit states.

use num_complex::Complex64;
use tetrafill::entanglement::{bipartition_entropies, Bipartition};
use tetrafill::intertwiner::FourSpinState;
use tetrafill::su2::Spin;

fn state(amps: &[(usize, f64)]) -> FourSpinState {
    let mut s = FourSpinState::zeros([Spin::HALF; 4]);
    for &(i, a) in amps {
        s.amplitudes_mut()[i] = Complex64::new(a, 0.0);
    }
    s.normalize();
    s
}

fn main() {
    let h = 1.0;
    // Index bits are slots 1..4 from most to least significant; bit 0 is m = +1/2.
    let cases = [
        ("product", state(&[(0, h)])),
        ("GHZ", state(&[(0, h), (15, h)])),
        (
            "singlet x singlet",
            state(&[(0b0101, h), (0b0110, -h), (0b1001, -h), (0b1010, h)]),
        ),
        (
            "W",
            state(&[(0b0111, h), (0b1011, h), (0b1101, h), (0b1110, h)]),
        ),
    ];
    let labels: Vec<String> = Bipartition::ALL
        .iter()
        .map(|b| format!("{:>6}", b.to_string()))
        .collect();
    println!("{:<20}{}", "", labels.join(""));
    for (name, s) in &cases {
        let e = bipartition_entropies(s).unwrap().normalized();
        let cols: Vec<String> = e.iter().map(|v| format!("{v:>6.3}")).collect();
        println!("{name:<20}{}", cols.join(""));
    }
}
