#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use tetrafill::intertwiner::FourSpinState;
use tetrafill::su2::Spin;

pub fn qubits(amps: &[(usize, f64)]) -> FourSpinState {
    let mut s = FourSpinState::zeros([Spin::HALF; 4]);
    for &(i, a) in amps {
        s.amplitudes_mut()[i] = Complex64::new(a, 0.0);
    }
    s.normalize();
    s
}

pub fn ghz() -> FourSpinState {
    qubits(&[(0, 1.0), (15, 1.0)])
}

/// Singlet on slots 1,2 times singlet on slots 3,4; bit 0 of each slot is m = +1/2.
pub fn singlet_pair() -> FourSpinState {
    qubits(&[(0b0101, 1.0), (0b0110, -1.0), (0b1001, -1.0), (0b1010, 1.0)])
}

pub fn random_vector<R: Rng>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / n).collect()
}

pub fn random_product<R: Rng>(spins: [Spin; 4], rng: &mut R) -> FourSpinState {
    let f: Vec<Vec<Complex64>> = spins.iter().map(|s| random_vector(s.dim(), rng)).collect();
    FourSpinState::product([f[0].as_slice(), &f[1], &f[2], &f[3]], spins)
}
