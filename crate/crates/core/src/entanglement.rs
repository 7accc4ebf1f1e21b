//! Reduced density matrices and von Neumann entropies of the seven
//! bipartitions of a four-party pure state.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::intertwiner::FourSpinState;

/// Eigenvalues below this are reported as an invalid density matrix.
pub const NEGATIVE_EIGENVALUE_LIMIT: f64 = -1e-8;
pub const TRACE_TOLERANCE: f64 = 1e-8;

/// One of the seven inequivalent cuts of four parties. Two-slot cuts are
/// canonicalized to contain slot 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bipartition {
    One(usize),
    PairWithFirst(usize),
}

impl Bipartition {
    pub const ALL: [Bipartition; 7] = [
        Bipartition::One(0),
        Bipartition::One(1),
        Bipartition::One(2),
        Bipartition::One(3),
        Bipartition::PairWithFirst(1),
        Bipartition::PairWithFirst(2),
        Bipartition::PairWithFirst(3),
    ];

    /// Zero-based kept slots, ascending.
    pub fn kept_slots(&self) -> Vec<usize> {
        match *self {
            Bipartition::One(i) => {
                assert!(i < 4);
                vec![i]
            }
            Bipartition::PairWithFirst(k) => {
                assert!((1..4).contains(&k));
                vec![0, k]
            }
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bipartition::One(i) => write!(f, "E{}", i + 1),
            Bipartition::PairWithFirst(k) => write!(f, "E1{}", k + 1),
        }
    }
}

/// Normalized and raw (bits) entropies of all seven cuts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BipartitionEntropies {
    /// `E_1 .. E_4`, each divided by `log2 d_i`.
    pub one_to_other: [f64; 4],
    /// `E_12, E_13, E_14`, each divided by `log2(d_1 d_k)`.
    pub two_to_two: [f64; 3],
    pub raw_one_to_other: [f64; 4],
    pub raw_two_to_two: [f64; 3],
}

impl BipartitionEntropies {
    /// Builds the normalized values from raw bits; cuts with a trivial
    /// (one-dimensional) side normalize to zero.
    pub fn from_raw(
        dims: [usize; 4],
        raw_one_to_other: [f64; 4],
        raw_two_to_two: [f64; 3],
    ) -> Self {
        let norm = |raw: f64, d: usize| {
            let max = (d as f64).log2();
            if max > 0.0 {
                raw / max
            } else {
                0.0
            }
        };
        Self {
            one_to_other: std::array::from_fn(|i| norm(raw_one_to_other[i], dims[i])),
            two_to_two: std::array::from_fn(|k| norm(raw_two_to_two[k], dims[0] * dims[k + 1])),
            raw_one_to_other,
            raw_two_to_two,
        }
    }

    /// Normalized values directly, with raw bits unknown (set to NaN).
    pub fn from_normalized(one_to_other: [f64; 4], two_to_two: [f64; 3]) -> Self {
        Self {
            one_to_other,
            two_to_two,
            raw_one_to_other: [f64::NAN; 4],
            raw_two_to_two: [f64::NAN; 3],
        }
    }

    /// The seven normalized values in `E1..E4, E12, E13, E14` order.
    pub fn normalized(&self) -> [f64; 7] {
        let [a, b, c, d] = self.one_to_other;
        let [e, f, g] = self.two_to_two;
        [a, b, c, d, e, f, g]
    }

    pub fn raw(&self) -> [f64; 7] {
        let [a, b, c, d] = self.raw_one_to_other;
        let [e, f, g] = self.raw_two_to_two;
        [a, b, c, d, e, f, g]
    }
}

/// `M` with rows indexed by the kept slots and columns by the rest.
fn cut_matrix(state: &FourSpinState, kept: &[usize]) -> DMatrix<Complex64> {
    let d = state.dims();
    let traced: Vec<usize> = (0..4).filter(|s| !kept.contains(s)).collect();
    let rows: usize = kept.iter().map(|&s| d[s]).product();
    let cols: usize = traced.iter().map(|&s| d[s]).product();
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    let amps = state.amplitudes();
    let mut flat = 0;
    for a in 0..d[0] {
        for b in 0..d[1] {
            for c in 0..d[2] {
                for e in 0..d[3] {
                    let idx = [a, b, c, e];
                    let r = kept.iter().fold(0, |acc, &s| acc * d[s] + idx[s]);
                    let col = traced.iter().fold(0, |acc, &s| acc * d[s] + idx[s]);
                    m[(r, col)] = amps[flat];
                    flat += 1;
                }
            }
        }
    }
    m
}

/// Reduced state of the kept slots, `rho = M M^dagger`.
pub fn reduced_density(state: &FourSpinState, part: Bipartition) -> DMatrix<Complex64> {
    let m = cut_matrix(state, &part.kept_slots());
    &m * m.adjoint()
}

/// `-sum lambda log2 lambda` over the spectrum of `rho`.
///
/// Eigenvalues are clipped to `[0, 1]`; anything below
/// [`NEGATIVE_EIGENVALUE_LIMIT`] or a trace off by more than
/// [`TRACE_TOLERANCE`] is rejected.
pub fn von_neumann_entropy(rho: &DMatrix<Complex64>) -> Result<f64> {
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
        return Err(Error::InvalidDensity {
            reason: format!("trace {trace}"),
        });
    }
    let eig = SymmetricEigen::new(rho.clone());
    let mut entropy = 0.0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda < NEGATIVE_EIGENVALUE_LIMIT {
            return Err(Error::InvalidDensity {
                reason: format!("eigenvalue {lambda:e}"),
            });
        }
        let p = lambda.clamp(0.0, 1.0);
        if p > 0.0 {
            entropy -= p * p.log2();
        }
    }
    Ok(entropy.max(0.0))
}

/// Entropy of the cut, computed from whichever side has the smaller
/// reduced density matrix.
fn cut_entropy(state: &FourSpinState, kept: &[usize]) -> Result<f64> {
    let m = cut_matrix(state, kept);
    let rho = if m.nrows() <= m.ncols() {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    von_neumann_entropy(&rho)
}

pub fn bipartition_entropies(state: &FourSpinState) -> Result<BipartitionEntropies> {
    let mut one = [0.0; 4];
    for (i, e) in one.iter_mut().enumerate() {
        *e = cut_entropy(state, &[i])?;
    }
    let mut two = [0.0; 3];
    for (k, e) in two.iter_mut().enumerate() {
        *e = cut_entropy(state, &[0, k + 1])?;
    }
    Ok(BipartitionEntropies::from_raw(state.dims(), one, two))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intertwiner::{build_basis, embed, InvariantState};
    use crate::su2::{coherent_state, MagneticIndex, Rotation, SphericalDirection, Spin};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::sync::Arc;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn singlet_pair() -> FourSpinState {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = [c(0.0), c(r), c(-r), c(0.0)];
        let amps = (0..16).map(|i| singlet[i / 4] * singlet[i % 4]).collect();
        FourSpinState::from_amplitudes([Spin::HALF; 4], amps)
    }

    fn random_state(rng: &mut ChaCha8Rng, spins: [Spin; 4]) -> FourSpinState {
        let len = spins.iter().map(|s| s.dim()).product();
        let amps = (0..len)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let mut s = FourSpinState::from_amplitudes(spins, amps);
        s.normalize();
        s
    }

    fn max_entry(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn reduced_density_examples() {
        let spins = [Spin::HALF, Spin::ONE, Spin::from_twice(3), Spin::HALF];
        let ms = [1, 0, -1, -1].map(MagneticIndex::from_twice);
        let product = FourSpinState::basis_state(spins, ms);
        for part in Bipartition::ALL {
            let rho = reduced_density(&product, part);
            assert!(max_entry(&(&rho * &rho - &rho)) < 1e-14);
            assert!((rho.trace().re - 1.0).abs() < 1e-14);
        }

        let sp = singlet_pair();
        let rho = reduced_density(&sp, Bipartition::One(0));
        assert!(max_entry(&(rho - DMatrix::identity(2, 2) * c(0.5))) < 1e-15);
        let rho = reduced_density(&sp, Bipartition::PairWithFirst(1));
        assert!(max_entry(&(&rho * &rho - &rho)) < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = DMatrix::from_column_slice(4, 1, &[c(0.0), c(r), c(-r), c(0.0)]);
        assert!(max_entry(&(rho - &singlet * singlet.adjoint())) < 1e-15);
    }

    #[test]
    fn reduced_density_is_hermitian_with_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spins = [Spin::ONE, Spin::HALF, Spin::from_twice(3), Spin::ONE];
        let s = random_state(&mut rng, spins);
        for part in Bipartition::ALL {
            let rho = reduced_density(&s, part);
            assert!(max_entry(&(&rho - rho.adjoint())) < 1e-12);
            assert!((rho.trace() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn entropy_examples() {
        let pure =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0), c(0.0)]));
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-15);
        for d in [2usize, 3, 5, 8] {
            let mixed = DMatrix::<Complex64>::identity(d, d) * c(1.0 / d as f64);
            assert!((von_neumann_entropy(&mixed).unwrap() - (d as f64).log2()).abs() < 1e-14);
        }
        let rho = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.75), c(0.25)]));
        // -(3/4) log2(3/4) - (1/4) log2(1/4)
        let oracle = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        assert!((oracle - (2.0 - 0.75 * 3f64.log2())).abs() < 1e-15);
        assert!((von_neumann_entropy(&rho).unwrap() - 0.8112781245).abs() < 1e-10);
        assert!((von_neumann_entropy(&rho).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_invalid_density() {
        let bad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.1), c(-0.1)]));
        assert!(matches!(
            von_neumann_entropy(&bad),
            Err(Error::InvalidDensity { .. })
        ));
        let bad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.7), c(0.7)]));
        assert!(matches!(
            von_neumann_entropy(&bad),
            Err(Error::InvalidDensity { .. })
        ));
        // tiny negative eigenvalue is clipped
        let ok = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0 + 1e-11),
            c(-1e-11),
        ]));
        assert!(von_neumann_entropy(&ok).unwrap().abs() < 1e-9);
    }

    #[test]
    fn singlet_pair_entropies() {
        let e = bipartition_entropies(&singlet_pair()).unwrap();
        for v in e.one_to_other {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let expected = [0.0, 2.0, 2.0];
        for (v, x) in e.raw_two_to_two.iter().zip(expected) {
            assert!((v - x).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_product_has_no_entanglement() {
        let spins = [Spin::ONE; 4];
        let dirs = [(0.3, 1.0), (2.0, 4.0), (1.2, 0.1), (3.0, 5.5)]
            .map(|(t, p)| coherent_state(Spin::ONE, &SphericalDirection::new(t, p).unwrap()));
        let s = FourSpinState::product_of_coherent([&dirs[0], &dirs[1], &dirs[2], &dirs[3]]);
        assert_eq!(s.spins(), spins);
        let e = bipartition_entropies(&s).unwrap();
        for v in e.normalized() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn invariant_states_have_maximal_one_to_other_entropies() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for tj in 1..=6u32 {
            let basis = Arc::new(build_basis([Spin::from_twice(tj); 4]));
            for _ in 0..10 {
                let coeffs = (0..basis.len())
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect();
                let state = embed(&InvariantState::new(basis.clone(), coeffs).unwrap());
                let e = bipartition_entropies(&state).unwrap();
                for v in e.one_to_other {
                    assert!((v - 1.0).abs() < 1e-9);
                }
                for v in e.normalized() {
                    assert!((-1e-12..=1.0 + 1e-12).contains(&v));
                }
            }
        }
    }

    #[test]
    fn purity_complement_and_local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spins = [Spin::HALF, Spin::ONE, Spin::ONE, Spin::from_twice(3)];
        for _ in 0..20 {
            let s = random_state(&mut rng, spins);
            for part in Bipartition::ALL {
                let kept = part.kept_slots();
                let rest: Vec<usize> = (0..4).filter(|x| !kept.contains(x)).collect();
                let a = von_neumann_entropy(&reduced_density(&s, part)).unwrap();
                let m = cut_matrix(&s, &rest);
                let b = von_neumann_entropy(&(&m * m.adjoint())).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
            let e = bipartition_entropies(&s).unwrap();
            // local random unitaries from random rotations composed with phases
            let ops: Vec<DMatrix<Complex64>> = spins
                .iter()
                .map(|sp| {
                    let d = crate::su2::wigner_rotation(*sp, &Rotation::random(&mut rng));
                    let phases =
                        DMatrix::from_diagonal(&nalgebra::DVector::from_fn(sp.dim(), |_, _| {
                            Complex64::from_polar(1.0, rng.random_range(0.0..6.0))
                        }));
                    phases * d
                })
                .collect();
            let moved = s.apply_local([&ops[0], &ops[1], &ops[2], &ops[3]]);
            let f = bipartition_entropies(&moved).unwrap();
            for (x, y) in e.raw().iter().zip(f.raw()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bipartition_labels() {
        let names: Vec<String> = Bipartition::ALL.iter().map(|b| b.to_string()).collect();
        assert_eq!(names, ["E1", "E2", "E3", "E4", "E12", "E13", "E14"]);
    }
}
