//! Four-valent intertwiners: the SU(2)-invariant subspace of four spins,
//! its (12)(34) channel basis, and coherent intertwiners.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::su2::{
    clebsch_gordan, coherent_state, wigner_rotation, CoherentSpinState, MagneticIndex, Rotation,
    SphericalDirection, Spin,
};

/// Coherent intertwiners with a smaller projection norm are rejected.
pub const ZERO_PROJECTION_THRESHOLD: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A pure state of four spins as a dense rank-4 tensor.
///
/// Amplitudes are stored row-major with slot 1 slowest; along every slot the
/// magnetic numbers descend from `j` to `-j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourSpinState {
    spins: [Spin; 4],
    amplitudes: Vec<Complex64>,
}

impl FourSpinState {
    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(spins: [Spin; 4], amplitudes: Vec<Complex64>) -> Self {
        assert_eq!(
            amplitudes.len(),
            spins.iter().map(|s| s.dim()).product::<usize>()
        );
        Self { spins, amplitudes }
    }

    pub fn zeros(spins: [Spin; 4]) -> Self {
        let len = spins.iter().map(|s| s.dim()).product();
        Self {
            spins,
            amplitudes: vec![ZERO; len],
        }
    }

    /// The basis state `|j1 m1> ... |j4 m4>`.
    pub fn basis_state(spins: [Spin; 4], ms: [MagneticIndex; 4]) -> Self {
        let mut out = Self::zeros(spins);
        let idx = out.flat_index([
            ms[0].index_in(spins[0]),
            ms[1].index_in(spins[1]),
            ms[2].index_in(spins[2]),
            ms[3].index_in(spins[3]),
        ]);
        out.amplitudes[idx] = Complex64::new(1.0, 0.0);
        out
    }

    /// Tensor product of four single-spin vectors.
    pub fn product(factors: [&[Complex64]; 4], spins: [Spin; 4]) -> Self {
        for (f, s) in factors.iter().zip(&spins) {
            assert_eq!(f.len(), s.dim());
        }
        let mut amplitudes = Vec::with_capacity(factors.iter().map(|f| f.len()).product());
        for &a in factors[0] {
            for &b in factors[1] {
                let ab = a * b;
                for &c in factors[2] {
                    let abc = ab * c;
                    amplitudes.extend(factors[3].iter().map(|&d| abc * d));
                }
            }
        }
        Self { spins, amplitudes }
    }

    pub fn product_of_coherent(states: [&CoherentSpinState; 4]) -> Self {
        Self::product(
            states.map(|s| s.amplitudes.as_slice()),
            states.map(|s| s.spin),
        )
    }

    pub fn spins(&self) -> [Spin; 4] {
        self.spins
    }

    pub fn dims(&self) -> [usize; 4] {
        self.spins.map(|s| s.dim())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn flat_index(&self, idx: [usize; 4]) -> usize {
        let d = self.dims();
        ((idx[0] * d[1] + idx[1]) * d[2] + idx[2]) * d[3] + idx[3]
    }

    pub fn get(&self, idx: [usize; 4]) -> Complex64 {
        self.amplitudes[self.flat_index(idx)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Scales to unit norm; returns the previous norm.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
        n
    }

    /// `<self | other>`.
    pub fn inner(&self, other: &FourSpinState) -> Complex64 {
        assert_eq!(self.spins, other.spins);
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &FourSpinState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Applies one operator per slot, `(U1 x U2 x U3 x U4) |self>`.
    pub fn apply_local(&self, ops: [&DMatrix<Complex64>; 4]) -> FourSpinState {
        let mut cur = self.amplitudes.clone();
        let d = self.dims();
        let mut next = vec![ZERO; cur.len()];
        for slot in 0..4 {
            let op = ops[slot];
            assert_eq!(op.nrows(), d[slot]);
            assert_eq!(op.ncols(), d[slot]);
            let outer: usize = d[..slot].iter().product();
            let inner: usize = d[slot + 1..].iter().product();
            let ds = d[slot];
            for o in 0..outer {
                for r in 0..ds {
                    for i in 0..inner {
                        let mut acc = ZERO;
                        for c in 0..ds {
                            acc += op[(r, c)] * cur[(o * ds + c) * inner + i];
                        }
                        next[(o * ds + r) * inner + i] = acc;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        FourSpinState {
            spins: self.spins,
            amplitudes: cur,
        }
    }

    /// Simultaneous rotation of all four spins.
    pub fn rotated(&self, rot: &Rotation) -> FourSpinState {
        let ds = self.spins.map(|s| wigner_rotation(s, rot));
        self.apply_local([&ds[0], &ds[1], &ds[2], &ds[3]])
    }

    /// Reorders tensor slots: slot `k` of the result is slot `perm[k]` of `self`.
    pub fn permute_slots(&self, perm: [usize; 4]) -> FourSpinState {
        let mut sorted = perm;
        sorted.sort_unstable();
        assert_eq!(sorted, [0, 1, 2, 3], "not a permutation");
        let spins = perm.map(|p| self.spins[p]);
        let mut out = FourSpinState::zeros(spins);
        let d = self.dims();
        for a in 0..d[0] {
            for b in 0..d[1] {
                for c in 0..d[2] {
                    for e in 0..d[3] {
                        let src = [a, b, c, e];
                        let dst = perm.map(|p| src[p]);
                        let v = self.get(src);
                        let k = out.flat_index(dst);
                        out.amplitudes[k] = v;
                    }
                }
            }
        }
        out
    }
}

/// Orthonormal basis of `Inv(j1, j2, j3, j4)` labelled by the intermediate
/// spin `k` of the (12)(34) coupling.
#[derive(Clone, Debug)]
pub struct InvariantBasis {
    spins: [Spin; 4],
    channel_labels: Vec<Spin>,
    basis_tensors: Vec<FourSpinState>,
    /// Flat indices with total magnetic number zero; basis tensors vanish elsewhere.
    support: Vec<usize>,
}

impl InvariantBasis {
    pub fn spins(&self) -> [Spin; 4] {
        self.spins
    }

    pub fn channel_labels(&self) -> &[Spin] {
        &self.channel_labels
    }

    pub fn basis_tensors(&self) -> &[FourSpinState] {
        &self.basis_tensors
    }

    pub fn len(&self) -> usize {
        self.basis_tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis_tensors.is_empty()
    }
}

/// Channel basis of the invariant subspace.
///
/// `I_k = sum_mu |(j1 j2) k mu> |(j3 j4) k -mu> (-1)^(k-mu) / sqrt(2k+1)` for every
/// admissible `k`; empty when the four spins cannot couple to zero.
pub fn build_basis(spins: [Spin; 4]) -> InvariantBasis {
    let [j1, j2, j3, j4] = spins;
    let total: u32 = spins.iter().map(|s| s.twice()).sum();
    let d = spins.map(|s| s.dim());
    let ms: [Vec<MagneticIndex>; 4] = spins.map(|s| s.magnetic_indices().collect());

    let mut support = Vec::new();
    if total.is_multiple_of(2) {
        for (a, m1) in ms[0].iter().enumerate() {
            for (b, m2) in ms[1].iter().enumerate() {
                for (c, m3) in ms[2].iter().enumerate() {
                    let t4 = -(m1.twice() + m2.twice() + m3.twice());
                    let m4 = MagneticIndex::from_twice(t4);
                    if m4.is_valid_for(j4) {
                        let e = m4.index_in(j4);
                        support.push(((a * d[1] + b) * d[2] + c) * d[3] + e);
                    }
                }
            }
        }
    }

    let mut channel_labels = Vec::new();
    let mut basis_tensors = Vec::new();
    if total.is_multiple_of(2) {
        let lo = j1
            .twice()
            .abs_diff(j2.twice())
            .max(j3.twice().abs_diff(j4.twice()));
        let hi = (j1.twice() + j2.twice()).min(j3.twice() + j4.twice());
        let parity = (j1.twice() + j2.twice()) % 2;
        for tk in (lo..=hi).filter(|t| t % 2 == parity) {
            let k = Spin::from_twice(tk);
            let mut tensor = FourSpinState::zeros(spins);
            let scale = 1.0 / f64::from(tk + 1).sqrt();
            for (a, m1) in ms[0].iter().enumerate() {
                for (b, m2) in ms[1].iter().enumerate() {
                    let mu = MagneticIndex::from_twice(m1.twice() + m2.twice());
                    let left = clebsch_gordan(j1, *m1, j2, *m2, k, mu);
                    if left == 0.0 {
                        continue;
                    }
                    let neg_mu = MagneticIndex::from_twice(-mu.twice());
                    // (-1)^(k - mu); k - mu is an integer here.
                    let sign = if ((tk as i32 - mu.twice()) / 2) % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    for (c, m3) in ms[2].iter().enumerate() {
                        let m4 = MagneticIndex::from_twice(neg_mu.twice() - m3.twice());
                        if !m4.is_valid_for(j4) {
                            continue;
                        }
                        let right = clebsch_gordan(j3, *m3, j4, m4, k, neg_mu);
                        let e = m4.index_in(j4);
                        let idx = tensor.flat_index([a, b, c, e]);
                        tensor.amplitudes[idx] = Complex64::new(sign * scale * left * right, 0.0);
                    }
                }
            }
            channel_labels.push(k);
            basis_tensors.push(tensor);
        }
    }

    InvariantBasis {
        spins,
        channel_labels,
        basis_tensors,
        support,
    }
}

/// A normalized element of the invariant subspace in channel coordinates.
#[derive(Clone, Debug)]
pub struct InvariantState {
    basis: Arc<InvariantBasis>,
    coefficients: Vec<Complex64>,
}

impl InvariantState {
    /// Normalizes `coefficients`.
    pub fn new(basis: Arc<InvariantBasis>, mut coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::Config(format!(
                "expected {} channel coefficients, got {}",
                basis.len(),
                coefficients.len()
            )));
        }
        let norm = coefficients
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm < ZERO_PROJECTION_THRESHOLD {
            return Err(Error::ZeroProjection { norm });
        }
        coefficients.iter_mut().for_each(|c| *c /= norm);
        Ok(Self {
            basis,
            coefficients,
        })
    }

    pub fn basis(&self) -> &Arc<InvariantBasis> {
        &self.basis
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `|<self|other>|` computed in channel coordinates.
    pub fn overlap(&self, other: &InvariantState) -> f64 {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }
}

/// `sum_k c_k I_k` as a full tensor.
pub fn embed(state: &InvariantState) -> FourSpinState {
    let basis = &state.basis;
    let mut out = FourSpinState::zeros(basis.spins);
    for (c, tensor) in state.coefficients.iter().zip(&basis.basis_tensors) {
        for &i in &basis.support {
            out.amplitudes[i] += c * tensor.amplitudes[i];
        }
    }
    out
}

/// Channel coefficients `<I_k | tensor>` and the norm of the projected
/// tensor. The coefficients are not renormalized.
pub fn project(tensor: &FourSpinState, basis: &InvariantBasis) -> (Vec<Complex64>, f64) {
    assert_eq!(tensor.spins, basis.spins, "tensor and basis spins differ");
    let coefficients: Vec<Complex64> = basis
        .basis_tensors
        .iter()
        .map(|b| {
            basis
                .support
                .iter()
                .map(|&i| b.amplitudes[i].conj() * tensor.amplitudes[i])
                .sum()
        })
        .collect();
    let norm = coefficients
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    (coefficients, norm)
}

/// Four unit normals, one per slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorConfiguration {
    pub directions: [SphericalDirection; 4],
}

impl VectorConfiguration {
    pub fn new(directions: [SphericalDirection; 4]) -> Self {
        Self { directions }
    }

    pub fn from_vectors(vectors: [[f64; 3]; 4]) -> Self {
        Self {
            directions: vectors.map(SphericalDirection::from_vector),
        }
    }

    pub fn vectors(&self) -> [[f64; 3]; 4] {
        self.directions.map(|d| d.to_vector())
    }

    pub fn rotated(&self, rot: &Rotation) -> Self {
        Self::from_vectors(self.vectors().map(|v| rot.rotate_vector(v)))
    }

    /// Normals of a regular tetrahedron, `(+,+,+), (+,-,-), (-,+,-), (-,-,+)` over `sqrt 3`.
    pub fn regular_tetrahedron() -> Self {
        let s = 1.0 / 3f64.sqrt();
        Self::from_vectors([[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]])
    }
}

/// `|sum_i j_i n_i|`.
pub fn closure_defect(spins: [Spin; 4], config: &VectorConfiguration) -> f64 {
    let mut sum = [0.0; 3];
    for (s, v) in spins.iter().zip(config.vectors()) {
        for k in 0..3 {
            sum[k] += s.value() * v[k];
        }
    }
    (sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]).sqrt()
}

/// Product of the four coherent spin states of a configuration.
pub fn coherent_product(spins: [Spin; 4], config: &VectorConfiguration) -> FourSpinState {
    let cs: Vec<CoherentSpinState> = spins
        .iter()
        .zip(&config.directions)
        .map(|(s, d)| coherent_state(*s, d))
        .collect();
    FourSpinState::product_of_coherent([&cs[0], &cs[1], &cs[2], &cs[3]])
}

/// Coherent intertwiner: the normalized projection of the coherent product
/// state onto `Inv`. Group averaging and orthogonal projection coincide on
/// the invariant subspace, up to normalization.
pub fn coherent_intertwiner(
    basis: &Arc<InvariantBasis>,
    config: &VectorConfiguration,
) -> Result<InvariantState> {
    let product = coherent_product(basis.spins, config);
    let (coefficients, norm) = project(&product, basis);
    if norm < ZERO_PROJECTION_THRESHOLD {
        return Err(Error::ZeroProjection { norm });
    }
    InvariantState::new(Arc::clone(basis), coefficients)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut prev, mut cur) = (1.0, x);
                for k in 2..=n {
                    let next = ((2 * k - 1) as f64 * x * cur - (k - 1) as f64 * prev) / k as f64;
                    prev = cur;
                    cur = next;
                }
                dp = n as f64 * (x * cur - prev) / (x * x - 1.0);
                let dx = cur / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Coherent intertwiner by direct numerical averaging over the group.
///
/// Product quadrature in ZYZ Euler angles: `order` uniform nodes in each of
/// `alpha` and `gamma`, `order` Gauss-Legendre nodes in `cos beta`. Only used
/// to cross-check [`coherent_intertwiner`]; intended for small spins.
pub fn group_average_quadrature(
    spins: [Spin; 4],
    config: &VectorConfiguration,
    order: usize,
) -> Result<FourSpinState> {
    assert!(order >= 8, "quadrature order must be at least 8");
    if spins.iter().map(|s| s.twice()).sum::<u32>() % 2 == 1 {
        // -1 in SU(2) acts as -1; the average vanishes.
        return Err(Error::ZeroProjection { norm: 0.0 });
    }
    let cs: Vec<CoherentSpinState> = spins
        .iter()
        .zip(&config.directions)
        .map(|(s, d)| coherent_state(*s, d))
        .collect();
    let mut acc = FourSpinState::zeros(spins);
    let nodes = gauss_legendre(order);
    let step = TAU / order as f64;
    for a in 0..order {
        for &(x, w) in &nodes {
            for c in 0..order {
                let rot = Rotation::from_euler_zyz(a as f64 * step, x.acos(), c as f64 * step);
                let rotated: Vec<Vec<Complex64>> = cs
                    .iter()
                    .map(|s| {
                        let d = wigner_rotation(s.spin, &rot);
                        (0..d.nrows())
                            .map(|r| (0..d.ncols()).map(|k| d[(r, k)] * s.amplitudes[k]).sum())
                            .collect()
                    })
                    .collect();
                let term = FourSpinState::product(
                    [&rotated[0], &rotated[1], &rotated[2], &rotated[3]],
                    spins,
                );
                for (dst, src) in acc.amplitudes.iter_mut().zip(&term.amplitudes) {
                    *dst += src * w;
                }
            }
        }
    }
    let weight = 1.0 / (2.0 * (order * order) as f64);
    acc.amplitudes.iter_mut().for_each(|v| *v *= weight);
    let norm = acc.norm();
    if norm < ZERO_PROJECTION_THRESHOLD {
        return Err(Error::ZeroProjection { norm });
    }
    acc.normalize();
    Ok(acc)
}
