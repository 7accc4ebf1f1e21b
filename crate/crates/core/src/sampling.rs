//! Seeded random ensembles and the closed-configuration parametrization.
//!
//! Every sampler draws from an [`RngStream`], a ChaCha20 generator keyed by
//! `(seed, stream_index)`, so sample `i` of a campaign is the same no matter
//! which worker computes it.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::intertwiner::{
    coherent_intertwiner, FourSpinState, InvariantBasis, InvariantState, VectorConfiguration,
};
use crate::su2::{SphericalDirection, Spin};

/// Interior margin for the closed-configuration angle.
pub const DEGENERATE_THETA: f64 = 1e-9;

/// Upper bound on redraws after a vanishing projection.
pub const MAX_RETRIES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    Arbitrary,
    Invariant,
    CoherentOpen,
    CoherentClosed,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 4] = [
        EnsembleKind::Arbitrary,
        EnsembleKind::Invariant,
        EnsembleKind::CoherentOpen,
        EnsembleKind::CoherentClosed,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            EnsembleKind::Arbitrary => "arbitrary",
            EnsembleKind::Invariant => "invariant",
            EnsembleKind::CoherentOpen => "coherent-open",
            EnsembleKind::CoherentClosed => "coherent-closed",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "arbitrary" => Ok(EnsembleKind::Arbitrary),
            "invariant" => Ok(EnsembleKind::Invariant),
            "coherent-open" | "open" => Ok(EnsembleKind::CoherentOpen),
            "coherent-closed" | "closed" => Ok(EnsembleKind::CoherentClosed),
            _ => Err(Error::Config(format!("unknown ensemble '{s}'"))),
        }
    }
}

/// A reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Mixes labels into a seed (SplitMix64 finalizer), used to give each
/// campaign part its own key.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    let mut z = seed;
    for &l in labels {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(l);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// `theta` in `(0, pi)` is the angle between `n1` and `n2`; `phi` in
/// `[0, 2pi)` places `n3` on its circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedConfigParams {
    theta: f64,
    phi: f64,
}

impl ClosedConfigParams {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta > DEGENERATE_THETA && theta < PI - DEGENERATE_THETA) {
            return Err(Error::DegenerateConfig { theta });
        }
        Ok(Self {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn normalized_gaussians<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let mut v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|c| *c /= norm);
            return v;
        }
    }
}

/// Fubini-Study uniform state on four spin-`j` slots.
pub fn sample_arbitrary<R: Rng + ?Sized>(j: Spin, rng: &mut R) -> FourSpinState {
    let d = j.dim();
    FourSpinState::from_amplitudes([j; 4], normalized_gaussians(d * d * d * d, rng))
}

/// Uniform unit vector in the invariant subspace, in the coordinates of `basis`.
pub fn sample_invariant<R: Rng + ?Sized>(
    basis: &Arc<InvariantBasis>,
    rng: &mut R,
) -> InvariantState {
    assert!(!basis.is_empty(), "invariant subspace is empty");
    InvariantState::new(Arc::clone(basis), normalized_gaussians(basis.len(), rng))
        .expect("gaussian draw is normalized")
}

/// Uniform direction on the sphere.
pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R) -> SphericalDirection {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi = rng.random_range(0.0..2.0 * PI);
    SphericalDirection::new(z.acos(), phi).expect("acos lies in [0, pi]")
}

/// A coherent-intertwiner draw with the number of redraws it needed.
#[derive(Clone, Debug)]
pub struct CoherentSample {
    pub state: InvariantState,
    pub config: VectorConfiguration,
    pub closed_params: Option<ClosedConfigParams>,
    pub retries: usize,
}

/// Four independent uniform normals.
pub fn sample_coherent_open<R: Rng + ?Sized>(
    basis: &Arc<InvariantBasis>,
    rng: &mut R,
) -> Result<CoherentSample> {
    let mut last = Error::ZeroProjection { norm: 0.0 };
    for retries in 0..=MAX_RETRIES {
        let config = VectorConfiguration::new(std::array::from_fn(|_| sample_direction(rng)));
        match coherent_intertwiner(basis, &config) {
            Ok(state) => {
                return Ok(CoherentSample {
                    state,
                    config,
                    closed_params: None,
                    retries,
                })
            }
            Err(e @ Error::ZeroProjection { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Draws `theta` from the density `sin(theta/2)/2` by inverse CDF.
pub fn sample_closed_theta<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    2.0 * (1.0 - u).acos()
}

/// Closed configurations with `theta ~ sin(theta/2)/2` and uniform `phi`.
pub fn sample_coherent_closed<R: Rng + ?Sized>(
    basis: &Arc<InvariantBasis>,
    rng: &mut R,
) -> Result<CoherentSample> {
    let mut last = Error::ZeroProjection { norm: 0.0 };
    let mut retries = 0;
    while retries <= MAX_RETRIES {
        let theta = sample_closed_theta(rng);
        let phi = rng.random_range(0.0..2.0 * PI);
        let params = match ClosedConfigParams::new(theta, phi) {
            Ok(p) => p,
            Err(e) => {
                last = e;
                retries += 1;
                continue;
            }
        };
        let config = closed_config_vectors(&params);
        match coherent_intertwiner(basis, &config) {
            Ok(state) => {
                return Ok(CoherentSample {
                    state,
                    config,
                    closed_params: Some(params),
                    retries,
                })
            }
            Err(e @ Error::ZeroProjection { .. }) => last = e,
            Err(e) => return Err(e),
        }
        retries += 1;
    }
    Err(last)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Closed four-tuple of unit vectors: `n1 = y`, `n2` at angle `theta` in the
/// xy-plane, `n3` on the circle of unit vectors whose completion
/// `n4 = -(n1 + n2 + n3)` is also unit.
pub fn closed_config_vectors(params: &ClosedConfigParams) -> VectorConfiguration {
    let (st, ct) = params.theta.sin_cos();
    let n1 = [0.0, 1.0, 0.0];
    let n2 = [st, ct, 0.0];
    let s = [n1[0] + n2[0], n1[1] + n2[1], 0.0];
    let s_norm = (s[0] * s[0] + s[1] * s[1]).sqrt();
    let center = s.map(|v| -v / 2.0);
    let radius = (1.0 - s_norm * s_norm / 4.0).max(0.0).sqrt();
    let e1 = [0.0, 0.0, 1.0];
    let e2 = cross(s.map(|v| v / s_norm), e1);
    let (sp, cp) = params.phi.sin_cos();
    let n3: [f64; 3] = std::array::from_fn(|k| center[k] + radius * (cp * e1[k] + sp * e2[k]));
    let n4: [f64; 3] = std::array::from_fn(|k| -s[k] - n3[k]);
    VectorConfiguration::from_vectors([n1, n2, n3, n4])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intertwiner::build_basis;

    fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[test]
    fn stream_is_pure_function_of_key() {
        let a: Vec<u64> = (0..8)
            .map(|_| RngStream::new(5, 3).rng().random())
            .collect();
        let mut r = RngStream::new(5, 3).rng();
        let b: u64 = r.random();
        assert_eq!(a[0], b);
        let other: u64 = RngStream::new(5, 4).rng().random();
        assert_ne!(b, other);
    }

    #[test]
    fn arbitrary_state_is_normalized_and_deterministic() {
        let s = sample_arbitrary(Spin::HALF, &mut RngStream::new(1, 0).rng());
        assert_eq!(s.amplitudes().len(), 16);
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let t = sample_arbitrary(Spin::HALF, &mut RngStream::new(1, 0).rng());
        assert_eq!(s.amplitudes(), t.amplitudes());
    }

    #[test]
    fn invariant_sample_has_basis_length() {
        let basis = Arc::new(build_basis([Spin::HALF; 4]));
        let s = sample_invariant(&basis, &mut RngStream::new(2, 0).rng());
        assert_eq!(s.coefficients().len(), 2);
        let n: f64 = s.coefficients().iter().map(|c| c.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ensemble_tags_round_trip() {
        for e in EnsembleKind::ALL {
            assert_eq!(e.tag().parse::<EnsembleKind>().unwrap(), e);
        }
        assert!("mixed".parse::<EnsembleKind>().is_err());
    }

    #[test]
    fn closed_vectors_are_unit_and_close() {
        let mut rng = RngStream::new(9, 0).rng();
        for _ in 0..200 {
            let p = ClosedConfigParams::new(
                rng.random_range(0.01..3.13),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
            .unwrap();
            let v = closed_config_vectors(&p);
            let vs = v.vectors();
            for n in vs {
                assert!((dot(n, n) - 1.0).abs() < 1e-12);
            }
            let total: [f64; 3] = std::array::from_fn(|k| vs.iter().map(|v| v[k]).sum());
            assert!(total.iter().all(|t| t.abs() < 1e-12));
            // n3 and n4 are antipodal on the circle.
            let s_half: [f64; 3] = std::array::from_fn(|k| -(vs[0][k] + vs[1][k]) / 2.0);
            for k in 0..3 {
                assert!(((vs[2][k] - s_half[k]) + (vs[3][k] - s_half[k])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn regular_closed_configuration() {
        for phi in [0.0, PI] {
            let p = ClosedConfigParams::new((-1.0f64 / 3.0).acos(), phi).unwrap();
            let v = closed_config_vectors(&p).vectors();
            for a in 0..4 {
                for b in a + 1..4 {
                    assert!((dot(v[a], v[b]) + 1.0 / 3.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_theta_is_rejected() {
        assert!(matches!(
            ClosedConfigParams::new(0.0, 0.0),
            Err(Error::DegenerateConfig { .. })
        ));
        assert!(matches!(
            ClosedConfigParams::new(PI, 0.0),
            Err(Error::DegenerateConfig { .. })
        ));
    }

    #[test]
    fn closed_sample_closes() {
        let basis = Arc::new(build_basis([Spin::HALF; 4]));
        let mut rng = RngStream::new(4, 0).rng();
        for _ in 0..50 {
            let s = sample_coherent_closed(&basis, &mut rng).unwrap();
            let d = crate::intertwiner::closure_defect([Spin::HALF; 4], &s.config);
            assert!(d <= 1e-12);
            assert!(s.closed_params.is_some());
        }
    }

    #[test]
    fn derived_seeds_differ_by_label() {
        assert_ne!(derive_seed(1, &[0]), derive_seed(1, &[1]));
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
    }
}
