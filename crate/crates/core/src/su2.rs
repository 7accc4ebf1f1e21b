//! SU(2) bookkeeping: exact half-integer spins, Clebsch-Gordan coefficients,
//! spin-j rotation matrices and coherent spin states.
//!
//! Basis vectors of a spin-j irrep are always ordered by descending magnetic
//! number, `m = j, j-1, ..., -j`; index `i` corresponds to `m = j - i`.
//! Phases follow the Condon-Shortley convention.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A spin quantum number, stored as `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    twice_j: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice_j: 1 };
    pub const ONE: Spin = Spin { twice_j: 2 };

    pub const fn from_twice(twice_j: u32) -> Self {
        Self { twice_j }
    }

    pub const fn twice(self) -> u32 {
        self.twice_j
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice_j) / 2.0
    }

    /// Representation dimension `2j + 1`.
    pub const fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    pub fn is_integer(self) -> bool {
        self.twice_j.is_multiple_of(2)
    }

    /// Magnetic indices in storage order, `m = j` first.
    pub fn magnetic_indices(self) -> impl Iterator<Item = MagneticIndex> {
        let tj = self.twice_j as i32;
        (0..=self.twice_j as i32).map(move |i| MagneticIndex::from_twice(tj - 2 * i))
    }

    /// Whether `(a, b, self)` satisfies the triangle rule with matching parity.
    pub fn couples(a: Spin, b: Spin, c: Spin) -> bool {
        let (a, b, c) = (a.twice_j as i64, b.twice_j as i64, c.twice_j as i64);
        (a + b + c) % 2 == 0 && c >= (a - b).abs() && c <= a + b
    }

    /// Spins `|a - b|, ..., a + b`.
    pub fn coupled_range(a: Spin, b: Spin) -> impl Iterator<Item = Spin> {
        let lo = a.twice_j.abs_diff(b.twice_j);
        let hi = a.twice_j + b.twice_j;
        (lo..=hi).step_by(2).map(Spin::from_twice)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

/// Accepts `"3/2"`, `"1.5"` or `"2"`.
impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpin(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "2" => Ok(Spin::from_twice(num)),
                "1" => Ok(Spin::from_twice(2 * num)),
                _ => Err(bad()),
            }
        } else {
            let v: f64 = s.parse().map_err(|_| bad())?;
            let twice = 2.0 * v;
            if !(0.0..=1e6).contains(&twice) || (twice - twice.round()).abs() > 1e-9 {
                return Err(bad());
            }
            Ok(Spin::from_twice(twice.round() as u32))
        }
    }
}

/// A magnetic quantum number, stored as `2m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MagneticIndex {
    twice_m: i32,
}

impl MagneticIndex {
    pub const fn from_twice(twice_m: i32) -> Self {
        Self { twice_m }
    }

    pub const fn twice(self) -> i32 {
        self.twice_m
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice_m) / 2.0
    }

    pub fn is_valid_for(self, spin: Spin) -> bool {
        let tj = spin.twice_j as i32;
        self.twice_m.abs() <= tj && (tj - self.twice_m) % 2 == 0
    }

    /// Storage index `j - m` within the spin's basis.
    pub fn index_in(self, spin: Spin) -> usize {
        debug_assert!(self.is_valid_for(spin));
        ((spin.twice_j as i32 - self.twice_m) / 2) as usize
    }
}

/// A point on the unit sphere in polar coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalDirection {
    theta: f64,
    phi: f64,
}

impl SphericalDirection {
    /// `phi` is wrapped into `[0, 2pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidDirection { theta });
        }
        Ok(Self {
            theta,
            phi: wrap_angle(phi),
        })
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let z = (v[2] / norm).clamp(-1.0, 1.0);
        Self {
            theta: z.acos(),
            phi: wrap_angle(v[1].atan2(v[0])),
        }
    }

    pub fn z() -> Self {
        Self {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn to_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// A spin coherent state `|j, n>` in the descending-m basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentSpinState {
    pub spin: Spin,
    pub amplitudes: Vec<Complex64>,
}

const LOG_FACTORIAL_TABLE: usize = 512;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LOG_FACTORIAL_TABLE);
        let mut acc = 0.0f64;
        table.push(0.0);
        for k in 1..LOG_FACTORIAL_TABLE {
            acc += (k as f64).ln();
            table.push(acc);
        }
        table
    })
}

/// `ln(k!)`, tabulated on first use.
pub fn log_factorial(k: usize) -> f64 {
    let table = log_factorial_table();
    if k < table.len() {
        table[k]
    } else {
        table[table.len() - 1] + (table.len()..=k).map(|i| (i as f64).ln()).sum::<f64>()
    }
}

/// Binomial coefficient as a float, exact for the sizes used here.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}

/// Condon-Shortley Clebsch-Gordan coefficient `<j1 m1; j2 m2 | J M>`.
///
/// Returns zero for forbidden couplings rather than failing.
pub fn clebsch_gordan(
    j1: Spin,
    m1: MagneticIndex,
    j2: Spin,
    m2: MagneticIndex,
    j: Spin,
    m: MagneticIndex,
) -> f64 {
    if !m1.is_valid_for(j1) || !m2.is_valid_for(j2) || !m.is_valid_for(j) {
        return 0.0;
    }
    if m1.twice() + m2.twice() != m.twice() || !Spin::couples(j1, j2, j) {
        return 0.0;
    }
    // Everything below is an integer once halved.
    let (tj1, tj2, tj) = (j1.twice() as i64, j2.twice() as i64, j.twice() as i64);
    let (tm1, tm2, tm) = (m1.twice() as i64, m2.twice() as i64, m.twice() as i64);
    let h = |x: i64| -> i64 {
        debug_assert!(x % 2 == 0);
        x / 2
    };
    let lf = |x: i64| log_factorial(x as usize);

    let a = h(tj1 + tj2 - tj);
    let b = h(tj1 - tj2 + tj);
    let c = h(-tj1 + tj2 + tj);
    let total = h(tj1 + tj2 + tj);
    let log_delta = lf(a) + lf(b) + lf(c) - lf(total + 1);
    let log_pref = 0.5
        * (((tj + 1) as f64).ln()
            + log_delta
            + lf(h(tj1 + tm1))
            + lf(h(tj1 - tm1))
            + lf(h(tj2 + tm2))
            + lf(h(tj2 - tm2))
            + lf(h(tj + tm))
            + lf(h(tj - tm)));

    let d1 = h(tj1 - tm1);
    let d2 = h(tj2 + tm2);
    let d3 = h(tj - tj2 + tm1);
    let d4 = h(tj - tj1 - tm2);
    let k_min = 0.max(-d3).max(-d4);
    let k_max = a.min(d1).min(d2);

    let mut sum = 0.0;
    for k in k_min..=k_max {
        let log_den = lf(k) + lf(a - k) + lf(d1 - k) + lf(d2 - k) + lf(d3 + k) + lf(d4 + k);
        let term = (log_pref - log_den).exp();
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// Coherent spin state `D(g(n)) |j, j>`, with `g(n)` the rotation by `theta`
/// about `(-sin phi, cos phi, 0)`.
///
/// Amplitude at `m` is `sqrt(C(2j, j-m)) cos(theta/2)^(j+m) (sin(theta/2) e^{i phi})^(j-m)`,
/// which stays finite at `theta = pi` (the state becomes `e^{2ij phi} |j,-j>`).
pub fn coherent_state(spin: Spin, dir: &SphericalDirection) -> CoherentSpinState {
    let n = spin.twice();
    let (s, c) = (dir.theta / 2.0).sin_cos();
    let lower = Complex64::from_polar(s, dir.phi);
    let amplitudes = (0..=n)
        .map(|i| binomial(n, i).sqrt() * c.powi((n - i) as i32) * lower.powi(i as i32))
        .collect();
    CoherentSpinState { spin, amplitudes }
}

/// An SU(2) element stored as a unit quaternion `(w, x, y, z)`, i.e. the
/// matrix `w - i (x sx + y sy + z sz)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    q: [f64; 4],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        q: [1.0, 0.0, 0.0, 0.0],
    };

    /// Right-handed rotation by `angle` about a unit `axis`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        debug_assert!((norm - 1.0).abs() < 1e-12, "axis must be a unit vector");
        let (s, c) = (angle / 2.0).sin_cos();
        let s = s / norm;
        Self {
            q: [c, s * axis[0], s * axis[1], s * axis[2]],
        }
    }

    /// `Rz(alpha) Ry(beta) Rz(gamma)`.
    pub fn from_euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Self {
        let rz = |a: f64| Rotation::from_axis_angle([0.0, 0.0, 1.0], a);
        rz(alpha)
            .compose(&Rotation::from_axis_angle([0.0, 1.0, 0.0], beta))
            .compose(&rz(gamma))
    }

    /// Haar-random element.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut q = [0.0; 4];
        for v in &mut q {
            *v = rng.sample(StandardNormal);
        }
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self {
            q: q.map(|v| v / n),
        }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    /// Group product `self * other` (apply `other` first).
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let [w1, x1, y1, z1] = self.q;
        let [w2, x2, y2, z2] = other.q;
        Rotation {
            q: [
                w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
            ],
        }
    }

    pub fn rotate_vector(&self, v: [f64; 3]) -> [f64; 3] {
        let [w, x, y, z] = self.q;
        let u = [x, y, z];
        let cross = |a: [f64; 3], b: [f64; 3]| {
            [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        };
        let t = cross(u, v).map(|c| 2.0 * c);
        let ut = cross(u, t);
        [
            v[0] + w * t[0] + ut[0],
            v[1] + w * t[1] + ut[1],
            v[2] + w * t[2] + ut[2],
        ]
    }

    /// Spin-1/2 matrix entries `[[a, b], [c, d]]` in the `(up, down)` basis.
    pub fn su2_matrix(&self) -> [[Complex64; 2]; 2] {
        let [w, x, y, z] = self.q;
        [
            [Complex64::new(w, -z), Complex64::new(-y, -x)],
            [Complex64::new(y, -x), Complex64::new(w, z)],
        ]
    }
}

/// Spin-j representation matrix of `rot`, rows and columns in descending m.
///
/// Built as the symmetric power of the spin-1/2 matrix, so it is a
/// homomorphism by construction.
pub fn wigner_rotation(spin: Spin, rot: &Rotation) -> DMatrix<Complex64> {
    let n = spin.twice();
    let dim = spin.dim();
    let [[a, b], [c, d]] = rot.su2_matrix();
    let powers = |z: Complex64| -> Vec<Complex64> {
        let mut out = Vec::with_capacity(dim);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..dim {
            out.push(acc);
            acc *= z;
        }
        out
    };
    let (pa, pb, pc, pd) = (powers(a), powers(b), powers(c), powers(d));

    DMatrix::from_fn(dim, dim, |row, col| {
        // p = j + m for the column, pp = j + m' for the row.
        let p = n - col as u32;
        let pp = n - row as u32;
        let q = n - p;
        let k_lo = pp.saturating_sub(q);
        let k_hi = p.min(pp);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in k_lo..=k_hi {
            let coeff = binomial(p, k) * binomial(q, pp - k);
            sum += pa[k as usize]
                * pc[(p - k) as usize]
                * pb[(pp - k) as usize]
                * pd[(k + q - pp) as usize]
                * coeff;
        }
        let norm = (log_factorial(pp as usize) + log_factorial((n - pp) as usize)
            - log_factorial(p as usize)
            - log_factorial(q as usize))
            * 0.5;
        sum * norm.exp()
    })
}
