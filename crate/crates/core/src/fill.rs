//! Entropic fill: solve for the inscribed-sphere triangle areas `sigma_ij`
//! of the entropic tetrahedron, compute its volume, and normalize.
//!
//! The seven defining equations are
//!
//! ```text
//! sigma_ij + sigma_ik + sigma_il = E_i                                   (i = 1..4)
//! -sqrt(s_ij s_kl) + sqrt(s_ik s_jl) + sqrt(s_il s_jk) = lambda E_(ij)(kl)  (3 pairings)
//! ```
//!
//! with normalized entropies. The unknowns are parametrized as
//! `sigma = t^2`, `lambda = l^2`, so the search is unconstrained, and the
//! square 7x7 system is solved by Levenberg-Marquardt with an analytic
//! Jacobian and randomized restarts.

use nalgebra::{SMatrix, SVector};
use rand::Rng;

use crate::entanglement::{bipartition_entropies, BipartitionEntropies};
use crate::error::{Error, Result};
use crate::intertwiner::FourSpinState;
use crate::sampling::RngStream;

/// Pair order used everywhere: 12, 13, 14, 23, 24, 34.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Pairs touching each slot (indices into [`PAIRS`]).
const SLOT_PAIRS: [[usize; 3]; 4] = [[0, 1, 2], [0, 3, 4], [1, 3, 5], [2, 4, 5]];

/// Negative `A_i` down to this are treated as zero.
pub const GEOMETRY_TOLERANCE: f64 = 1e-9;

/// Entropies below this count as zero for the degenerate short-circuit.
const DEGENERATE_ENTROPY: f64 = 1e-12;

/// Floor for the initial `sigma` guess.
const INITIAL_SIGMA_FLOOR: f64 = 1e-6;

const MAX_ITERATIONS: usize = 400;

type Vec7 = SVector<f64, 7>;
type Mat7 = SMatrix<f64, 7, 7>;

/// `sigma_12 .. sigma_34` and the auxiliary `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaSet {
    pub sigma: [f64; 6],
    pub lambda: f64,
}

impl SigmaSet {
    pub fn zero() -> Self {
        Self {
            sigma: [0.0; 6],
            lambda: 0.0,
        }
    }

    /// `(A_0, A_1, A_2, A_3)`.
    pub fn face_terms(&self) -> [f64; 4] {
        let s = &self.sigma;
        let pa = (s[0] * s[5]).sqrt();
        let pb = (s[1] * s[4]).sqrt();
        let pc = (s[2] * s[3]).sqrt();
        [pa + pb + pc, -pa + pb + pc, pa - pb + pc, pa + pb - pc]
    }

    /// Defects of the seven defining equations.
    pub fn defects(&self, entropies: &BipartitionEntropies) -> [f64; 7] {
        let mut out = [0.0; 7];
        for (i, pairs) in SLOT_PAIRS.iter().enumerate() {
            out[i] = pairs.iter().map(|&p| self.sigma[p]).sum::<f64>() - entropies.one_to_other[i];
        }
        let a = self.face_terms();
        for k in 0..3 {
            out[4 + k] = a[k + 1] - self.lambda * entropies.two_to_two[k];
        }
        out
    }

    /// Root-sum-square of [`SigmaSet::defects`].
    pub fn residual(&self, entropies: &BipartitionEntropies) -> f64 {
        self.defects(entropies)
            .iter()
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt()
    }
}

/// Volume of the entropic tetrahedron,
/// `V = (sqrt 2 / 3) sqrt(S) (A0 A1 A2 A3)^(1/4)` with `S = 2 sum sigma`.
pub fn tetrahedron_volume(sigmas: &SigmaSet) -> Result<f64> {
    let mut a = sigmas.face_terms();
    for (index, v) in a.iter_mut().enumerate() {
        if *v < -GEOMETRY_TOLERANCE || v.is_nan() {
            return Err(Error::InvalidGeometry { index, value: *v });
        }
        *v = v.max(0.0);
    }
    let s = 2.0 * sigmas.sigma.iter().sum::<f64>();
    let product = a.iter().product::<f64>();
    Ok(2f64.sqrt() / 3.0 * s.sqrt() * product.sqrt().sqrt())
}

/// `F4 = (3^(7/6) / 2) V^(2/3)`; equals 1 for the regular tetrahedron with
/// all `sigma = 1/3`.
pub fn fill_from_volume(volume: f64) -> f64 {
    3f64.powf(7.0 / 6.0) / 2.0 * volume.powf(2.0 / 3.0)
}

/// A solved (or best-effort) set of unknowns with diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaSolution {
    pub sigmas: SigmaSet,
    pub residual: f64,
    pub restarts_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FillResult {
    pub entropies: BipartitionEntropies,
    pub sigmas: SigmaSet,
    pub volume: f64,
    pub fill: f64,
    pub residual: f64,
    pub restarts_used: usize,
}

/// Solver settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FillSolver {
    /// Accept a solution once the residual is at or below this.
    pub tolerance: f64,
    pub max_restarts: usize,
}

impl Default for FillSolver {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_restarts: 32,
        }
    }
}

impl FillSolver {
    pub fn new(tolerance: f64, max_restarts: usize) -> Self {
        assert!(tolerance > 0.0, "tolerance must be positive");
        Self {
            tolerance,
            max_restarts,
        }
    }

    /// Solves the defining equations, restarting from perturbed guesses
    /// drawn from `rng` until the residual reaches the tolerance.
    pub fn solve<R: Rng + ?Sized>(
        &self,
        entropies: &BipartitionEntropies,
        rng: &mut R,
    ) -> Result<SigmaSolution> {
        match self.best_effort(entropies, rng) {
            s if s.residual <= self.tolerance => Ok(s),
            s => Err(Error::NoConvergence {
                residual: s.residual,
                restarts: self.max_restarts,
            }),
        }
    }

    /// Like [`FillSolver::solve`] but returns the best solution found even
    /// when it misses the tolerance.
    pub fn best_effort<R: Rng + ?Sized>(
        &self,
        entropies: &BipartitionEntropies,
        rng: &mut R,
    ) -> SigmaSolution {
        if let Some(sigmas) = short_circuit(entropies) {
            let residual = sigmas.residual(entropies);
            return SigmaSolution {
                sigmas,
                residual,
                restarts_used: 0,
            };
        }

        let base = initial_guess(entropies);
        let mut best = SigmaSolution {
            sigmas: SigmaSet::zero(),
            residual: f64::INFINITY,
            restarts_used: 0,
        };
        for restart in 0..=self.max_restarts {
            let mut start = base;
            if restart > 0 {
                for t in start.iter_mut().take(6) {
                    *t *= rng.random_range(-1.0f64..=1.0).exp();
                }
            }
            let x = levenberg_marquardt(entropies, start);
            let sigmas = to_sigmas(&x);
            let residual = sigmas.residual(entropies);
            if residual < best.residual {
                best = SigmaSolution {
                    sigmas,
                    residual,
                    restarts_used: restart,
                };
            }
            if best.residual <= self.tolerance {
                break;
            }
        }
        best
    }

    pub fn fill_from_entropies<R: Rng + ?Sized>(
        &self,
        entropies: &BipartitionEntropies,
        rng: &mut R,
    ) -> Result<FillResult> {
        let solution = self.solve(entropies, rng)?;
        let volume = tetrahedron_volume(&solution.sigmas)?;
        Ok(FillResult {
            entropies: *entropies,
            sigmas: solution.sigmas,
            volume,
            fill: fill_from_volume(volume),
            residual: solution.residual,
            restarts_used: solution.restarts_used,
        })
    }

    pub fn fill<R: Rng + ?Sized>(&self, state: &FourSpinState, rng: &mut R) -> Result<FillResult> {
        let entropies = bipartition_entropies(state)?;
        self.fill_from_entropies(&entropies, rng)
    }
}

/// Entropic fill with the default restart budget and a fixed restart stream.
pub fn entropic_fill(state: &FourSpinState, tolerance: f64) -> Result<FillResult> {
    let solver = FillSolver {
        tolerance,
        ..FillSolver::default()
    };
    solver.fill(state, &mut RngStream::new(0, 0).rng())
}

fn short_circuit(e: &BipartitionEntropies) -> Option<SigmaSet> {
    let all = e.normalized();
    if all.iter().all(|v| v.abs() < DEGENERATE_ENTROPY) {
        return Some(SigmaSet::zero());
    }
    let spread = |v: &[f64]| {
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    };
    let two_mean = e.two_to_two.iter().sum::<f64>() / 3.0;
    if spread(&e.one_to_other) < DEGENERATE_ENTROPY
        && spread(&e.two_to_two) < DEGENERATE_ENTROPY
        && two_mean > DEGENERATE_ENTROPY
    {
        // Regular entropic tetrahedron: every A_i equals sigma.
        let sigma = e.one_to_other.iter().sum::<f64>() / 12.0;
        return Some(SigmaSet {
            sigma: [sigma; 6],
            lambda: sigma / two_mean,
        });
    }
    None
}

fn initial_guess(e: &BipartitionEntropies) -> Vec7 {
    let mut x = Vec7::zeros();
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        let s = (e.one_to_other[i] + e.one_to_other[j]) / 6.0;
        x[p] = s.max(INITIAL_SIGMA_FLOOR).sqrt();
    }
    x[6] = 1.0;
    x
}

fn to_sigmas(x: &Vec7) -> SigmaSet {
    SigmaSet {
        sigma: std::array::from_fn(|p| x[p] * x[p]),
        lambda: x[6] * x[6],
    }
}

/// Defects and Jacobian in the `(t, l)` parametrization, assuming `t >= 0`.
fn defects_and_jacobian(e: &BipartitionEntropies, x: &Vec7) -> (Vec7, Mat7) {
    let mut r = Vec7::zeros();
    let mut jac = Mat7::zeros();
    for (i, pairs) in SLOT_PAIRS.iter().enumerate() {
        r[i] = pairs.iter().map(|&p| x[p] * x[p]).sum::<f64>() - e.one_to_other[i];
        for &p in pairs {
            jac[(i, p)] = 2.0 * x[p];
        }
    }
    let products = [x[0] * x[5], x[1] * x[4], x[2] * x[3]];
    // d(product)/dt for each pair: product q is t_a * t_b
    let factors = [(0, 5), (1, 4), (2, 3)];
    let signs = [[-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0]];
    let l2 = x[6] * x[6];
    for (k, sign) in signs.iter().enumerate() {
        let row = 4 + k;
        r[row] = (0..3).map(|q| sign[q] * products[q]).sum::<f64>() - l2 * e.two_to_two[k];
        for (q, &(a, b)) in factors.iter().enumerate() {
            jac[(row, a)] = sign[q] * x[b];
            jac[(row, b)] = sign[q] * x[a];
        }
        jac[(row, 6)] = -2.0 * x[6] * e.two_to_two[k];
    }
    (r, jac)
}

fn cost_of(e: &BipartitionEntropies, x: &Vec7) -> f64 {
    0.5 * defects_and_jacobian(e, x).0.norm_squared()
}

/// Damped Gauss-Newton with Nielsen's damping update. A rejected or
/// singular step raises the damping, which turns the step into a short
/// gradient step.
fn levenberg_marquardt(e: &BipartitionEntropies, start: Vec7) -> Vec7 {
    let mut x = start;
    let (mut r, mut jac) = defects_and_jacobian(e, &x);
    let mut cost = 0.5 * r.norm_squared();
    let mut jtj = jac.transpose() * jac;
    let mut grad = jac.transpose() * r;
    let mut mu = 1e-3 * jtj.diagonal().max().max(1e-12);
    let mut nu = 2.0;
    let floor = 1e-32;

    for _ in 0..MAX_ITERATIONS {
        if cost <= floor || grad.amax() < 1e-300 {
            break;
        }
        let damped = jtj + Mat7::identity() * mu;
        let Some(chol) = damped.cholesky() else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let step = chol.solve(&(-grad));
        if step.norm() <= 1e-17 * (x.norm() + 1e-17) {
            break;
        }
        let candidate = (x + step).abs();
        let new_cost = cost_of(e, &candidate);
        let predicted = 0.5 * step.dot(&(step * mu - grad));
        let gain = if predicted > 0.0 {
            (cost - new_cost) / predicted
        } else {
            -1.0
        };
        if new_cost < cost {
            x = candidate;
            (r, jac) = defects_and_jacobian(e, &x);
            cost = 0.5 * r.norm_squared();
            jtj = jac.transpose() * jac;
            grad = jac.transpose() * r;
            let g = (2.0 * gain.clamp(0.0, 1.0) - 1.0).powi(3);
            mu *= (1.0f64 / 3.0).max(1.0 - g);
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() || mu > 1e20 {
                break;
            }
        }
    }
    x
}
