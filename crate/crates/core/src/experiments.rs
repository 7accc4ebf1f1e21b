//! Experiment campaigns: ensemble statistics, configuration-space grids and
//! perturbation scans, written as CSV.
//!
//! Rows are computed in parallel, each from its own [`RngStream`], and
//! collected in index order, so output bytes do not depend on the number of
//! workers.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::{BaseConfig, Campaign, CampaignConfig};
use crate::entanglement::{bipartition_entropies, BipartitionEntropies};
use crate::error::{Error, Result};
use crate::fill::{fill_from_volume, tetrahedron_volume, FillSolver};
use crate::intertwiner::{
    build_basis, closure_defect, coherent_intertwiner, embed, FourSpinState, InvariantBasis,
    VectorConfiguration,
};
use crate::sampling::{
    closed_config_vectors, derive_seed, sample_arbitrary, sample_coherent_closed,
    sample_coherent_open, sample_invariant, ClosedConfigParams, EnsembleKind, RngStream,
};
use crate::su2::{SphericalDirection, Spin};

/// Floor for `1 - F4` before taking `log10`.
pub const LOG_FILL_FLOOR: f64 = 1e-16;

/// Largest tolerated fraction of failed rows.
pub const MAX_FAILURE_FRACTION: f64 = 1e-3;

// Labels mixed into derived seeds.
const SEED_ENSEMBLE: u64 = 1;
const SEED_GRID: u64 = 2;
const SEED_PERTURBATION: u64 = 3;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `log10(max(1 - F4, 1e-16))`.
pub fn log_one_minus(fill: f64) -> f64 {
    (1.0 - fill).max(LOG_FILL_FLOOR).log10()
}

/// Maps `f` over `0..n` on `workers` threads, keeping index order.
pub fn par_map<T, F>(workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Entropies and fill of one state, or the reason it failed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub entropies: Option<BipartitionEntropies>,
    pub fill: f64,
    pub residual: f64,
    pub restarts: usize,
    pub failed: bool,
}

impl Evaluation {
    fn failure() -> Self {
        Self {
            entropies: None,
            fill: f64::NAN,
            residual: f64::NAN,
            restarts: 0,
            failed: true,
        }
    }

    pub fn normalized(&self) -> [f64; 7] {
        self.entropies.map_or([f64::NAN; 7], |e| e.normalized())
    }

    pub fn raw(&self) -> [f64; 7] {
        self.entropies.map_or([f64::NAN; 7], |e| e.raw())
    }
}

/// Runs entropies, solver and volume; failures are reported, not raised.
pub fn evaluate(
    state: &FourSpinState,
    solver: &FillSolver,
    rng: &mut impl rand::Rng,
) -> Evaluation {
    let Ok(entropies) = bipartition_entropies(state) else {
        return Evaluation::failure();
    };
    let solution = solver.best_effort(&entropies, rng);
    let mut out = Evaluation {
        entropies: Some(entropies),
        fill: f64::NAN,
        residual: solution.residual,
        restarts: solution.restarts_used,
        failed: true,
    };
    if solution.residual <= solver.tolerance {
        if let Ok(v) = tetrahedron_volume(&solution.sigmas) {
            out.fill = fill_from_volume(v);
            out.failed = false;
        }
    }
    out
}

/// One row of `samples.csv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRecord {
    pub index: usize,
    pub evaluation: Evaluation,
    /// Closed ensemble: the construction angle. Open ensemble: the angle
    /// between `n1` and `n2`.
    pub theta: f64,
    pub phi: f64,
    pub closure_defect: f64,
    pub retries: usize,
}

impl SampleRecord {
    pub fn fill(&self) -> f64 {
        self.evaluation.fill
    }

    pub fn failed(&self) -> bool {
        self.evaluation.failed
    }
}

/// Seed shared by every campaign that samples `kind` at spin `j`.
pub fn ensemble_seed(seed: u64, j: Spin, kind: EnsembleKind) -> u64 {
    let k = EnsembleKind::ALL.iter().position(|&e| e == kind).unwrap() as u64;
    derive_seed(seed, &[SEED_ENSEMBLE, j.twice() as u64, k])
}

fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
        .clamp(-1.0, 1.0)
        .acos()
}

/// Draws and evaluates sample `index` of an ensemble. The solver's
/// restarts continue the sample's own stream.
pub fn sample_record(
    kind: EnsembleKind,
    basis: &Arc<InvariantBasis>,
    seed: u64,
    index: usize,
    solver: &FillSolver,
) -> SampleRecord {
    let j = basis.spins()[0];
    let mut rng = RngStream::new(ensemble_seed(seed, j, kind), index as u64).rng();
    let mut record = SampleRecord {
        index,
        evaluation: Evaluation::failure(),
        theta: f64::NAN,
        phi: f64::NAN,
        closure_defect: f64::NAN,
        retries: 0,
    };
    let state = match kind {
        EnsembleKind::Arbitrary => sample_arbitrary(j, &mut rng),
        EnsembleKind::Invariant => embed(&sample_invariant(basis, &mut rng)),
        EnsembleKind::CoherentOpen | EnsembleKind::CoherentClosed => {
            let drawn = if kind == EnsembleKind::CoherentOpen {
                sample_coherent_open(basis, &mut rng)
            } else {
                sample_coherent_closed(basis, &mut rng)
            };
            let Ok(sample) = drawn else {
                return record;
            };
            let v = sample.config.vectors();
            record.closure_defect = closure_defect(basis.spins(), &sample.config);
            record.retries = sample.retries;
            match sample.closed_params {
                Some(p) => (record.theta, record.phi) = (p.theta(), p.phi()),
                None => record.theta = angle_between(v[0], v[1]),
            }
            embed(&sample.state)
        }
    };
    record.evaluation = evaluate(&state, solver, &mut rng);
    record
}

/// `samples` records of one ensemble at spin `j`.
pub fn sample_ensemble(
    kind: EnsembleKind,
    j: Spin,
    samples: usize,
    seed: u64,
    solver: &FillSolver,
    workers: usize,
) -> Vec<SampleRecord> {
    let basis = Arc::new(build_basis([j; 4]));
    par_map(workers, samples, |i| {
        sample_record(kind, &basis, seed, i, solver)
    })
}

/// Mean and standard error (sample standard deviation over `sqrt N`).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Counts over `bins` equal bins of `[0, 1]`; values slightly above 1 land
/// in the last bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<u64> {
    let mut counts = vec![0; bins];
    for &v in values {
        let b = ((v * bins as f64).floor().max(0.0) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

fn successful_fills(records: &[SampleRecord]) -> Vec<f64> {
    records
        .iter()
        .filter(|r| !r.failed())
        .map(|r| r.fill())
        .collect()
}

/// Mean fill of one ensemble at one spin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleMean {
    pub j: Spin,
    pub ensemble: EnsembleKind,
    pub mean: f64,
    pub stderr: f64,
    pub mean_one_minus: f64,
    pub samples: usize,
    pub failed: usize,
}

pub fn ensemble_mean(kind: EnsembleKind, j: Spin, records: &[SampleRecord]) -> EnsembleMean {
    let fills = successful_fills(records);
    let (mean, stderr) = mean_stderr(&fills);
    let one_minus: Vec<f64> = fills.iter().map(|f| 1.0 - f).collect();
    EnsembleMean {
        j,
        ensemble: kind,
        mean,
        stderr,
        mean_one_minus: mean_stderr(&one_minus).0,
        samples: records.len(),
        failed: records.len() - fills.len(),
    }
}

/// Interior `theta` nodes `(i + 1/2) pi / a`.
pub fn grid_theta_nodes(a: usize) -> Vec<f64> {
    (0..a).map(|i| (i as f64 + 0.5) * PI / a as f64).collect()
}

/// `phi` nodes `2 pi k / b`.
pub fn grid_phi_nodes(b: usize) -> Vec<f64> {
    (0..b).map(|k| 2.0 * PI * k as f64 / b as f64).collect()
}

/// One node of the closed-configuration grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub theta: f64,
    pub phi: f64,
    pub evaluation: Evaluation,
}

impl GridPoint {
    /// `(E12, E13, E14)`, normalized.
    pub fn two_to_two(&self) -> [f64; 3] {
        let e = self.evaluation.normalized();
        [e[4], e[5], e[6]]
    }
}

/// Coherent intertwiners over the `a x b` grid of closed configurations,
/// `theta`-major.
pub fn config_grid(
    j: Spin,
    a: usize,
    b: usize,
    seed: u64,
    solver: &FillSolver,
    workers: usize,
) -> Vec<GridPoint> {
    let basis = Arc::new(build_basis([j; 4]));
    let thetas = grid_theta_nodes(a);
    let phis = grid_phi_nodes(b);
    let key = derive_seed(seed, &[SEED_GRID, j.twice() as u64]);
    par_map(workers, a * b, |row| {
        let (theta, phi) = (thetas[row / b], phis[row % b]);
        let mut rng = RngStream::new(key, row as u64).rng();
        let evaluation = ClosedConfigParams::new(theta, phi)
            .and_then(|p| coherent_intertwiner(&basis, &closed_config_vectors(&p)))
            .map_or_else(
                |_| Evaluation::failure(),
                |s| evaluate(&embed(&s), solver, &mut rng),
            );
        GridPoint {
            theta,
            phi,
            evaluation,
        }
    })
}

/// Means over `phi` at fixed `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaMean {
    pub theta: f64,
    pub mean_two_to_two: [f64; 3],
    pub mean_fill: f64,
    pub failed: usize,
}

/// Averages each `theta` row of a grid, skipping failed nodes.
pub fn theta_means(grid: &[GridPoint], b: usize) -> Vec<ThetaMean> {
    grid.chunks(b)
        .map(|row| {
            let ok: Vec<&GridPoint> = row.iter().filter(|p| !p.evaluation.failed).collect();
            let n = ok.len() as f64;
            let mut e = [0.0; 3];
            for p in &ok {
                for (acc, v) in e.iter_mut().zip(p.two_to_two()) {
                    *acc += v;
                }
            }
            ThetaMean {
                theta: row[0].theta,
                mean_two_to_two: e.map(|v| v / n),
                mean_fill: ok.iter().map(|p| p.evaluation.fill).sum::<f64>() / n,
                failed: row.len() - ok.len(),
            }
        })
        .collect()
}

/// Unit normals of a base configuration; both close.
pub fn base_normals(base: BaseConfig) -> [[f64; 3]; 4] {
    let dirs: [(f64, f64); 4] = match base {
        BaseConfig::Regular => {
            let c = 1.0 / 3f64.sqrt();
            let phis = [-PI / 4.0, -3.0 * PI / 4.0, PI / 4.0, 3.0 * PI / 4.0];
            let cos = [-c, c, c, -c];
            std::array::from_fn(|i| (cos[i].acos(), phis[i]))
        }
        BaseConfig::Disphenoid => {
            let phis = [-PI / 2.0, 3.0 * PI / 4.0, -PI / 2.0, PI / 4.0];
            let thetas = [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI / 2.0];
            std::array::from_fn(|i| (thetas[i], phis[i]))
        }
    };
    dirs.map(|(t, p)| {
        SphericalDirection::new(t, p)
            .expect("valid base angle")
            .to_vector()
    })
}

/// The `(cos theta1, phi1)` scan grid, anchored so that the closing
/// position of `n1` is a node.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationGrid {
    pub cos_nodes: Vec<f64>,
    pub phi_nodes: Vec<f64>,
    /// `(i, k)` of the closure node.
    pub closure_node: (usize, usize),
}

impl PerturbationGrid {
    /// Steps `2/a` in `cos theta1` and `2 pi / b` in `phi1`, shifted so one
    /// node sits at `(closure_cos, closure_phi)`.
    pub fn anchored(a: usize, b: usize, closure_cos: f64, closure_phi: f64) -> Self {
        let dc = 2.0 / a as f64;
        let dp = 2.0 * PI / b as f64;
        let phi0 = closure_phi.rem_euclid(2.0 * PI);
        let ic = (((closure_cos + 1.0) / dc).floor() as usize).min(a - 1);
        let kp = ((phi0 / dp).floor() as usize).min(b - 1);
        let cos_nodes = (0..a)
            .map(|i| closure_cos + (i as f64 - ic as f64) * dc)
            .collect();
        let phi_nodes = (0..b).map(|k| phi0 + (k as f64 - kp as f64) * dp).collect();
        Self {
            cos_nodes,
            phi_nodes,
            closure_node: (ic, kp),
        }
    }

    pub fn len(&self) -> usize {
        self.cos_nodes.len() * self.phi_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row index of `(i, k)` in the `cos`-major output.
    pub fn row(&self, i: usize, k: usize) -> usize {
        i * self.phi_nodes.len() + k
    }
}

/// One node of a perturbation scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationPoint {
    pub cos_theta1: f64,
    pub phi1: f64,
    pub closure_defect: f64,
    pub evaluation: Evaluation,
}

/// Scans `n1` over the anchored grid with `n2, n3, n4` held at the base.
pub fn base_perturbation(
    j: Spin,
    base: BaseConfig,
    a: usize,
    b: usize,
    seed: u64,
    solver: &FillSolver,
    workers: usize,
) -> (PerturbationGrid, Vec<PerturbationPoint>) {
    let basis = Arc::new(build_basis([j; 4]));
    let n = base_normals(base);
    let closing =
        SphericalDirection::from_vector(std::array::from_fn(|k| -(n[1][k] + n[2][k] + n[3][k])));
    let grid = PerturbationGrid::anchored(a, b, closing.theta().cos(), closing.phi());
    let key = derive_seed(seed, &[SEED_PERTURBATION, j.twice() as u64]);
    let points = par_map(workers, grid.len(), |row| {
        let (cos_theta1, phi1) = (grid.cos_nodes[row / b], grid.phi_nodes[row % b]);
        let n1 =
            SphericalDirection::new(cos_theta1.clamp(-1.0, 1.0).acos(), phi1).expect("valid angle");
        let config = VectorConfiguration::from_vectors([n1.to_vector(), n[1], n[2], n[3]]);
        let mut rng = RngStream::new(key, row as u64).rng();
        let evaluation = coherent_intertwiner(&basis, &config).map_or_else(
            |_| Evaluation::failure(),
            |s| evaluate(&embed(&s), solver, &mut rng),
        );
        PerturbationPoint {
            cos_theta1,
            phi1,
            closure_defect: closure_defect([j; 4], &config),
            evaluation,
        }
    });
    (grid, points)
}

/// Files written and failure counts of a finished campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignReport {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub failed: usize,
}

impl CampaignReport {
    fn check(self) -> Result<Self> {
        if self.failed as f64 > MAX_FAILURE_FRACTION * self.rows as f64 {
            return Err(Error::ExcessFailures {
                failed: self.failed,
                total: self.rows,
            });
        }
        Ok(self)
    }
}

struct CsvFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvFile {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { path, out })
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

const ENTROPY_LABELS: [&str; 7] = ["E1", "E2", "E3", "E4", "E12", "E13", "E14"];

pub fn samples_header() -> Vec<String> {
    let mut h = vec!["index".to_string(), "F4".to_string()];
    h.extend(ENTROPY_LABELS.iter().map(|s| s.to_string()));
    h.extend(ENTROPY_LABELS.iter().map(|s| format!("raw_{s}")));
    h.extend(
        [
            "residual",
            "restarts",
            "retries",
            "theta",
            "phi",
            "closure_defect",
            "failed",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_left", "bin_right", "count"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "ensemble",
    "j",
    "samples",
    "successful",
    "failed",
    "mean_F4",
    "stderr",
    "retries",
];
pub const MEANS_HEADER: [&str; 5] = ["j", "ensemble", "mean_F4", "stderr", "mean_one_minus_F4"];
pub const GRID_HEADER: [&str; 9] = [
    "theta",
    "phi",
    "E12",
    "E13",
    "E14",
    "F4",
    "log10_one_minus_F4",
    "residual",
    "failed",
];
pub const THETA_MEANS_HEADER: [&str; 5] = ["theta", "mean_E12", "mean_E13", "mean_E14", "mean_F4"];
pub const PERTURBATION_HEADER: [&str; 7] = [
    "cos_theta1",
    "phi1",
    "F4",
    "log10_one_minus_F4",
    "closure_defect",
    "residual",
    "failed",
];

fn flag(failed: bool) -> String {
    u8::from(failed).to_string()
}

fn write_distribution(
    config: &CampaignConfig,
    kind: EnsembleKind,
    records: &[SampleRecord],
) -> Result<Vec<PathBuf>> {
    let dir = &config.output_dir;
    let header = samples_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut samples = CsvFile::create(dir, "samples.csv", &header)?;
    for r in records {
        let e = &r.evaluation;
        let mut row = vec![r.index.to_string(), fmt_f64(e.fill)];
        row.extend(e.normalized().map(fmt_f64));
        row.extend(e.raw().map(fmt_f64));
        row.extend([
            fmt_f64(e.residual),
            e.restarts.to_string(),
            r.retries.to_string(),
            fmt_f64(r.theta),
            fmt_f64(r.phi),
            fmt_f64(r.closure_defect),
            flag(e.failed),
        ]);
        samples.row(&row)?;
    }

    let fills = successful_fills(records);
    let mut hist = CsvFile::create(dir, "histogram.csv", &HISTOGRAM_HEADER)?;
    let bins = config.bins;
    for (i, count) in histogram(&fills, bins).into_iter().enumerate() {
        let left = i as f64 / bins as f64;
        let right = (i + 1) as f64 / bins as f64;
        hist.row(&[fmt_f64(left), fmt_f64(right), count.to_string()])?;
    }

    let mean = ensemble_mean(kind, config.j, records);
    let mut summary = CsvFile::create(dir, "summary.csv", &SUMMARY_HEADER)?;
    summary.row(&[
        kind.to_string(),
        config.j.value().to_string(),
        records.len().to_string(),
        fills.len().to_string(),
        mean.failed.to_string(),
        fmt_f64(mean.mean),
        fmt_f64(mean.stderr),
        records.iter().map(|r| r.retries).sum::<usize>().to_string(),
    ])?;
    Ok(vec![samples.finish()?, hist.finish()?, summary.finish()?])
}

fn write_means(dir: &Path, means: &[EnsembleMean]) -> Result<PathBuf> {
    let mut out = CsvFile::create(dir, "means.csv", &MEANS_HEADER)?;
    for m in means {
        out.row(&[
            m.j.value().to_string(),
            m.ensemble.to_string(),
            fmt_f64(m.mean),
            fmt_f64(m.stderr),
            fmt_f64(m.mean_one_minus),
        ])?;
    }
    out.finish()
}

fn write_grid(dir: &Path, grid: &[GridPoint]) -> Result<PathBuf> {
    let mut out = CsvFile::create(dir, "grid.csv", &GRID_HEADER)?;
    for p in grid {
        let e = p.two_to_two();
        let f = p.evaluation.fill;
        out.row(&[
            fmt_f64(p.theta),
            fmt_f64(p.phi),
            fmt_f64(e[0]),
            fmt_f64(e[1]),
            fmt_f64(e[2]),
            fmt_f64(f),
            fmt_f64(log_one_minus(f)),
            fmt_f64(p.evaluation.residual),
            flag(p.evaluation.failed),
        ])?;
    }
    out.finish()
}

fn write_theta_means(dir: &Path, means: &[ThetaMean]) -> Result<PathBuf> {
    let mut out = CsvFile::create(dir, "theta_means.csv", &THETA_MEANS_HEADER)?;
    for m in means {
        let e = m.mean_two_to_two;
        out.row(&[
            fmt_f64(m.theta),
            fmt_f64(e[0]),
            fmt_f64(e[1]),
            fmt_f64(e[2]),
            fmt_f64(m.mean_fill),
        ])?;
    }
    out.finish()
}

fn write_perturbation(dir: &Path, points: &[PerturbationPoint]) -> Result<PathBuf> {
    let mut out = CsvFile::create(dir, "perturbation.csv", &PERTURBATION_HEADER)?;
    for p in points {
        let f = p.evaluation.fill;
        out.row(&[
            fmt_f64(p.cos_theta1),
            fmt_f64(p.phi1),
            fmt_f64(f),
            fmt_f64(log_one_minus(f)),
            fmt_f64(p.closure_defect),
            fmt_f64(p.evaluation.residual),
            flag(p.evaluation.failed),
        ])?;
    }
    out.finish()
}

fn worker_count(config: &CampaignConfig) -> usize {
    if config.workers > 0 {
        config.workers
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Runs a campaign and writes its CSVs into `output_dir`.
///
/// Files are written even when too many rows fail; the error then reports
/// the counts.
pub fn run(config: &CampaignConfig) -> Result<CampaignReport> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let solver = FillSolver::new(config.tolerance, config.max_restarts);
    let workers = worker_count(config);
    let dir = &config.output_dir;
    let (a, b) = (config.grid_a, config.grid_b);

    let report = match config.campaign {
        Campaign::Distribution => {
            let kind = config.ensemble.expect("validated");
            let records = sample_ensemble(
                kind,
                config.j,
                config.samples,
                config.seed,
                &solver,
                workers,
            );
            let failed = records.iter().filter(|r| r.failed()).count();
            let files = write_distribution(config, kind, &records)?;
            CampaignReport {
                files,
                rows: records.len(),
                failed,
            }
        }
        Campaign::MeansVsJ => {
            let mut means = Vec::new();
            for twice in config.j_min.twice()..=config.j.twice() {
                let j = Spin::from_twice(twice);
                for kind in EnsembleKind::ALL {
                    let records =
                        sample_ensemble(kind, j, config.samples, config.seed, &solver, workers);
                    means.push(ensemble_mean(kind, j, &records));
                }
            }
            let rows = means.iter().map(|m| m.samples).sum();
            let failed = means.iter().map(|m| m.failed).sum();
            CampaignReport {
                files: vec![write_means(dir, &means)?],
                rows,
                failed,
            }
        }
        Campaign::ConfigGrid => {
            let grid = config_grid(config.j, a, b, config.seed, &solver, workers);
            let failed = grid.iter().filter(|p| p.evaluation.failed).count();
            CampaignReport {
                files: vec![write_grid(dir, &grid)?],
                rows: grid.len(),
                failed,
            }
        }
        Campaign::MeansGivenTheta => {
            let grid = config_grid(config.j, a, b, config.seed, &solver, workers);
            let failed = grid.iter().filter(|p| p.evaluation.failed).count();
            let means = theta_means(&grid, b);
            CampaignReport {
                files: vec![write_theta_means(dir, &means)?],
                rows: grid.len(),
                failed,
            }
        }
        Campaign::BasePerturbation => {
            let (_, points) =
                base_perturbation(config.j, config.base, a, b, config.seed, &solver, workers);
            let failed = points.iter().filter(|p| p.evaluation.failed).count();
            CampaignReport {
                files: vec![write_perturbation(dir, &points)?],
                rows: points.len(),
                failed,
            }
        }
    };
    report.check()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_and_stats() {
        assert_eq!(
            histogram(&[0.0, 0.24, 0.5, 0.99, 1.0 + 1e-12], 4),
            vec![2, 0, 1, 2]
        );
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn log_fill_is_clamped() {
        assert_eq!(log_one_minus(1.0), -16.0);
        assert_eq!(log_one_minus(1.0 + 1e-10), -16.0);
        assert!((log_one_minus(0.9) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, -7.25] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn grid_nodes() {
        let t = grid_theta_nodes(4);
        assert!((t[0] - PI / 8.0).abs() < 1e-15 && (t[3] - 7.0 * PI / 8.0).abs() < 1e-15);
        let p = grid_phi_nodes(4);
        assert_eq!(p[0], 0.0);
        assert!((p[2] - PI).abs() < 1e-15);
    }

    #[test]
    fn base_configurations_close() {
        for base in [BaseConfig::Regular, BaseConfig::Disphenoid] {
            let n = base_normals(base);
            for k in 0..3 {
                assert!(n.iter().map(|v| v[k]).sum::<f64>().abs() < 1e-12, "{base}");
            }
        }
    }

    #[test]
    fn anchored_grid_contains_closure_node_and_stays_in_range() {
        for (c, p) in [
            (-1.0 / 3f64.sqrt(), -PI / 4.0),
            (std::f64::consts::FRAC_1_SQRT_2, 1.0),
            (-1.0, 0.0),
            (0.999, 6.2),
        ] {
            let g = PerturbationGrid::anchored(60, 60, c, p);
            let (i, k) = g.closure_node;
            assert_eq!(g.cos_nodes[i], c);
            assert_eq!(g.phi_nodes[k], p.rem_euclid(2.0 * PI));
            assert!(g.cos_nodes.iter().all(|x| (-1.0..=1.0).contains(x)));
            assert!(g.phi_nodes.iter().all(|x| (0.0..2.0 * PI).contains(x)));
        }
    }

    #[test]
    fn evaluation_of_regular_coherent_intertwiner() {
        let basis = Arc::new(build_basis([Spin::HALF; 4]));
        let state =
            coherent_intertwiner(&basis, &VectorConfiguration::regular_tetrahedron()).unwrap();
        let e = evaluate(
            &embed(&state),
            &FillSolver::default(),
            &mut RngStream::new(0, 0).rng(),
        );
        assert!(!e.failed);
        assert!((e.fill - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sample_records_are_reproducible() {
        let basis = Arc::new(build_basis([Spin::HALF; 4]));
        let solver = FillSolver::default();
        for kind in EnsembleKind::ALL {
            let a = sample_record(kind, &basis, 5, 3, &solver);
            let b = sample_record(kind, &basis, 5, 3, &solver);
            assert_eq!(a.fill().to_bits(), b.fill().to_bits());
            assert!(!a.failed());
        }
    }
}
