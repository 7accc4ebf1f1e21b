use std::f64::consts::PI;
use std::path::Path;

use tetrafill::config::{BaseConfig, Campaign, CampaignConfig};
use tetrafill::experiments::{
    self, samples_header, GRID_HEADER, HISTOGRAM_HEADER, MEANS_HEADER, PERTURBATION_HEADER,
    SUMMARY_HEADER, THETA_MEANS_HEADER,
};
use tetrafill::sampling::EnsembleKind;
use tetrafill::su2::Spin;

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Self {
        let text = std::fs::read_to_string(path).unwrap();
        assert!(!text.contains('\r'));
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines
            .map(|l| l.split(',').map(String::from).collect())
            .collect();
        Self { header, rows }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }

    fn assert_header(&self, expected: &[&str]) {
        assert_eq!(self.header, expected);
        for r in &self.rows {
            assert_eq!(r.len(), expected.len());
        }
    }
}

fn config(campaign: Campaign, dir: &Path) -> CampaignConfig {
    let mut c = CampaignConfig::new(campaign);
    c.output_dir = dir.to_path_buf();
    c.workers = 2;
    c
}

#[test]
fn invariant_distribution_rows_are_maximal() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(Campaign::Distribution, tmp.path());
    c.ensemble = Some(EnsembleKind::Invariant);
    c.samples = 1000;
    c.bins = 40;
    let report = experiments::run(&c).unwrap();
    assert_eq!((report.rows, report.failed), (1000, 0));

    let samples = Table::read(&tmp.path().join("samples.csv"));
    let header = samples_header();
    samples.assert_header(&header.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(samples.rows.len(), 1000);
    for name in ["E1", "E2", "E3", "E4"] {
        assert!(samples.col(name).iter().all(|e| (e - 1.0).abs() <= 1e-9));
    }
    assert!(samples.col("failed").iter().all(|&f| f == 0.0));

    let hist = Table::read(&tmp.path().join("histogram.csv"));
    hist.assert_header(&HISTOGRAM_HEADER);
    assert_eq!(hist.rows.len(), 40);
    assert_eq!(hist.col("count").iter().sum::<f64>(), 1000.0);
    assert_eq!(hist.col("bin_left")[0], 0.0);
    assert_eq!(*hist.col("bin_right").last().unwrap(), 1.0);

    let summary = Table::read(&tmp.path().join("summary.csv"));
    summary.assert_header(&SUMMARY_HEADER);
    let f = samples.col("F4");
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    assert!((summary.col("mean_F4")[0] - mean).abs() < 1e-12);
}

#[test]
fn closed_distribution_rows_close() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(Campaign::Distribution, tmp.path());
    c.ensemble = Some(EnsembleKind::CoherentClosed);
    c.samples = 1000;
    experiments::run(&c).unwrap();
    let samples = Table::read(&tmp.path().join("samples.csv"));
    assert!(samples.col("closure_defect").iter().all(|&d| d <= 1e-12));
    assert!(samples.col("theta").iter().all(|&t| t > 0.0 && t < PI));
    assert!(samples
        .col("F4")
        .iter()
        .all(|&f| (0.0..=1.0 + 1e-9).contains(&f)));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let mut c = config(Campaign::Distribution, &tmp.path().join(name));
        c.ensemble = Some(EnsembleKind::Arbitrary);
        c.samples = 1000;
        c.seed = 7;
        experiments::run(&c).unwrap();
        std::fs::read(c.output_dir.join("samples.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn means_vs_j_covers_every_ensemble() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(Campaign::MeansVsJ, tmp.path());
    c.j = Spin::ONE;
    c.samples = 200;
    experiments::run(&c).unwrap();
    let t = Table::read(&tmp.path().join("means.csv"));
    t.assert_header(&MEANS_HEADER);
    assert_eq!(t.rows.len(), 8);
    let js = t.col("j");
    assert_eq!(js, vec![0.5, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0]);
    let tags: Vec<&str> = t.rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(
        &tags[..4],
        &["arbitrary", "invariant", "coherent-open", "coherent-closed"]
    );
    for (m, om) in t.col("mean_F4").iter().zip(t.col("mean_one_minus_F4")) {
        assert!((m + om - 1.0).abs() < 1e-12);
    }
}

#[test]
fn stderr_matches_its_definition() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(Campaign::Distribution, tmp.path());
    c.ensemble = Some(EnsembleKind::CoherentOpen);
    c.samples = 500;
    experiments::run(&c).unwrap();
    let f = Table::read(&tmp.path().join("samples.csv")).col("F4");
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let sd = (f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let summary = Table::read(&tmp.path().join("summary.csv"));
    assert!((summary.col("stderr")[0] - sd / n.sqrt()).abs() < 1e-12);
}

#[test]
fn config_grid_schema_and_island() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(Campaign::ConfigGrid, tmp.path());
    (c.grid_a, c.grid_b) = (30, 40);
    experiments::run(&c).unwrap();
    let t = Table::read(&tmp.path().join("grid.csv"));
    t.assert_header(&GRID_HEADER);
    assert_eq!(t.rows.len(), 1200);
    let theta = t.col("theta");
    assert!(theta.iter().all(|&x| x > 0.0 && x < PI));
    let f = t.col("F4");
    let log = t.col("log10_one_minus_F4");
    for (fi, li) in f.iter().zip(&log) {
        assert!((li - (1.0 - fi).max(1e-16).log10()).abs() < 1e-12);
        assert!(*li >= -16.0);
    }
    let best = f.iter().cloned().fold(f64::MIN, f64::max);
    let i = f.iter().position(|&x| x == best).unwrap();
    assert!((theta[i] - (-1.0f64 / 3.0).acos()).abs() < PI / 30.0);
}

#[test]
fn theta_means_schema_and_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(Campaign::MeansGivenTheta, tmp.path());
    (c.grid_a, c.grid_b) = (60, 40);
    experiments::run(&c).unwrap();
    let t = Table::read(&tmp.path().join("theta_means.csv"));
    t.assert_header(&THETA_MEANS_HEADER);
    assert_eq!(t.rows.len(), 60);
    for (a, b) in t.col("mean_E13").iter().zip(t.col("mean_E14")) {
        assert!((a - b).abs() <= 1e-9);
    }
    let theta = t.col("theta");
    let f = t.col("mean_F4");
    let mid = (0..theta.len())
        .min_by(|&x, &y| {
            (theta[x] - PI / 2.0)
                .abs()
                .total_cmp(&(theta[y] - PI / 2.0).abs())
        })
        .unwrap();
    for k in 0..theta.len() {
        if (theta[k] - theta[mid]).abs() <= 0.3 {
            assert!(
                f[mid] <= f[k],
                "mean F4 at {} exceeds {}",
                theta[mid],
                theta[k]
            );
        }
    }
}

#[test]
fn perturbation_closure_nodes() {
    for base in [BaseConfig::Regular, BaseConfig::Disphenoid] {
        let tmp = tempfile::tempdir().unwrap();
        let mut c = config(Campaign::BasePerturbation, tmp.path());
        c.base = base;
        (c.grid_a, c.grid_b) = (24, 24);
        experiments::run(&c).unwrap();
        let t = Table::read(&tmp.path().join("perturbation.csv"));
        t.assert_header(&PERTURBATION_HEADER);
        assert_eq!(t.rows.len(), 576);
        let defect = t.col("closure_defect");
        let min = defect.iter().cloned().fold(f64::MAX, f64::min);
        assert!(min <= 1e-12, "{base}: {min}");
        if base == BaseConfig::Regular {
            let i = defect.iter().position(|&d| d == min).unwrap();
            assert!((t.col("cos_theta1")[i] + 1.0 / 3f64.sqrt()).abs() < 1e-12);
            assert!((t.col("F4")[i] - 1.0).abs() <= 1e-6);
        }
    }
}

#[test]
fn excess_failures_still_write_files() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(Campaign::Distribution, tmp.path());
    c.ensemble = Some(EnsembleKind::Arbitrary);
    c.samples = 20;
    c.tolerance = 1e-300;
    c.max_restarts = 0;
    match experiments::run(&c) {
        Err(tetrafill::Error::ExcessFailures { failed, total }) => {
            assert_eq!((failed, total), (20, 20))
        }
        other => panic!("expected ExcessFailures, got {other:?}"),
    }
    let t = Table::read(&tmp.path().join("samples.csv"));
    assert!(t.col("failed").iter().all(|&f| f == 1.0));
    let summary = Table::read(&tmp.path().join("summary.csv"));
    assert_eq!(summary.col("failed")[0], 20.0);
}
