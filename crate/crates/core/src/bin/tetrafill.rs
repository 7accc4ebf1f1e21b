use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use tetrafill::config::{Campaign, CampaignConfig};
use tetrafill::experiments;
use tetrafill::Error;

/// Entropic fill campaigns over four-valent SU(2) intertwiners.
#[derive(Parser, Debug)]
#[command(name = "tetrafill", version)]
struct Cli {
    /// distribution, means-vs-j, config-grid, means-given-theta or base-perturbation
    campaign: String,
    /// key = value file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spin as "3/2" or "1.5"; the largest spin for means-vs-j
    #[arg(long)]
    j: Option<String>,
    /// Smallest spin for means-vs-j
    #[arg(long)]
    j_min: Option<String>,
    /// arbitrary, invariant, coherent-open or coherent-closed
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    bins: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Grid resolution AxB
    #[arg(long)]
    grid: Option<String>,
    /// regular or disphenoid
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    max_restarts: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Worker threads; 0 uses every core
    #[arg(long)]
    workers: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        [
            ("j", &self.j),
            ("j_min", &self.j_min),
            ("ensemble", &self.ensemble),
            ("samples", &self.samples),
            ("bins", &self.bins),
            ("seed", &self.seed),
            ("grid", &self.grid),
            ("base", &self.base),
            ("tolerance", &self.tolerance),
            ("max_restarts", &self.max_restarts),
            ("out", &self.out),
            ("workers", &self.workers),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }

    fn to_config(&self) -> tetrafill::Result<CampaignConfig> {
        let mut config = CampaignConfig::new(self.campaign.parse::<Campaign>()?);
        if let Some(path) = &self.config {
            config.apply_file(path)?;
            config.campaign = self.campaign.parse()?;
        }
        for (key, value) in self.overrides() {
            config.set(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let config = match cli.to_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match experiments::run(&config) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            println!("{} rows, {} failed", report.rows, report.failed);
            ExitCode::SUCCESS
        }
        Err(e @ Error::ExcessFailures { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
