//! Running a campaign from a config file, as the command-line tool does.

use tetrafill::config::{Campaign, CampaignConfig};
use tetrafill::experiments;

fn main() -> tetrafill::Result<()> {
    let dir = std::env::temp_dir().join("tetrafill-campaign-example");
    let mut config = CampaignConfig::new(Campaign::Distribution);
    config.apply_text(
        "ensemble = coherent-closed\n\
         j = 1\n\
         samples = 500\n\
         bins = 20\n\
         seed = 7\n",
    )?;
    config.output_dir = dir.clone();
    let report = experiments::run(&config)?;
    println!("{} rows, {} failed", report.rows, report.failed);
    for f in &report.files {
        println!("{}", f.display());
    }
    print!("{}", std::fs::read_to_string(dir.join("summary.csv"))?);
    Ok(())
}
