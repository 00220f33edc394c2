//! Refits over a grid of prior scales and prints how the headline
//! parameters move.
//!
//! cargo run --release --example prior_sensitivity

use std::fs::File;

use volley::data::parse_matches;
use volley::inference::{sensitivity_sweep, SamplerSettings, SweepAxis};
use volley::model::ModelConfig;

fn main() -> volley::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_season.csv");
    let data = parse_matches(File::open(path).map_err(|e| volley::Error::io(path, e))?)?;
    let axes = [SweepAxis::parse("mu_sd=1,10,100,1000")?];
    let settings = SamplerSettings {
        iterations: 1000,
        burn_in: 500,
        ..SamplerSettings::default()
    };
    let points = sensitivity_sweep(&axes, &settings, &ModelConfig::preset(9)?, &data)?;
    for p in &points {
        let Ok(rows) = &p.outcome else {
            println!("{:?}: failed", p.values);
            continue;
        };
        let show: Vec<String> = rows
            .iter()
            .filter(|r| ["mu", "theta", "H_point"].contains(&r.parameter.as_str()))
            .map(|r| format!("{} {:.3} [{:.3}, {:.3}]", r.parameter, r.mean, r.q025, r.q975))
            .collect();
        println!("{} = {:<6} {}", p.values[0].0, p.values[0].1, show.join("  "));
    }
    Ok(())
}
