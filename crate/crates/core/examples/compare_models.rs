//! Ranks model variants by DIC on the bundled synthetic season.
//!
//! cargo run --release --example compare_models -- [models, e.g. 2,3,9]

use std::fs::File;

use volley::data::parse_matches;
use volley::inference::{dic, run_mcmc, SamplerSettings};
use volley::model::ModelConfig;

fn main() -> volley::Result<()> {
    let models: Vec<u8> = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "2,3,9".into())
        .split(',')
        .map(|m| m.trim().parse().expect("model numbers"))
        .collect();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_season.csv");
    let data = parse_matches(File::open(path).map_err(|e| volley::Error::io(path, e))?)?;
    let settings = SamplerSettings::default();

    let mut rows = Vec::new();
    for m in models {
        let config = ModelConfig::preset(m)?;
        let draws = run_mcmc(&settings, &config, &data)?;
        rows.push((m, dic(&draws, &data)?));
    }
    rows.sort_by(|a, b| a.1.dic.total_cmp(&b.1.dic));
    println!("{:>5} {:>9} {:>7} {:>9}", "model", "DIC", "pD", "Dbar");
    for (m, d) in rows {
        println!("{m:>5} {:>9.1} {:>7.1} {:>9.1}", d.dic, d.p_d, d.d_bar);
    }
    Ok(())
}
