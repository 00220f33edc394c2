//! Compares the observed distribution of set point differences with
//! replications from the fitted model.
//!
//! cargo run --release --example posterior_check

use std::fs::File;

use volley::data::parse_matches;
use volley::evaluate::{point_differences, ppc_point_diff, replicate_point_differences};
use volley::inference::{run_mcmc, SamplerSettings};
use volley::model::{ModelConfig, ParameterState};
use volley::simulate::SimulationSettings;

fn main() -> volley::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_season.csv");
    let data = parse_matches(File::open(path).map_err(|e| volley::Error::io(path, e))?)?;
    let config = ModelConfig::preset(9)?;
    let draws = run_mcmc(&SamplerSettings::default(), &config, &data)?;
    let states: Vec<ParameterState> = draws.states().cloned().collect();

    let reps = replicate_point_differences(&states, &config, &data, &SimulationSettings::default())?;
    let check = ppc_point_diff(&point_differences(&data.matches), &reps)?;
    println!("   d  observed  replicated");
    for (i, d) in check.grid.iter().enumerate() {
        if d.abs() > 20 {
            continue;
        }
        let (o, r) = (check.observed[i], check.mean_replicated[i]);
        println!("{d:>4}  {o:>8.4}  {r:>10.4}  {}", "*".repeat((o * 200.0) as usize));
    }
    println!("total variation distance {:.4}", check.tv_distance);
    Ok(())
}
