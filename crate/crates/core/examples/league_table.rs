//! Fits the default model and replays the whole season from the
//! posterior predictive: expected points, 95% intervals and rank odds.
//!
//! cargo run --release --example league_table

use std::fs::File;

use volley::data::parse_matches;
use volley::evaluate::spearman;
use volley::inference::{run_mcmc, SamplerSettings};
use volley::model::{ModelConfig, ParameterState};
use volley::simulate::{reconstruct_league, SimulationSettings};

fn main() -> volley::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_season.csv");
    let data = parse_matches(File::open(path).map_err(|e| volley::Error::io(path, e))?)?;
    let config = ModelConfig::preset(9)?;
    let draws = run_mcmc(&SamplerSettings::default(), &config, &data)?;
    let states: Vec<ParameterState> = draws.states().cloned().collect();

    let league = reconstruct_league(&states, &config, &data, &SimulationSettings::default())?;
    println!("{:>4} {:<20} {:>8} {:>12} {:>7} {:>8}", "rank", "team", "expected", "95%", "actual", "P(top4)");
    let table = league.standings();
    for s in &table {
        let top4: f64 = s.rank_probs.iter().take(4).sum();
        println!(
            "{:>4} {:<20} {:>8.1} {:>5.0} - {:<4.0} {:>7} {:>8.3}",
            s.predicted_rank,
            s.team,
            s.expected_points,
            s.q025,
            s.q975,
            s.actual_points.unwrap_or(0),
            top4
        );
    }
    let expected: Vec<f64> = table.iter().map(|s| s.expected_points).collect();
    let actual: Vec<f64> = table.iter().map(|s| s.actual_points.unwrap_or(0) as f64).collect();
    println!("rank correlation with the real table {:.3}", spearman(&expected, &actual)?);
    Ok(())
}
