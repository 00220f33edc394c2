//! Progression odds for an eight-team best-of-five bracket.
//!
//! cargo run --release --example playoff_odds -- [bracket.json]

use std::fs::{self, File};

use volley::data::parse_matches;
use volley::inference::{run_mcmc, SamplerSettings};
use volley::model::{ModelConfig, ParameterState};
use volley::simulate::{simulate_playoffs, BracketSpec, SimulationSettings};

fn main() -> volley::Result<()> {
    let bracket_path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_bracket.json").into());
    let bracket = BracketSpec::from_json(&fs::read_to_string(&bracket_path).map_err(|e| volley::Error::io(&bracket_path, e))?)?;
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_season.csv");
    let data = parse_matches(File::open(path).map_err(|e| volley::Error::io(path, e))?)?;

    let config = ModelConfig::preset(9)?;
    let draws = run_mcmc(&SamplerSettings::default(), &config, &data)?;
    let states: Vec<ParameterState> = draws.states().cloned().collect();
    let settings = SimulationSettings::default();
    let table = simulate_playoffs(&states, &config, &bracket, &data.teams, &settings)?;

    println!("{:<5}{:<20}{}", "seed", "team", table.stages.iter().map(|s| format!("{s:>11}")).collect::<String>());
    for t in &table.teams {
        println!("{:<5}{:<20}{}", t.seed, t.team, t.reach.iter().map(|p| format!("{p:>11.3}")).collect::<String>());
    }
    // first-round pairings meet in every replication
    println!("\nfirst round:");
    for s in table.series.iter().filter(|s| s.meetings == settings.replications) {
        println!("  {} v {}: {:.3}", s.higher, s.lower, s.higher_win_prob());
    }
    Ok(())
}
