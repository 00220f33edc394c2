//! Fits on the first half of the season and predicts the second half,
//! scoring how many game and set winners the forecast gets right.
//!
//! cargo run --release --example midseason_forecast -- [split_round]

use std::fs::File;

use volley::data::parse_matches;
use volley::evaluate::spread;
use volley::inference::{run_mcmc, SamplerSettings};
use volley::model::{ModelConfig, ParameterState};
use volley::simulate::{predict_remaining, SimulationSettings};

fn main() -> volley::Result<()> {
    let split: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(13);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_season.csv");
    let full = parse_matches(File::open(path).map_err(|e| volley::Error::io(path, e))?)?;
    let first_half = full.truncated_at_round(split);
    println!("fitting on {} of {} matches", first_half.matches.len(), full.matches.len());

    let config = ModelConfig::preset(9)?;
    let draws = run_mcmc(&SamplerSettings::default(), &config, &first_half)?;
    let states: Vec<ParameterState> = draws.states().cloned().collect();
    let p = predict_remaining(&states, &config, &first_half, Some(&full), &SimulationSettings::default())?;

    let (g, s) = (spread(&p.game_agreement), spread(&p.set_agreement));
    println!("games predicted correctly {:.1}% (sd {:.1}) over {} games", 100.0 * g.mean, 100.0 * g.sd, p.games_compared);
    println!("sets predicted correctly  {:.1}% (sd {:.1}) over {} sets", 100.0 * s.mean, 100.0 * s.sd, p.sets_compared);
    for t in p.league.standings() {
        println!(
            "{:<20} final points {:>5.1} [{:>3.0}, {:>3.0}] actual {}",
            t.team,
            t.expected_points,
            t.q025,
            t.q975,
            t.actual_points.unwrap_or(0)
        );
    }
    Ok(())
}
