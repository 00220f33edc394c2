//! Coverage of 95% intervals over repeated synthetic seasons drawn from the
//! likelihood at a known truth.
//!
//! cargo run --release --example calibration -- [replications] [iterations]

use volley::inference::{sample_model, SamplerSettings};
use volley::model::{Model, ModelConfig};
use volley::synth::{likelihood_season, synthetic_teams, synthetic_truth};

fn main() -> volley::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let iterations: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2000);
    let config = ModelConfig::preset(9)?;
    let teams = synthetic_teams(14)?;
    let truth = synthetic_truth(&config, &teams)?;
    let targets = [("mu", truth.mu), ("H_set", truth.h_set), ("H_point", truth.h_point), ("theta", truth.theta)];
    let mut covered = [0u32; 4];
    for rep in 0..reps {
        let model = Model::from_data(&config, likelihood_season(&truth, &config, &teams, 1000 + rep))?;
        let settings = SamplerSettings {
            iterations,
            burn_in: iterations / 2,
            seed: rep,
            ..SamplerSettings::default()
        };
        let draws = sample_model(&settings, &model)?;
        let summaries = draws.summaries();
        let mut line = format!("season {rep:>2}:");
        for (k, (name, value)) in targets.iter().enumerate() {
            let s = summaries.iter().find(|s| s.name == *name).expect("column exists");
            let hit = s.q025 <= *value && *value <= s.q975;
            covered[k] += hit as u32;
            line += &format!("  {name} {:.2} [{:.2}, {:.2}]{}", s.mean, s.q025, s.q975, if hit { "" } else { " x" });
        }
        println!("{line}");
    }
    for (k, (name, _)) in targets.iter().enumerate() {
        println!("{name}: covered {}/{reps}", covered[k]);
    }
    Ok(())
}
