//! Fits the default model to a synthetic season and prints the posterior
//! summary next to the values the season was generated from.
//!
//! cargo run --release --example fit_synthetic -- [iterations] [seed] [legal|likelihood]
//!
//! `legal` (the default) simulates full set scores, so a deuce forces the
//! loser's baseline to `r - 2`; `likelihood` draws winner, baseline and
//! extra points independently, the law the model assumes.

use std::time::Instant;

use volley::inference::{sample_model, SamplerSettings};
use volley::model::Model;
use volley::synth::{default_season, likelihood_season, synthetic_teams};

fn main() -> volley::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let law = args.next().unwrap_or_else(|| "legal".into());
    let (config, truth, data) = default_season(seed);
    let model = if law == "likelihood" {
        let compiled = likelihood_season(&truth, &config, &synthetic_teams(14)?, seed);
        println!("{} sets drawn from the likelihood", compiled.sets.len());
        Model::from_data(&config, compiled)?
    } else {
        println!("{}", data.summary());
        Model::new(&config, &data)?
    };

    let settings = SamplerSettings {
        iterations,
        burn_in: iterations / 2,
        seed,
        ..SamplerSettings::default()
    };
    let t = Instant::now();
    let draws = sample_model(&settings, &model)?;
    println!("sampled in {:.1?}", t.elapsed());

    let truths = [
        ("mu", truth.mu),
        ("H_set", truth.h_set),
        ("H_point", truth.h_point),
        ("theta", truth.theta),
        ("m", truth.m),
        ("lambda", truth.lambda),
    ];
    println!("{:<10} {:>8} {:>8} {:>8} {:>8} {:>7} {:>6}", "param", "truth", "mean", "2.5%", "97.5%", "n_eff", "Rhat");
    for s in draws.summaries() {
        let Some((_, v)) = truths.iter().find(|(n, _)| *n == s.name) else {
            continue;
        };
        let rhat = s.rhat.map(|r| format!("{r:.3}")).unwrap_or_else(|e| e.to_string());
        println!(
            "{:<10} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>7.0} {:>6}",
            s.name, v, s.mean, s.q025, s.q975, s.n_eff, rhat
        );
    }
    let worst = draws
        .summaries()
        .into_iter()
        .filter_map(|s| s.rhat.ok().map(|r| (r, s.name)))
        .fold((0.0, String::new()), |a, b| if b.0 > a.0 { b } else { a });
    println!("largest Rhat {:.3} ({})", worst.0, worst.1);
    Ok(())
}
