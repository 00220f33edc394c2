//! Writes a synthetic double round robin in the season CSV format.
//!
//! cargo run --example synthetic_season -- [seed] [path]
//!
//! The 14 clubs are fictional. Results come from the default model at the
//! parameter values in `volley::synth::synthetic_truth`.

use std::fs::File;

use volley::synth::default_season;

fn main() -> volley::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(20180);
    let path = args.next().unwrap_or_else(|| "synthetic_season.csv".into());
    let (_, truth, data) = default_season(seed);
    let file = File::create(&path).map_err(|e| volley::Error::io(&path, e))?;
    data.write_csv(file)?;
    println!("{}", data.summary());
    println!("wrote {path}");
    println!("true mu {:.2}, H_set {:.2}, H_point {:.2}, theta {:.2}", truth.mu, truth.h_set, truth.h_point, truth.theta);
    Ok(())
}
