//! Convergence checks on a fit: split R-hat and effective sample size for
//! every parameter, acceptance rates per coordinate, and a trace file.
//!
//! cargo run --release --example convergence -- [trace.csv]

use std::fs::File;

use volley::data::parse_matches;
use volley::inference::{run_mcmc, SamplerSettings};
use volley::model::ModelConfig;

fn main() -> volley::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_season.csv");
    let data = parse_matches(File::open(path).map_err(|e| volley::Error::io(path, e))?)?;
    let draws = run_mcmc(&SamplerSettings::default(), &ModelConfig::preset(9)?, &data)?;

    let mut worst = (0.0, String::new());
    for s in draws.summaries() {
        if let Ok(r) = s.rhat {
            if r > worst.0 {
                worst = (r, s.name.clone());
            }
        }
        println!("{:<26} n_eff {:>6.0}  Rhat {}", s.name, s.n_eff, s.rhat.map(|r| format!("{r:.3}")).unwrap_or_else(|e| e.to_string()));
    }
    println!("largest Rhat {:.3} ({}); below 1.1: {}", worst.0, worst.1, worst.0 < 1.1);

    for (c, chain) in draws.chains.iter().enumerate() {
        let lo = chain.acceptance.iter().copied().fold(1.0, f64::min);
        let hi = chain.acceptance.iter().copied().fold(0.0, f64::max);
        println!("chain {c}: acceptance between {lo:.2} and {hi:.2}");
    }
    if let Some(out) = std::env::args().nth(1) {
        draws.write_trace_csv(File::create(&out).map_err(|e| volley::Error::io(&out, e))?)?;
        println!("trace written to {out}");
    }
    Ok(())
}
