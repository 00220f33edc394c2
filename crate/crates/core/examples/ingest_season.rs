//! Reads a season file, validates every set score and shows how scores
//! decompose into winner, baseline and extra points.
//!
//! cargo run --example ingest_season -- [season.csv]

use std::fs::File;

use volley::data::parse_matches;

fn main() -> volley::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_season.csv").into());
    let file = File::open(&path).map_err(|e| volley::Error::io(&path, e))?;
    let data = parse_matches(file)?;
    println!("{}", data.summary());

    println!("\nteam ids follow first appearance:");
    for id in data.teams.ids() {
        println!("  {id} {}", data.teams.name(id));
    }

    println!("\nfirst match:");
    let m = &data.matches[0];
    for s in &m.sets {
        let sc = &s.score;
        println!(
            "  set {} {:>2}-{:<2}  W={} r={} Y={} O={}",
            s.set_index,
            sc.home_points(),
            sc.away_points(),
            sc.home_won as u8,
            sc.target,
            sc.baseline,
            sc.extra
        );
    }
    Ok(())
}
