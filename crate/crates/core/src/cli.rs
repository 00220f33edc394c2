//! Command-line front end.
//!
//! Every command writes its tables into one output directory, by default
//! `runs/<command>-<hash>` where the hash covers the command, the data, the
//! model configuration and the settings. `manifest.json` in that directory
//! lists each file with its SHA-256. Identical inputs give identical bytes;
//! the manifest's `created` field reads `SOURCE_DATE_EPOCH` when set.

use std::ffi::OsString;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::data::{parse_matches, Dataset};
use crate::error::{Error, Result};
use crate::evaluate::{point_differences, ppc_point_diff, replicate_point_differences, spread};
use crate::inference::{
    dic, read_states_jsonl, run_mcmc, sensitivity_sweep, write_summary_csv, write_sweep_csv, PosteriorDraws,
    SamplerSettings, SweepAxis,
};
use crate::model::{LeagueScoring, Model, ModelConfig, ParameterState};
use crate::simulate::{
    predict_remaining, reconstruct_league, simulate_playoffs, BracketSpec, LeagueDistribution, SimulationSettings,
};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SAMPLER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "volley", version, about = "Fit, compare and simulate Bayesian volleyball models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and decompose a season file, print its headline counts.
    Ingest(IngestArgs),
    /// Sample the posterior of one model.
    Fit(FitArgs),
    /// Fit several models and rank them by DIC.
    Dic(DicArgs),
    /// Reconstruct the league from posterior draws.
    Simulate(SimulateArgs),
    /// Fit on the rounds up to a split and predict the rest of the season.
    Predict(PredictArgs),
    /// Progression probabilities for a playoff bracket.
    Playoff(PlayoffArgs),
    /// Posterior predictive check on set point differences.
    Ppc(PpcArgs),
    /// Refit over a grid of prior hyperparameters.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory; defaults to runs/<command>-<hash>.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Numbered model variant, 1-15.
    #[arg(long, default_value_t = 9, conflicts_with = "config")]
    pub model: u8,
    /// `key = value` configuration file; overrides --model.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 3)]
    pub chains: usize,
    /// Iterations per chain, burn-in included.
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Seed for every stochastic step of the command.
    #[arg(long, default_value_t = 20180)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Scoring {
    /// 3-0 and 3-1 give 3/0, 3-2 gives 2/1.
    Superlega,
    /// Winner-only rule 3 or 1, kept for comparison.
    Printed,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub replications: u64,
    #[arg(long, value_enum, default_value_t = Scoring::Superlega)]
    pub scoring: Scoring,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Also write one JSON record per decomposed set.
    #[arg(long)]
    pub emit_sets: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct DicArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Model numbers, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3,9")]
    pub models: Vec<u8>,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory of a `fit` run.
    #[arg(long)]
    pub draws: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 20180)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Last round used for fitting.
    #[arg(long)]
    pub split_round: u32,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PlayoffArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub draws: PathBuf,
    /// Bracket JSON: seeds, optional wins_needed, home_pattern, played.
    #[arg(long)]
    pub bracket: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 20180)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PpcArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub draws: PathBuf,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub replications: u64,
    #[arg(long, default_value_t = 20180)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// `key=v1,v2,...`; repeat for a cartesian grid.
    #[arg(long = "grid", required = true)]
    pub grid: Vec<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(dir) => {
            println!("outputs in {}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_SAMPLER
            }
        }
    }
}

pub fn execute(command: Command) -> Result<PathBuf> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Fit(a) => fit(a),
        Command::Dic(a) => dic_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::Predict(a) => predict(a),
        Command::Playoff(a) => playoff(a),
        Command::Ppc(a) => ppc(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Input {
    dataset: Dataset,
    hash: String,
}

fn read_data(path: &Path) -> Result<Input> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let dataset = parse_matches(bytes.as_slice())?;
    Ok(Input {
        dataset,
        hash: sha256_hex(&bytes),
    })
}

fn read_config(args: &ModelArgs) -> Result<ModelConfig> {
    let cfg = match &args.config {
        Some(p) => ModelConfig::parse(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => ModelConfig::preset(args.model)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn sampler_settings(a: &SamplerArgs) -> Result<SamplerSettings> {
    let s = SamplerSettings {
        chains: a.chains,
        iterations: a.iterations,
        burn_in: a.burn_in,
        thin: a.thin,
        seed: a.seed,
        ..SamplerSettings::default()
    };
    s.validate()?;
    Ok(s)
}

fn sim_settings(a: &SimArgs, seed: u64) -> SimulationSettings {
    SimulationSettings {
        replications: a.replications as usize,
        seed,
        scoring: match a.scoring {
            Scoring::Superlega => LeagueScoring::SuperLega,
            Scoring::Printed => LeagueScoring::Printed,
        },
    }
}

#[derive(Serialize)]
struct OutputFile {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    version: &'static str,
    config_hash: Option<String>,
    data_hash: String,
    seed: Option<u64>,
    settings: serde_json::Value,
    /// Unix seconds.
    created: u64,
    outputs: Vec<OutputFile>,
}

/// Collects a command's files in memory, then writes them with a manifest.
struct Run {
    command: &'static str,
    config: Option<String>,
    data_hash: String,
    seed: Option<u64>,
    settings: serde_json::Value,
    files: Vec<(String, Vec<u8>)>,
}

impl Run {
    fn new(command: &'static str, data_hash: &str, config: Option<&ModelConfig>, seed: Option<u64>, settings: serde_json::Value) -> Run {
        Run {
            command,
            config: config.map(ModelConfig::to_config_string),
            data_hash: data_hash.to_string(),
            seed,
            settings,
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn default_dir(&self) -> PathBuf {
        let key = json!({
            "command": self.command,
            "data": self.data_hash,
            "config": self.config,
            "settings": self.settings,
        });
        let h = sha256_hex(key.to_string().as_bytes());
        PathBuf::from("runs").join(format!("{}-{}", self.command, &h[..12]))
    }

    fn finish(mut self, out: &OutArgs) -> Result<PathBuf> {
        let dir = out.out.clone().unwrap_or_else(|| self.default_dir());
        if let Some(cfg) = self.config.clone() {
            self.files.push(("model.cfg".into(), cfg.into_bytes()));
        }
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut outputs = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            outputs.push(OutputFile {
                path: name.clone(),
                sha256: sha256_hex(bytes),
            });
        }
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            config_hash: self.config.as_deref().map(|c| sha256_hex(c.as_bytes())),
            data_hash: self.data_hash,
            seed: self.seed,
            settings: self.settings,
            created: created_time(),
            outputs,
        };
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(dir)
    }
}

fn created_time() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

fn ingest(a: IngestArgs) -> Result<PathBuf> {
    let input = read_data(&a.data)?;
    let d = &input.dataset;
    if d.matches.is_empty() {
        return Err(Error::NoRows);
    }
    let summary = d.summary();
    println!("{summary}");
    let mut run = Run::new("ingest", &input.hash, None, None, json!({ "emit_sets": a.emit_sets }));
    run.add("summary.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["teams", "matches", "sets", "tie_breaks", "deuce_sets"])?;
        w.serialize((summary.teams, summary.matches, summary.sets, summary.tie_breaks, summary.deuce_sets))?;
        w.flush().map_err(|e| Error::io("summary.csv", e))
    })?;
    run.add("teams.csv", |buf| d.teams.write_csv(buf))?;
    if a.emit_sets {
        run.add("sets.jsonl", |buf| d.write_sets_jsonl(buf))?;
    }
    run.finish(&a.out)
}

fn add_fit_outputs(run: &mut Run, draws: &PosteriorDraws, dataset: &Dataset) -> Result<()> {
    let summaries = draws.summaries();
    run.add("diagnostics.csv", |buf| write_summary_csv(&summaries, buf))?;
    run.add("draws.csv", |buf| draws.write_draws_csv(buf))?;
    run.add("trace.csv", |buf| draws.write_trace_csv(buf))?;
    run.add("sampler.csv", |buf| draws.write_sampler_csv(buf))?;
    run.add("states.jsonl", |buf| draws.write_states_jsonl(buf))?;
    run.add("teams.csv", |buf| dataset.teams.write_csv(buf))?;
    run.add("abilities.csv", |buf| write_abilities_csv(draws, dataset, buf))
}

/// Posterior means of the centred abilities and `alpha'` per team, at the
/// last played round.
fn write_abilities_csv(draws: &PosteriorDraws, dataset: &Dataset, buf: &mut Vec<u8>) -> Result<()> {
    let round = dataset.matches.iter().map(|m| m.round).max().unwrap_or(0);
    let n = dataset.teams.len();
    let mut sums = vec![[0.0; 3]; n];
    let mut count = 0.0;
    for s in draws.states() {
        let d = s.derived(&draws.config, round);
        for t in 0..n {
            sums[t][0] += d.alpha[t];
            sums[t][1] += d.beta[t];
            sums[t][2] += d.alpha_prime[t];
        }
        count += 1.0;
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(["team", "alpha", "beta", "alpha_prime"])?;
    for (t, name) in dataset.teams.names().iter().enumerate() {
        let [a, b, ap] = sums[t].map(|v| v / count);
        w.write_record([name.clone(), format!("{a:.4}"), format!("{b:.4}"), format!("{ap:.4}")])?;
    }
    w.flush().map_err(|e| Error::io("abilities.csv", e))
}

fn fit(a: FitArgs) -> Result<PathBuf> {
    let input = read_data(&a.data)?;
    let config = read_config(&a.model)?;
    let settings = sampler_settings(&a.sampler)?;
    let draws = run_mcmc(&settings, &config, &input.dataset)?;
    let mut run = Run::new("fit", &input.hash, Some(&config), Some(settings.seed), json!(settings));
    add_fit_outputs(&mut run, &draws, &input.dataset)?;
    for s in draws.summaries().iter().filter(|s| !s.name.contains('[')) {
        let rhat = s.rhat.map(|r| format!("{r:.3}")).unwrap_or_else(|_| "NA".into());
        println!("{:<12} mean {:>8.3}  95% [{:>8.3}, {:>8.3}]  Rhat {rhat}", s.name, s.mean, s.q025, s.q975);
    }
    run.finish(&a.out)
}

fn dic_cmd(a: DicArgs) -> Result<PathBuf> {
    if a.models.is_empty() {
        return Err(Error::Config("no models to compare".into()));
    }
    let input = read_data(&a.data)?;
    let settings = sampler_settings(&a.sampler)?;
    struct Row {
        model: u8,
        parameters: usize,
        outcome: std::result::Result<crate::inference::Dic, String>,
    }
    let mut rows = Vec::new();
    for &m in &a.models {
        let config = ModelConfig::preset(m)?;
        let parameters = Model::new(&config, &input.dataset).map(|x| x.layout.dim()).unwrap_or(0);
        let outcome = run_mcmc(&settings, &config, &input.dataset)
            .and_then(|d| dic(&d, &input.dataset))
            .map_err(|e| e.to_string());
        rows.push(Row {
            model: m,
            parameters,
            outcome,
        });
    }
    rows.sort_by(|x, y| match (&x.outcome, &y.outcome) {
        (Ok(a), Ok(b)) => a.dic.total_cmp(&b.dic),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        _ => x.model.cmp(&y.model),
    });
    let mut run = Run::new(
        "dic",
        &input.hash,
        None,
        Some(settings.seed),
        json!({ "models": a.models, "sampler": settings }),
    );
    run.add("dic.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["model", "dic", "p_d", "d_bar", "d_hat", "plug_in", "parameters", "status"])?;
        for r in &rows {
            match &r.outcome {
                Ok(d) => {
                    println!("model {:>2}  DIC {:>9.1}  pD {:>6.1}", r.model, d.dic, d.p_d);
                    w.write_record([
                        r.model.to_string(),
                        format!("{:.2}", d.dic),
                        format!("{:.2}", d.p_d),
                        format!("{:.2}", d.d_bar),
                        format!("{:.2}", d.d_hat),
                        format!("{:?}", d.plug_in).to_lowercase(),
                        r.parameters.to_string(),
                        "ok".into(),
                    ])?;
                }
                Err(e) => {
                    println!("model {:>2}  failed: {e}", r.model);
                    let na = || "NA".to_string();
                    w.write_record([r.model.to_string(), na(), na(), na(), na(), na(), r.parameters.to_string(), e.clone()])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("dic.csv", e))
    })?;
    run.finish(&a.out)
}

/// Draws written by `fit`, checked against the teams of `dataset`.
pub fn load_draws(dir: &Path, dataset: &Dataset) -> Result<(ModelConfig, Vec<ParameterState>)> {
    let cfg_path = dir.join("model.cfg");
    let config = ModelConfig::parse(&fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?)?;
    let teams_path = dir.join("teams.csv");
    let mut reader = csv::Reader::from_path(&teams_path)?;
    let names: Vec<String> = reader
        .records()
        .map(|r| r.map(|r| r.get(1).unwrap_or_default().to_string()))
        .collect::<std::result::Result<_, _>>()?;
    if names != dataset.teams.names() {
        return Err(Error::Data(format!(
            "{} lists different teams from the data file",
            teams_path.display()
        )));
    }
    let states_path = dir.join("states.jsonl");
    let file = fs::File::open(&states_path).map_err(|e| Error::io(&states_path, e))?;
    let states = read_states_jsonl(BufReader::new(file))?.into_iter().map(|r| r.state).collect();
    Ok((config, states))
}

fn add_league_outputs(run: &mut Run, league: &LeagueDistribution) -> Result<()> {
    run.add("league.csv", |buf| league.write_table_csv(buf))?;
    run.add("ranks.csv", |buf| league.write_rank_matrix_csv(buf))?;
    run.add("tallies.csv", |buf| league.write_tallies_csv(buf))
}

fn print_league(league: &LeagueDistribution) {
    for s in league.standings() {
        let actual = s.actual_points.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{:>2} {:<24} {:>6.1}  [{:>4.0}, {:>4.0}]  actual {actual}",
            s.predicted_rank, s.team, s.expected_points, s.q025, s.q975
        );
    }
}

fn simulate(a: SimulateArgs) -> Result<PathBuf> {
    let input = read_data(&a.data)?;
    let (config, states) = load_draws(&a.draws, &input.dataset)?;
    let settings = sim_settings(&a.sim, a.seed);
    let league = reconstruct_league(&states, &config, &input.dataset, &settings)?;
    print_league(&league);
    let mut run = Run::new("simulate", &input.hash, Some(&config), Some(a.seed), json!(settings));
    add_league_outputs(&mut run, &league)?;
    run.finish(&a.out)
}

fn write_agreement(run: &mut Run, games: &[f64], sets: &[f64], compared: (usize, usize)) -> Result<()> {
    let (g, s) = (spread(games), spread(sets));
    println!("game agreement {:.4} (sd {:.4}), set agreement {:.4} (sd {:.4})", g.mean, g.sd, s.mean, s.sd);
    run.add("agreement.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["level", "mean", "sd", "compared"])?;
        w.write_record(["game".to_string(), format!("{:.6}", g.mean), format!("{:.6}", g.sd), compared.0.to_string()])?;
        w.write_record(["set".to_string(), format!("{:.6}", s.mean), format!("{:.6}", s.sd), compared.1.to_string()])?;
        w.flush().map_err(|e| Error::io("agreement.csv", e))
    })?;
    run.add("agreement_draws.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["replication", "game", "set"])?;
        for (j, (x, y)) in games.iter().zip(sets).enumerate() {
            w.write_record([j.to_string(), format!("{x:.6}"), format!("{y:.6}")])?;
        }
        w.flush().map_err(|e| Error::io("agreement_draws.csv", e))
    })
}

fn predict(a: PredictArgs) -> Result<PathBuf> {
    let input = read_data(&a.data)?;
    let config = read_config(&a.model)?;
    let settings = sampler_settings(&a.sampler)?;
    let observed = input.dataset.truncated_at_round(a.split_round);
    if observed.matches.is_empty() {
        return Err(Error::Data(format!("no games played by round {}", a.split_round)));
    }
    let draws = run_mcmc(&settings, &config, &observed)?;
    let states: Vec<ParameterState> = draws.states().cloned().collect();
    let sim = sim_settings(&a.sim, a.sampler.seed);
    let p = predict_remaining(&states, &config, &observed, Some(&input.dataset), &sim)?;
    print_league(&p.league);
    let mut run = Run::new(
        "predict",
        &input.hash,
        Some(&config),
        Some(settings.seed),
        json!({ "split_round": a.split_round, "sampler": settings, "simulation": sim }),
    );
    add_league_outputs(&mut run, &p.league)?;
    write_agreement(&mut run, &p.game_agreement, &p.set_agreement, (p.games_compared, p.sets_compared))?;
    let summaries = draws.summaries();
    run.add("diagnostics.csv", |buf| write_summary_csv(&summaries, buf))?;
    run.finish(&a.out)
}

fn playoff(a: PlayoffArgs) -> Result<PathBuf> {
    let input = read_data(&a.data)?;
    let (config, states) = load_draws(&a.draws, &input.dataset)?;
    let text = fs::read_to_string(&a.bracket).map_err(|e| Error::io(&a.bracket, e))?;
    let bracket = BracketSpec::from_json(&text)?;
    let settings = sim_settings(&a.sim, a.seed);
    let table = simulate_playoffs(&states, &config, &bracket, &input.dataset.teams, &settings)?;
    println!("{:<4} {:<24} {}", "seed", "team", table.stages.join("  "));
    for t in &table.teams {
        let reach: Vec<String> = t.reach.iter().map(|p| format!("{p:.3}")).collect();
        println!("{:<4} {:<24} {}", t.seed, t.team, reach.join("  "));
    }
    let mut run = Run::new(
        "playoff",
        &input.hash,
        Some(&config),
        Some(a.seed),
        json!({ "bracket": sha256_hex(text.as_bytes()), "simulation": settings }),
    );
    run.add("progression.csv", |buf| table.write_csv(buf))?;
    run.add("series.csv", |buf| table.write_series_csv(buf))?;
    if !table.game_agreement.is_empty() {
        let played = bracket.played.len();
        let sets = bracket.played.iter().map(|m| m.sets.len()).sum();
        write_agreement(&mut run, &table.game_agreement, &table.set_agreement, (played, sets))?;
    }
    run.finish(&a.out)
}

fn ppc(a: PpcArgs) -> Result<PathBuf> {
    let input = read_data(&a.data)?;
    let (config, states) = load_draws(&a.draws, &input.dataset)?;
    let settings = SimulationSettings {
        replications: a.replications as usize,
        seed: a.seed,
        ..SimulationSettings::default()
    };
    let replicated = replicate_point_differences(&states, &config, &input.dataset, &settings)?;
    let check = ppc_point_diff(&point_differences(&input.dataset.matches), &replicated)?;
    println!("total variation distance {:.4}", check.tv_distance);
    let mut run = Run::new("ppc", &input.hash, Some(&config), Some(a.seed), json!(settings));
    run.add("ppc_summary.csv", |buf| check.write_summary_csv(buf))?;
    run.add("ppc_replicated.csv", |buf| check.write_replicated_csv(buf))?;
    run.add("ppc_stats.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["replications", "observed_sets", "tv_distance"])?;
        w.write_record([
            replicated.len().to_string(),
            check.observed.len().to_string(),
            format!("{:.6}", check.tv_distance),
        ])?;
        w.flush().map_err(|e| Error::io("ppc_stats.csv", e))
    })?;
    run.finish(&a.out)
}

fn sweep(a: SweepArgs) -> Result<PathBuf> {
    let input = read_data(&a.data)?;
    let config = read_config(&a.model)?;
    let settings = sampler_settings(&a.sampler)?;
    let axes = a.grid.iter().map(|g| SweepAxis::parse(g)).collect::<Result<Vec<_>>>()?;
    let points = sensitivity_sweep(&axes, &settings, &config, &input.dataset)?;
    for p in &points {
        if let Err(e) = &p.outcome {
            println!("{:?} failed: {e}", p.values);
        }
    }
    let mut run = Run::new(
        "sweep",
        &input.hash,
        Some(&config),
        Some(settings.seed),
        json!({ "grid": a.grid, "sampler": settings }),
    );
    run.add("sweep.csv", |buf| write_sweep_csv(&points, buf))?;
    run.finish(&a.out)
}
