//! Acceptance gate. Every test prints one `PASS`, `FAIL` or `BLOCKED` line
//! for its criterion to stderr and fails only on `FAIL`.
//!
//! Criteria that need the real 2017/18 results read them from
//! `VOLLEY_SUPERLEGA_CSV`, or from `data/superlega_2017_18.csv` when that
//! file exists. Without either they report `BLOCKED`.
//!
//! cargo test --release -p volley --test acceptance -- --nocapture --test-threads 1

use std::fs::{self, File};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, Discrete, DiscreteCDF, NegativeBinomial};

use volley::data::{decompose_set, parse_matches, recompose, Dataset};
use volley::evaluate::{spearman, spread};
use volley::inference::{dic, run_mcmc, sample_model, ParameterSummary, PosteriorDraws, SamplerSettings};
use volley::model::dist::{trunc_negbin_logpmf, trunc_negbin_mean, zip_logpmf, zip_zero_mass};
use volley::model::{LeagueScoring, Model, ModelConfig, ParameterState, PointModel, SetLaw};
use volley::simulate::{
    predict_remaining, reconstruct_league, replicate_season, simulate_playoffs, simulate_set, standings, BracketSpec,
    LeagueTally, SimulationSettings,
};
use volley::synth::{generate_season, likelihood_season, synthetic_teams, synthetic_truth};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Blocked,
}

fn report(criterion: u8, status: Status, detail: &str) {
    let label = match status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Blocked => "BLOCKED",
    };
    // bypasses the test harness capture so the line lands in the log
    let _ = writeln!(std::io::stderr().lock(), "criterion {criterion:>2}: {label:<7} {detail}");
    assert_ne!(status, Status::Fail, "criterion {criterion} failed: {detail}");
}

fn verdict(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn real_data_path() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os("VOLLEY_SUPERLEGA_CSV") {
        return Some(PathBuf::from(p));
    }
    let bundled = manifest_dir().join("data/superlega_2017_18.csv");
    bundled.exists().then_some(bundled)
}

fn load(path: &Path) -> Dataset {
    parse_matches(File::open(path).expect("data file opens")).expect("data file parses")
}

struct RealFit {
    data: Dataset,
    config: ModelConfig,
    draws: PosteriorDraws,
    states: Vec<ParameterState>,
}

static REAL_FIT: OnceLock<Option<RealFit>> = OnceLock::new();

fn real_fit() -> Option<&'static RealFit> {
    REAL_FIT
        .get_or_init(|| {
            let data = load(&real_data_path()?);
            let config = ModelConfig::preset(9).unwrap();
            let draws = run_mcmc(&SamplerSettings::default(), &config, &data).expect("model 9 fits");
            let states = draws.states().cloned().collect();
            Some(RealFit {
                data,
                config,
                draws,
                states,
            })
        })
        .as_ref()
}

fn blocked_without_data(criterion: u8) {
    report(
        criterion,
        Status::Blocked,
        "real 2017/18 results not available (set VOLLEY_SUPERLEGA_CSV)",
    );
}

#[test]
fn criterion_01_data_audit() {
    let Some(path) = real_data_path() else {
        return blocked_without_data(1);
    };
    let start = Instant::now();
    let s = load(&path).summary();
    let secs = start.elapsed().as_secs_f64();
    let ok = (s.matches, s.sets, s.teams, s.tie_breaks, s.deuce_sets) == (182, 680, 14, 39, 101) && secs < 1.0;
    report(1, verdict(ok), &format!("{s} in {secs:.3}s"));
}

#[test]
fn criterion_02_distribution_oracles() {
    let start = Instant::now();
    let mut worst_norm: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for r in [15u32, 25] {
        for i in 1..=99 {
            let p = i as f64 / 100.0;
            let pmf: Vec<f64> = (0..=r - 2).map(|y| trunc_negbin_logpmf(y, r, p).unwrap().exp()).collect();
            let total: f64 = pmf.iter().sum();
            let mean: f64 = pmf.iter().enumerate().map(|(y, f)| y as f64 * f).sum();
            worst_norm = worst_norm.max((total - 1.0).abs());
            worst_mean = worst_mean.max((trunc_negbin_mean(r, p) - mean).abs());

            // independent pmf: untruncated negative binomial, renormalised
            let nb = NegativeBinomial::new(r as f64, p).unwrap();
            let raw: Vec<f64> = (0..=r - 2).map(|y| nb.pmf(y as u64)).collect();
            let raw_total: f64 = raw.iter().sum();
            for (f, g) in pmf.iter().zip(&raw) {
                worst_oracle = worst_oracle.max((f - g / raw_total).abs());
            }
        }
    }
    let mut worst_zip: f64 = 0.0;
    for pi in [0.0, 0.1, 0.5, 0.87, 0.99] {
        for lambda in [0.05, 0.5, 1.0, 3.97, 12.0] {
            let direct = zip_logpmf(0, pi, lambda).exp();
            let tail: f64 = (1..200).map(|k| zip_logpmf(k, pi, lambda).exp()).sum();
            worst_zip = worst_zip
                .max((zip_zero_mass(pi, lambda) - direct).abs())
                .max((zip_zero_mass(pi, lambda) - (1.0 - tail)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst_norm < 1e-10 && worst_mean < 1e-10 && worst_oracle < 1e-10 && worst_zip < 1e-12 && secs < 1.0;
    report(
        2,
        verdict(ok),
        &format!(
            "max |sum-1| {worst_norm:.1e}, max mean error {worst_mean:.1e}, max pmf error {worst_oracle:.1e}, \
             max ZIP zero-mass error {worst_zip:.1e}, {secs:.2}s"
        ),
    );
}

#[test]
fn criterion_03_expectation_consistency() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 1_000_000usize;
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let mut law = SetLaw::fixed(
            rng.random_range(0.2..0.8),
            rng.random_range(0.5..0.75),
            rng.random_range(0.5..0.97),
            rng.random_range(0.5..6.0),
        );
        law.p_away_won = rng.random_range(0.5..0.75);
        if k == 4 {
            law.point_model = PointModel::Poisson;
            law.pi = 0.0;
        }
        let set_index = rng.random_range(1..=5u8);
        let (eh, ea) = law.expected_points(set_index);
        let (mut sh, mut sa, mut sh2, mut sa2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let s = simulate_set(&mut rng, &law, set_index);
            let (h, a) = (s.home_points() as f64, s.away_points() as f64);
            sh += h;
            sa += a;
            sh2 += h * h;
            sa2 += a * a;
        }
        let nf = n as f64;
        for (sum, sq, expected) in [(sh, sh2, eh), (sa, sa2, ea)] {
            let mean = sum / nf;
            let se = ((sq / nf - mean * mean) / nf).sqrt();
            worst = worst.max((mean - expected).abs() / se);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        3,
        verdict(worst < 3.0 && secs < 30.0),
        &format!("5 laws x 1e6 sets, largest deviation {worst:.2} SE, {secs:.1}s"),
    );
}

/// Mean and second-moment deviations, in standard errors, of `chains`
/// from a prior with the given mean and variance.
fn moment_deviation(chains: &[Vec<f64>], mean: f64, var: f64) -> (f64, f64) {
    let first = ParameterSummary::from_chains("x", chains);
    let centred: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| c.iter().map(|x| (x - mean).powi(2)).collect())
        .collect();
    let second = ParameterSummary::from_chains("x2", &centred);
    (
        (first.mean - mean).abs() / (first.sd / first.n_eff.sqrt()),
        (second.mean - var).abs() / (second.sd / second.n_eff.sqrt()),
    )
}

fn one_sided_binomial_p(covered: u64, n: u64, rate: f64) -> f64 {
    Binomial::new(rate, n).unwrap().cdf(covered)
}

#[test]
fn criterion_04_sampler_calibration() {
    let start = Instant::now();
    let teams = synthetic_teams(14).unwrap();

    // prior only, with unit normals where the defaults are nearly flat
    let mut config = ModelConfig::preset(9).unwrap();
    for key in ["mu_sd", "theta_sd", "h_set_sd", "h_point_sd"] {
        config.priors.set(key, 1.0).unwrap();
    }
    config.priors.set("eps", 3.0).unwrap();
    let model = Model::prior_only(&config, &teams).unwrap();
    let settings = SamplerSettings {
        chains: 4,
        iterations: 25_000,
        burn_in: 5_000,
        seed: 4,
        ..SamplerSettings::default()
    };
    let draws = sample_model(&settings, &model).unwrap();
    let ability_sd = config.priors.ability_sd;
    let checks = [
        ("mu", 1.0, false),
        ("H_set", 1.0, false),
        ("H_point", 1.0, false),
        ("theta", 1.0, false),
        ("m", config.priors.m_sd.powi(2), false),
        ("lambda", config.priors.lambda_log_sd.powi(2), true),
        ("alpha[Aurora Verona]", ability_sd * ability_sd, false),
    ];
    let mut prior_worst: f64 = 0.0;
    let mut prior_detail = Vec::new();
    for (name, var, log) in checks {
        let mut chains = draws.column(name).unwrap_or_else(|| panic!("column {name}"));
        let mut mean = 0.0;
        if log {
            mean = config.priors.lambda_log_mean;
            for c in chains.iter_mut() {
                c.iter_mut().for_each(|x| *x = x.ln());
            }
        }
        let (d1, d2) = moment_deviation(&chains, mean, var);
        prior_worst = prior_worst.max(d1).max(d2);
        prior_detail.push(format!("{name} {d1:.1}/{d2:.1}"));
    }

    // coverage over likelihood-law seasons at a known truth
    let config = ModelConfig::preset(9).unwrap();
    let truth = synthetic_truth(&config, &teams).unwrap();
    let targets = [("mu", truth.mu), ("H_set", truth.h_set), ("H_point", truth.h_point), ("theta", truth.theta)];
    let reps = 20u64;
    let mut covered = [0u64; 4];
    for rep in 0..reps {
        let model = Model::from_data(&config, likelihood_season(&truth, &config, &teams, 1000 + rep)).unwrap();
        let settings = SamplerSettings {
            seed: rep,
            ..SamplerSettings::default()
        };
        let summaries = sample_model(&settings, &model).unwrap().summaries();
        for (k, (name, value)) in targets.iter().enumerate() {
            let s = summaries.iter().find(|s| s.name == *name).unwrap();
            covered[k] += (s.q025 <= *value && *value <= s.q975) as u64;
        }
    }
    let p_values: Vec<f64> = covered.iter().map(|&c| one_sided_binomial_p(c, reps, 0.95)).collect();
    let coverage_ok = p_values.iter().all(|&p| p >= 0.01);
    let secs = start.elapsed().as_secs_f64();
    let coverage: Vec<String> = targets
        .iter()
        .zip(&covered)
        .zip(&p_values)
        .map(|(((name, _), c), p)| format!("{name} {c}/{reps} (p={p:.3})"))
        .collect();
    report(
        4,
        verdict(prior_worst < 3.0 && coverage_ok),
        &format!(
            "prior moments in SE (mean/second) [{}]; coverage [{}]; {secs:.0}s",
            prior_detail.join(", "),
            coverage.join(", ")
        ),
    );
}

#[test]
fn criterion_05_posterior_reproduction() {
    let Some(fit) = real_fit() else {
        return report(
            5,
            Status::Blocked,
            "real 2017/18 results not available; replaced by criterion 4 and the synthetic part of criterion 6",
        );
    };
    let reference = [
        ("mu", 0.36, 0.05),
        ("H_set", 0.16, 0.05),
        ("H_point", 0.20, 0.05),
        ("m", 2.12, 0.05),
        ("theta", 4.60, 0.5),
        ("lambda", 3.97, 0.5),
    ];
    let summaries = fit.draws.summaries();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, value, tol) in reference {
        let s = summaries.iter().find(|s| s.name == name).unwrap();
        ok &= (s.mean - value).abs() <= tol;
        detail.push(format!("{name} {:.3} (ref {value})", s.mean));
    }
    let worst_rhat = summaries.iter().filter_map(|s| s.rhat.ok()).fold(1.0, f64::max);
    ok &= summaries.iter().all(|s| s.rhat.is_ok()) && worst_rhat < 1.1;
    report(5, verdict(ok), &format!("{}; max Rhat {worst_rhat:.3}", detail.join(", ")));
}

fn dic_of(model: u8, data: &Dataset, seed: u64) -> f64 {
    let settings = SamplerSettings {
        seed,
        ..SamplerSettings::default()
    };
    let config = ModelConfig::preset(model).unwrap();
    dic(&run_mcmc(&settings, &config, data).unwrap(), data).unwrap().dic
}

#[test]
fn criterion_06_dic_ordering() {
    let start = Instant::now();
    let config = ModelConfig::preset(9).unwrap();
    let teams = synthetic_teams(14).unwrap();
    let truth = synthetic_truth(&config, &teams).unwrap();
    let reps = 20u64;
    let mut wins = 0;
    for rep in 0..reps {
        let data = generate_season(&truth, &config, &teams, 6000 + rep);
        let d: Vec<f64> = [2, 3, 9].iter().map(|&m| dic_of(m, &data, rep)).collect();
        wins += (d[2] < d[0] && d[2] < d[1]) as u32;
    }
    let synthetic_ok = wins >= 18;
    let synthetic = format!("synthetic: model 9 smallest in {wins}/{reps}");

    let Some(path) = real_data_path() else {
        let secs = start.elapsed().as_secs_f64();
        let detail = format!("{synthetic} ({secs:.0}s); real-data ordering not checked, results not available");
        return report(6, if synthetic_ok { Status::Blocked } else { Status::Fail }, &detail);
    };
    let data = load(&path);
    let d: Vec<f64> = [2, 3, 9].iter().map(|&m| dic_of(m, &data, 20180)).collect();
    let real_ok = d[1] - d[2] > 10.0 && d[0] - d[1] > 10.0;
    report(
        6,
        verdict(synthetic_ok && real_ok),
        &format!("{synthetic}; real: DIC 2 {:.1}, 3 {:.1}, 9 {:.1}", d[0], d[1], d[2]),
    );
}

/// Expected points and predicted rank by team-name fragment.
const RECONSTRUCTED: [(&str, f64, f64); 14] = [
    ("Perugia", 66.0, 1.0),
    ("Civitanova", 61.0, 2.0),
    ("Modena", 56.0, 3.0),
    ("Trentino", 52.0, 4.0),
    ("Verona", 49.0, 5.0),
    ("Milano", 45.0, 6.0),
    ("Piacenza", 42.0, 7.0),
    ("Ravenna", 40.0, 8.0),
    ("Padova", 35.0, 9.0),
    ("Monza", 28.0, 10.0),
    ("Latina", 28.0, 11.0),
    ("Sora", 17.0, 12.0),
    ("Vibo", 16.0, 13.0),
    ("Castellana", 13.0, 14.0),
];

#[test]
fn criterion_07_league_reconstruction() {
    let Some(fit) = real_fit() else {
        return blocked_without_data(7);
    };
    let dist = reconstruct_league(&fit.states, &fit.config, &fit.data, &SimulationSettings::default()).unwrap();
    let rows = standings(&dist);
    let mut ok = true;
    let (mut ours, mut theirs) = (Vec::new(), Vec::new());
    let mut worst_gap: f64 = 0.0;
    for (fragment, expected, rank) in RECONSTRUCTED {
        let id = fit.data.teams.resolve(fragment).unwrap();
        let row = rows.iter().find(|r| r.team == fit.data.teams.name(id)).unwrap();
        worst_gap = worst_gap.max((row.expected_points - expected).abs());
        ours.push(row.predicted_rank as f64);
        theirs.push(rank);
    }
    ok &= worst_gap <= 2.0;
    let rho = spearman(&ours, &theirs).unwrap();
    ok &= rho >= 0.99;
    let outside = rows
        .iter()
        .filter(|r| {
            let a = r.actual_points.unwrap() as f64;
            a < r.q025 || a > r.q975
        })
        .count();
    ok &= outside <= 1;
    report(
        7,
        verdict(ok),
        &format!("max expected-points gap {worst_gap:.2}, Spearman {rho:.3}, {outside} actual totals outside 95%"),
    );
}

#[test]
fn criterion_08_out_of_sample() {
    let Some(fit) = real_fit() else {
        return blocked_without_data(8);
    };
    let settings = SimulationSettings::default();
    let first_half = fit.data.truncated_at_round(13);
    let draws = run_mcmc(&SamplerSettings::default(), &fit.config, &first_half).unwrap();
    let states: Vec<ParameterState> = draws.states().cloned().collect();
    let p = predict_remaining(&states, &fit.config, &first_half, Some(&fit.data), &settings).unwrap();
    let (g, s) = (spread(&p.game_agreement).mean, spread(&p.set_agreement).mean);

    let text = fs::read_to_string(manifest_dir().join("data/superlega2018.json")).unwrap();
    let bracket = BracketSpec::from_json(&text).unwrap();
    let table = simulate_playoffs(&fit.states, &fit.config, &bracket, &fit.data.teams, &settings).unwrap();
    let champion = table.teams[0].reach.last().copied().unwrap();
    let last_semi = table.teams[7].reach[0];

    let ok = (g - 0.7826).abs() <= 0.06 && (s - 0.695).abs() <= 0.03 && (champion - 0.75).abs() <= 0.10 && last_semi <= 0.05;
    report(
        8,
        verdict(ok),
        &format!(
            "game agreement {g:.3}, set agreement {s:.3}, top seed champion {champion:.2}, \
             eighth seed semifinal {last_semi:.2}"
        ),
    );
}

#[test]
fn criterion_09_simulation_legality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0u64;
    let n_sets = 1_000_000u32;
    let mut law = SetLaw::fixed(0.5, 0.6, 0.8, 3.0);
    for i in 0..n_sets {
        if i % 1000 == 0 {
            law = SetLaw::fixed(
                rng.random_range(0.01..0.99),
                rng.random_range(0.3..0.95),
                rng.random_range(0.0..1.0),
                rng.random_range(0.01..10.0),
            );
            law.p_away_won = rng.random_range(0.3..0.95);
            if i % 3000 == 0 {
                law.point_model = PointModel::Poisson;
            }
        }
        let set_index = (i % 5) as u8 + 1;
        let s = simulate_set(&mut rng, &law, set_index);
        let raw = recompose(1, set_index, &s.score());
        let legal = s.is_legal()
            && decompose_set(&raw).is_ok_and(|d| d == s.score())
            && s.winner_points.max(s.loser_points) >= s.target;
        violations += !legal as u64;
    }

    let config = ModelConfig::preset(9).unwrap();
    let teams = synthetic_teams(14).unwrap();
    let truth = synthetic_truth(&config, &teams).unwrap();
    let schedule = generate_season(&truth, &config, &teams, 0).schedule;
    let mut broken = 0;
    let seasons = 200;
    for _ in 0..seasons {
        let season = replicate_season(&mut rng, &truth, &config, &schedule, &[]);
        let tally = LeagueTally::from_matches(teams.len(), &season, LeagueScoring::SuperLega);
        let sets: u32 = season.iter().map(|m| m.sets.len() as u32).sum();
        let rallies: u32 = season
            .iter()
            .flat_map(|m| &m.sets)
            .map(|s| s.score.home_points() + s.score.away_points())
            .sum();
        let conserved = tally.is_conserved()
            && tally.sets_won.iter().sum::<u32>() == sets
            && tally.points_won.iter().sum::<u32>() == rallies
            && tally.points.iter().sum::<u32>() == 3 * season.len() as u32;
        broken += !conserved as u32;
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        9,
        verdict(violations == 0 && broken == 0 && secs < 60.0),
        &format!("{violations} illegal sets in 1e6, {broken} of {seasons} seasons break conservation, {secs:.1}s"),
    );
}

fn run_cli(args: &[&str], out: &Path) {
    let o = Command::new(env!("CARGO_BIN_EXE_volley"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SOURCE_DATE_EPOCH", "1514764800")
        .output()
        .unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_10_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let data = manifest_dir().join("data/synthetic_season.csv");
    let bracket = manifest_dir().join("data/synthetic_bracket.json");
    let data = data.to_str().unwrap();
    let bracket = bracket.to_str().unwrap();
    let fit_dir = tmp.path().join("fit-0");
    let draws = fit_dir.to_str().unwrap();
    let short = ["--iterations", "300", "--burn-in", "150"];
    let with = |head: &[&str], tail: &[&str]| -> Vec<String> { head.iter().chain(tail).map(|s| s.to_string()).collect() };
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("ingest", with(&["ingest", "--data", data, "--emit-sets"], &[])),
        ("fit", with(&["fit", "--data", data], &short)),
        ("dic", with(&["dic", "--data", data, "--models", "2,9"], &short)),
        ("simulate", with(&["simulate", "--data", data, "--draws", draws, "--replications", "200"], &[])),
        ("predict", with(&["predict", "--data", data, "--split-round", "13", "--replications", "200"], &short)),
        (
            "playoff",
            with(&["playoff", "--data", data, "--draws", draws, "--bracket", bracket, "--replications", "200"], &[]),
        ),
        ("ppc", with(&["ppc", "--data", data, "--draws", draws, "--replications", "50"], &[])),
        ("sweep", with(&["sweep", "--data", data, "--grid", "mu_sd=1,10"], &short)),
    ];
    let mut differing = Vec::new();
    for (name, args) in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = tmp.path().join(format!("{name}-0"));
        let b = tmp.path().join(format!("{name}-1"));
        run_cli(&args, &a);
        run_cli(&args, &b);
        if files(&a) != files(&b) {
            differing.push(*name);
        }
    }
    let detail = if differing.is_empty() {
        format!("{} commands run twice, all outputs byte-identical", commands.len())
    } else {
        format!("outputs differ for {}", differing.join(", "))
    };
    report(10, verdict(differing.is_empty()), &detail);
}
