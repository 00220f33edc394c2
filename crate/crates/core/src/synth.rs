//! Synthetic seasons from a known parameter state, for calibration and
//! for runs without a real results file.

use rand::Rng;

use crate::data::{set_target, Dataset, Schedule, TeamRegistry};
use crate::error::{Error, Result};
use crate::inference::chain_rng;
use crate::model::dist::{sample_poisson, sample_zip, TruncNegBin};
use crate::model::layout::{CompiledSet, ModelData};
use crate::model::{AbilityMode, Dynamics, ModelConfig, ParameterState, PointModel, SetLaw};
use crate::simulate::{draw_game_effect, replicate_season};

/// Fictional clubs; the first two carry the extra set abilities of the
/// default model.
pub const CLUBS: [&str; 14] = [
    "Aurora Verona",
    "Brenta Padova",
    "Colli Trento",
    "Dolomiti Belluno",
    "Etna Catania",
    "Faro Genova",
    "Garda Brescia",
    "Laguna Venezia",
    "Maremma Grosseto",
    "Nebrodi Messina",
    "Orobie Bergamo",
    "Po Piacenza",
    "Sila Cosenza",
    "Tevere Roma",
];

pub fn synthetic_teams(n: usize) -> Result<TeamRegistry> {
    if n > CLUBS.len() {
        return TeamRegistry::from_names((1..=n).map(|i| format!("Club {i:02}")));
    }
    TeamRegistry::from_names(CLUBS[..n].iter().copied())
}

/// Ground truth used by the synthetic season: home effects, point level,
/// deuce parameters and the connection `theta` near the published fit,
/// point abilities evenly spread over `[-0.3, 0.3]`, and set abilities of
/// `+0.4` / `-0.4` for the first and second club when the model has a
/// two-team subset.
pub fn synthetic_truth(config: &ModelConfig, teams: &TeamRegistry) -> Result<ParameterState> {
    if config.dynamics != Dynamics::None {
        return Err(Error::Config("synthetic truth is static only".into()));
    }
    let n = teams.len();
    let mut s = ParameterState::initial(config, n, &[], &[]);
    s.mu = 0.36;
    s.h_set = 0.16;
    s.h_point = 0.20;
    if config.ability_mode.v2() {
        s.theta = 4.6;
    }
    if config.point_model == PointModel::ZipTruncNegBin {
        s.m = 2.12;
    }
    s.lambda = 3.97;
    s.sigma2_eps = 0.01;
    let spread = |t: usize| if n > 1 { -0.3 + 0.6 * t as f64 / (n - 1) as f64 } else { 0.0 };
    // strongest first
    s.beta_star[0] = (0..n).map(|t| -spread(t)).collect();
    if let Some(def) = s.beta_def_star.first_mut() {
        for v in def.iter_mut() {
            *v = 0.0;
        }
    }
    if let Some(alpha) = s.alpha_star.first_mut() {
        if config.ability_mode == AbilityMode::Separate {
            // set strength follows point strength
            for (a, b) in alpha.iter_mut().zip(&s.beta_star[0]) {
                *a = 4.6 * b;
            }
        } else if config.extra_set_ability_teams.is_empty() {
            for (t, a) in alpha.iter_mut().enumerate() {
                *a = if t % 2 == 0 { 0.2 } else { -0.2 };
            }
        } else {
            let sign = [0.4, -0.4];
            for (k, pattern) in config.extra_set_ability_teams.iter().enumerate() {
                let id = teams.resolve(pattern)?;
                alpha[id.0] = sign[k % 2];
            }
        }
    }
    Ok(s)
}

/// A double round robin with every game played at `truth`.
pub fn generate_season(
    truth: &ParameterState,
    config: &ModelConfig,
    teams: &TeamRegistry,
    seed: u64,
) -> Dataset {
    let mut schedule = Schedule::double_round_robin(teams.len());
    for g in schedule.games.iter_mut() {
        g.played = true;
    }
    let mut rng = chain_rng(seed, 0);
    let matches = replicate_season(&mut rng, truth, config, &schedule, &[]);
    Dataset {
        teams: teams.clone(),
        matches,
        schedule,
    }
}

/// A double round robin drawn from the likelihood itself: winner, baseline
/// and extra points independent given the parameters. Unlike
/// [`generate_season`] a set may carry extra points with a baseline below
/// `r - 2`, so the result exists only in compiled form. This is the law the
/// posterior is exact for, which makes it the right input for calibration.
pub fn likelihood_season(
    truth: &ParameterState,
    config: &ModelConfig,
    teams: &TeamRegistry,
    seed: u64,
) -> ModelData {
    let schedule = Schedule::double_round_robin(teams.len());
    let mut rounds: Vec<u32> = schedule.games.iter().map(|g| g.round).collect();
    rounds.sort_unstable();
    rounds.dedup();
    let mut rng = chain_rng(seed, 0);
    let mut sets = Vec::new();
    for (g, game) in schedule.games.iter().enumerate() {
        let period = rounds.binary_search(&game.round).expect("round listed");
        let eps = draw_game_effect(&mut rng, truth, config);
        let law = SetLaw::for_match(truth, config, game.home, game.away, game.round, eps);
        let (mut h, mut a) = (0, 0);
        let mut index = 1u8;
        while h < 3 && a < 3 {
            let r = set_target(index);
            let home_won = rng.random::<f64>() < law.omega;
            let p = if home_won { law.p_home_won } else { law.p_away_won };
            let y = match law.point_model {
                PointModel::Poisson => sample_poisson(&mut rng, r as f64 * (1.0 - p) / p),
                _ => TruncNegBin::for_target(r).sample(&mut rng, 1.0 - p),
            };
            let o = sample_zip(&mut rng, law.pi, law.lambda);
            sets.push(CompiledSet::new(game.home.0, game.away.0, period, g, home_won, r, y, o));
            if home_won {
                h += 1;
            } else {
                a += 1;
            }
            index += 1;
        }
    }
    ModelData {
        sets,
        n_teams: teams.len(),
        rounds,
        games: schedule.games.iter().map(|g| g.game_id).collect(),
        team_names: teams.names().to_vec(),
    }
}

/// Truth and season for the default model with the 14 fictional clubs.
pub fn default_season(seed: u64) -> (ModelConfig, ParameterState, Dataset) {
    let config = ModelConfig::preset(9).expect("model 9 exists");
    let teams = synthetic_teams(14).expect("fixed names are distinct");
    let truth = synthetic_truth(&config, &teams).expect("clubs cover the subset");
    let data = generate_season(&truth, &config, &teams, seed);
    (config, truth, data)
}
