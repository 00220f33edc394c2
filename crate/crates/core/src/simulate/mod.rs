//! Posterior predictive simulation of sets, matches, seasons and playoffs.

mod league;
mod playoff;

pub use league::{
    predict_remaining, reconstruct_league, replicate_season, standings, LeagueDistribution,
    LeagueTally, Prediction, SimulationSettings, TeamStanding,
};
pub use playoff::{simulate_playoffs, BracketSpec, PlayoffTable, SeriesOdds, TeamProgression};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::data::{set_target, MatchObservation, SetObservation, SetScore, TeamId};
use crate::model::dist::{sample_poisson, sample_zip, TruncNegBin};
use crate::model::{ModelConfig, ParameterState, PointModel, SetLaw};

/// One simulated set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimulatedSet {
    pub home_won: bool,
    pub winner_points: u32,
    pub loser_points: u32,
    /// Extra points `O`.
    pub extra: u32,
    /// Target `r`.
    pub target: u32,
}

impl SimulatedSet {
    pub fn home_points(&self) -> u32 {
        if self.home_won {
            self.winner_points
        } else {
            self.loser_points
        }
    }

    pub fn away_points(&self) -> u32 {
        if self.home_won {
            self.loser_points
        } else {
            self.winner_points
        }
    }

    /// Margin of at least two; a deuce ends `r + O` to `r - 2 + O`.
    pub fn is_legal(&self) -> bool {
        let r = self.target;
        let margin_ok = self.winner_points >= self.loser_points + 2;
        if self.extra == 0 {
            margin_ok && self.winner_points == r
        } else {
            self.winner_points == r + self.extra && self.loser_points + 2 == self.winner_points
        }
    }

    pub fn score(&self) -> SetScore {
        SetScore {
            home_won: self.home_won,
            target: self.target,
            baseline: self.loser_points - self.extra,
            extra: self.extra,
        }
    }
}

/// Draws one set: the winner, then the extra points, then the loser's
/// baseline. With extra points the loser's baseline is forced to `r - 2`,
/// which keeps every simulated score legal.
pub fn simulate_set<R: Rng + ?Sized>(rng: &mut R, law: &SetLaw, set_index: u8) -> SimulatedSet {
    let r = set_target(set_index);
    let home_won = rng.random::<f64>() < law.omega;
    let p = if home_won { law.p_home_won } else { law.p_away_won };
    let extra = sample_zip(rng, law.pi, law.lambda);
    let baseline = match law.point_model {
        PointModel::Poisson => sample_poisson(rng, r as f64 * (1.0 - p) / p).min(r - 2),
        _ => TruncNegBin::for_target(r).sample(rng, 1.0 - p),
    };
    let loser_points = if extra > 0 { r - 2 + extra } else { baseline };
    SimulatedSet {
        home_won,
        winner_points: r + extra,
        loser_points,
        extra,
        target: r,
    }
}

/// Sets until one side has three, all drawn from `law`.
pub fn simulate_match_with<R: Rng + ?Sized>(
    rng: &mut R,
    law: &SetLaw,
    game_id: u32,
    round: u32,
    home: TeamId,
    away: TeamId,
) -> MatchObservation {
    let mut sets = Vec::with_capacity(5);
    let (mut h, mut a) = (0, 0);
    while h < 3 && a < 3 {
        let set_index = sets.len() as u8 + 1;
        let s = simulate_set(rng, law, set_index);
        if s.home_won {
            h += 1;
        } else {
            a += 1;
        }
        sets.push(SetObservation {
            game_id,
            set_index,
            home,
            away,
            score: s.score(),
        });
    }
    MatchObservation {
        game_id,
        round,
        home,
        away,
        sets,
    }
}

/// Game random effect for a new match; zero unless the model has one.
pub fn draw_game_effect<R: Rng + ?Sized>(rng: &mut R, state: &ParameterState, config: &ModelConfig) -> f64 {
    if !config.random_effects {
        return 0.0;
    }
    Normal::new(0.0, state.sigma2_eps.sqrt())
        .map(|n| n.sample(rng))
        .unwrap_or(0.0)
}

/// One match from the posterior predictive at `state`.
pub fn simulate_match<R: Rng + ?Sized>(
    rng: &mut R,
    state: &ParameterState,
    config: &ModelConfig,
    game_id: u32,
    round: u32,
    home: TeamId,
    away: TeamId,
) -> MatchObservation {
    let eps = draw_game_effect(rng, state, config);
    let law = SetLaw::for_match(state, config, home, away, round, eps);
    simulate_match_with(rng, &law, game_id, round, home, away)
}

/// Evenly spaced draw index for replication `j` of `n`.
pub fn draw_for(j: usize, n: usize, n_draws: usize) -> usize {
    if n <= n_draws {
        j * n_draws / n
    } else {
        j % n_draws
    }
}
