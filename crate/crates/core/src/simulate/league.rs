//! League reconstruction and mid-season prediction.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{draw_for, simulate_match};
use crate::data::{Dataset, MatchObservation, Schedule};
use crate::error::{Error, Result};
use crate::inference::{chain_rng, quantile};
use crate::model::{set_win_prob, LeagueScoring, ModelConfig, ParameterState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub replications: usize,
    pub seed: u64,
    pub scoring: LeagueScoring,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            replications: 1000,
            seed: 20180,
            scoring: LeagueScoring::SuperLega,
        }
    }
}

impl SimulationSettings {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("at least one replication is needed".into()));
        }
        Ok(())
    }
}

/// League points, sets and rally points per team.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeagueTally {
    pub points: Vec<u32>,
    pub sets_won: Vec<u32>,
    pub sets_lost: Vec<u32>,
    pub points_won: Vec<u32>,
    pub points_lost: Vec<u32>,
}

impl LeagueTally {
    pub fn new(n_teams: usize) -> LeagueTally {
        LeagueTally {
            points: vec![0; n_teams],
            sets_won: vec![0; n_teams],
            sets_lost: vec![0; n_teams],
            points_won: vec![0; n_teams],
            points_lost: vec![0; n_teams],
        }
    }

    pub fn from_matches<'a>(
        n_teams: usize,
        matches: impl IntoIterator<Item = &'a MatchObservation>,
        scoring: LeagueScoring,
    ) -> LeagueTally {
        let mut t = LeagueTally::new(n_teams);
        for m in matches {
            t.record(m, scoring);
        }
        t
    }

    pub fn record(&mut self, m: &MatchObservation, scoring: LeagueScoring) {
        let (h, a) = (m.home.0, m.away.0);
        let (sh, sa) = m.sets_won();
        let (ph, pa) = m.points();
        self.points[h] += scoring.points(sh, sa);
        self.points[a] += scoring.points(sa, sh);
        self.sets_won[h] += sh;
        self.sets_lost[h] += sa;
        self.sets_won[a] += sa;
        self.sets_lost[a] += sh;
        self.points_won[h] += ph;
        self.points_lost[h] += pa;
        self.points_won[a] += pa;
        self.points_lost[a] += ph;
    }

    /// Sets and rally points won equal those lost, league-wide.
    pub fn is_conserved(&self) -> bool {
        let sum = |v: &[u32]| v.iter().map(|&x| x as u64).sum::<u64>();
        sum(&self.sets_won) == sum(&self.sets_lost) && sum(&self.points_won) == sum(&self.points_lost)
    }

    /// Final rank of each team (1 = first): league points, then set ratio,
    /// then rally-point ratio, then team order.
    pub fn ranks(&self) -> Vec<usize> {
        let n = self.points.len();
        let ratio = |w: u32, l: u32| {
            if l == 0 {
                if w == 0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w as f64 / l as f64
            }
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.points[b]
                .cmp(&self.points[a])
                .then(ratio(self.sets_won[b], self.sets_lost[b]).total_cmp(&ratio(self.sets_won[a], self.sets_lost[a])))
                .then(
                    ratio(self.points_won[b], self.points_lost[b])
                        .total_cmp(&ratio(self.points_won[a], self.points_lost[a])),
                )
                .then(a.cmp(&b))
        });
        let mut ranks = vec![0; n];
        for (pos, &t) in order.iter().enumerate() {
            ranks[t] = pos + 1;
        }
        ranks
    }
}

/// Every game of `schedule`, taking results from `fixed` where the game is
/// marked played there and simulating the rest at `state`.
pub fn replicate_season<R: Rng + ?Sized>(
    rng: &mut R,
    state: &ParameterState,
    config: &ModelConfig,
    schedule: &Schedule,
    fixed: &[MatchObservation],
) -> Vec<MatchObservation> {
    let known: HashMap<u32, &MatchObservation> = fixed.iter().map(|m| (m.game_id, m)).collect();
    schedule
        .games
        .iter()
        .map(|g| match known.get(&g.game_id) {
            Some(m) if g.played => (*m).clone(),
            _ => simulate_match(rng, state, config, g.game_id, g.round, g.home, g.away),
        })
        .collect()
}

/// One team's row of the predicted table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamStanding {
    pub team: String,
    pub expected_points: f64,
    pub q025: f64,
    pub q975: f64,
    pub actual_points: Option<u32>,
    /// Position by expected points.
    pub predicted_rank: usize,
    pub actual_rank: Option<usize>,
    pub expected_rank: f64,
    /// `rank_probs[k]`: probability of finishing `k + 1`-th.
    pub rank_probs: Vec<f64>,
}

/// Replicated final tables.
#[derive(Debug, Clone, PartialEq)]
pub struct LeagueDistribution {
    pub team_names: Vec<String>,
    pub tallies: Vec<LeagueTally>,
    /// The observed table, when known.
    pub actual: Option<LeagueTally>,
}

impl LeagueDistribution {
    pub fn n_teams(&self) -> usize {
        self.team_names.len()
    }

    /// Rows in predicted order.
    pub fn standings(&self) -> Vec<TeamStanding> {
        standings(self)
    }

    /// `rank,team,expected,actual,2.5%,97.5%`
    pub fn write_table_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "team", "expected", "actual", "2.5%", "97.5%", "actual_rank"])?;
        for s in self.standings() {
            w.write_record([
                s.predicted_rank.to_string(),
                s.team.clone(),
                format!("{:.2}", s.expected_points),
                s.actual_points.map(|p| p.to_string()).unwrap_or_default(),
                format!("{}", s.q025),
                format!("{}", s.q975),
                s.actual_rank.map(|r| r.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("league table", e))?;
        Ok(())
    }

    /// `team,rank_1,...,rank_N` with finishing probabilities.
    pub fn write_rank_matrix_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["team".to_string()];
        header.extend((1..=self.n_teams()).map(|k| format!("rank_{k}")));
        w.write_record(&header)?;
        for s in self.standings() {
            let mut rec = vec![s.team.clone()];
            rec.extend(s.rank_probs.iter().map(|p| format!("{p:.4}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("rank matrix", e))?;
        Ok(())
    }

    /// Long format `replication,team,points,sets_won,sets_lost,points_won,points_lost`.
    pub fn write_tallies_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["replication", "team", "league_points", "sets_won", "sets_lost", "points_won", "points_lost"])?;
        for (j, t) in self.tallies.iter().enumerate() {
            for (i, name) in self.team_names.iter().enumerate() {
                w.write_record([
                    j.to_string(),
                    name.clone(),
                    t.points[i].to_string(),
                    t.sets_won[i].to_string(),
                    t.sets_lost[i].to_string(),
                    t.points_won[i].to_string(),
                    t.points_lost[i].to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("tallies", e))?;
        Ok(())
    }
}

/// Summary rows of a league distribution, in predicted order.
pub fn standings(dist: &LeagueDistribution) -> Vec<TeamStanding> {
    let n = dist.n_teams();
    let reps = dist.tallies.len().max(1) as f64;
    let ranks: Vec<Vec<usize>> = dist.tallies.iter().map(LeagueTally::ranks).collect();
    let actual_ranks = dist.actual.as_ref().map(LeagueTally::ranks);
    let mut rows: Vec<TeamStanding> = (0..n)
        .map(|t| {
            let pts: Vec<f64> = dist.tallies.iter().map(|x| x.points[t] as f64).collect();
            let mut rank_probs = vec![0.0; n];
            for r in &ranks {
                rank_probs[r[t] - 1] += 1.0;
            }
            for p in rank_probs.iter_mut() {
                *p /= reps;
            }
            TeamStanding {
                team: dist.team_names[t].clone(),
                expected_points: pts.iter().sum::<f64>() / reps,
                q025: quantile(&pts, 0.025),
                q975: quantile(&pts, 0.975),
                actual_points: dist.actual.as_ref().map(|a| a.points[t]),
                predicted_rank: 0,
                actual_rank: actual_ranks.as_ref().map(|r| r[t]),
                expected_rank: ranks.iter().map(|r| r[t] as f64).sum::<f64>() / reps,
                rank_probs,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        rows[b]
            .expected_points
            .total_cmp(&rows[a].expected_points)
            .then(rows[a].expected_rank.total_cmp(&rows[b].expected_rank))
            .then(a.cmp(&b))
    });
    for (pos, &t) in order.iter().enumerate() {
        rows[t].predicted_rank = pos + 1;
    }
    order.into_iter().map(|t| rows[t].clone()).collect()
}

fn check_draws(states: &[ParameterState], n_teams: usize) -> Result<()> {
    if states.is_empty() {
        return Err(Error::Data("no posterior draws".into()));
    }
    if states.iter().any(|s| s.n_teams() != n_teams) {
        return Err(Error::Data(format!("draws do not match the {n_teams} teams of the data")));
    }
    Ok(())
}

/// Simulates every scheduled game once per replication, each replication
/// at one posterior draw.
pub fn reconstruct_league(
    states: &[ParameterState],
    config: &ModelConfig,
    dataset: &Dataset,
    settings: &SimulationSettings,
) -> Result<LeagueDistribution> {
    settings.validate()?;
    let n = dataset.teams.len();
    check_draws(states, n)?;
    let tallies = (0..settings.replications)
        .into_par_iter()
        .map(|j| {
            let mut rng = chain_rng(settings.seed, j as u64);
            let state = &states[draw_for(j, settings.replications, states.len())];
            let season = replicate_season(&mut rng, state, config, &dataset.schedule, &[]);
            LeagueTally::from_matches(n, &season, settings.scoring)
        })
        .collect();
    Ok(LeagueDistribution {
        team_names: dataset.teams.names().to_vec(),
        tallies,
        actual: (!dataset.matches.is_empty())
            .then(|| LeagueTally::from_matches(n, &dataset.matches, settings.scoring)),
    })
}

/// Completed-season distribution with agreement against actual results.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub league: LeagueDistribution,
    /// Per-replication share of predicted games whose winner was right.
    pub game_agreement: Vec<f64>,
    /// Per-replication share of actually played sets whose winner was right.
    pub set_agreement: Vec<f64>,
    pub games_compared: usize,
    pub sets_compared: usize,
}

/// Keeps the games played in `observed` and simulates the rest of its
/// schedule. Agreement is scored against `actual` on the games `observed`
/// leaves unplayed; with nothing to predict it is 1.
pub fn predict_remaining(
    states: &[ParameterState],
    config: &ModelConfig,
    observed: &Dataset,
    actual: Option<&Dataset>,
    settings: &SimulationSettings,
) -> Result<Prediction> {
    settings.validate()?;
    let n = observed.teams.len();
    check_draws(states, n)?;
    let targets: Vec<&MatchObservation> = match actual {
        None => Vec::new(),
        Some(full) => {
            if full.teams != observed.teams {
                return Err(Error::Data("actual results use a different team list".into()));
            }
            let mut out = Vec::new();
            for m in &full.matches {
                let g = observed
                    .schedule
                    .games
                    .iter()
                    .find(|g| g.game_id == m.game_id)
                    .ok_or_else(|| Error::Data(format!("game {} is not in the schedule", m.game_id)))?;
                if (g.home, g.away, g.round) != (m.home, m.away, m.round) {
                    return Err(Error::Data(format!("game {} does not match its schedule entry", m.game_id)));
                }
                if !g.played {
                    out.push(m);
                }
            }
            out
        }
    };
    for g in observed.schedule.games.iter().filter(|g| g.played) {
        if observed.match_by_id(g.game_id).is_none() {
            return Err(Error::Data(format!("game {} is marked played but has no result", g.game_id)));
        }
    }
    let sets_compared: usize = targets.iter().map(|m| m.sets.len()).sum();

    let per_rep: Vec<(LeagueTally, f64, f64)> = (0..settings.replications)
        .into_par_iter()
        .map(|j| {
            let mut rng = chain_rng(settings.seed, j as u64);
            let state = &states[draw_for(j, settings.replications, states.len())];
            let season = replicate_season(&mut rng, state, config, &observed.schedule, &observed.matches);
            let tally = LeagueTally::from_matches(n, &season, settings.scoring);
            if targets.is_empty() {
                return (tally, 1.0, 1.0);
            }
            let by_id: HashMap<u32, &MatchObservation> = season.iter().map(|m| (m.game_id, m)).collect();
            let games_right = targets
                .iter()
                .filter(|m| by_id[&m.game_id].winner() == m.winner())
                .count();
            let mut sets_right = 0usize;
            for m in &targets {
                let omega = set_win_prob(state, config, m.home, m.away, m.round);
                for s in &m.sets {
                    let sim_home = rng.random::<f64>() < omega;
                    sets_right += (sim_home == s.score.home_won) as usize;
                }
            }
            (
                tally,
                games_right as f64 / targets.len() as f64,
                sets_right as f64 / sets_compared as f64,
            )
        })
        .collect();

    let mut tallies = Vec::with_capacity(per_rep.len());
    let mut game_agreement = Vec::with_capacity(per_rep.len());
    let mut set_agreement = Vec::with_capacity(per_rep.len());
    for (t, g, s) in per_rep {
        tallies.push(t);
        game_agreement.push(g);
        set_agreement.push(s);
    }
    let actual_tally = match actual {
        Some(full) => Some(LeagueTally::from_matches(n, &full.matches, settings.scoring)),
        None => Some(LeagueTally::from_matches(n, &observed.matches, settings.scoring)),
    };
    Ok(Prediction {
        league: LeagueDistribution {
            team_names: observed.teams.names().to_vec(),
            tallies,
            actual: actual_tally,
        },
        game_agreement,
        set_agreement,
        games_compared: targets.len(),
        sets_compared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ScheduledGame, TeamId, TeamRegistry};

    fn strong_first(n: usize) -> (ModelConfig, ParameterState) {
        let cfg = ModelConfig::preset(3).unwrap();
        let mut s = ParameterState::initial(&cfg, n, &[], &[]);
        s.alpha_star[0][0] = 1e3;
        (cfg, s)
    }

    fn season(n: usize) -> Dataset {
        Dataset {
            teams: TeamRegistry::from_names((0..n).map(|i| format!("Club {i}"))).unwrap(),
            matches: Vec::new(),
            schedule: Schedule::double_round_robin(n),
        }
    }

    #[test]
    fn dominant_team_takes_every_point() {
        let (cfg, s) = strong_first(6);
        let data = season(6);
        let dist = reconstruct_league(&[s], &cfg, &data, &SimulationSettings {
            replications: 20,
            ..SimulationSettings::default()
        })
        .unwrap();
        let games = data.schedule.games.iter().filter(|g| g.home.0 == 0 || g.away.0 == 0).count();
        for t in &dist.tallies {
            assert_eq!(t.points[0] as usize, 3 * games);
            assert!(t.is_conserved());
            assert_eq!(t.points.iter().sum::<u32>() as usize, 3 * data.schedule.len());
        }
        let table = dist.standings();
        assert_eq!(table[0].team, "Club 0");
        assert_eq!(table[0].rank_probs[0], 1.0);
    }

    #[test]
    fn frozen_draw_is_deterministic() {
        let (cfg, mut s) = strong_first(4);
        s.alpha_star[0][0] = 0.2;
        let data = season(4);
        let settings = SimulationSettings {
            replications: 30,
            seed: 9,
            ..SimulationSettings::default()
        };
        let a = reconstruct_league(std::slice::from_ref(&s), &cfg, &data, &settings).unwrap();
        let b = reconstruct_league(&[s], &cfg, &data, &settings).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ranks_break_ties_by_ratios() {
        let mut t = LeagueTally::new(3);
        t.points = vec![6, 6, 1];
        t.sets_won = vec![6, 6, 2];
        t.sets_lost = vec![3, 2, 6];
        assert_eq!(t.ranks(), vec![2, 1, 3]);
    }

    #[test]
    fn nothing_left_to_predict() {
        let (cfg, s) = strong_first(4);
        let mut data = season(4);
        let mut rng = chain_rng(1, 0);
        data.matches = replicate_season(&mut rng, &s, &cfg, &data.schedule, &[]);
        for g in data.schedule.games.iter_mut() {
            g.played = true;
        }
        let observed = LeagueTally::from_matches(4, &data.matches, LeagueScoring::SuperLega);
        let p = predict_remaining(&[s], &cfg, &data, Some(&data), &SimulationSettings {
            replications: 5,
            ..SimulationSettings::default()
        })
        .unwrap();
        assert!(p.league.tallies.iter().all(|t| *t == observed));
        assert!(p.game_agreement.iter().all(|&a| a == 1.0));
        assert_eq!(p.games_compared, 0);
    }

    #[test]
    fn schedule_mismatch_is_a_data_error() {
        let (cfg, s) = strong_first(4);
        let data = season(4);
        let mut full = data.clone();
        let mut rng = chain_rng(1, 0);
        full.matches = replicate_season(&mut rng, &s, &cfg, &data.schedule, &[]);
        full.matches[0].game_id = 999;
        let mut observed = data.clone();
        observed.schedule = Schedule::new(vec![ScheduledGame {
            game_id: 1,
            round: 1,
            home: TeamId(0),
            away: TeamId(1),
            played: false,
        }])
        .unwrap();
        let r = predict_remaining(&[s], &cfg, &observed, Some(&full), &SimulationSettings::default());
        assert!(matches!(r, Err(Error::Data(_))));
    }

    #[test]
    fn zero_replications_rejected() {
        let (cfg, s) = strong_first(4);
        let r = reconstruct_league(&[s], &cfg, &season(4), &SimulationSettings {
            replications: 0,
            ..SimulationSettings::default()
        });
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
