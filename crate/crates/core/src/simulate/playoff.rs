//! Knockout brackets of best-of-n series.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{draw_for, simulate_match, SimulationSettings};
use crate::data::{decompose_set, RawSetScore, Side, TeamId, TeamRegistry};
use crate::error::{Error, Result};
use crate::inference::chain_rng;
use crate::model::{set_win_prob, ModelConfig, ParameterState};

/// A played playoff match, scored set by set as `[home, away]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayedMatch {
    pub home: String,
    pub away: String,
    pub sets: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketSpec {
    /// Teams by seed, best first. Names may be unique fragments.
    pub seeds: Vec<String>,
    #[serde(default = "default_wins")]
    pub wins_needed: u32,
    /// Venue of each match of a series from the higher seed's side, `H` or `A`.
    #[serde(default = "default_pattern")]
    pub home_pattern: String,
    /// Actual results, used only to score agreement.
    #[serde(default)]
    pub played: Vec<PlayedMatch>,
}

fn default_wins() -> u32 {
    3
}

fn default_pattern() -> String {
    "HHAAH".into()
}

/// Seed order along the bracket: 1 v n, then the half containing n/2.
fn bracket_order(n: usize) -> Vec<usize> {
    let mut order = vec![1];
    while order.len() < n {
        let m = 2 * order.len() + 1;
        order = order.iter().flat_map(|&s| [s, m - s]).collect();
    }
    order
}

struct ResolvedBracket {
    /// Team of each seed, best first.
    teams: Vec<TeamId>,
    /// `true` where the higher seed hosts.
    hosts: Vec<bool>,
    wins_needed: u32,
    played: Vec<(TeamId, TeamId, Vec<bool>)>,
}

impl BracketSpec {
    pub fn from_json(text: &str) -> Result<BracketSpec> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bracket: {e}")))
    }

    fn resolve(&self, registry: &TeamRegistry) -> Result<ResolvedBracket> {
        let err = |m: String| Error::Config(format!("bracket: {m}"));
        let n = self.seeds.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(err(format!("{n} seeds; a power of two of at least 2 is needed")));
        }
        if self.wins_needed == 0 {
            return Err(err("wins_needed must be positive".into()));
        }
        let games = (2 * self.wins_needed - 1) as usize;
        if self.home_pattern.len() != games || !self.home_pattern.chars().all(|c| c == 'H' || c == 'A') {
            return Err(err(format!("home_pattern must be {games} letters H or A")));
        }
        let mut teams = Vec::with_capacity(n);
        for s in &self.seeds {
            let id = registry.resolve(s).map_err(|e| err(e.to_string()))?;
            if teams.contains(&id) {
                return Err(err(format!("{} seeded twice", registry.name(id))));
            }
            teams.push(id);
        }
        let mut played = Vec::new();
        for m in &self.played {
            let home = registry.resolve(&m.home).map_err(|e| err(e.to_string()))?;
            let away = registry.resolve(&m.away).map_err(|e| err(e.to_string()))?;
            let mut sets = Vec::new();
            for (i, &[h, a]) in m.sets.iter().enumerate() {
                let raw = RawSetScore {
                    game_id: 0,
                    set_index: i as u8 + 1,
                    home_points: h,
                    away_points: a,
                };
                let score = decompose_set(&raw).map_err(|e| err(e.to_string()))?;
                sets.push(score.home_won);
            }
            let won = sets.iter().filter(|&&w| w).count();
            if sets.len() > 5 || (won != 3 && sets.len() - won != 3) {
                return Err(err(format!("played match {} v {} is not a finished best of five", m.home, m.away)));
            }
            played.push((home, away, sets));
        }
        Ok(ResolvedBracket {
            teams,
            hosts: self.home_pattern.chars().map(|c| c == 'H').collect(),
            wins_needed: self.wins_needed,
            played,
        })
    }
}

/// How often a team got through each stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamProgression {
    pub team: String,
    pub seed: usize,
    /// `reach[k]`: probability of winning `k + 1` series.
    pub reach: Vec<f64>,
}

/// Head-to-head record of one pairing across replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesOdds {
    pub higher: String,
    pub lower: String,
    pub meetings: usize,
    pub higher_wins: usize,
}

impl SeriesOdds {
    pub fn higher_win_prob(&self) -> f64 {
        self.higher_wins as f64 / self.meetings as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayoffTable {
    /// One entry per stage, e.g. semifinal, final, champion.
    pub stages: Vec<String>,
    pub teams: Vec<TeamProgression>,
    pub series: Vec<SeriesOdds>,
    /// Per-replication agreement with the played matches, if any.
    pub game_agreement: Vec<f64>,
    pub set_agreement: Vec<f64>,
}

fn stage_names(rounds: usize) -> Vec<String> {
    (0..rounds)
        .map(|k| match rounds - k {
            1 => "champion".to_string(),
            2 => "final".to_string(),
            3 => "semifinal".to_string(),
            left => format!("last_{}", 1 << left),
        })
        .collect()
}

/// A series between seeds `hi < lo`; returns whether the higher seed won.
fn play_series<R: Rng + ?Sized>(
    rng: &mut R,
    state: &ParameterState,
    config: &ModelConfig,
    b: &ResolvedBracket,
    hi: usize,
    lo: usize,
) -> bool {
    let (a, c) = (b.teams[hi], b.teams[lo]);
    let (mut wa, mut wc) = (0, 0);
    let mut k = 0;
    while wa < b.wins_needed && wc < b.wins_needed {
        let (home, away) = if b.hosts[k] { (a, c) } else { (c, a) };
        let m = simulate_match(rng, state, config, 0, u32::MAX, home, away);
        let home_won = m.winner() == Side::Home;
        if home_won == (home == a) {
            wa += 1;
        } else {
            wc += 1;
        }
        k += 1;
    }
    wa == b.wins_needed
}

/// Progression probabilities over `settings.replications` brackets.
/// Dynamic models use their last fitted period.
pub fn simulate_playoffs(
    states: &[ParameterState],
    config: &ModelConfig,
    bracket: &BracketSpec,
    registry: &TeamRegistry,
    settings: &SimulationSettings,
) -> Result<PlayoffTable> {
    settings.validate()?;
    if states.is_empty() {
        return Err(Error::Data("no posterior draws".into()));
    }
    let b = bracket.resolve(registry)?;
    let n = b.teams.len();
    let rounds = n.trailing_zeros() as usize;
    let order: Vec<usize> = bracket_order(n).into_iter().map(|s| s - 1).collect();

    struct Rep {
        /// Series won by each seed.
        wins: Vec<usize>,
        meetings: Vec<(usize, usize, bool)>,
        games: f64,
        sets: f64,
    }
    let reps: Vec<Rep> = (0..settings.replications)
        .into_par_iter()
        .map(|j| {
            let mut rng = chain_rng(settings.seed, j as u64);
            let state = &states[draw_for(j, settings.replications, states.len())];
            let mut alive = order.clone();
            let mut wins = vec![0; n];
            let mut meetings = Vec::with_capacity(n - 1);
            while alive.len() > 1 {
                alive = alive
                    .chunks(2)
                    .map(|pair| {
                        let (hi, lo) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                        let hi_won = play_series(&mut rng, state, config, &b, hi, lo);
                        meetings.push((hi, lo, hi_won));
                        let w = if hi_won { hi } else { lo };
                        wins[w] += 1;
                        w
                    })
                    .collect();
            }
            let (mut games_right, mut sets_right, mut sets_total) = (0usize, 0usize, 0usize);
            for (home, away, sets) in &b.played {
                let m = simulate_match(&mut rng, state, config, 0, u32::MAX, *home, *away);
                let actual_home = sets.iter().filter(|&&w| w).count() == b.wins_needed as usize;
                games_right += ((m.winner() == Side::Home) == actual_home) as usize;
                let omega = set_win_prob(state, config, *home, *away, u32::MAX);
                for &w in sets {
                    sets_right += ((rng.random::<f64>() < omega) == w) as usize;
                    sets_total += 1;
                }
            }
            Rep {
                wins,
                meetings,
                games: games_right as f64 / b.played.len().max(1) as f64,
                sets: sets_right as f64 / sets_total.max(1) as f64,
            }
        })
        .collect();

    let total = reps.len() as f64;
    let teams = (0..n)
        .map(|s| TeamProgression {
            team: registry.name(b.teams[s]).to_string(),
            seed: s + 1,
            reach: (1..=rounds)
                .map(|k| reps.iter().filter(|r| r.wins[s] >= k).count() as f64 / total)
                .collect(),
        })
        .collect();
    let mut series: Vec<SeriesOdds> = Vec::new();
    for r in &reps {
        for &(hi, lo, hi_won) in &r.meetings {
            let (h, l) = (registry.name(b.teams[hi]), registry.name(b.teams[lo]));
            let entry = match series.iter_mut().position(|x| x.higher == h && x.lower == l) {
                Some(i) => &mut series[i],
                None => {
                    series.push(SeriesOdds {
                        higher: h.to_string(),
                        lower: l.to_string(),
                        meetings: 0,
                        higher_wins: 0,
                    });
                    series.last_mut().unwrap()
                }
            };
            entry.meetings += 1;
            entry.higher_wins += hi_won as usize;
        }
    }
    let has_played = !b.played.is_empty();
    Ok(PlayoffTable {
        stages: stage_names(rounds),
        teams,
        series,
        game_agreement: if has_played { reps.iter().map(|r| r.games).collect() } else { Vec::new() },
        set_agreement: if has_played { reps.iter().map(|r| r.sets).collect() } else { Vec::new() },
    })
}

impl PlayoffTable {
    pub fn team(&self, name: &str) -> Option<&TeamProgression> {
        self.teams.iter().find(|t| t.team == name)
    }

    /// `seed,team,<stages>` in seed order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["seed".to_string(), "team".into()];
        header.extend(self.stages.iter().cloned());
        w.write_record(&header)?;
        for t in &self.teams {
            let mut rec = vec![t.seed.to_string(), t.team.clone()];
            rec.extend(t.reach.iter().map(|p| format!("{p:.4}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("playoff table", e))?;
        Ok(())
    }

    /// `higher,lower,meetings,higher_win_prob`
    pub fn write_series_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["higher", "lower", "meetings", "higher_win_prob"])?;
        for s in &self.series {
            w.write_record([
                s.higher.clone(),
                s.lower.clone(),
                s.meetings.to_string(),
                format!("{:.4}", s.higher_win_prob()),
            ])?;
        }
        w.flush().map_err(|e| Error::io("series table", e))?;
        Ok(())
    }
}
