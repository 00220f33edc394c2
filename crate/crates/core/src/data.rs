//! Match ingestion and set-score decomposition.
//!
//! Every finished set is rewritten as `(W, r, Y, O)`: the home-win indicator,
//! the target score (25, or 15 in the tie-break), the loser's baseline points
//! `Y <= r - 2` and the extra points `O` played after a deuce. The winner's
//! score is `r + O` and the loser's is `Y + O`.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, IllegalSetScore, Result};

/// Zero-based team index. Displayed one-based in tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TeamId(pub usize);

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

/// Name <-> id map, ids assigned in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamRegistry {
    names: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, TeamId>,
}

impl TeamRegistry {
    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut reg = TeamRegistry::default();
        for name in names {
            let name = name.into();
            if reg.index.contains_key(&name) {
                return Err(Error::Data(format!("duplicate team name {name:?}")));
            }
            reg.intern(&name);
        }
        Ok(reg)
    }

    fn intern(&mut self, name: &str) -> TeamId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = TeamId(self.names.len());
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: TeamId) -> &str {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<TeamId> {
        self.index.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = TeamId> {
        (0..self.names.len()).map(TeamId)
    }

    /// Exact name, or else a unique case-insensitive substring match
    /// (so "Verona" finds "Calzedonia Verona").
    pub fn resolve(&self, pattern: &str) -> Result<TeamId> {
        if let Some(id) = self.get(pattern) {
            return Ok(id);
        }
        let needle = pattern.to_lowercase();
        let hits: Vec<TeamId> = self
            .ids()
            .filter(|&id| self.name(id).to_lowercase().contains(&needle))
            .collect();
        match hits.as_slice() {
            [one] => Ok(*one),
            [] => Err(Error::Data(format!("no team matches {pattern:?}"))),
            _ => Err(Error::Data(format!("team pattern {pattern:?} is ambiguous"))),
        }
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), TeamId(i)))
            .collect();
    }

    /// Two-column `id,name` listing, ids one-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "name"])?;
        for id in self.ids() {
            w.write_record([id.to_string(), self.name(id).to_string()])?;
        }
        w.flush().map_err(|e| Error::io("teams.csv", e))?;
        Ok(())
    }
}

/// Deserialisation helper: the lookup index is not serialised.
pub fn registry_from_json(text: &str) -> Result<TeamRegistry> {
    let mut reg: TeamRegistry = serde_json::from_str(text)?;
    reg.rebuild_index();
    Ok(reg)
}

/// Target score for a set: 25, or 15 for the fifth set.
pub fn set_target(set_index: u8) -> u32 {
    if set_index == 5 {
        15
    } else {
        25
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSetScore {
    pub game_id: u32,
    pub set_index: u8,
    pub home_points: u32,
    pub away_points: u32,
}

/// The model's view of one set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetScore {
    /// `W`: the home side won the set.
    pub home_won: bool,
    /// `r`
    pub target: u32,
    /// `Y`, bounded by `r - 2`.
    pub baseline: u32,
    /// `O`
    pub extra: u32,
}

impl SetScore {
    /// `Z = Y + O`
    pub fn loser_total(&self) -> u32 {
        self.baseline + self.extra
    }

    pub fn winner_total(&self) -> u32 {
        self.target + self.extra
    }

    pub fn home_points(&self) -> u32 {
        if self.home_won {
            self.winner_total()
        } else {
            self.loser_total()
        }
    }

    pub fn away_points(&self) -> u32 {
        if self.home_won {
            self.loser_total()
        } else {
            self.winner_total()
        }
    }

    /// `d = home - away`
    pub fn point_difference(&self) -> i32 {
        self.home_points() as i32 - self.away_points() as i32
    }
}

/// Splits a finished set into `(W, r, Y, O)`.
pub fn decompose_set(raw: &RawSetScore) -> Result<SetScore, IllegalSetScore> {
    let illegal = |reason| IllegalSetScore {
        set_index: raw.set_index,
        home: raw.home_points,
        away: raw.away_points,
        reason,
    };
    if !(1..=5).contains(&raw.set_index) {
        return Err(illegal("set index must be between 1 and 5"));
    }
    if raw.home_points == raw.away_points {
        return Err(illegal("tied score"));
    }
    let home_won = raw.home_points > raw.away_points;
    let (winner, loser) = if home_won {
        (raw.home_points, raw.away_points)
    } else {
        (raw.away_points, raw.home_points)
    };
    let target = set_target(raw.set_index);
    if winner - loser < 2 {
        return Err(illegal("winning margin below two points"));
    }
    if winner < target {
        return Err(illegal("winner did not reach the target score"));
    }
    let extra = winner - target;
    if extra > 0 && winner - loser != 2 {
        return Err(illegal("set past the target must end with a two-point margin"));
    }
    let baseline = loser - extra;
    debug_assert!(baseline <= target - 2);
    Ok(SetScore {
        home_won,
        target,
        baseline,
        extra,
    })
}

/// Inverse of [`decompose_set`].
pub fn recompose(game_id: u32, set_index: u8, score: &SetScore) -> RawSetScore {
    RawSetScore {
        game_id,
        set_index,
        home_points: score.home_points(),
        away_points: score.away_points(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Home,
    Away,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetObservation {
    pub game_id: u32,
    pub set_index: u8,
    pub home: TeamId,
    pub away: TeamId,
    #[serde(flatten)]
    pub score: SetScore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchObservation {
    pub game_id: u32,
    pub round: u32,
    pub home: TeamId,
    pub away: TeamId,
    pub sets: Vec<SetObservation>,
}

impl MatchObservation {
    pub fn sets_won(&self) -> (u32, u32) {
        let home = self.sets.iter().filter(|s| s.score.home_won).count() as u32;
        (home, self.sets.len() as u32 - home)
    }

    pub fn winner(&self) -> Side {
        let (h, a) = self.sets_won();
        if h > a {
            Side::Home
        } else {
            Side::Away
        }
    }

    pub fn points(&self) -> (u32, u32) {
        self.sets.iter().fold((0, 0), |(h, a), s| {
            (h + s.score.home_points(), a + s.score.away_points())
        })
    }

    /// Checks the best-of-five structure.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Error::InconsistentMatch {
            game_id: self.game_id,
            message,
        };
        if self.home == self.away {
            return Err(fail("a team cannot play itself".into()));
        }
        if !(3..=5).contains(&self.sets.len()) {
            return Err(fail(format!("{} sets recorded", self.sets.len())));
        }
        let (mut h, mut a) = (0, 0);
        for (i, set) in self.sets.iter().enumerate() {
            if set.set_index as usize != i + 1 {
                return Err(fail(format!("set {} out of sequence", set.set_index)));
            }
            if h == 3 || a == 3 {
                return Err(fail(format!("set {} played after the match was decided", i + 1)));
            }
            if set.score.home_won {
                h += 1;
            } else {
                a += 1;
            }
        }
        if h != 3 && a != 3 {
            return Err(fail(format!("unfinished match at {h}-{a}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledGame {
    pub game_id: u32,
    pub round: u32,
    pub home: TeamId,
    pub away: TeamId,
    pub played: bool,
}

/// Games ordered by `(round, game_id)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub games: Vec<ScheduledGame>,
}

impl Schedule {
    pub fn new(mut games: Vec<ScheduledGame>) -> Result<Self> {
        games.sort_by_key(|g| (g.round, g.game_id));
        let mut ids: Vec<u32> = games.iter().map(|g| g.game_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Data("duplicate game ids in schedule".into()));
        }
        Ok(Schedule { games })
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }

    /// Double round robin by the circle method: every pair meets once at
    /// each venue, `2 * (n - 1)` rounds.
    pub fn double_round_robin(n_teams: usize) -> Self {
        assert!(n_teams >= 2, "need at least two teams");
        let n = if n_teams % 2 == 0 { n_teams } else { n_teams + 1 };
        let mut ring: Vec<usize> = (0..n).collect();
        let mut first_half = Vec::new();
        for round in 0..n - 1 {
            for k in 0..n / 2 {
                let (a, b) = (ring[k], ring[n - 1 - k]);
                if a >= n_teams || b >= n_teams {
                    continue;
                }
                let (home, away) = if (round + k) % 2 == 0 { (a, b) } else { (b, a) };
                first_half.push((round as u32 + 1, home, away));
            }
            let last = ring.pop().unwrap();
            ring.insert(1, last);
        }
        let rounds = (n - 1) as u32;
        let mut games = Vec::new();
        let mut id = 1;
        for &(round, home, away) in &first_half {
            games.push((round, home, away));
        }
        for &(round, home, away) in &first_half {
            games.push((round + rounds, away, home));
        }
        let games = games
            .into_iter()
            .map(|(round, home, away)| {
                let g = ScheduledGame {
                    game_id: id,
                    round,
                    home: TeamId(home),
                    away: TeamId(away),
                    played: false,
                };
                id += 1;
                g
            })
            .collect();
        Schedule::new(games).expect("generated ids are unique")
    }
}

/// Headline counts of a season file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DataSummary {
    pub teams: usize,
    pub matches: usize,
    pub sets: usize,
    pub tie_breaks: usize,
    pub deuce_sets: usize,
}

impl fmt::Display for DataSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} matches, {} sets, {} teams, {} tie-breaks, {} deuce sets",
            self.matches, self.sets, self.teams, self.tie_breaks, self.deuce_sets
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub teams: TeamRegistry,
    /// Played matches, in schedule order.
    pub matches: Vec<MatchObservation>,
    pub schedule: Schedule,
}

impl Dataset {
    pub fn sets(&self) -> impl Iterator<Item = &SetObservation> {
        self.matches.iter().flat_map(|m| m.sets.iter())
    }

    pub fn n_sets(&self) -> usize {
        self.matches.iter().map(|m| m.sets.len()).sum()
    }

    pub fn summary(&self) -> DataSummary {
        DataSummary {
            teams: self.teams.len(),
            matches: self.matches.len(),
            sets: self.n_sets(),
            tie_breaks: self.matches.iter().filter(|m| m.sets.len() == 5).count(),
            deuce_sets: self.sets().filter(|s| s.score.extra > 0).count(),
        }
    }

    pub fn match_by_id(&self, game_id: u32) -> Option<&MatchObservation> {
        self.matches.iter().find(|m| m.game_id == game_id)
    }

    /// The same season with only games of rounds `<= last_round` marked as
    /// played. Later results are dropped.
    pub fn truncated_at_round(&self, last_round: u32) -> Dataset {
        let matches = self
            .matches
            .iter()
            .filter(|m| m.round <= last_round)
            .cloned()
            .collect();
        let games = self
            .schedule
            .games
            .iter()
            .map(|g| ScheduledGame {
                played: g.played && g.round <= last_round,
                ..*g
            })
            .collect();
        Dataset {
            teams: self.teams.clone(),
            matches,
            schedule: Schedule { games },
        }
    }

    /// Writes the input CSV format back out.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for game in &self.schedule.games {
            let home = self.teams.name(game.home);
            let away = self.teams.name(game.away);
            match self.match_by_id(game.game_id) {
                Some(m) => {
                    for s in &m.sets {
                        w.write_record([
                            game.game_id.to_string(),
                            game.round.to_string(),
                            home.to_string(),
                            away.to_string(),
                            s.set_index.to_string(),
                            s.score.home_points().to_string(),
                            s.score.away_points().to_string(),
                        ])?;
                    }
                }
                None => {
                    w.write_record([
                        game.game_id.to_string(),
                        game.round.to_string(),
                        home.to_string(),
                        away.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("dataset", e))?;
        Ok(())
    }

    /// One JSON object per decomposed set.
    pub fn write_sets_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Record<'a> {
            game_id: u32,
            round: u32,
            set_index: u8,
            home: &'a str,
            away: &'a str,
            w: u8,
            r: u32,
            y: u32,
            o: u32,
            z: u32,
            home_points: u32,
            away_points: u32,
        }
        for m in &self.matches {
            for s in &m.sets {
                let rec = Record {
                    game_id: m.game_id,
                    round: m.round,
                    set_index: s.set_index,
                    home: self.teams.name(s.home),
                    away: self.teams.name(s.away),
                    w: s.score.home_won as u8,
                    r: s.score.target,
                    y: s.score.baseline,
                    o: s.score.extra,
                    z: s.score.loser_total(),
                    home_points: s.score.home_points(),
                    away_points: s.score.away_points(),
                };
                serde_json::to_writer(&mut out, &rec)?;
                out.write_all(b"\n").map_err(|e| Error::io("sets.jsonl", e))?;
            }
        }
        Ok(())
    }
}

pub const CSV_COLUMNS: [&str; 7] = [
    "game_id",
    "round",
    "home",
    "away",
    "set_index",
    "home_points",
    "away_points",
];

/// Reads the season CSV. One row per set; a row whose set columns are empty
/// declares a scheduled but unplayed game.
pub fn parse_matches<R: Read>(source: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::NoRows);
    }
    let mut col = [0usize; 7];
    for (slot, name) in col.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MalformedRow {
                line: 1,
                message: format!("missing column {name:?}"),
            })?;
    }

    struct GameAcc {
        round: u32,
        home: TeamId,
        away: TeamId,
        sets: Vec<SetObservation>,
        declared_unplayed: bool,
    }

    let mut teams = TeamRegistry::default();
    let mut order: Vec<u32> = Vec::new();
    let mut games: HashMap<u32, GameAcc> = HashMap::new();
    let mut rows = 0usize;

    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        rows += 1;
        let malformed = |message: String| Error::MalformedRow { line, message };
        let field = |i: usize| record.get(col[i]).unwrap_or("");
        let int = |i: usize| -> Result<u32> {
            field(i)
                .parse::<u32>()
                .map_err(|_| malformed(format!("{} is not a non-negative integer: {:?}", CSV_COLUMNS[i], field(i))))
        };

        let game_id = int(0)?;
        let round = int(1)?;
        let (home_name, away_name) = (field(2), field(3));
        if home_name.is_empty() || away_name.is_empty() {
            return Err(malformed("empty team name".into()));
        }
        let home = teams.intern(home_name);
        let away = teams.intern(away_name);
        if home == away {
            return Err(malformed(format!("{home_name:?} cannot play itself")));
        }

        let acc = games.entry(game_id).or_insert_with(|| {
            order.push(game_id);
            GameAcc {
                round,
                home,
                away,
                sets: Vec::new(),
                declared_unplayed: false,
            }
        });
        if acc.round != round || acc.home != home || acc.away != away {
            return Err(malformed(format!(
                "game {game_id} appears with different round or teams"
            )));
        }

        let unplayed = (4..7).all(|i| field(i).is_empty());
        if unplayed {
            if !acc.sets.is_empty() {
                return Err(malformed(format!("game {game_id} mixes played and unplayed rows")));
            }
            acc.declared_unplayed = true;
            continue;
        }
        if acc.declared_unplayed {
            return Err(malformed(format!("game {game_id} mixes played and unplayed rows")));
        }
        let set_index = int(4)?;
        if !(1..=5).contains(&set_index) {
            return Err(malformed(format!("set_index {set_index} outside 1..5")));
        }
        let raw = RawSetScore {
            game_id,
            set_index: set_index as u8,
            home_points: int(5)?,
            away_points: int(6)?,
        };
        let score = decompose_set(&raw).map_err(|e| malformed(e.to_string()))?;
        acc.sets.push(SetObservation {
            game_id,
            set_index: raw.set_index,
            home,
            away,
            score,
        });
    }

    if rows == 0 {
        return Err(Error::NoRows);
    }
    if teams.len() < 2 {
        return Err(Error::Data("need at least two teams".into()));
    }

    let mut matches = Vec::new();
    let mut scheduled = Vec::new();
    for id in order {
        let mut acc = games.remove(&id).expect("recorded game");
        acc.sets.sort_by_key(|s| s.set_index);
        let played = !acc.declared_unplayed;
        scheduled.push(ScheduledGame {
            game_id: id,
            round: acc.round,
            home: acc.home,
            away: acc.away,
            played,
        });
        if played {
            let m = MatchObservation {
                game_id: id,
                round: acc.round,
                home: acc.home,
                away: acc.away,
                sets: acc.sets,
            };
            m.validate()?;
            matches.push(m);
        }
    }
    let schedule = Schedule::new(scheduled)?;
    let rank: HashMap<u32, usize> = schedule
        .games
        .iter()
        .enumerate()
        .map(|(i, g)| (g.game_id, i))
        .collect();
    matches.sort_by_key(|m| rank[&m.game_id]);

    Ok(Dataset {
        teams,
        matches,
        schedule,
    })
}
