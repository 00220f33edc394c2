//! Flat unconstrained coordinates for the sampler, and the compiled
//! per-set data the likelihood runs over.
//!
//! Real parameters map to themselves; `lambda` and the variances are
//! stored as logs.

use statrs::function::gamma::ln_gamma;

use super::config::{Dynamics, ModelConfig, PointModel};
use super::state::{center_stz, ParameterState};
use crate::data::{Dataset, TeamRegistry};
use crate::error::{Error, Result};

/// One observed set in the form the likelihood consumes.
#[derive(Debug, Clone)]
pub struct CompiledSet {
    pub home: usize,
    pub away: usize,
    /// Index into the distinct fitted rounds.
    pub period: usize,
    /// Index into the fitted games.
    pub game: usize,
    pub home_won: bool,
    pub r: u32,
    pub y: u32,
    pub o: u32,
    pub ln_r: f64,
    pub ln_y_fact: f64,
    pub ln_o_fact: f64,
}

impl CompiledSet {
    #[allow(clippy::too_many_arguments)]
    pub fn new(home: usize, away: usize, period: usize, game: usize, home_won: bool, r: u32, y: u32, o: u32) -> Self {
        CompiledSet {
            home,
            away,
            period,
            game,
            home_won,
            r,
            y,
            o,
            ln_r: (r as f64).ln(),
            ln_y_fact: ln_gamma(y as f64 + 1.0),
            ln_o_fact: ln_gamma(o as f64 + 1.0),
        }
    }
}

/// Observations compiled against a team registry.
#[derive(Debug, Clone)]
pub struct ModelData {
    pub sets: Vec<CompiledSet>,
    pub n_teams: usize,
    /// Distinct rounds of the played matches, ascending.
    pub rounds: Vec<u32>,
    /// Game ids of the played matches, in dataset order.
    pub games: Vec<u32>,
    pub team_names: Vec<String>,
}

impl ModelData {
    pub fn new(dataset: &Dataset) -> ModelData {
        let mut rounds: Vec<u32> = dataset.matches.iter().map(|m| m.round).collect();
        rounds.sort_unstable();
        rounds.dedup();
        let games: Vec<u32> = dataset.matches.iter().map(|m| m.game_id).collect();
        let mut sets = Vec::with_capacity(dataset.n_sets());
        for (g, m) in dataset.matches.iter().enumerate() {
            let period = rounds.binary_search(&m.round).expect("round listed");
            for s in &m.sets {
                let sc = &s.score;
                sets.push(CompiledSet::new(
                    s.home.0,
                    s.away.0,
                    period,
                    g,
                    sc.home_won,
                    sc.target,
                    sc.baseline,
                    sc.extra,
                ));
            }
        }
        ModelData {
            sets,
            n_teams: dataset.teams.len(),
            rounds,
            games,
            team_names: dataset.teams.names().to_vec(),
        }
    }

    /// No observations, for prior-only runs.
    pub fn empty(teams: &TeamRegistry) -> ModelData {
        ModelData {
            sets: Vec::new(),
            n_teams: teams.len(),
            rounds: Vec::new(),
            games: Vec::new(),
            team_names: teams.names().to_vec(),
        }
    }
}

/// What one unconstrained coordinate means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Mu,
    HSet,
    HPoint,
    Theta,
    M,
    Delta,
    Gamma,
    DeltaSq,
    GammaSq,
    LogLambda,
    LogSigma2Eps,
    LogSigma2Alpha,
    LogSigma2Beta,
    Eps(usize),
    Alpha { period: usize, team: usize },
    Beta { period: usize, team: usize },
    BetaDef { team: usize },
}

impl Coord {
    pub fn is_log_scale(self) -> bool {
        matches!(
            self,
            Coord::LogLambda | Coord::LogSigma2Eps | Coord::LogSigma2Alpha | Coord::LogSigma2Beta
        )
    }
}

/// Coordinate layout for one config and data set.
#[derive(Debug, Clone)]
pub struct Layout {
    pub coords: Vec<Coord>,
    pub names: Vec<String>,
    pub n_teams: usize,
    pub team_names: Vec<String>,
    /// Teams carrying set abilities; empty without them.
    pub alpha_teams: Vec<usize>,
    pub alpha_periods: usize,
    pub beta_periods: usize,
    pub split: bool,
    pub rounds: Vec<u32>,
    pub eps_games: Vec<u32>,
    /// `[period][team]` to coordinate; `None` for fixed-zero abilities.
    pub alpha_index: Vec<Vec<Option<usize>>>,
    pub beta_index: Vec<Vec<usize>>,
    pub def_index: Vec<usize>,
    pub eps_index: Vec<usize>,
    scalar_index: [Option<usize>; 13],
}

fn scalar_slot(c: Coord) -> Option<usize> {
    Some(match c {
        Coord::Mu => 0,
        Coord::HSet => 1,
        Coord::HPoint => 2,
        Coord::Theta => 3,
        Coord::M => 4,
        Coord::Delta => 5,
        Coord::Gamma => 6,
        Coord::DeltaSq => 7,
        Coord::GammaSq => 8,
        Coord::LogLambda => 9,
        Coord::LogSigma2Eps => 10,
        Coord::LogSigma2Alpha => 11,
        Coord::LogSigma2Beta => 12,
        _ => return None,
    })
}

impl Layout {
    pub fn new(config: &ModelConfig, data: &ModelData) -> Result<Layout> {
        config.validate()?;
        let registry = TeamRegistry::from_names(data.team_names.iter().cloned())?;
        let n = data.n_teams;
        let mut coords = Vec::new();
        let mut names = Vec::new();
        macro_rules! push {
            ($c:expr, $name:expr $(,)?) => {{
                coords.push($c);
                names.push($name);
            }};
        }
        let zip = config.point_model == PointModel::ZipTruncNegBin;
        let phi = config.phi_form;
        push!(Coord::Mu, "mu".into());
        push!(Coord::HSet, "H_set".into());
        push!(Coord::HPoint, "H_point".into());
        if config.ability_mode.v2() {
            push!(Coord::Theta, "theta".into());
        }
        if zip {
            push!(Coord::M, "m".into());
        }
        if phi.has_linear() {
            if config.has_set_abilities() {
                push!(Coord::Delta, "delta".into());
            }
            push!(Coord::Gamma, "gamma".into());
        }
        if phi.has_quadratic() {
            if config.has_set_abilities() {
                push!(Coord::DeltaSq, "delta_sq".into());
            }
            push!(Coord::GammaSq, "gamma_sq".into());
        }
        push!(Coord::LogLambda, "log_lambda".into());
        if config.random_effects {
            push!(Coord::LogSigma2Eps, "log_sigma2_eps".into());
        }
        if config.dynamics == Dynamics::DynamicAlpha {
            push!(Coord::LogSigma2Alpha, "log_sigma2_alpha".into());
        }
        if config.dynamics == Dynamics::DynamicBeta {
            push!(Coord::LogSigma2Beta, "log_sigma2_beta".into());
        }

        let dynamic_periods = data.rounds.len().max(1);
        let alpha_periods = if config.dynamics == Dynamics::DynamicAlpha {
            dynamic_periods
        } else {
            1
        };
        let beta_periods = if config.dynamics == Dynamics::DynamicBeta {
            dynamic_periods
        } else {
            1
        };
        let rounds = if config.dynamics == Dynamics::None {
            Vec::new()
        } else {
            data.rounds.clone()
        };
        let label = |team: usize, period: usize, periods: usize| {
            if periods > 1 {
                format!("{}@{}", data.team_names[team], rounds[period])
            } else {
                data.team_names[team].clone()
            }
        };

        let alpha_teams: Vec<usize> = if !config.has_set_abilities() {
            Vec::new()
        } else if config.extra_set_ability_teams.is_empty() {
            (0..n).collect()
        } else {
            let mut ids = Vec::new();
            for pattern in &config.extra_set_ability_teams {
                let id = registry
                    .resolve(pattern)
                    .map_err(|e| Error::Config(format!("extra_set_ability_teams: {e}")))?;
                if !ids.contains(&id.0) {
                    ids.push(id.0);
                }
            }
            ids.sort_unstable();
            ids
        };

        let mut next = coords.len();
        let mut alpha_index = Vec::new();
        if !alpha_teams.is_empty() {
            for p in 0..alpha_periods {
                let mut row = vec![None; n];
                for &t in &alpha_teams {
                    row[t] = Some(next);
                    next += 1;
                    push!(
                        Coord::Alpha { period: p, team: t },
                        format!("alpha*[{}]", label(t, p, alpha_periods)),
                    );
                }
                alpha_index.push(row);
            }
        }
        let split = config.attack_defence_split;
        let beta_name = if split { "beta_att*" } else { "beta*" };
        let mut beta_index = Vec::new();
        for p in 0..beta_periods {
            let mut row = Vec::with_capacity(n);
            for t in 0..n {
                row.push(next);
                next += 1;
                push!(
                    Coord::Beta { period: p, team: t },
                    format!("{beta_name}[{}]", label(t, p, beta_periods)),
                );
            }
            beta_index.push(row);
        }
        let mut def_index = Vec::new();
        if split {
            for t in 0..n {
                def_index.push(next);
                next += 1;
                push!(Coord::BetaDef { team: t }, format!("beta_def*[{}]", data.team_names[t]));
            }
        }
        let eps_games = if config.random_effects {
            data.games.clone()
        } else {
            Vec::new()
        };
        let mut eps_index = Vec::new();
        for (g, id) in eps_games.iter().enumerate() {
            eps_index.push(next);
            next += 1;
            push!(Coord::Eps(g), format!("eps[{id}]"));
        }
        debug_assert_eq!(next, coords.len());

        let mut scalar_index = [None; 13];
        for (i, c) in coords.iter().enumerate() {
            if let Some(slot) = scalar_slot(*c) {
                scalar_index[slot] = Some(i);
            }
        }
        Ok(Layout {
            coords,
            names,
            n_teams: n,
            team_names: data.team_names.clone(),
            alpha_teams,
            alpha_periods,
            beta_periods,
            split,
            rounds,
            eps_games,
            alpha_index,
            beta_index,
            def_index,
            eps_index,
            scalar_index,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn index_of(&self, c: Coord) -> Option<usize> {
        match scalar_slot(c) {
            Some(slot) => self.scalar_index[slot],
            None => self.coords.iter().position(|&d| d == c),
        }
    }

    /// Value of a scalar coordinate on its stored scale, or `default`.
    #[inline]
    pub fn scalar(&self, x: &[f64], c: Coord, default: f64) -> f64 {
        match scalar_slot(c).and_then(|s| self.scalar_index[s]) {
            Some(i) => x[i],
            None => default,
        }
    }

    pub fn to_state(&self, x: &[f64]) -> ParameterState {
        let s = |c, d| self.scalar(x, c, d);
        let alpha_star = self
            .alpha_index
            .iter()
            .map(|row| row.iter().map(|i| i.map_or(0.0, |i| x[i])).collect())
            .collect();
        let beta_star = self
            .beta_index
            .iter()
            .map(|row| row.iter().map(|&i| x[i]).collect())
            .collect();
        let beta_def_star = if self.split {
            vec![self.def_index.iter().map(|&i| x[i]).collect()]
        } else {
            Vec::new()
        };
        ParameterState {
            mu: s(Coord::Mu, 0.0),
            h_set: s(Coord::HSet, 0.0),
            h_point: s(Coord::HPoint, 0.0),
            theta: s(Coord::Theta, 0.0),
            m: s(Coord::M, 0.0),
            delta: s(Coord::Delta, 0.0),
            gamma: s(Coord::Gamma, 0.0),
            delta_sq: s(Coord::DeltaSq, 0.0),
            gamma_sq: s(Coord::GammaSq, 0.0),
            lambda: s(Coord::LogLambda, 0.0).exp(),
            alpha_star,
            beta_star,
            beta_def_star,
            eps: self.eps_index.iter().map(|&i| x[i]).collect(),
            eps_games: self.eps_games.clone(),
            sigma2_eps: s(Coord::LogSigma2Eps, 0.0).exp(),
            sigma2_alpha: s(Coord::LogSigma2Alpha, 0.0).exp(),
            sigma2_beta: s(Coord::LogSigma2Beta, 0.0).exp(),
            rounds: self.rounds.clone(),
        }
    }

    /// Unconstrained coordinates of `state`. Fails if the state's shape
    /// does not match the layout or a positive parameter is not positive.
    pub fn to_unconstrained(&self, state: &ParameterState) -> Result<Vec<f64>> {
        let shape_err = |what: &str| Error::Data(format!("parameter state does not match model: {what}"));
        if state.beta_star.len() != self.beta_periods
            || state.beta_star.iter().any(|r| r.len() != self.n_teams)
        {
            return Err(shape_err("beta"));
        }
        let alpha_periods = if self.alpha_teams.is_empty() { 0 } else { self.alpha_periods };
        if state.alpha_star.len() != alpha_periods
            || state.alpha_star.iter().any(|r| r.len() != self.n_teams)
        {
            return Err(shape_err("alpha"));
        }
        if self.split != !state.beta_def_star.is_empty() {
            return Err(shape_err("attack/defence split"));
        }
        if state.eps_games != self.eps_games || state.eps.len() != self.eps_games.len() {
            return Err(shape_err("game random effects"));
        }
        if state.rounds != self.rounds {
            return Err(shape_err("dynamic rounds"));
        }
        let log = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(v.ln())
            } else {
                Err(Error::Domain(crate::error::DomainError(format!(
                    "{what} = {v} must be positive"
                ))))
            }
        };
        let mut x = Vec::with_capacity(self.dim());
        for &c in &self.coords {
            x.push(match c {
                Coord::Mu => state.mu,
                Coord::HSet => state.h_set,
                Coord::HPoint => state.h_point,
                Coord::Theta => state.theta,
                Coord::M => state.m,
                Coord::Delta => state.delta,
                Coord::Gamma => state.gamma,
                Coord::DeltaSq => state.delta_sq,
                Coord::GammaSq => state.gamma_sq,
                Coord::LogLambda => log(state.lambda, "lambda")?,
                Coord::LogSigma2Eps => log(state.sigma2_eps, "sigma2_eps")?,
                Coord::LogSigma2Alpha => log(state.sigma2_alpha, "sigma2_alpha")?,
                Coord::LogSigma2Beta => log(state.sigma2_beta, "sigma2_beta")?,
                Coord::Eps(g) => state.eps[g],
                Coord::Alpha { period, team } => state.alpha_star[period][team],
                Coord::Beta { period, team } => state.beta_star[period][team],
                Coord::BetaDef { team } => state.beta_def_star[0][team],
            });
        }
        Ok(x)
    }

    /// Names of the natural-scale summary columns, matching
    /// [`Layout::natural_row`].
    pub fn natural_columns(&self, config: &ModelConfig) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        for &c in &self.coords {
            let name = match c {
                Coord::Mu => "mu",
                Coord::HSet => "H_set",
                Coord::HPoint => "H_point",
                Coord::Theta => "theta",
                Coord::M => "m",
                Coord::Delta => "delta",
                Coord::Gamma => "gamma",
                Coord::DeltaSq => "delta_sq",
                Coord::GammaSq => "gamma_sq",
                Coord::LogLambda => "lambda",
                Coord::LogSigma2Eps => "sigma2_eps",
                Coord::LogSigma2Alpha => "sigma2_alpha",
                Coord::LogSigma2Beta => "sigma2_beta",
                _ => continue,
            };
            cols.push(name.to_string());
        }
        let periods_label = |p: usize, periods: usize, t: usize| {
            if periods > 1 {
                format!("{}@{}", self.team_names[t], self.rounds[p])
            } else {
                self.team_names[t].clone()
            }
        };
        for p in 0..self.alpha_index.len() {
            for &t in &self.alpha_teams {
                cols.push(format!("alpha[{}]", periods_label(p, self.alpha_periods, t)));
            }
        }
        for p in 0..self.beta_periods {
            for t in 0..self.n_teams {
                cols.push(format!("beta[{}]", periods_label(p, self.beta_periods, t)));
            }
        }
        if self.split {
            for t in 0..self.n_teams {
                cols.push(format!("beta_att[{}]", self.team_names[t]));
            }
            for t in 0..self.n_teams {
                cols.push(format!("beta_def[{}]", self.team_names[t]));
            }
        }
        if config.dynamics == Dynamics::None {
            for t in 0..self.n_teams {
                cols.push(format!("alpha_prime[{}]", self.team_names[t]));
            }
        }
        for id in &self.eps_games {
            cols.push(format!("eps[{id}]"));
        }
        cols
    }

    /// Natural-scale values with abilities after the constraints.
    pub fn natural_row(&self, config: &ModelConfig, state: &ParameterState) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.dim() + 2 * self.n_teams);
        for &c in &self.coords {
            row.push(match c {
                Coord::Mu => state.mu,
                Coord::HSet => state.h_set,
                Coord::HPoint => state.h_point,
                Coord::Theta => state.theta,
                Coord::M => state.m,
                Coord::Delta => state.delta,
                Coord::Gamma => state.gamma,
                Coord::DeltaSq => state.delta_sq,
                Coord::GammaSq => state.gamma_sq,
                Coord::LogLambda => state.lambda,
                Coord::LogSigma2Eps => state.sigma2_eps,
                Coord::LogSigma2Alpha => state.sigma2_alpha,
                Coord::LogSigma2Beta => state.sigma2_beta,
                _ => continue,
            });
        }
        let all_alpha = config.extra_set_ability_teams.is_empty();
        for table in &state.alpha_star {
            let vals = if all_alpha { center_stz(table) } else { table.clone() };
            row.extend(self.alpha_teams.iter().map(|&t| vals[t]));
        }
        let def = state.beta_def_star.first().map(|d| center_stz(d));
        for table in &state.beta_star {
            let mut beta = center_stz(table);
            if let Some(def) = &def {
                for (b, d) in beta.iter_mut().zip(def) {
                    *b += d;
                }
            }
            row.extend(beta);
        }
        if let Some(def) = &def {
            row.extend(center_stz(&state.beta_star[0]));
            row.extend(def.iter().copied());
        }
        if config.dynamics == Dynamics::None {
            row.extend(state.derived(config, 0).alpha_prime);
        }
        row.extend(state.eps.iter().copied());
        row
    }
}
