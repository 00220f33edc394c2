use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use crate::data::TeamId;

/// One point in parameter space, on the natural scale.
///
/// Ability tables are indexed `[period][team]`. Static models have one
/// period; dynamic tables have one period per entry of `rounds`. A model
/// without set abilities has an empty `alpha_star`, and `beta_def_star` is
/// empty unless attack and defence are split (then `beta_star` holds the
/// attack part).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterState {
    pub mu: f64,
    pub h_set: f64,
    pub h_point: f64,
    pub theta: f64,
    pub m: f64,
    pub delta: f64,
    pub gamma: f64,
    pub delta_sq: f64,
    pub gamma_sq: f64,
    pub lambda: f64,
    pub alpha_star: Vec<Vec<f64>>,
    pub beta_star: Vec<Vec<f64>>,
    pub beta_def_star: Vec<Vec<f64>>,
    /// Game random effects, aligned with `eps_games`.
    pub eps: Vec<f64>,
    pub eps_games: Vec<u32>,
    pub sigma2_eps: f64,
    pub sigma2_alpha: f64,
    pub sigma2_beta: f64,
    /// Round label of each dynamic period; empty for static models.
    pub rounds: Vec<u32>,
}

/// Ability differences entering one matchup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matchup {
    /// `alpha_A - alpha_B`, zero without set abilities.
    pub alpha_diff: f64,
    /// `beta_A - beta_B`.
    pub beta_diff: f64,
}

impl ParameterState {
    /// The initial point: abilities and real parameters at zero, `m = 2`,
    /// `lambda` and variances at one.
    pub fn initial(
        config: &ModelConfig,
        n_teams: usize,
        rounds: &[u32],
        eps_games: &[u32],
    ) -> ParameterState {
        let periods = |dynamic: bool| if dynamic { rounds.len().max(1) } else { 1 };
        let alpha_periods = periods(config.dynamics == super::Dynamics::DynamicAlpha);
        let beta_periods = periods(config.dynamics == super::Dynamics::DynamicBeta);
        let dynamic = config.dynamics != super::Dynamics::None;
        let random = config.random_effects;
        ParameterState {
            mu: 0.0,
            h_set: 0.0,
            h_point: 0.0,
            theta: 0.0,
            m: 2.0,
            delta: 0.0,
            gamma: 0.0,
            delta_sq: 0.0,
            gamma_sq: 0.0,
            lambda: 1.0,
            alpha_star: if config.has_set_abilities() {
                vec![vec![0.0; n_teams]; alpha_periods]
            } else {
                Vec::new()
            },
            beta_star: vec![vec![0.0; n_teams]; beta_periods],
            beta_def_star: if config.attack_defence_split {
                vec![vec![0.0; n_teams]]
            } else {
                Vec::new()
            },
            eps: if random { vec![0.0; eps_games.len()] } else { Vec::new() },
            eps_games: if random { eps_games.to_vec() } else { Vec::new() },
            sigma2_eps: 1.0,
            sigma2_alpha: 1.0,
            sigma2_beta: 1.0,
            rounds: if dynamic { rounds.to_vec() } else { Vec::new() },
        }
    }

    pub fn n_teams(&self) -> usize {
        self.beta_star.first().map_or(0, Vec::len)
    }

    /// Period holding the abilities for `round` in a table of `len` periods.
    /// Rounds after the last fitted one use the last period.
    pub fn period(&self, len: usize, round: u32) -> usize {
        if len <= 1 {
            return 0;
        }
        let idx = self.rounds.partition_point(|&r| r <= round);
        idx.saturating_sub(1).min(len - 1)
    }

    pub fn matchup(&self, home: TeamId, away: TeamId, round: u32) -> Matchup {
        let (h, a) = (home.0, away.0);
        let alpha_diff = if self.alpha_star.is_empty() {
            0.0
        } else {
            let row = &self.alpha_star[self.period(self.alpha_star.len(), round)];
            row[h] - row[a]
        };
        let row = &self.beta_star[self.period(self.beta_star.len(), round)];
        let mut beta_diff = row[h] - row[a];
        if let Some(def) = self.beta_def_star.first() {
            beta_diff += def[h] - def[a];
        }
        Matchup {
            alpha_diff,
            beta_diff,
        }
    }

    /// Centered abilities and `alpha' = v1 alpha + v2 theta beta` at the
    /// period covering `round`.
    pub fn derived(&self, config: &ModelConfig, round: u32) -> DerivedAbilities {
        let n = self.n_teams();
        let alpha = if self.alpha_star.is_empty() {
            vec![0.0; n]
        } else {
            let row = &self.alpha_star[self.period(self.alpha_star.len(), round)];
            if config.extra_set_ability_teams.is_empty() {
                center_stz(row)
            } else {
                row.clone()
            }
        };
        let mut beta = center_stz(&self.beta_star[self.period(self.beta_star.len(), round)]);
        if let Some(def) = self.beta_def_star.first() {
            for (b, d) in beta.iter_mut().zip(center_stz(def)) {
                *b += d;
            }
        }
        let theta = if config.ability_mode.v2() { self.theta } else { 0.0 };
        let alpha_prime = alpha
            .iter()
            .zip(&beta)
            .map(|(a, b)| a + theta * b)
            .collect();
        DerivedAbilities {
            alpha,
            beta,
            alpha_prime,
        }
    }

    /// Elementwise combination of a non-empty slice of states with the
    /// same shape, one field at a time.
    fn combine(states: &[ParameterState], f: impl Fn(&mut Vec<f64>) -> f64) -> ParameterState {
        let first = &states[0];
        let mut buf = Vec::with_capacity(states.len());
        let mut scalar = |get: &dyn Fn(&ParameterState) -> f64| {
            buf.clear();
            buf.extend(states.iter().map(get));
            f(&mut buf)
        };
        let mut out = first.clone();
        out.mu = scalar(&|s| s.mu);
        out.h_set = scalar(&|s| s.h_set);
        out.h_point = scalar(&|s| s.h_point);
        out.theta = scalar(&|s| s.theta);
        out.m = scalar(&|s| s.m);
        out.delta = scalar(&|s| s.delta);
        out.gamma = scalar(&|s| s.gamma);
        out.delta_sq = scalar(&|s| s.delta_sq);
        out.gamma_sq = scalar(&|s| s.gamma_sq);
        out.lambda = scalar(&|s| s.lambda);
        out.sigma2_eps = scalar(&|s| s.sigma2_eps);
        out.sigma2_alpha = scalar(&|s| s.sigma2_alpha);
        out.sigma2_beta = scalar(&|s| s.sigma2_beta);
        for g in 0..first.eps.len() {
            out.eps[g] = scalar(&|s| s.eps[g]);
        }
        type Table = fn(&ParameterState) -> &Vec<Vec<f64>>;
        let tables: [(Table, fn(&mut ParameterState) -> &mut Vec<Vec<f64>>); 3] = [
            (|s| &s.alpha_star, |s| &mut s.alpha_star),
            (|s| &s.beta_star, |s| &mut s.beta_star),
            (|s| &s.beta_def_star, |s| &mut s.beta_def_star),
        ];
        for (get, get_mut) in tables {
            for p in 0..get(first).len() {
                for t in 0..get(first)[p].len() {
                    get_mut(&mut out)[p][t] = scalar(&|s| get(s)[p][t]);
                }
            }
        }
        out
    }

    /// Posterior mean on the natural scale. Panics on an empty slice.
    pub fn mean(states: &[ParameterState]) -> ParameterState {
        Self::combine(states, |v| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Elementwise posterior median. Panics on an empty slice.
    pub fn median(states: &[ParameterState]) -> ParameterState {
        Self::combine(states, |v| crate::inference::quantile(v, 0.5))
    }
}

/// Abilities after the identifiability constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedAbilities {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha_prime: Vec<f64>,
}

/// Sum-to-zero centering.
pub fn center_stz(starred: &[f64]) -> Vec<f64> {
    if starred.is_empty() {
        return Vec::new();
    }
    let mean = starred.iter().sum::<f64>() / starred.len() as f64;
    starred.iter().map(|v| v - mean).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn centering_examples() {
        assert_eq!(center_stz(&[0.0; 4]), vec![0.0; 4]);
        assert_eq!(center_stz(&[1.0, 2.0, 3.0]), vec![-1.0, 0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn centered_sums_to_zero(v in prop::collection::vec(-50.0f64..50.0, 2..30)) {
            let c = center_stz(&v);
            prop_assert!(c.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn period_lookup() {
        let cfg = ModelConfig::preset(10).unwrap();
        let s = ParameterState::initial(&cfg, 4, &[1, 2, 5], &[]);
        assert_eq!(s.beta_star.len(), 3);
        assert_eq!(s.period(3, 1), 0);
        assert_eq!(s.period(3, 4), 1);
        assert_eq!(s.period(3, 5), 2);
        assert_eq!(s.period(3, 40), 2);
        assert_eq!(s.period(1, 40), 0);
    }

    #[test]
    fn split_sums_attack_and_defence() {
        let cfg = ModelConfig::preset(5).unwrap();
        let mut s = ParameterState::initial(&cfg, 3, &[], &[]);
        s.beta_star[0] = vec![1.0, 0.0, -1.0];
        s.beta_def_star[0] = vec![0.5, 0.5, 2.0];
        let d = s.derived(&cfg, 0);
        assert!((d.beta[0] - (1.0 - 0.5)).abs() < 1e-12);
        assert!(d.beta.iter().sum::<f64>().abs() < 1e-12);
        let m = s.matchup(TeamId(0), TeamId(2), 0);
        assert!((m.beta_diff - (d.beta[0] - d.beta[2])).abs() < 1e-12);
    }

    #[test]
    fn mean_and_median() {
        let cfg = ModelConfig::preset(9).unwrap();
        let mut a = ParameterState::initial(&cfg, 2, &[], &[]);
        let mut b = a.clone();
        let mut c = a.clone();
        a.lambda = 1.0;
        b.lambda = 2.0;
        c.lambda = 6.0;
        a.beta_star[0][1] = 3.0;
        let states = [a, b, c];
        assert_eq!(ParameterState::mean(&states).lambda, 3.0);
        assert_eq!(ParameterState::median(&states).lambda, 2.0);
        assert_eq!(ParameterState::mean(&states).beta_star[0][1], 1.0);
    }
}
