//! Per-set laws and expected points.

use statrs::distribution::{DiscreteCDF, Poisson};

use super::config::{ModelConfig, PointModel};
use super::dist::{inv_logit, trunc_negbin_mean, zip_zero_mass};
use super::likelihood::{point_eta, Scalars};
use super::state::ParameterState;
use crate::data::{set_target, TeamId};

/// Everything needed to draw one set between two fixed teams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetLaw {
    /// Probability the home side wins the set.
    pub omega: f64,
    /// Winner's point probability when the home side wins.
    pub p_home_won: f64,
    /// Winner's point probability when the away side wins.
    pub p_away_won: f64,
    /// Zero-inflation probability; zero for the plain Poisson extra points.
    pub pi: f64,
    pub lambda: f64,
    pub point_model: PointModel,
}

impl SetLaw {
    /// A law whose point probability does not depend on the winner.
    pub fn fixed(omega: f64, p: f64, pi: f64, lambda: f64) -> SetLaw {
        SetLaw {
            omega,
            p_home_won: p,
            p_away_won: p,
            pi,
            lambda,
            point_model: PointModel::ZipTruncNegBin,
        }
    }

    /// Law of the sets of one match. `eps` is the game random effect.
    pub fn for_match(
        state: &ParameterState,
        config: &ModelConfig,
        home: TeamId,
        away: TeamId,
        round: u32,
        eps: f64,
    ) -> SetLaw {
        let sc = Scalars::from_state(state, config);
        let d = state.matchup(home, away, round);
        let p = |won| 1.0 / (1.0 + point_eta(sc.mu, sc.h_point, won, d.beta_diff, eps).exp());
        let pi = if config.point_model == PointModel::ZipTruncNegBin {
            inv_logit(sc.tie_logit(config.phi_form, d))
        } else {
            0.0
        };
        SetLaw {
            omega: inv_logit(sc.set_logit(d)),
            p_home_won: p(true),
            p_away_won: p(false),
            pi,
            lambda: state.lambda,
            point_model: config.point_model,
        }
    }

    /// Mean of the loser's baseline points before the deuce adjustment.
    pub fn loser_baseline_mean(&self, r: u32, p: f64) -> f64 {
        match self.point_model {
            PointModel::Poisson => clamped_poisson_mean(r as f64 * (1.0 - p) / p, r - 2),
            _ => trunc_negbin_mean(r, p),
        }
    }

    /// Expected `(home, away)` points under the simulation law, where a set
    /// with extra points ends `r + O` to `r - 2 + O`.
    pub fn expected_points(&self, set_index: u8) -> (f64, f64) {
        let r = set_target(set_index);
        let extra = (1.0 - self.pi) * self.lambda;
        let deuce = 1.0 - zip_zero_mass(self.pi, self.lambda);
        let loser = |p: f64| {
            let y = self.loser_baseline_mean(r, p);
            y + extra + deuce * ((r - 2) as f64 - y)
        };
        let winner = r as f64 + extra;
        let w = self.omega;
        (
            w * winner + (1.0 - w) * loser(self.p_away_won),
            w * loser(self.p_home_won) + (1.0 - w) * winner,
        )
    }

    /// Expected points taking `Y` and `O` as independent, ignoring the
    /// deuce adjustment of the loser's score.
    pub fn expected_points_unconstrained(&self, set_index: u8) -> (f64, f64) {
        let r = set_target(set_index);
        let extra = (1.0 - self.pi) * self.lambda;
        let w = self.omega;
        (
            w * r as f64 + (1.0 - w) * self.loser_baseline_mean(r, self.p_away_won) + extra,
            w * self.loser_baseline_mean(r, self.p_home_won) + (1.0 - w) * r as f64 + extra,
        )
    }
}

/// `E[min(Y, cap)]` for `Y ~ Poisson(rate)`.
fn clamped_poisson_mean(rate: f64, cap: u32) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    let pois = Poisson::new(rate).expect("positive rate");
    // E[min(Y, c)] = sum_{k=0}^{c-1} P(Y > k)
    (0..cap).map(|k| pois.sf(k as u64)).sum()
}

/// Expected `(home, away)` points of one set under the simulation law.
pub fn expected_team_points(
    state: &ParameterState,
    config: &ModelConfig,
    home: TeamId,
    away: TeamId,
    set_index: u8,
    round: u32,
) -> (f64, f64) {
    SetLaw::for_match(state, config, home, away, round, 0.0).expected_points(set_index)
}
