//! Set-level likelihood: Bernoulli set winner, loser's baseline points and
//! extra points.

use super::config::{ModelConfig, PhiForm, PointModel};
use super::dist::{inv_logit, ln_inv_logit, TruncNegBin};
use super::layout::{CompiledSet, Coord, Layout};
use super::state::{Matchup, ParameterState};
use crate::data::TeamId;

/// Component bits for partial evaluation.
pub const SET: u8 = 1;
pub const POINT: u8 = 2;
pub const EXTRA: u8 = 4;
pub const ALL: u8 = SET | POINT | EXTRA;

/// The non-ability parameters, read once per evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Scalars {
    pub mu: f64,
    pub h_set: f64,
    pub h_point: f64,
    /// Zero when `v2 = 0`.
    pub theta: f64,
    pub m: f64,
    pub delta: f64,
    pub gamma: f64,
    pub delta_sq: f64,
    pub gamma_sq: f64,
    pub lambda: f64,
    pub ln_lambda: f64,
}

impl Scalars {
    pub fn from_state(state: &ParameterState, config: &ModelConfig) -> Scalars {
        Scalars {
            mu: state.mu,
            h_set: state.h_set,
            h_point: state.h_point,
            theta: if config.ability_mode.v2() { state.theta } else { 0.0 },
            m: state.m,
            delta: state.delta,
            gamma: state.gamma,
            delta_sq: state.delta_sq,
            gamma_sq: state.gamma_sq,
            lambda: state.lambda,
            ln_lambda: state.lambda.ln(),
        }
    }

    pub fn from_x(layout: &Layout, x: &[f64]) -> Scalars {
        let s = |c| layout.scalar(x, c, 0.0);
        let ln_lambda = s(Coord::LogLambda);
        Scalars {
            mu: s(Coord::Mu),
            h_set: s(Coord::HSet),
            h_point: s(Coord::HPoint),
            theta: s(Coord::Theta),
            m: s(Coord::M),
            delta: s(Coord::Delta),
            gamma: s(Coord::Gamma),
            delta_sq: s(Coord::DeltaSq),
            gamma_sq: s(Coord::GammaSq),
            lambda: ln_lambda.exp(),
            ln_lambda,
        }
    }

    #[inline]
    pub fn set_logit(&self, d: Matchup) -> f64 {
        self.h_set + d.alpha_diff + self.theta * d.beta_diff
    }

    #[inline]
    pub fn tie_logit(&self, phi: PhiForm, d: Matchup) -> f64 {
        if phi == PhiForm::Null {
            return self.m;
        }
        let (a1, a2) = phi.basis(d.alpha_diff);
        let (b1, b2) = phi.basis(d.beta_diff);
        self.m + self.delta * a1 + self.delta_sq * a2 + self.gamma * b1 + self.gamma_sq * b2
    }
}

/// `eta = mu + (1 - W) H_point + (beta_A - beta_B)(1 - 2W) + eps`.
#[inline]
pub fn point_eta(mu: f64, h_point: f64, home_won: bool, beta_diff: f64, eps: f64) -> f64 {
    if home_won {
        mu - beta_diff + eps
    } else {
        mu + h_point + beta_diff + eps
    }
}

/// Log-likelihood contribution of one set, restricted to the components in
/// `mask`.
#[inline]
pub fn set_loglik(
    sc: &Scalars,
    config: &ModelConfig,
    s: &CompiledSet,
    d: Matchup,
    eps: f64,
    mask: u8,
) -> f64 {
    let mut ll = 0.0;
    if mask & SET != 0 {
        let x = sc.set_logit(d);
        ll += if s.home_won {
            ln_inv_logit(x)
        } else {
            ln_inv_logit(-x)
        };
    }
    if mask & POINT != 0 {
        let eta = point_eta(sc.mu, sc.h_point, s.home_won, d.beta_diff, eps);
        ll += match config.point_model {
            PointModel::Poisson => {
                // log(rate) = log r + eta
                s.y as f64 * (s.ln_r + eta) - (s.ln_r + eta).exp() - s.ln_y_fact
            }
            _ => {
                // q = 1 - p = e^eta / (1 + e^eta)
                let q = inv_logit(eta);
                TruncNegBin::for_target(s.r).ln_pmf_q(s.y, q, ln_inv_logit(eta))
            }
        };
    }
    if mask & EXTRA != 0 {
        let poisson_tail = |o: u32| o as f64 * sc.ln_lambda - sc.lambda - s.ln_o_fact;
        ll += if config.point_model == PointModel::ZipTruncNegBin {
            let t = sc.tie_logit(config.phi_form, d);
            if s.o == 0 {
                let pi = inv_logit(t);
                (pi + (1.0 - pi) * (-sc.lambda).exp()).ln()
            } else {
                ln_inv_logit(-t) + poisson_tail(s.o)
            }
        } else if s.o == 0 {
            -sc.lambda
        } else {
            poisson_tail(s.o)
        };
    }
    ll
}

/// Ability differences of a compiled set read straight from coordinates.
#[inline]
pub fn matchup_x(layout: &Layout, x: &[f64], s: &CompiledSet) -> Matchup {
    let alpha_diff = if layout.alpha_index.is_empty() {
        0.0
    } else {
        let row = &layout.alpha_index[if layout.alpha_periods > 1 { s.period } else { 0 }];
        row[s.home].map_or(0.0, |i| x[i]) - row[s.away].map_or(0.0, |i| x[i])
    };
    let row = &layout.beta_index[if layout.beta_periods > 1 { s.period } else { 0 }];
    let mut beta_diff = x[row[s.home]] - x[row[s.away]];
    if layout.split {
        beta_diff += x[layout.def_index[s.home]] - x[layout.def_index[s.away]];
    }
    Matchup {
        alpha_diff,
        beta_diff,
    }
}

#[inline]
pub fn eps_x(layout: &Layout, x: &[f64], s: &CompiledSet) -> f64 {
    if layout.eps_index.is_empty() {
        0.0
    } else {
        x[layout.eps_index[s.game]]
    }
}

/// Sum over `sets` on unconstrained coordinates.
pub fn loglik_x<'a>(
    layout: &Layout,
    config: &ModelConfig,
    x: &[f64],
    sets: impl Iterator<Item = &'a CompiledSet>,
    mask: u8,
) -> f64 {
    let sc = Scalars::from_x(layout, x);
    sets.map(|s| set_loglik(&sc, config, s, matchup_x(layout, x, s), eps_x(layout, x, s), mask))
        .sum()
}

/// Set-win probability `omega` for a matchup played in `round`.
pub fn set_win_prob(
    state: &ParameterState,
    config: &ModelConfig,
    home: TeamId,
    away: TeamId,
    round: u32,
) -> f64 {
    let sc = Scalars::from_state(state, config);
    inv_logit(sc.set_logit(state.matchup(home, away, round)))
}

/// Linear predictor of the loser's points; `p = 1 / (1 + e^eta)`.
pub fn point_linear_predictor(
    state: &ParameterState,
    home: TeamId,
    away: TeamId,
    round: u32,
    home_won: bool,
    eps: f64,
) -> f64 {
    let d = state.matchup(home, away, round);
    point_eta(state.mu, state.h_point, home_won, d.beta_diff, eps)
}

/// Probability `pi` of no extra points.
pub fn tie_prob(
    state: &ParameterState,
    config: &ModelConfig,
    home: TeamId,
    away: TeamId,
    round: u32,
) -> f64 {
    if config.point_model != PointModel::ZipTruncNegBin {
        return 0.0;
    }
    let sc = Scalars::from_state(state, config);
    inv_logit(sc.tie_logit(config.phi_form, state.matchup(home, away, round)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::dist::{trunc_negbin_logpmf, zip_logpmf};

    fn state9(n: usize) -> (ModelConfig, ParameterState) {
        let cfg = ModelConfig::preset(9).unwrap();
        let s = ParameterState::initial(&cfg, n, &[], &[]);
        (cfg, s)
    }

    #[test]
    fn set_probabilities() {
        let (cfg, mut s) = state9(4);
        s.h_set = 0.0;
        assert!((set_win_prob(&s, &cfg, TeamId(0), TeamId(1), 1) - 0.5).abs() < 1e-15);
        s.h_set = 0.16;
        assert!((set_win_prob(&s, &cfg, TeamId(0), TeamId(1), 1) - 0.539_914).abs() < 1e-5);
        s.alpha_star[0] = vec![0.3, 0.0, 0.0, 0.0];
        s.beta_star[0] = vec![0.1, 0.0, 0.0, 0.0];
        s.theta = 4.6;
        let want = inv_logit(0.16 + 0.3 + 0.46);
        assert!((set_win_prob(&s, &cfg, TeamId(0), TeamId(1), 1) - want).abs() < 1e-15);
    }

    #[test]
    fn point_predictor() {
        let (_, mut s) = state9(2);
        s.mu = 0.36;
        let eta = point_linear_predictor(&s, TeamId(0), TeamId(1), 1, true, 0.0);
        assert!((eta - 0.36).abs() < 1e-15);
        assert!((1.0 / (1.0 + eta.exp()) - 0.410_96).abs() < 1e-4);
        s.h_point = 0.20;
        let eta = point_linear_predictor(&s, TeamId(0), TeamId(1), 1, false, 0.0);
        assert!((eta - 0.56).abs() < 1e-15);
        s.beta_star[0] = vec![0.25, -0.05];
        let d = 0.3;
        let w1 = point_linear_predictor(&s, TeamId(0), TeamId(1), 1, true, 0.0);
        let w0 = point_linear_predictor(&s, TeamId(0), TeamId(1), 1, false, 0.0);
        assert!((w1 - (0.36 - d)).abs() < 1e-12);
        assert!((w0 - (0.36 + 0.20 + d)).abs() < 1e-12);
    }

    #[test]
    fn tie_probabilities() {
        let (mut cfg, mut s) = state9(2);
        s.m = 1.3;
        assert!((tie_prob(&s, &cfg, TeamId(0), TeamId(1), 1) - inv_logit(1.3)).abs() < 1e-15);
        cfg.phi_form = PhiForm::Linear;
        s.beta_star[0] = vec![0.5, -0.5];
        assert!((tie_prob(&s, &cfg, TeamId(0), TeamId(1), 1) - inv_logit(1.3)).abs() < 1e-15);
        cfg.phi_form = PhiForm::AbsLinear;
        s.gamma = -0.8;
        let mut last = f64::INFINITY;
        for k in 0..10 {
            let d = k as f64 * 0.2;
            s.beta_star[0] = vec![d / 2.0, -d / 2.0];
            let p = tie_prob(&s, &cfg, TeamId(0), TeamId(1), 1);
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn composed_set_matches_components() {
        let (cfg, mut s) = state9(2);
        s.mu = 0.36;
        s.h_set = 0.16;
        s.h_point = 0.2;
        s.theta = 4.6;
        s.m = 2.12;
        s.lambda = 3.97;
        s.beta_star[0] = vec![0.1, -0.2];
        let sc = Scalars::from_state(&s, &cfg);
        let d = s.matchup(TeamId(0), TeamId(1), 1);
        for (won, y, o, r) in [(true, 20, 0, 25), (false, 23, 3, 25), (true, 13, 1, 15)] {
            let set = CompiledSet {
                home: 0,
                away: 1,
                period: 0,
                game: 0,
                home_won: won,
                r,
                y,
                o,
                ln_r: (r as f64).ln(),
                ln_y_fact: statrs::function::gamma::ln_gamma(y as f64 + 1.0),
                ln_o_fact: statrs::function::gamma::ln_gamma(o as f64 + 1.0),
            };
            let omega = inv_logit(0.16 + 4.6 * 0.3);
            let bern = if won { omega.ln() } else { (1.0 - omega).ln() };
            let eta = if won { 0.36 - 0.3 } else { 0.36 + 0.2 + 0.3 };
            let p = 1.0 / (1.0 + f64::exp(eta));
            let nb = trunc_negbin_logpmf(y, r, p).unwrap();
            let zip = zip_logpmf(o, inv_logit(2.12), 3.97);
            let got = set_loglik(&sc, &cfg, &set, d, 0.0, ALL);
            assert!((got - (bern + nb + zip)).abs() < 1e-12, "{got} vs {}", bern + nb + zip);
            let parts: f64 = [SET, POINT, EXTRA]
                .iter()
                .map(|&m| set_loglik(&sc, &cfg, &set, d, 0.0, m))
                .sum();
            assert!((parts - got).abs() < 1e-12);
        }
    }
}
