//! Priors over the unconstrained coordinates.
//!
//! Dynamic abilities follow a random walk starting from zero:
//! `a[T,1] ~ N(0, s2)`, `a[T,G] ~ N(a[T,G-1], s2)`. They replace the static
//! `N(0, ability_sd^2)` prior for that ability family.

use super::config::{Dynamics, ModelConfig};
use super::dist::{inv_gamma_logpdf, lognormal_logpdf, normal_logpdf};
use super::layout::{Coord, Layout};

/// Log prior density on the coordinates `x`, optionally restricted to the
/// factors that involve coordinate `which`. With `jacobian` the density is
/// that of `x` itself (log-scale coordinates gain `+x`).
pub fn prior_x(
    layout: &Layout,
    config: &ModelConfig,
    x: &[f64],
    which: Option<usize>,
    jacobian: bool,
) -> f64 {
    let pr = &config.priors;
    let touches = |c: usize| which.is_none_or(|w| w == c);
    let sigma_eps = layout.index_of(Coord::LogSigma2Eps);
    let sigma_alpha = layout.index_of(Coord::LogSigma2Alpha);
    let sigma_beta = layout.index_of(Coord::LogSigma2Beta);
    let sd_of = |i: Option<usize>| i.map_or(1.0, |i| (0.5 * x[i]).exp());
    let jac = |v: f64| if jacobian { v } else { 0.0 };
    let dyn_alpha = config.dynamics == Dynamics::DynamicAlpha;
    let dyn_beta = config.dynamics == Dynamics::DynamicBeta;

    // Random-walk factor for period `period` of a chain stored in `index`.
    let walk = |i: usize, prev: Option<usize>, sigma: Option<usize>| {
        if touches(i) || prev.is_some_and(touches) || sigma.is_some_and(touches) {
            let mean = prev.map_or(0.0, |p| x[p]);
            normal_logpdf(x[i], mean, sd_of(sigma))
        } else {
            0.0
        }
    };

    let mut lp = 0.0;
    for (i, &c) in layout.coords.iter().enumerate() {
        lp += match c {
            Coord::Mu if touches(i) => normal_logpdf(x[i], 0.0, pr.mu_sd),
            Coord::HSet if touches(i) => normal_logpdf(x[i], 0.0, pr.h_set_sd),
            Coord::HPoint if touches(i) => normal_logpdf(x[i], 0.0, pr.h_point_sd),
            Coord::Theta if touches(i) => normal_logpdf(x[i], 0.0, pr.theta_sd),
            Coord::M if touches(i) => normal_logpdf(x[i], 0.0, pr.m_sd),
            Coord::Delta | Coord::Gamma | Coord::DeltaSq | Coord::GammaSq if touches(i) => {
                normal_logpdf(x[i], 0.0, pr.coef_sd)
            }
            Coord::LogLambda if touches(i) => {
                lognormal_logpdf(x[i].exp(), pr.lambda_log_mean, pr.lambda_log_sd) + jac(x[i])
            }
            Coord::LogSigma2Eps if touches(i) => {
                inv_gamma_logpdf(x[i].exp(), pr.eps_shape, pr.eps_scale) + jac(x[i])
            }
            Coord::LogSigma2Alpha if touches(i) => {
                inv_gamma_logpdf(x[i].exp(), pr.alpha_var_shape, pr.alpha_var_scale) + jac(x[i])
            }
            Coord::LogSigma2Beta if touches(i) => {
                inv_gamma_logpdf(x[i].exp(), pr.beta_var_shape, pr.beta_var_scale) + jac(x[i])
            }
            Coord::Eps(_) => walk(i, None, sigma_eps),
            Coord::Alpha { period, team } if dyn_alpha => {
                let prev = (period > 0).then(|| layout.alpha_index[period - 1][team].unwrap());
                walk(i, prev, sigma_alpha)
            }
            Coord::Beta { period, team } if dyn_beta => {
                let prev = (period > 0).then(|| layout.beta_index[period - 1][team]);
                walk(i, prev, sigma_beta)
            }
            Coord::Alpha { .. } | Coord::Beta { .. } | Coord::BetaDef { .. } if touches(i) => {
                normal_logpdf(x[i], 0.0, pr.ability_sd)
            }
            _ => 0.0,
        };
    }
    lp
}
