//! The two-level set/point model: parameter space, priors, likelihood and
//! expected points for every variant.

pub mod config;
pub mod dist;
mod expect;
pub mod layout;
pub mod likelihood;
mod prior;
mod state;

pub use config::{
    AbilityMode, Dynamics, LeagueScoring, ModelConfig, PhiForm, PointModel, Priors,
};
pub use expect::{expected_team_points, SetLaw};
pub use layout::{Coord, Layout, ModelData};
pub use likelihood::{point_linear_predictor, set_win_prob, tie_prob};
pub use prior::prior_x;
pub use state::{center_stz, DerivedAbilities, Matchup, ParameterState};

use crate::data::{Dataset, TeamRegistry};
use crate::error::{DomainError, Error, Result};

/// A config bound to the data it is fitted on.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub layout: Layout,
    pub data: ModelData,
}

impl Model {
    pub fn new(config: &ModelConfig, dataset: &Dataset) -> Result<Model> {
        Self::from_data(config, ModelData::new(dataset))
    }

    /// No observations: the posterior is the prior.
    pub fn prior_only(config: &ModelConfig, teams: &TeamRegistry) -> Result<Model> {
        Self::from_data(config, ModelData::empty(teams))
    }

    pub fn from_data(config: &ModelConfig, data: ModelData) -> Result<Model> {
        if data.n_teams < 2 {
            return Err(Error::Data("at least two teams are needed".into()));
        }
        let layout = Layout::new(config, &data)?;
        Ok(Model {
            config: config.clone(),
            layout,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn initial_state(&self) -> ParameterState {
        ParameterState::initial(
            &self.config,
            self.data.n_teams,
            &self.layout.rounds,
            &self.layout.eps_games,
        )
    }

    /// Log-likelihood over all observed sets.
    pub fn log_likelihood(&self, state: &ParameterState) -> Result<f64> {
        let x = self.layout.to_unconstrained(state)?;
        Ok(self.log_likelihood_x(&x))
    }

    /// Per-set log-likelihood, in data order.
    pub fn set_log_likelihoods(&self, state: &ParameterState) -> Result<Vec<f64>> {
        let x = self.layout.to_unconstrained(state)?;
        Ok(self
            .data
            .sets
            .iter()
            .map(|s| likelihood::loglik_x(&self.layout, &self.config, &x, std::iter::once(s), likelihood::ALL))
            .collect())
    }

    pub fn log_likelihood_x(&self, x: &[f64]) -> f64 {
        likelihood::loglik_x(&self.layout, &self.config, x, self.data.sets.iter(), likelihood::ALL)
    }

    /// Log prior density on the natural scale.
    pub fn log_prior(&self, state: &ParameterState) -> Result<f64> {
        check_support(state)?;
        let x = self.layout.to_unconstrained(state)?;
        Ok(prior_x(&self.layout, &self.config, &x, None, false))
    }

    /// Log posterior on the natural scale; `-inf` outside the support.
    pub fn log_posterior(&self, state: &ParameterState) -> f64 {
        match (self.log_prior(state), self.log_likelihood(state)) {
            (Ok(p), Ok(l)) => p + l,
            _ => f64::NEG_INFINITY,
        }
    }

    /// Log density of the unconstrained coordinates, Jacobian included.
    pub fn log_density_x(&self, x: &[f64]) -> f64 {
        prior_x(&self.layout, &self.config, x, None, true) + self.log_likelihood_x(x)
    }

    /// Deviance `-2 log L`.
    pub fn deviance(&self, state: &ParameterState) -> Result<f64> {
        Ok(-2.0 * self.log_likelihood(state)?)
    }
}

fn check_support(state: &ParameterState) -> Result<(), DomainError> {
    for (name, v) in [
        ("lambda", state.lambda),
        ("sigma2_eps", state.sigma2_eps),
        ("sigma2_alpha", state.sigma2_alpha),
        ("sigma2_beta", state.sigma2_beta),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(DomainError(format!("{name} = {v} must be positive")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::tiny;


    #[test]
    fn empty_data_has_zero_likelihood() {
        let teams = TeamRegistry::from_names(["Aurora Verona", "Brenta Padova"]).unwrap();
        let m = Model::prior_only(&ModelConfig::preset(9).unwrap(), &teams).unwrap();
        let s = m.initial_state();
        assert_eq!(m.log_likelihood(&s).unwrap(), 0.0);
        assert_eq!(m.log_posterior(&s), m.log_prior(&s).unwrap());
    }

    #[test]
    fn non_positive_rate_is_a_domain_error() {
        let m = Model::new(&ModelConfig::preset(3).unwrap(), &tiny()).unwrap();
        let mut s = m.initial_state();
        s.lambda = 0.0;
        assert!(matches!(m.log_prior(&s), Err(Error::Domain(_))));
        assert_eq!(m.log_posterior(&s), f64::NEG_INFINITY);
    }

    #[test]
    fn finite_for_every_preset() {
        let data = tiny();
        for n in 1..=15 {
            let m = Model::new(&ModelConfig::preset(n).unwrap(), &data).unwrap();
            let s = m.initial_state();
            let ll = m.log_likelihood(&s).unwrap();
            assert!(ll.is_finite() && ll < 0.0, "model {n}: {ll}");
            let per_set: f64 = m.set_log_likelihoods(&s).unwrap().iter().sum();
            assert!((per_set - ll).abs() < 1e-9);
        }
    }

    #[test]
    fn likelihood_depends_only_on_differences() {
        let m = Model::new(&ModelConfig::preset(7).unwrap(), &tiny()).unwrap();
        let mut s = m.initial_state();
        s.beta_star[0] = vec![0.1, -0.3, 0.2];
        s.alpha_star[0] = vec![0.5, 0.0, -0.1];
        s.theta = 2.0;
        let a = m.log_likelihood(&s).unwrap();
        for v in s.beta_star[0].iter_mut().chain(s.alpha_star[0].iter_mut()) {
            *v += 3.7;
        }
        let b = m.log_likelihood(&s).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}
