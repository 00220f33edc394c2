//! Deviance information criterion.

use serde::Serialize;

use super::posterior::PosteriorDraws;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{Model, ParameterState};

/// Which point estimate the plug-in deviance was taken at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlugIn {
    Mean,
    /// The mean gave a non-finite deviance.
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dic {
    pub dic: f64,
    pub p_d: f64,
    pub d_bar: f64,
    /// Deviance at the plug-in estimate.
    pub d_hat: f64,
    pub plug_in: PlugIn,
}

/// `Dbar = mean(deviances)`, `pD = Dbar - d_hat`, `DIC = Dbar + pD`.
pub fn dic_from_parts(deviances: &[f64], d_hat: f64, plug_in: PlugIn) -> Result<Dic> {
    if deviances.is_empty() {
        return Err(Error::Data("no deviance draws".into()));
    }
    let d_bar = deviances.iter().sum::<f64>() / deviances.len() as f64;
    let p_d = d_bar - d_hat;
    Ok(Dic {
        dic: d_bar + p_d,
        p_d,
        d_bar,
        d_hat,
        plug_in,
    })
}

/// DIC of a fit, plugging in the posterior mean state (or the median if
/// the mean's deviance is not finite).
pub fn dic(draws: &PosteriorDraws, dataset: &Dataset) -> Result<Dic> {
    let model = Model::new(&draws.config, dataset)?;
    let states: Vec<ParameterState> = draws.states().cloned().collect();
    if states.is_empty() {
        return Err(Error::Data("no retained draws".into()));
    }
    let deviances: Vec<f64> = draws.deviances().collect();
    let at = |s: &ParameterState| model.deviance(s).ok().filter(|d| d.is_finite());
    if let Some(d) = at(&ParameterState::mean(&states)) {
        return dic_from_parts(&deviances, d, PlugIn::Mean);
    }
    let d = at(&ParameterState::median(&states))
        .ok_or_else(|| Error::Data("deviance at the posterior mean and median is not finite".into()))?;
    dic_from_parts(&deviances, d, PlugIn::Median)
}
