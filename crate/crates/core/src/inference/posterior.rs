//! The model posterior as a sampler target, and retained draws.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::diagnostics::ParameterSummary;
use super::sampler::{run_chains, BlockMove, SamplerSettings, Target};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::likelihood::{loglik_x, EXTRA, POINT, SET};
use crate::model::{prior_x, Coord, Model, ModelConfig, ParameterState, PhiForm};

/// Sets touched by one coordinate.
#[derive(Debug, Clone)]
enum Deps {
    None,
    All(u8),
    Sets(Vec<usize>, u8),
}

/// Posterior density over the unconstrained coordinates of a [`Model`].
pub struct ModelTarget<'a> {
    model: &'a Model,
    deps: Vec<Deps>,
}

impl<'a> ModelTarget<'a> {
    pub fn new(model: &'a Model) -> Self {
        let layout = &model.layout;
        let cfg = &model.config;
        let sets = &model.data.sets;
        let phi = cfg.phi_form != PhiForm::Null;
        let v2 = cfg.ability_mode.v2();
        let team_sets = |team: usize, period: Option<usize>| -> Vec<usize> {
            sets.iter()
                .enumerate()
                .filter(|(_, s)| {
                    (s.home == team || s.away == team) && period.is_none_or(|p| s.period == p)
                })
                .map(|(i, _)| i)
                .collect()
        };
        let deps = layout
            .coords
            .iter()
            .map(|&c| match c {
                Coord::Mu => Deps::All(POINT),
                Coord::HPoint => Deps::Sets(
                    (0..sets.len()).filter(|&i| !sets[i].home_won).collect(),
                    POINT,
                ),
                Coord::HSet | Coord::Theta => Deps::All(SET),
                Coord::M
                | Coord::Delta
                | Coord::Gamma
                | Coord::DeltaSq
                | Coord::GammaSq
                | Coord::LogLambda => Deps::All(EXTRA),
                Coord::LogSigma2Eps | Coord::LogSigma2Alpha | Coord::LogSigma2Beta => Deps::None,
                Coord::Eps(g) => Deps::Sets(
                    (0..sets.len()).filter(|&i| sets[i].game == g).collect(),
                    POINT,
                ),
                Coord::Alpha { period, team } => {
                    let p = (layout.alpha_periods > 1).then_some(period);
                    Deps::Sets(team_sets(team, p), SET | if phi { EXTRA } else { 0 })
                }
                Coord::Beta { period, team } => {
                    let p = (layout.beta_periods > 1).then_some(period);
                    let mask = POINT | if v2 { SET } else { 0 } | if phi { EXTRA } else { 0 };
                    Deps::Sets(team_sets(team, p), mask)
                }
                Coord::BetaDef { team } => {
                    let mask = POINT | if v2 { SET } else { 0 } | if phi { EXTRA } else { 0 };
                    Deps::Sets(team_sets(team, None), mask)
                }
            })
            .collect();
        ModelTarget { model, deps }
    }

    /// Names the first non-finite piece of the density at `x`.
    fn offending_component(&self, x: &[f64]) -> Option<String> {
        let m = self.model;
        for i in 0..m.dim() {
            if !prior_x(&m.layout, &m.config, x, Some(i), true).is_finite() {
                return Some(format!("prior of {}", m.layout.names[i]));
            }
        }
        for (bit, name) in [(SET, "set-winner likelihood"), (POINT, "point likelihood"), (EXTRA, "extra-point likelihood")] {
            if !loglik_x(&m.layout, &m.config, x, m.data.sets.iter(), bit).is_finite() {
                return Some(name.to_string());
            }
        }
        None
    }
}

impl Target for ModelTarget<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.model.log_density_x(x)
    }

    fn conditional_log_density(&self, x: &[f64], i: usize) -> f64 {
        let m = self.model;
        let prior = prior_x(&m.layout, &m.config, x, Some(i), true);
        let lik = match &self.deps[i] {
            Deps::None => 0.0,
            Deps::All(mask) => loglik_x(&m.layout, &m.config, x, m.data.sets.iter(), *mask),
            Deps::Sets(idx, mask) => loglik_x(
                &m.layout,
                &m.config,
                x,
                idx.iter().map(|&k| &m.data.sets[k]),
                *mask,
            ),
        };
        prior + lik
    }

    /// With connected abilities the set logit sees only `theta * beta`, so
    /// the sign and scale of that product are proposed jointly.
    fn block_moves(&self) -> Vec<BlockMove> {
        let layout = &self.model.layout;
        let Some(theta) = layout.index_of(Coord::Theta) else {
            return Vec::new();
        };
        let beta: Vec<usize> = layout
            .coords
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, Coord::Beta { .. } | Coord::BetaDef { .. }))
            .map(|(i, _)| i)
            .collect();
        if beta.is_empty() {
            return Vec::new();
        }
        let mut flip = beta.clone();
        flip.push(theta);
        vec![
            BlockMove::Reflect(flip),
            BlockMove::Rescale {
                up: beta,
                down: vec![theta],
            },
        ]
    }
}

/// Retained draws of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub states: Vec<ParameterState>,
    /// Natural-scale rows matching [`PosteriorDraws::columns`].
    pub natural: Vec<Vec<f64>>,
    pub deviance: Vec<f64>,
    pub acceptance: Vec<f64>,
    pub step_sizes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub config: ModelConfig,
    pub settings: SamplerSettings,
    pub team_names: Vec<String>,
    /// Unconstrained coordinate names, in sampler order.
    pub coordinates: Vec<String>,
    pub columns: Vec<String>,
    pub chains: Vec<ChainDraws>,
}

/// Samples the posterior of `config` given `dataset`.
pub fn run_mcmc(
    settings: &SamplerSettings,
    config: &ModelConfig,
    dataset: &Dataset,
) -> Result<PosteriorDraws> {
    let model = Model::new(config, dataset)?;
    sample_model(settings, &model)
}

/// Samples an already bound model, e.g. a prior-only one.
pub fn sample_model(settings: &SamplerSettings, model: &Model) -> Result<PosteriorDraws> {
    settings.validate()?;
    let target = ModelTarget::new(model);
    let x0 = model.layout.to_unconstrained(&model.initial_state())?;
    if !model.log_density_x(&x0).is_finite() {
        let component = target
            .offending_component(&x0)
            .unwrap_or_else(|| "log posterior".to_string());
        return Err(Error::Initialization { component });
    }
    // Jittered starts that land outside the support fall back to x0.
    let jitter = settings.init_jitter;
    let outputs = run_chains(&target, settings, |_, rng| {
        for _ in 0..100 {
            let x: Vec<f64> = x0
                .iter()
                .map(|v| v + jitter * rng.sample::<f64, _>(StandardNormal))
                .collect();
            if model.log_density_x(&x).is_finite() {
                return x;
            }
        }
        x0.clone()
    });
    let columns = model.layout.natural_columns(&model.config);
    let chains = outputs
        .into_iter()
        .map(|out| {
            let states: Vec<ParameterState> =
                out.draws.iter().map(|x| model.layout.to_state(x)).collect();
            let deviance = states
                .iter()
                .map(|s| model.deviance(s))
                .collect::<Result<Vec<f64>>>()?;
            if let Some(bad) = deviance.iter().find(|d| !d.is_finite()) {
                return Err(Error::Initialization {
                    component: format!("deviance {bad} in a retained draw"),
                });
            }
            let natural = states
                .iter()
                .map(|s| model.layout.natural_row(&model.config, s))
                .collect();
            Ok(ChainDraws {
                states,
                natural,
                deviance,
                acceptance: out.acceptance,
                step_sizes: out.step_sizes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorDraws {
        config: model.config.clone(),
        settings: *settings,
        team_names: model.data.team_names.clone(),
        coordinates: model.layout.names.clone(),
        columns,
        chains,
    })
}

/// One line of `states.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRecord {
    pub chain: usize,
    pub draw: usize,
    pub deviance: f64,
    pub state: ParameterState,
}

impl PosteriorDraws {
    pub fn n_draws(&self) -> usize {
        self.chains.iter().map(|c| c.states.len()).sum()
    }

    /// All states, chain by chain.
    pub fn states(&self) -> impl Iterator<Item = &ParameterState> {
        self.chains.iter().flat_map(|c| c.states.iter())
    }

    pub fn deviances(&self) -> impl Iterator<Item = f64> + '_ {
        self.chains.iter().flat_map(|c| c.deviance.iter().copied())
    }

    /// Per-chain traces of one natural-scale column.
    pub fn column(&self, name: &str) -> Option<Vec<Vec<f64>>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(
            self.chains
                .iter()
                .map(|c| c.natural.iter().map(|r| r[j]).collect())
                .collect(),
        )
    }

    /// Summary rows for every natural-scale column plus the deviance.
    pub fn summaries(&self) -> Vec<ParameterSummary> {
        let mut rows: Vec<ParameterSummary> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let chains: Vec<Vec<f64>> = self
                    .chains
                    .iter()
                    .map(|c| c.natural.iter().map(|r| r[j]).collect())
                    .collect();
                ParameterSummary::from_chains(name, &chains)
            })
            .collect();
        let dev: Vec<Vec<f64>> = self.chains.iter().map(|c| c.deviance.clone()).collect();
        rows.push(ParameterSummary::from_chains("deviance", &dev));
        rows
    }

    /// `chain,draw,deviance,<columns>` with one row per retained draw.
    pub fn write_draws_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["chain".to_string(), "draw".into(), "deviance".into()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (c, chain) in self.chains.iter().enumerate() {
            for (d, row) in chain.natural.iter().enumerate() {
                let mut rec = vec![c.to_string(), d.to_string(), chain.deviance[d].to_string()];
                rec.extend(row.iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::io("draws", e))?;
        Ok(())
    }

    /// Long-format traces, `chain,iteration,parameter,value`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["chain", "draw", "parameter", "value"])?;
        for (c, chain) in self.chains.iter().enumerate() {
            for (j, name) in self.columns.iter().enumerate() {
                for (d, row) in chain.natural.iter().enumerate() {
                    w.write_record([c.to_string(), d.to_string(), name.clone(), row[j].to_string()])?;
                }
            }
            for (d, dev) in chain.deviance.iter().enumerate() {
                w.write_record([c.to_string(), d.to_string(), "deviance".into(), dev.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("trace", e))?;
        Ok(())
    }

    /// Per-coordinate acceptance rates and frozen step sizes.
    pub fn write_sampler_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["chain", "coordinate", "acceptance", "step_size"])?;
        for (c, chain) in self.chains.iter().enumerate() {
            for (i, name) in self.coordinates.iter().enumerate() {
                w.write_record([
                    c.to_string(),
                    name.clone(),
                    format!("{:.4}", chain.acceptance[i]),
                    chain.step_sizes[i].to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("sampler", e))?;
        Ok(())
    }

    pub fn write_states_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (c, chain) in self.chains.iter().enumerate() {
            for (d, state) in chain.states.iter().enumerate() {
                let rec = StateRecord {
                    chain: c,
                    draw: d,
                    deviance: chain.deviance[d],
                    state: state.clone(),
                };
                serde_json::to_writer(&mut out, &rec)?;
                out.write_all(b"\n").map_err(|e| Error::io("states", e))?;
            }
        }
        Ok(())
    }
}

pub fn read_states_jsonl<R: BufRead>(input: R) -> Result<Vec<StateRecord>> {
    let mut out = Vec::new();
    for (no, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("states", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: StateRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
            line: no as u64 + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::NoRows);
    }
    Ok(out)
}
