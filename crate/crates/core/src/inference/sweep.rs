//! Prior sensitivity: refit over a grid of hyperparameters.

use std::io::Write;

use super::diagnostics::quantile;
use super::posterior::run_mcmc;
use super::sampler::SamplerSettings;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{ModelConfig, Priors};

/// Values to try for one prior key.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    /// Parses `key=v1,v2,...`.
    pub fn parse(text: &str) -> Result<SweepAxis> {
        let (key, values) = text
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=v1,v2,... in {text:?}")))?;
        let key = key.trim().to_string();
        Priors::default().set(&key, 1.0)?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(Error::Config(format!("no values for {key}")));
        }
        Ok(SweepAxis { key, values })
    }
}

/// Box-plot quantiles of one parameter at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub parameter: String,
    pub mean: f64,
    pub q025: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub values: Vec<(String, f64)>,
    /// The fit's summaries, or why it failed.
    pub outcome: std::result::Result<Vec<SweepSummary>, String>,
}

/// Cartesian product of the axes, first axis slowest.
pub fn grid(axes: &[SweepAxis]) -> Vec<Vec<(String, f64)>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((axis.key.clone(), v));
                    q
                })
            })
            .collect();
    }
    points
}

/// One fit per grid point; failures are kept and the sweep goes on.
pub fn sensitivity_sweep(
    axes: &[SweepAxis],
    settings: &SamplerSettings,
    config: &ModelConfig,
    dataset: &Dataset,
) -> Result<Vec<SweepPoint>> {
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    Ok(grid(axes)
        .into_iter()
        .map(|values| {
            let outcome = fit_point(&values, settings, config, dataset).map_err(|e| e.to_string());
            SweepPoint { values, outcome }
        })
        .collect())
}

fn fit_point(
    values: &[(String, f64)],
    settings: &SamplerSettings,
    config: &ModelConfig,
    dataset: &Dataset,
) -> Result<Vec<SweepSummary>> {
    let mut cfg = config.clone();
    for (k, v) in values {
        cfg.priors.set(k, *v)?;
    }
    let draws = run_mcmc(settings, &cfg, dataset)?;
    Ok(draws
        .columns
        .iter()
        .map(|name| {
            let pooled: Vec<f64> = draws
                .column(name)
                .expect("column exists")
                .into_iter()
                .flatten()
                .collect();
            SweepSummary {
                parameter: name.clone(),
                mean: pooled.iter().sum::<f64>() / pooled.len() as f64,
                q025: quantile(&pooled, 0.025),
                q25: quantile(&pooled, 0.25),
                median: quantile(&pooled, 0.5),
                q75: quantile(&pooled, 0.75),
                q975: quantile(&pooled, 0.975),
            }
        })
        .collect())
}

/// Long table: `point,<keys>,parameter,mean,2.5%,25%,50%,75%,97.5%,status`.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let keys: Vec<String> = points
        .first()
        .map(|p| p.values.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    let mut header = vec!["point".to_string()];
    header.extend(keys.iter().cloned());
    header.extend(
        ["parameter", "mean", "2.5%", "25%", "50%", "75%", "97.5%", "status"]
            .map(String::from),
    );
    w.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let mut lead = vec![i.to_string()];
        lead.extend(p.values.iter().map(|(_, v)| v.to_string()));
        match &p.outcome {
            Ok(rows) => {
                for r in rows {
                    let mut rec = lead.clone();
                    rec.push(r.parameter.clone());
                    rec.extend(
                        [r.mean, r.q025, r.q25, r.median, r.q75, r.q975].map(|v| format!("{v:.4}")),
                    );
                    rec.push("ok".into());
                    w.write_record(&rec)?;
                }
            }
            Err(msg) => {
                let mut rec = lead.clone();
                rec.extend(std::iter::repeat_n(String::new(), 7));
                rec.push(format!("failed: {msg}"));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("sweep", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_cartesian() {
        let axes = [
            SweepAxis::parse("mu_sd=1,10").unwrap(),
            SweepAxis::parse("beta_var=0.001,0.1,2").unwrap(),
        ];
        let g = grid(&axes);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![("mu_sd".into(), 1.0), ("beta_var".into(), 0.001)]);
        assert_eq!(g[5], vec![("mu_sd".into(), 10.0), ("beta_var".into(), 2.0)]);
    }

    #[test]
    fn bad_axes_rejected() {
        assert!(SweepAxis::parse("nonsense=1").is_err());
        assert!(SweepAxis::parse("mu_sd").is_err());
        assert!(SweepAxis::parse("mu_sd=a").is_err());
    }

    #[test]
    fn single_point_equals_single_fit_and_failures_continue() {
        let data = crate::fixtures::tiny();
        let settings = SamplerSettings {
            chains: 2,
            iterations: 80,
            burn_in: 40,
            ..SamplerSettings::default()
        };
        let cfg = ModelConfig::preset(3).unwrap();
        let pts = sensitivity_sweep(&[SweepAxis::parse("mu_sd=1000").unwrap()], &settings, &cfg, &data)
            .unwrap();
        let draws = run_mcmc(&settings, &cfg, &data).unwrap();
        let mu: Vec<f64> = draws.column("mu").unwrap().into_iter().flatten().collect();
        let row = &pts[0].outcome.as_ref().unwrap()[0];
        assert_eq!(row.parameter, "mu");
        assert_eq!(row.median, quantile(&mu, 0.5));

        // model 9 names teams absent from a renamed dataset
        let mut other = cfg.clone();
        other.ability_mode = crate::model::AbilityMode::ConnectedPlusExtra;
        other.extra_set_ability_teams = vec!["Nowhere".into()];
        let pts = sensitivity_sweep(
            &[SweepAxis::parse("m_sd=1,2").unwrap()],
            &settings,
            &other,
            &data,
        )
        .unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.outcome.is_err()));
        let mut buf = Vec::new();
        write_sweep_csv(&pts, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("failed:"));
    }
}
