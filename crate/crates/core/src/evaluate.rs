//! Posterior predictive checks and agreement scores.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Dataset, MatchObservation, Schedule};
use crate::error::{Error, Result};
use crate::inference::chain_rng;
use crate::model::{ModelConfig, ParameterState};
use crate::simulate::{draw_for, replicate_season, SimulationSettings};

/// Set point differences `home - away` of some matches.
pub fn point_differences<'a>(matches: impl IntoIterator<Item = &'a MatchObservation>) -> Vec<i32> {
    matches
        .into_iter()
        .flat_map(|m| m.sets.iter().map(|s| s.score.point_difference()))
        .collect()
}

/// Set point differences of the played matches, replicated once per
/// replication at an evenly spaced posterior draw.
pub fn replicate_point_differences(
    states: &[ParameterState],
    config: &ModelConfig,
    dataset: &Dataset,
    settings: &SimulationSettings,
) -> Result<Vec<Vec<i32>>> {
    settings.validate()?;
    if states.is_empty() {
        return Err(Error::Data("no posterior draws".into()));
    }
    let played = Schedule {
        games: dataset.schedule.games.iter().filter(|g| g.played).copied().collect(),
    };
    Ok((0..settings.replications)
        .into_par_iter()
        .map(|j| {
            let mut rng = chain_rng(settings.seed, j as u64);
            let state = &states[draw_for(j, settings.replications, states.len())];
            point_differences(&replicate_season(&mut rng, state, config, &played, &[]))
        })
        .collect())
}

/// Observed and replicated histograms of set point differences on a shared
/// grid of width-one bins. A legal set never ends within one point, so
/// -1, 0 and 1 are left out of the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointDiffCheck {
    pub grid: Vec<i32>,
    pub observed: Vec<f64>,
    /// One histogram per replication.
    pub replicated: Vec<Vec<f64>>,
    pub mean_replicated: Vec<f64>,
    /// Total variation distance between `observed` and `mean_replicated`.
    pub tv_distance: f64,
}

fn histogram(values: &[i32], grid: &[i32]) -> Result<Vec<f64>> {
    let lo = grid[0];
    let mut h = vec![0.0; grid.len()];
    let slot = |d: i32| -> Option<usize> {
        // grid skips -1, 0, 1
        let raw = (d - lo) as usize;
        if d <= -2 {
            Some(raw)
        } else if d >= 2 {
            Some(raw - 3)
        } else {
            None
        }
    };
    for &d in values {
        let i = slot(d).ok_or_else(|| Error::Data(format!("set point difference {d} is not possible")))?;
        h[i] += 1.0;
    }
    let n = values.len().max(1) as f64;
    Ok(h.into_iter().map(|c| c / n).collect())
}

pub fn ppc_point_diff(observed: &[i32], replications: &[Vec<i32>]) -> Result<PointDiffCheck> {
    if replications.is_empty() {
        return Err(Error::Data("no replications".into()));
    }
    let all = observed.iter().chain(replications.iter().flatten());
    let max = all.map(|d| d.abs()).max().unwrap_or(2).max(2);
    let grid: Vec<i32> = (-max..=max).filter(|d| d.abs() >= 2).collect();
    let obs = histogram(observed, &grid)?;
    let replicated = replications
        .iter()
        .map(|r| histogram(r, &grid))
        .collect::<Result<Vec<_>>>()?;
    let k = replicated.len() as f64;
    let mean_replicated: Vec<f64> = (0..grid.len())
        .map(|i| replicated.iter().map(|h| h[i]).sum::<f64>() / k)
        .collect();
    let tv_distance = (0.5 * obs.iter().zip(&mean_replicated).map(|(a, b)| (a - b).abs()).sum::<f64>()).min(1.0);
    Ok(PointDiffCheck {
        grid,
        observed: obs,
        replicated,
        mean_replicated,
        tv_distance,
    })
}

impl PointDiffCheck {
    /// `d,observed,replicated_mean`
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["d", "observed", "replicated_mean"])?;
        for (i, d) in self.grid.iter().enumerate() {
            w.write_record([
                d.to_string(),
                format!("{:.6}", self.observed[i]),
                format!("{:.6}", self.mean_replicated[i]),
            ])?;
        }
        w.flush().map_err(|e| Error::io("ppc", e))?;
        Ok(())
    }

    /// Long format `draw,d,density`.
    pub fn write_replicated_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["draw", "d", "density"])?;
        for (j, h) in self.replicated.iter().enumerate() {
            for (i, d) in self.grid.iter().enumerate() {
                w.write_record([j.to_string(), d.to_string(), format!("{:.6}", h[i])])?;
            }
        }
        w.flush().map_err(|e| Error::io("ppc", e))?;
        Ok(())
    }
}

/// Fraction of positions where `predicted` equals `actual`.
pub fn agreement<T: PartialEq>(predicted: &[T], actual: &[T]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} outcomes",
            predicted.len(),
            actual.len()
        )));
    }
    if actual.is_empty() {
        return Ok(1.0);
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / actual.len() as f64)
}

/// Mean and sd of a per-draw score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub sd: f64,
}

pub fn spread(values: &[f64]) -> Spread {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Spread { mean, sd }
}

/// Spearman rank correlation, average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::Data("rank correlation needs two equal series of length 2 or more".into()));
    }
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let m = (a.len() as f64 + 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - m) * (y - m)).sum();
    let va: f64 = ra.iter().map(|x| (x - m).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - m).powi(2)).sum();
    Ok(cov / (va * vb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_replications_have_zero_distance() {
        let obs = vec![2, -5, 7, 2, -2, 12];
        let c = ppc_point_diff(&obs, &[obs.clone(), obs.clone()]).unwrap();
        assert_eq!(c.tv_distance, 0.0);
        assert!(!c.grid.iter().any(|d| d.abs() < 2));
        assert!((c.observed.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn impossible_difference_rejected() {
        assert!(ppc_point_diff(&[1], &[vec![2]]).is_err());
        assert!(ppc_point_diff(&[2], &[]).is_err());
    }

    #[test]
    fn agreement_arithmetic() {
        let p: Vec<bool> = (0..182).map(|i| i < 140).collect();
        let a = vec![true; 182];
        assert!((agreement(&p, &a).unwrap() - 0.7692).abs() < 1e-4);
        assert_eq!(agreement(&a, &a).unwrap(), 1.0);
        assert!(matches!(agreement(&a[..3], &a), Err(Error::Data(_))));
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    proptest! {
        #[test]
        fn histograms_integrate_to_one(
            obs in prop::collection::vec(prop_oneof![-30..=-2i32, 2..=30i32], 1..50),
            rep in prop::collection::vec(prop_oneof![-30..=-2i32, 2..=30i32], 1..50),
        ) {
            let c = ppc_point_diff(&obs, &[rep]).unwrap();
            for h in c.replicated.iter().chain([&c.observed]) {
                prop_assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            prop_assert!((0.0..=1.0).contains(&c.tv_distance));
        }

        #[test]
        fn agreement_in_unit_interval(p in prop::collection::vec(0..3u8, 1..40), seed in 0..3u8) {
            let a: Vec<u8> = p.iter().map(|x| (x + seed) % 3).collect();
            let v = agreement(&p, &a).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            // relabelling both sides leaves the score unchanged
            let relabel = |v: &[u8]| v.iter().map(|x| (x + 1) % 3).collect::<Vec<u8>>();
            prop_assert_eq!(agreement(&relabel(&p), &relabel(&a)).unwrap(), v);
        }
    }
}
