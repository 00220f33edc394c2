//! Convergence diagnostics and posterior summaries.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Linear-interpolation quantile (R type 7). NaN on empty input.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    sorted_quantile(&v, q)
}

fn sorted_quantile(v: &[f64], q: f64) -> f64 {
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Why R-hat could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RhatUnavailable {
    SingleChain,
    ZeroVariance,
    TooShort,
}

impl fmt::Display for RhatUnavailable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhatUnavailable::SingleChain => "single chain",
            RhatUnavailable::ZeroVariance => "zero variance",
            RhatUnavailable::TooShort => "chains too short",
        })
    }
}

/// Split-chain potential scale reduction factor with the degrees-of-freedom
/// correction of Brooks and Gelman, floored at 1.
pub fn rhat(chains: &[Vec<f64>]) -> std::result::Result<f64, RhatUnavailable> {
    if chains.len() < 2 {
        return Err(RhatUnavailable::SingleChain);
    }
    let n = chains.iter().map(Vec::len).min().unwrap_or(0) / 2;
    if n < 2 {
        return Err(RhatUnavailable::TooShort);
    }
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| {
            let c = &c[c.len() - 2 * n..];
            [&c[..n], &c[n..]]
        })
        .collect();
    let m = halves.len() as f64;
    let nf = n as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let s2: Vec<f64> = halves.iter().map(|h| var(h)).collect();
    let w = mean(&s2);
    let b = nf * var(&means);
    if !(w > 0.0) || !w.is_finite() {
        return Err(RhatUnavailable::ZeroVariance);
    }
    let v_hat = (nf - 1.0) / nf * w + (1.0 + 1.0 / m) * b / nf;
    // variance of v_hat for the df correction
    let var_w = var(&s2) / m;
    let var_b = 2.0 * b * b / (m - 1.0);
    let means_sq: Vec<f64> = means.iter().map(|x| x * x).collect();
    let xbar = mean(&means);
    let cov = |a: &[f64], b: &[f64]| {
        let (ma, mb) = (mean(a), mean(b));
        a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
    };
    let cov_wb = nf / m * (cov(&s2, &means_sq) - 2.0 * xbar * cov(&s2, &means));
    let var_v = ((nf - 1.0).powi(2) * var_w
        + (1.0 + 1.0 / m).powi(2) * var_b
        + 2.0 * (nf - 1.0) * (1.0 + 1.0 / m) * cov_wb)
        / (nf * nf);
    let df = 2.0 * v_hat * v_hat / var_v;
    let df_adj = if df.is_finite() && df > 0.0 {
        (df + 3.0) / (df + 1.0)
    } else {
        1.0
    };
    Ok((df_adj * v_hat / w).sqrt().max(1.0))
}

/// Effective sample size pooled over chains, using Geyer's initial
/// monotone positive sequence on the multi-chain autocorrelation.
/// NaN for constant input; never more than the number of draws.
pub fn ess(chains: &[Vec<f64>]) -> f64 {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let m = chains.len();
    if n < 4 || m == 0 {
        return f64::NAN;
    }
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    let nf = n as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let w = chains.iter().map(|c| var(c)).sum::<f64>() / m as f64;
    let b_over_n = if m > 1 { var(&means) } else { 0.0 };
    let var_plus = (nf - 1.0) / nf * w + b_over_n;
    if !(var_plus > 0.0) {
        return f64::NAN;
    }
    let acov = |t: usize| -> f64 {
        chains
            .iter()
            .zip(&means)
            .map(|(c, mu)| {
                c[..n - t]
                    .iter()
                    .zip(&c[t..])
                    .map(|(a, b)| (a - mu) * (b - mu))
                    .sum::<f64>()
                    / nf
            })
            .sum::<f64>()
            / m as f64
    };
    let rho = |t: usize| 1.0 - (w - acov(t)) / var_plus;
    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let mut pair = rho(t) + rho(t + 1);
        if pair < 0.0 {
            break;
        }
        pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        t += 2;
    }
    let total = (m * n) as f64;
    (total / tau.max(1.0 / total)).min(total)
}

/// One row of the posterior summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub q025: f64,
    pub q975: f64,
    pub n_eff: f64,
    pub rhat: std::result::Result<f64, RhatUnavailable>,
}

impl ParameterSummary {
    pub fn from_chains(name: &str, chains: &[Vec<f64>]) -> ParameterSummary {
        let mut pooled: Vec<f64> = chains.iter().flatten().copied().collect();
        pooled.sort_by(|a, b| a.total_cmp(b));
        let sd = if pooled.len() > 1 { var(&pooled).sqrt() } else { 0.0 };
        ParameterSummary {
            name: name.to_string(),
            mean: mean(&pooled),
            median: sorted_quantile(&pooled, 0.5),
            sd,
            q025: sorted_quantile(&pooled, 0.025),
            q975: sorted_quantile(&pooled, 0.975),
            n_eff: ess(chains),
            rhat: rhat(chains),
        }
    }
}

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "parameter", "mean", "median", "sd", "2.5%", "97.5%", "n_eff", "Rhat",
];

/// Writes the summary table as CSV. Unavailable R-hat values are written
/// as `NA`.
pub fn write_summary_csv<W: Write>(rows: &[ParameterSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        let rhat = match r.rhat {
            Ok(v) => format!("{v:.4}"),
            Err(_) => "NA".to_string(),
        };
        let n_eff = if r.n_eff.is_finite() {
            format!("{:.0}", r.n_eff)
        } else {
            "NA".to_string()
        };
        w.write_record([
            r.name.clone(),
            format!("{:.4}", r.mean),
            format!("{:.4}", r.median),
            format!("{:.4}", r.sd),
            format!("{:.4}", r.q025),
            format!("{:.4}", r.q975),
            n_eff,
            rhat,
        ])?;
    }
    w.flush().map_err(|e| Error::io("summary", e))?;
    Ok(())
}
