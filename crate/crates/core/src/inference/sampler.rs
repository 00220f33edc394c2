//! Adaptive random-walk Metropolis-within-Gibbs.
//!
//! Every coordinate gets its own Gaussian proposal scale. During burn-in
//! the log scale moves after each batch by `(accept_rate - target) * c_n`
//! with `c_n = 3 / sqrt(n)`; retained iterations use frozen scales, so the
//! retained part of each chain is an ordinary Metropolis chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A log density known up to a constant.
pub trait Target: Sync {
    fn dim(&self) -> usize;

    fn log_density(&self, x: &[f64]) -> f64;

    /// The terms of the log density that depend on `x[i]`. Differences in
    /// `x[i]` must match those of [`Target::log_density`].
    fn conditional_log_density(&self, x: &[f64], i: usize) -> f64 {
        let _ = i;
        self.log_density(x)
    }

    /// Joint moves proposed once per sweep after the coordinate updates.
    fn block_moves(&self) -> Vec<BlockMove> {
        Vec::new()
    }
}

/// A joint proposal over several coordinates. Both kinds leave ridges of
/// the form `x[a] * x[b] = const` reachable in one step, which single-site
/// updates cross only slowly.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockMove {
    /// `x[i] -> -x[i]` on every listed coordinate; an involution with unit
    /// Jacobian.
    Reflect(Vec<usize>),
    /// `x[up] *= e^s`, `x[down] *= e^-s` with Gaussian `s` on an adapted
    /// scale. Jacobian `e^{s (|up| - |down|)}`.
    Rescale { up: Vec<usize>, down: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    pub chains: usize,
    /// Total iterations per chain, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub target_accept: f64,
    /// Iterations per adaptation batch.
    pub batch: usize,
    pub initial_step: f64,
    /// sd of the jitter applied to each chain's starting point.
    pub init_jitter: f64,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        SamplerSettings {
            chains: 3,
            iterations: 2000,
            burn_in: 1000,
            thin: 1,
            seed: 20180,
            target_accept: 0.44,
            batch: 25,
            initial_step: 0.1,
            init_jitter: 0.5,
        }
    }
}

impl SamplerSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.chains == 0 {
            return bad("at least one chain is needed");
        }
        if self.burn_in >= self.iterations {
            return bad("burn-in must be shorter than the run");
        }
        if self.thin == 0 || self.retained() == 0 {
            return bad("thinning leaves no retained draws");
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return bad("target acceptance must lie in (0, 1)");
        }
        if self.batch == 0 || !(self.initial_step > 0.0) || !(self.init_jitter >= 0.0) {
            return bad("adaptation batch and step sizes must be positive");
        }
        Ok(())
    }

    /// Retained draws per chain.
    pub fn retained(&self) -> usize {
        self.iterations.saturating_sub(self.burn_in) / self.thin.max(1)
    }
}

/// Independent RNG stream for chain `chain` under `seed`.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    /// Retained points, one row per draw.
    pub draws: Vec<Vec<f64>>,
    pub log_density: Vec<f64>,
    /// Acceptance rate per coordinate over the retained iterations.
    pub acceptance: Vec<f64>,
    /// Frozen proposal scales.
    pub step_sizes: Vec<f64>,
    /// Acceptance rate per block move over the retained iterations.
    pub block_acceptance: Vec<f64>,
}

/// Runs `settings.chains` chains in parallel. `init` builds each chain's
/// starting point from the chain's own RNG.
pub fn run_chains<T, F>(target: &T, settings: &SamplerSettings, init: F) -> Vec<ChainOutput>
where
    T: Target,
    F: Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    (0..settings.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = chain_rng(settings.seed, c as u64);
            let x = init(c, &mut rng);
            run_chain(target, settings, x, &mut rng)
        })
        .collect()
}

/// One chain from `x`.
pub fn run_chain<T: Target, R: Rng>(
    target: &T,
    settings: &SamplerSettings,
    mut x: Vec<f64>,
    rng: &mut R,
) -> ChainOutput {
    let d = target.dim();
    assert_eq!(x.len(), d, "start has the wrong dimension");
    let mut log_step = vec![settings.initial_step.ln(); d];
    let mut batch_accepts = vec![0usize; d];
    let mut kept_accepts = vec![0usize; d];
    let mut batches = 0usize;
    let mut kept_iterations = 0usize;
    let retained = settings.retained();
    let blocks = target.block_moves();
    let mut block_step = vec![settings.initial_step.ln(); blocks.len()];
    let mut block_batch = vec![0usize; blocks.len()];
    let mut block_kept = vec![0usize; blocks.len()];
    let mut draws = Vec::with_capacity(retained);
    let mut log_density = Vec::with_capacity(retained);

    for t in 0..settings.iterations {
        let burning = t < settings.burn_in;
        for i in 0..d {
            let current = target.conditional_log_density(&x, i);
            let old = x[i];
            let z: f64 = rng.sample(StandardNormal);
            x[i] = old + log_step[i].exp() * z;
            let proposed = target.conditional_log_density(&x, i);
            let log_u = rng.random::<f64>().ln();
            // NaN proposals compare false and are rejected.
            if log_u < proposed - current {
                if burning {
                    batch_accepts[i] += 1;
                } else {
                    kept_accepts[i] += 1;
                }
            } else {
                x[i] = old;
            }
        }
        for (k, mv) in blocks.iter().enumerate() {
            let current = target.log_density(&x);
            let old = x.clone();
            let log_jacobian = match mv {
                BlockMove::Reflect(idx) => {
                    for &i in idx {
                        x[i] = -x[i];
                    }
                    0.0
                }
                BlockMove::Rescale { up, down } => {
                    let z: f64 = rng.sample(StandardNormal);
                    let s = block_step[k].exp() * z;
                    for &i in up {
                        x[i] *= s.exp();
                    }
                    for &i in down {
                        x[i] *= (-s).exp();
                    }
                    s * (up.len() as f64 - down.len() as f64)
                }
            };
            let proposed = target.log_density(&x);
            let log_u = rng.random::<f64>().ln();
            if log_u < proposed - current + log_jacobian {
                if burning {
                    block_batch[k] += 1;
                } else {
                    block_kept[k] += 1;
                }
            } else {
                x = old;
            }
        }
        if burning && (t + 1) % settings.batch == 0 {
            batches += 1;
            let c = 3.0 / (batches as f64).sqrt();
            for i in 0..d {
                let rate = batch_accepts[i] as f64 / settings.batch as f64;
                log_step[i] = (log_step[i] + (rate - settings.target_accept) * c).clamp(-12.0, 4.0);
                batch_accepts[i] = 0;
            }
            for k in 0..blocks.len() {
                let rate = block_batch[k] as f64 / settings.batch as f64;
                block_step[k] = (block_step[k] + (rate - settings.target_accept) * c).clamp(-12.0, 4.0);
                block_batch[k] = 0;
            }
        }
        if !burning {
            kept_iterations += 1;
            if (t + 1 - settings.burn_in) % settings.thin == 0 && draws.len() < retained {
                log_density.push(target.log_density(&x));
                draws.push(x.clone());
            }
        }
    }
    ChainOutput {
        draws,
        log_density,
        acceptance: kept_accepts
            .iter()
            .map(|&a| a as f64 / kept_iterations.max(1) as f64)
            .collect(),
        step_sizes: log_step.iter().map(|l| l.exp()).collect(),
        block_acceptance: block_kept
            .iter()
            .map(|&a| a as f64 / kept_iterations.max(1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Correlated bivariate Gaussian with unit variances.
    struct Gauss2 {
        mean: [f64; 2],
        rho: f64,
    }

    impl Target for Gauss2 {
        fn dim(&self) -> usize {
            2
        }
        fn log_density(&self, x: &[f64]) -> f64 {
            let a = x[0] - self.mean[0];
            let b = x[1] - self.mean[1];
            -(a * a - 2.0 * self.rho * a * b + b * b) / (2.0 * (1.0 - self.rho * self.rho))
        }
    }

    fn moments(rows: &[Vec<f64>]) -> ([f64; 2], [f64; 3]) {
        let n = rows.len() as f64;
        let m0 = rows.iter().map(|r| r[0]).sum::<f64>() / n;
        let m1 = rows.iter().map(|r| r[1]).sum::<f64>() / n;
        let v0 = rows.iter().map(|r| (r[0] - m0).powi(2)).sum::<f64>() / n;
        let v1 = rows.iter().map(|r| (r[1] - m1).powi(2)).sum::<f64>() / n;
        let c = rows.iter().map(|r| (r[0] - m0) * (r[1] - m1)).sum::<f64>() / n;
        ([m0, m1], [v0, v1, c])
    }

    #[test]
    fn frozen_steps_recover_gaussian_moments() {
        let target = Gauss2 {
            mean: [1.0, -2.0],
            rho: 0.5,
        };
        let settings = SamplerSettings {
            chains: 4,
            iterations: 60_000,
            burn_in: 1_000,
            thin: 1,
            seed: 11,
            ..SamplerSettings::default()
        };
        let out = run_chains(&target, &settings, |_, rng| {
            vec![rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0]
        });
        let rows: Vec<Vec<f64>> = out.iter().flat_map(|c| c.draws.iter().cloned()).collect();
        let (m, v) = moments(&rows);
        let ess = crate::inference::ess(
            &out.iter().map(|c| c.draws.iter().map(|r| r[0]).collect()).collect::<Vec<_>>(),
        );
        let se = (1.0 / ess).sqrt();
        assert!((m[0] - 1.0).abs() < 3.0 * se, "mean {} se {se}", m[0]);
        assert!((m[1] + 2.0).abs() < 3.0 * se, "mean {}", m[1]);
        // var of a sample variance of a unit normal is about 2 / ess
        let se_v = (2.0 / ess).sqrt();
        assert!((v[0] - 1.0).abs() < 3.0 * se_v, "var {}", v[0]);
        assert!((v[1] - 1.0).abs() < 3.0 * se_v, "var {}", v[1]);
        assert!((v[2] - 0.5).abs() < 3.0 * se_v, "cov {}", v[2]);
        for c in &out {
            for a in &c.acceptance {
                assert!((0.25..0.65).contains(a), "acceptance {a}");
            }
        }
    }

    #[test]
    fn same_seed_same_chains() {
        let target = Gauss2 {
            mean: [0.0, 0.0],
            rho: 0.0,
        };
        let settings = SamplerSettings {
            iterations: 300,
            burn_in: 100,
            ..SamplerSettings::default()
        };
        let a = run_chains(&target, &settings, |_, _| vec![0.0, 0.0]);
        let b = run_chains(&target, &settings, |_, _| vec![0.0, 0.0]);
        assert_eq!(a, b);
        assert_ne!(a[0].draws, a[1].draws);
        assert_eq!(a[0].draws.len(), 200);
    }

    #[test]
    fn retained_count() {
        let s = SamplerSettings {
            iterations: 1000,
            burn_in: 100,
            thin: 4,
            ..SamplerSettings::default()
        };
        assert_eq!(s.retained(), 225);
        s.validate().unwrap();
        let bad = SamplerSettings {
            burn_in: 1000,
            ..s
        };
        assert!(bad.validate().is_err());
    }
}
