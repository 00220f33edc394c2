//! Posterior sampling, convergence diagnostics and model comparison.

pub mod diagnostics;
pub mod dic;
pub mod posterior;
pub mod sampler;
pub mod sweep;

pub use diagnostics::{ess, quantile, rhat, write_summary_csv, ParameterSummary, RhatUnavailable};
pub use dic::{dic, dic_from_parts, Dic, PlugIn};
pub use posterior::{
    read_states_jsonl, run_mcmc, sample_model, ChainDraws, ModelTarget, PosteriorDraws,
    StateRecord,
};
pub use sampler::{chain_rng, run_chain, run_chains, BlockMove, ChainOutput, SamplerSettings, Target};
pub use sweep::{sensitivity_sweep, write_sweep_csv, SweepAxis, SweepPoint, SweepSummary};
