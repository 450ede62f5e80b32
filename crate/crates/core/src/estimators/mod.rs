//! Seeded Monte Carlo estimators.
//!
//! Replicate `i` of an estimator always uses the potential of disorder
//! replicate `i`, so results depend only on the disorder seed and the sample
//! count. Replicates run in parallel; per-replicate results are collected in
//! index order and reduced sequentially, which makes every estimate
//! bit-for-bit reproducible regardless of the thread pool.

mod events;
mod molchanov;
mod wegner;

pub use events::{
    direct_sum_event_mc, pair_event_mc, resonance_prob_mc, tunneling_prob_mc, DirectSumEstimate,
    EnergyWindow, PairEvent, PairEstimate, PairGeometry, Quantifier, ResonanceEstimate,
    TunnelingEstimate,
};
pub use molchanov::{
    decay_envelopes, molchanov_averaged, molchanov_fixed, sample_path, PathSample, PathTable,
};
pub use wegner::{
    wegner_conditional_mc, wegner_mc, wegner_mc_multi, ConditionalEnergy, ConditionalWegnerEstimate,
    WegnerEstimate,
};

use rayon::prelude::*;

use crate::error::{MsaError, Result};

/// Runs `f` on replicates `0..n` in parallel and returns the results in
/// replicate order.
pub(crate) fn per_replicate<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if n == 0 {
        return Err(MsaError::NoSamples);
    }
    (0..n).into_par_iter().map(f).collect()
}

pub(crate) fn count_true(flags: &[bool]) -> u64 {
    flags.iter().filter(|b| **b).count() as u64
}
