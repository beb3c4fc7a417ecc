//! Monte Carlo estimates of operating probabilities and structural
//! reliabilities, used to cross-check the analytic values.
//!
//! Trials are split into a fixed number of shards. Shard `i` draws from
//! ChaCha8 seeded with the root seed on stream `i`, so the estimate depends
//! only on `(seed, trials)` and never on the thread count.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Configuration, ModeStatus, SegmentState, SystemGraph};
use crate::par::Exec;
use crate::qrmodel::QRModel;

pub const SHARDS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl Estimate {
    fn from_hits(hits: u64, trials: u64) -> Self {
        let mean = hits as f64 / trials as f64;
        Self {
            mean,
            stderr: (mean * (1.0 - mean) / trials as f64).sqrt(),
            trials,
        }
    }

    /// `|analytic - mean| <= k * sigma` with sigma from the analytic value,
    /// which stays meaningful when the sample happens to be all hits or
    /// all misses.
    pub fn agrees_with(&self, analytic: f64, k: f64) -> bool {
        let sigma = (analytic * (1.0 - analytic) / self.trials as f64).max(0.0).sqrt();
        if sigma == 0.0 {
            return (self.mean - analytic).abs() < 1e-12;
        }
        (self.mean - analytic).abs() <= k * sigma
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("need at least one trial")]
    NoTrials,
    #[error("configuration `{0}` does not belong to the model")]
    UnknownConfiguration(String),
    #[error("target `{target}` disagrees with the suspension schedule at slot {slot}")]
    ScheduleMismatch { target: String, slot: usize },
}

/// Slot indices that the designer holds suspended.
pub type Schedule = BTreeSet<usize>;

/// The schedule a target configuration implies: exactly its `Y` slots.
pub fn schedule_of(target: &Configuration) -> Schedule {
    target
        .slots()
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == ModeStatus::Suspended)
        .map(|(i, _)| i)
        .collect()
}

fn shard_hits<F>(seed: u64, trials: u64, exec: Exec, trial: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync + Send,
{
    let per = trials / SHARDS as u64;
    let extra = trials % SHARDS as u64;
    let counts = exec.map_range(SHARDS, |s| {
        let n = per + u64::from((s as u64) < extra);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        (0..n).filter(|_| trial(&mut rng)).count() as u64
    });
    counts.into_iter().sum()
}

/// Fraction of trials in which independent mode failures, under the given
/// suspension schedule, leave the system exactly in `target`.
pub fn simulate_state_probability(
    model: &QRModel,
    target: &Configuration,
    schedule: &Schedule,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<Estimate, OracleError> {
    if trials == 0 {
        return Err(OracleError::NoTrials);
    }
    if model.find(target).is_none() {
        return Err(OracleError::UnknownConfiguration(target.to_string()));
    }
    for (i, s) in target.slots().iter().enumerate() {
        if (*s == ModeStatus::Suspended) != schedule.contains(&i) {
            return Err(OracleError::ScheduleMismatch {
                target: target.to_string(),
                slot: i,
            });
        }
    }
    let components: Vec<(usize, Vec<f64>)> = model
        .components()
        .iter()
        .scan(0, |offset, c| {
            let start = *offset;
            *offset += c.mode_count();
            Some((start, c.reliabilities().to_vec()))
        })
        .collect();
    let want = target.slots();

    let hits = shard_hits(seed, trials, exec, |rng| {
        // realise each component in turn, stopping at the first mismatch
        for (start, z) in &components {
            let mut operating = false;
            for (k, zk) in z.iter().enumerate() {
                let slot = start + k;
                let got = if operating {
                    ModeStatus::NotAvailed
                } else if schedule.contains(&slot) {
                    ModeStatus::Suspended
                } else if rng.gen::<f64>() < *zk {
                    operating = true;
                    ModeStatus::Operating
                } else {
                    ModeStatus::Failed
                };
                if got != want[slot] {
                    return false;
                }
            }
        }
        true
    });
    Ok(Estimate::from_hits(hits, trials))
}

/// Fraction of trials in which some input-to-output path has every
/// component succeed, each live component trying once at its current-mode
/// reliability and dead ones always failing.
pub fn simulate_mode_reliability(
    graph: &SystemGraph,
    model: &QRModel,
    config: &Configuration,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<Estimate, OracleError> {
    if trials == 0 {
        return Err(OracleError::NoTrials);
    }
    if model.find(config).is_none() {
        return Err(OracleError::UnknownConfiguration(config.to_string()));
    }
    let names = model.component_names();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let z: Vec<f64> = model
        .components()
        .iter()
        .enumerate()
        .map(|(ci, c)| match model.segment_state(config, ci) {
            SegmentState::Live(k) => c.reliability(k),
            SegmentState::Dead => 0.0,
        })
        .collect();
    let paths: Vec<Vec<usize>> = graph
        .component_paths()
        .iter()
        .map(|p| p.iter().map(|c| index[c.as_str()]).collect())
        .collect();

    let hits = shard_hits(seed, trials, exec, |rng| {
        // a shared component is drawn once and seen by every path
        let up: Vec<bool> = z.iter().map(|&p| p > 0.0 && rng.gen::<f64>() < p).collect();
        paths.iter().any(|p| p.iter().all(|&ci| up[ci]))
    });
    Ok(Estimate::from_hits(hits, trials))
}
