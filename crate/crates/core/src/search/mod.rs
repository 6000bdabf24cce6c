// SPDX-License-Identifier: Apache-2.0

//! Metaheuristic drivers over chromosome space.

pub mod cmaes;
pub mod ga;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{Chromosome, DecodeError, Decoded, Decoder};
use crate::scalar::Real;

pub use cmaes::{run_cmaes, CmaConfig};
pub use ga::{mutate, mutate_genes, run_ga, seed_population, tournament_size, two_point_crossover, GaConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Best value seen after one generation (or iteration).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry<R> {
    pub segment: usize,
    pub generation: usize,
    /// Best total of the current population (GA) or iteration (CMA-ES).
    pub current: R,
    /// Best total since the start of the run.
    pub best: R,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult<R> {
    pub best: Chromosome<R>,
    pub decoded: Decoded<R>,
    pub history: Vec<HistoryEntry<R>>,
    pub evaluations: u64,
    pub segments: usize,
}

/// Independent generator for one (segment, generation, slot) triple.
pub(crate) fn stream_rng(seed: u64, segment: u64, generation: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ segment.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(generation.wrapping_mul(1 << 32).wrapping_add(slot));
    rng
}

/// Decode a batch in parallel; the result order matches the input.
pub(crate) fn decode_all<R: Real>(
    dec: &Decoder<'_, R>,
    batch: &[Chromosome<R>],
) -> Result<Vec<Decoded<R>>, DecodeError> {
    batch.par_iter().map(|c| dec.decode(c)).collect()
}

/// Wall-clock deadline, absent for unlimited runs.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Deadline(Option<Instant>);

impl Deadline {
    pub(crate) fn after(limit: Option<Duration>) -> Self {
        Self(limit.map(|d| Instant::now() + d))
    }

    pub(crate) fn passed(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }

    pub(crate) fn is_set(&self) -> bool {
        self.0.is_some()
    }
}

pub(crate) fn check_ratio(name: &str, v: f64) -> Result<(), SearchError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SearchError::Config(format!("{name} = {v} outside [0, 1]")))
    }
}
