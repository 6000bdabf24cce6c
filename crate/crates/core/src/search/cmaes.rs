// SPDX-License-Identifier: Apache-2.0

//! Covariance matrix adaptation evolution strategy over `[0, 1]^L`.
//!
//! Standard (mu/mu_w, lambda) strategy with rank-one and rank-mu updates,
//! cumulative step-size adaptation and lazy eigendecomposition. Samples are
//! clipped to the unit box and the clipped points drive the update.

use std::time::Duration;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::decoder::{Chromosome, Decoded, Decoder};
use crate::model::Instance;
use crate::scalar::{cmp_real, Real};
use crate::search::ga::{run_ga, GaConfig};
use crate::search::{decode_all, stream_rng, Deadline, HistoryEntry, SearchError, SearchResult};

const RESTART_SIGMA: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmaConfig {
    pub sigma0: f64,
    /// GA generations used to find the initial mean; 0 starts from 0.5 everywhere.
    pub warmstart_generations: usize,
    /// Settings of the warm-start GA (its generation and time budgets are overridden).
    pub warmstart: GaConfig,
    pub time_limit: Option<Duration>,
    /// Iteration cap, counted across restarts.
    pub max_iterations: Option<usize>,
    /// Offspring per iteration; `None` uses `4 + floor(3 ln L)`.
    pub lambda: Option<usize>,
    pub rng_seed: u64,
}

impl Default for CmaConfig {
    fn default() -> Self {
        Self {
            sigma0: 0.25,
            warmstart_generations: 10,
            warmstart: GaConfig::default(),
            time_limit: None,
            max_iterations: None,
            lambda: None,
            rng_seed: 0,
        }
    }
}

pub fn default_lambda(len: usize) -> usize {
    4 + (3.0 * (len as f64).ln()).floor() as usize
}

struct Strategy {
    dim: usize,
    lambda: usize,
    mu: usize,
    weights: Vec<f64>,
    mueff: f64,
    cc: f64,
    cs: f64,
    c1: f64,
    cmu: f64,
    damps: f64,
    chi_n: f64,
    mean: DVector<f64>,
    sigma: f64,
    c: DMatrix<f64>,
    b: DMatrix<f64>,
    d: DVector<f64>,
    inv_sqrt_c: DMatrix<f64>,
    pc: DVector<f64>,
    ps: DVector<f64>,
    generation: usize,
    eigen_at: usize,
}

impl Strategy {
    fn new(mean: DVector<f64>, sigma: f64, lambda: usize) -> Self {
        let n = mean.len();
        let nf = n as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu).map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln()).collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let cc = (4.0 + mueff / nf) / (nf + 4.0 + 2.0 * mueff / nf);
        let cs = (mueff + 2.0) / (nf + mueff + 5.0);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mueff);
        let cmu = (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nf + 2.0).powi(2) + mueff));
        let damps = 1.0 + 2.0 * (((mueff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self {
            dim: n,
            lambda,
            mu,
            weights,
            mueff,
            cc,
            cs,
            c1,
            cmu,
            damps,
            chi_n,
            mean,
            sigma,
            c: DMatrix::identity(n, n),
            b: DMatrix::identity(n, n),
            d: DVector::from_element(n, 1.0),
            inv_sqrt_c: DMatrix::identity(n, n),
            pc: DVector::zeros(n),
            ps: DVector::zeros(n),
            generation: 0,
            eigen_at: 0,
        }
    }

    /// Clipped sample for standard-normal vector `z`.
    fn sample(&self, z: &DVector<f64>) -> DVector<f64> {
        let y = &self.b * z.component_mul(&self.d);
        (&self.mean + y * self.sigma).map(|v| v.clamp(0.0, 1.0))
    }

    /// Update from samples sorted best first.
    fn tell(&mut self, sorted: &[&DVector<f64>]) {
        let n = self.dim as f64;
        let old = self.mean.clone();
        let mut mean = DVector::zeros(self.dim);
        for (w, x) in self.weights.iter().zip(sorted) {
            mean += *x * *w;
        }
        self.mean = mean;
        let y_w = (&self.mean - &old) / self.sigma;

        self.ps =
            &self.ps * (1.0 - self.cs) + (&self.inv_sqrt_c * &y_w) * (self.cs * (2.0 - self.cs) * self.mueff).sqrt();
        self.generation += 1;
        let ps_norm = self.ps.norm();
        let hsig = ps_norm / (1.0 - (1.0 - self.cs).powi(2 * self.generation as i32)).sqrt() / self.chi_n
            < 1.4 + 2.0 / (n + 1.0);
        let hs = if hsig { 1.0 } else { 0.0 };
        self.pc = &self.pc * (1.0 - self.cc) + &y_w * (hs * (self.cc * (2.0 - self.cc) * self.mueff).sqrt());

        let mut rank_mu = DMatrix::zeros(self.dim, self.dim);
        for (w, x) in self.weights.iter().zip(sorted.iter().take(self.mu)) {
            let y = (*x - &old) / self.sigma;
            rank_mu.ger(*w, &y, &y, 1.0);
        }
        let keep = 1.0 - self.c1 - self.cmu + (1.0 - hs) * self.c1 * self.cc * (2.0 - self.cc);
        self.c *= keep;
        self.c.ger(self.c1, &self.pc, &self.pc, 1.0);
        self.c += rank_mu * self.cmu;

        self.sigma *= ((self.cs / self.damps) * (ps_norm / self.chi_n - 1.0)).exp();

        let gap = self.lambda as f64 / (self.c1 + self.cmu) / n / 10.0;
        if (self.generation - self.eigen_at) as f64 > gap {
            self.eigen_at = self.generation;
            self.c = (&self.c + self.c.transpose()) * 0.5;
            let eig = SymmetricEigen::new(self.c.clone());
            self.d = eig.eigenvalues.map(|v| v.max(1e-20).sqrt());
            self.b = eig.eigenvectors;
            let inv_d = DMatrix::from_diagonal(&self.d.map(|v| 1.0 / v));
            self.inv_sqrt_c = &self.b * inv_d * self.b.transpose();
        }
    }

    fn degenerate(&self) -> bool {
        !self.sigma.is_finite() || self.sigma < RESTART_SIGMA || self.sigma * self.d.max() < 1e-12
    }
}

/// Run CMA-ES warm-started from a short GA run.
pub fn run_cmaes<R: Real>(inst: &Instance<R>, cfg: &CmaConfig) -> Result<SearchResult<R>, SearchError> {
    if !(cfg.sigma0 >= 0.0 && cfg.sigma0.is_finite()) {
        return Err(SearchError::Config(format!("sigma0 = {} must be finite and non-negative", cfg.sigma0)));
    }
    let dec = Decoder::new(inst)?;
    let deadline = Deadline::after(cfg.time_limit);
    let max_iterations = cfg.max_iterations.unwrap_or(if deadline.is_set() { usize::MAX } else { 100 });

    let mut evaluations = 0u64;
    let mut history: Vec<HistoryEntry<R>> = Vec::new();
    let (start, start_decoded): (Chromosome<R>, Decoded<R>) = if cfg.warmstart_generations > 0 {
        let ga = GaConfig {
            max_generations: cfg.warmstart_generations,
            time_limit: cfg.time_limit,
            max_segments: Some(1),
            rng_seed: cfg.rng_seed,
            ..cfg.warmstart.clone()
        };
        let res = run_ga(inst, &ga)?;
        evaluations += res.evaluations;
        (res.best, res.decoded)
    } else {
        let len = 3 * inst.len() + usize::from(cfg.warmstart.modulation);
        let c = Chromosome::new(vec![R::of(0.5); len])?;
        let d = dec.decode(&c)?;
        evaluations += 1;
        (c, d)
    };
    let len = start.genes().len();
    let lambda = cfg.lambda.unwrap_or_else(|| default_lambda(len)).max(2);
    let mut best = (start.clone(), start_decoded);
    history.push(HistoryEntry { segment: 0, generation: 0, current: best.1.report.total, best: best.1.report.total });
    if cfg.sigma0 == 0.0 {
        return Ok(SearchResult { best: best.0, decoded: best.1, history, evaluations, segments: 1 });
    }

    let to_vec = |c: &Chromosome<R>| DVector::from_iterator(len, c.genes().iter().map(|g| g.as_f64()));
    let mut es = Strategy::new(to_vec(&start), cfg.sigma0, lambda);
    let mut segment = 0usize;
    let mut generation_in_segment = 0usize;
    for iteration in 1..=max_iterations {
        if deadline.passed() {
            break;
        }
        let samples: Vec<DVector<f64>> = (0..lambda)
            .map(|k| {
                let mut rng = stream_rng(cfg.rng_seed, segment as u64 + 1, iteration as u64, k as u64);
                let z = DVector::from_fn(len, |_, _| StandardNormal.sample(&mut rng));
                es.sample(&z)
            })
            .collect();
        let batch: Vec<Chromosome<R>> = samples
            .iter()
            .map(|x| Chromosome::from_clipped(x.iter().map(|&v| R::of(v)).collect()))
            .collect::<Result<_, _>>()?;
        let decoded = decode_all(&dec, &batch)?;
        evaluations += lambda as u64;
        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| cmp_real(decoded[a].report.total, decoded[b].report.total));
        let top = order[0];
        let current = decoded[top].report.total;
        if cmp_real(current, best.1.report.total).is_lt() {
            best = (batch[top].clone(), decoded[top].clone());
        }
        generation_in_segment += 1;
        history.push(HistoryEntry { segment, generation: generation_in_segment, current, best: best.1.report.total });

        let sorted: Vec<&DVector<f64>> = order.iter().map(|&k| &samples[k]).collect();
        es.tell(&sorted);
        if es.degenerate() {
            segment += 1;
            generation_in_segment = 0;
            let mut rng = stream_rng(cfg.rng_seed, segment as u64 + 1, 0, u64::MAX);
            let mean = DVector::from_fn(len, |_, _| rand::Rng::gen::<f64>(&mut rng));
            es = Strategy::new(mean, cfg.sigma0, lambda);
        }
    }
    Ok(SearchResult { best: best.0, decoded: best.1, history, evaluations, segments: segment + 1 })
}
