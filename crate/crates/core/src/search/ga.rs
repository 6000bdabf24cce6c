// SPDX-License-Identifier: Apache-2.0

//! Genetic algorithm with tournament selection, two-point crossover,
//! elitism, seeded initial populations and restarts.

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decoder::{Chromosome, Decoded, Decoder};
use crate::model::Instance;
use crate::scalar::{cmp_real, Real};
use crate::search::{check_ratio, decode_all, stream_rng, Deadline, HistoryEntry, SearchError, SearchResult};

/// Per-gene resampling probability of the mutation operator.
pub const GENE_MUTATION_RATE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub pop_size: usize,
    pub tournament_ratio: f64,
    pub elite_ratio: f64,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub seed_ratio: f64,
    /// Generations per restart segment.
    pub max_generations: usize,
    pub time_limit: Option<Duration>,
    /// Segment cap; without a time limit a single segment runs by default.
    pub max_segments: Option<usize>,
    /// Append a priority-modulation gene to every chromosome.
    pub modulation: bool,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            pop_size: 300,
            tournament_ratio: 0.02,
            elite_ratio: 0.05,
            p_crossover: 0.8,
            p_mutation: 0.1,
            seed_ratio: 0.2,
            max_generations: 100,
            time_limit: None,
            max_segments: None,
            modulation: true,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.pop_size == 0 {
            return Err(SearchError::Config("pop_size must be positive".into()));
        }
        if self.max_generations == 0 {
            return Err(SearchError::Config("max_generations must be positive".into()));
        }
        check_ratio("tournament_ratio", self.tournament_ratio)?;
        check_ratio("elite_ratio", self.elite_ratio)?;
        check_ratio("p_crossover", self.p_crossover)?;
        check_ratio("p_mutation", self.p_mutation)?;
        check_ratio("seed_ratio", self.seed_ratio)
    }

    pub fn elites(&self) -> usize {
        ((self.elite_ratio * self.pop_size as f64).ceil() as usize).min(self.pop_size)
    }
}

pub fn tournament_size(pop_size: usize, ratio: f64) -> usize {
    ((pop_size as f64 * ratio).ceil() as usize).clamp(1, pop_size.max(1))
}

/// `p1[0, a) + p2[a, b) + p1[b, L)` for cut points `a <= b`.
pub fn two_point_crossover<R: Copy>(p1: &[R], p2: &[R], a: usize, b: usize) -> Vec<R> {
    debug_assert_eq!(p1.len(), p2.len());
    let (a, b) = (a.min(b), b.max(a).min(p1.len()));
    let mut child = p1.to_vec();
    child[a..b].copy_from_slice(&p2[a..b]);
    child
}

/// Resample each gene uniformly in `[0, 1]` with probability `rate`.
pub fn mutate_genes<R: Real, G: Rng + ?Sized>(genes: &mut [R], rate: f64, rng: &mut G) {
    for g in genes.iter_mut() {
        if rng.gen_bool(rate) {
            *g = R::of(rng.gen::<f64>());
        }
    }
}

pub fn mutate<R: Real, G: Rng + ?Sized>(c: &Chromosome<R>, rng: &mut G) -> Chromosome<R> {
    let mut genes = c.genes().to_vec();
    mutate_genes(&mut genes, GENE_MUTATION_RATE, rng);
    Chromosome::new(genes).expect("mutation keeps genes in range")
}

/// Index of the most square-like variant; ties go to the lower index.
pub(crate) fn squarest(inst: &Instance<impl Real>, i: usize) -> usize {
    let vs = &inst.rects[i].variants;
    (0..vs.len()).fold(0, |best, k| if vs[k].squareness() > vs[best].squareness() { k } else { best })
}

/// Random population whose first `floor(seed_ratio * pop)` members prefer
/// square variants and place large rectangles early.
pub fn seed_population<R: Real, G: Rng + ?Sized>(
    inst: &Instance<R>,
    pop_size: usize,
    seed_ratio: f64,
    modulation: bool,
    rng: &mut G,
) -> Vec<Chromosome<R>> {
    let n = inst.len();
    let len = 3 * n + usize::from(modulation);
    let seeded = ((seed_ratio * pop_size as f64).floor() as usize).min(pop_size);
    let square: Vec<usize> = (0..n).map(|i| squarest(inst, i)).collect();
    let mut by_area: Vec<usize> = (0..n).collect();
    by_area.sort_by_key(|&i| std::cmp::Reverse(inst.rects[i].variants[square[i]].area()));
    let mut rank = vec![0usize; n];
    for (k, &i) in by_area.iter().enumerate() {
        rank[i] = k + 1;
    }
    (0..pop_size)
        .map(|p| {
            let mut genes: Vec<R> = (0..len).map(|_| R::of(rng.gen::<f64>())).collect();
            if p < seeded {
                for i in 0..n {
                    let m = inst.rects[i].variants.len();
                    genes[n + i] = R::of((square[i] as f64 + 0.5) / m as f64);
                    genes[i] = genes[i] * R::of(rank[i] as f64 / n as f64);
                }
            }
            Chromosome::new(genes).expect("generated genes lie in [0, 1]")
        })
        .collect()
}

struct Scored<R> {
    c: Chromosome<R>,
    total: R,
}

fn tournament<R: Real, G: Rng + ?Sized>(pop: &[Scored<R>], size: usize, rng: &mut G) -> usize {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..size {
        let k = rng.gen_range(0..pop.len());
        if cmp_real(pop[k].total, pop[best].total).then(k.cmp(&best)).is_lt() {
            best = k;
        }
    }
    best
}

fn breed<R: Real, G: Rng + ?Sized>(pop: &[Scored<R>], cfg: &GaConfig, t: usize, rng: &mut G) -> Chromosome<R> {
    let p1 = &pop[tournament(pop, t, rng)].c;
    let p2 = &pop[tournament(pop, t, rng)].c;
    if rng.gen_bool(cfg.p_crossover) {
        let len = p1.genes().len();
        let a = rng.gen_range(0..=len);
        let b = rng.gen_range(0..=len);
        let child = Chromosome::new(two_point_crossover(p1.genes(), p2.genes(), a.min(b), a.max(b)))
            .expect("crossover keeps genes in range");
        if rng.gen_bool(cfg.p_mutation) {
            mutate(&child, rng)
        } else {
            child
        }
    } else {
        mutate(p1, rng)
    }
}

fn sort_stable<R: Real>(pop: &mut [Scored<R>]) {
    pop.sort_by(|a, b| cmp_real(a.total, b.total));
}

/// Run the GA until the generation, segment or time budget runs out.
pub fn run_ga<R: Real>(inst: &Instance<R>, cfg: &GaConfig) -> Result<SearchResult<R>, SearchError> {
    cfg.validate()?;
    let dec = Decoder::new(inst)?;
    let deadline = Deadline::after(cfg.time_limit);
    let max_segments = cfg.max_segments.unwrap_or(if deadline.is_set() { usize::MAX } else { 1 });
    let t = tournament_size(cfg.pop_size, cfg.tournament_ratio);
    let elites = cfg.elites();

    let mut best: Option<(Chromosome<R>, Decoded<R>)> = None;
    let mut history = Vec::new();
    let mut evaluations = 0u64;
    let mut segments = 0usize;

    let absorb = |batch: Vec<Chromosome<R>>,
                  best: &mut Option<(Chromosome<R>, Decoded<R>)>,
                  evaluations: &mut u64|
     -> Result<Vec<Scored<R>>, SearchError> {
        let decoded = decode_all(&dec, &batch)?;
        *evaluations += batch.len() as u64;
        let mut out = Vec::with_capacity(batch.len());
        for (c, d) in batch.into_iter().zip(decoded) {
            let total = d.report.total;
            if best.as_ref().is_none_or(|(_, b)| cmp_real(total, b.report.total).is_lt()) {
                *best = Some((c.clone(), d));
            }
            out.push(Scored { c, total });
        }
        Ok(out)
    };

    'segments: while segments < max_segments {
        let seg = segments as u64;
        let mut init_rng = stream_rng(cfg.rng_seed, seg, 0, u64::MAX);
        let initial = seed_population(inst, cfg.pop_size, cfg.seed_ratio, cfg.modulation, &mut init_rng);
        let mut pop = absorb(initial, &mut best, &mut evaluations)?;
        sort_stable(&mut pop);
        segments += 1;
        let global = |best: &Option<(Chromosome<R>, Decoded<R>)>| best.as_ref().map(|(_, d)| d.report.total).unwrap();
        history.push(HistoryEntry { segment: segments - 1, generation: 0, current: pop[0].total, best: global(&best) });

        for generation in 1..=cfg.max_generations {
            if deadline.passed() {
                break 'segments;
            }
            let children: Vec<Chromosome<R>> = (0..cfg.pop_size)
                .map(|k| {
                    let mut rng = stream_rng(cfg.rng_seed, seg, generation as u64, k as u64);
                    breed(&pop, cfg, t, &mut rng)
                })
                .collect();
            let scored = absorb(children, &mut best, &mut evaluations)?;
            let mut next: Vec<Scored<R>> = pop.drain(..elites).collect();
            next.extend(scored);
            sort_stable(&mut next);
            next.truncate(cfg.pop_size);
            pop = next;
            history.push(HistoryEntry {
                segment: segments - 1,
                generation,
                current: pop[0].total,
                best: global(&best),
            });
        }
        if deadline.passed() {
            break;
        }
    }

    let (best, decoded) = best.expect("the initial population is never empty");
    Ok(SearchResult { best, decoded, history, evaluations, segments })
}
