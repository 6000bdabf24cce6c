// SPDX-License-Identifier: Apache-2.0

//! Solver orchestration shared by `solve` and `bench`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use amsplace::io::{IoError, RunRecord};
use amsplace::refine::{refine_pipeline, Budgets, RefineError};
use amsplace::search::{run_cmaes, run_ga, CmaConfig, GaConfig, SearchError};
use amsplace::{check_feasible, CriterionReport, Instance, ModelError, Placement};
use clap::ValueEnum;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage error", m),
            CliError::Data(m) => ("data error", m),
            CliError::Internal(m) => ("internal error", m),
        };
        // Diagnostics are single-line.
        write!(f, "{kind}: {}", msg.replace('\n', " "))
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Config(m) => CliError::Usage(m),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<RefineError> for CliError {
    fn from(e: RefineError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    amsplace::io::parse_instance(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Ga,
    Cmaes,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ga => "ga",
            Algo::Cmaes => "cmaes",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub algo: Algo,
    pub seed: u64,
    /// Wall-clock budget for search plus refinement.
    pub time_limit: Option<Duration>,
    /// GA generations (single segment) or CMA-ES iterations.
    pub generations: Option<usize>,
    /// GA population or CMA-ES offspring count.
    pub pop_size: Option<usize>,
    pub refine: bool,
}

/// Share of the time limit given to the search when refinement follows.
const SEARCH_SHARE: f64 = 0.8;

pub struct Outcome {
    pub placement: Placement,
    pub report: CriterionReport<f64>,
    pub evaluations: u64,
    pub wall_time_s: f64,
}

pub fn solve(inst: &Instance, opts: &SolveOptions) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let search_time = opts.time_limit.map(|t| if opts.refine { t.mul_f64(SEARCH_SHARE) } else { t });

    let result = match opts.algo {
        Algo::Ga => {
            let mut cfg = GaConfig { time_limit: search_time, rng_seed: opts.seed, ..GaConfig::default() };
            if let Some(p) = opts.pop_size {
                cfg.pop_size = p;
            }
            if let Some(g) = opts.generations {
                cfg.max_generations = g;
                cfg.max_segments = Some(1);
            }
            run_ga(inst, &cfg)?
        }
        Algo::Cmaes => {
            let mut cfg = CmaConfig {
                time_limit: search_time,
                lambda: opts.pop_size,
                rng_seed: opts.seed,
                ..CmaConfig::default()
            };
            cfg.max_iterations = opts.generations;
            run_cmaes(inst, &cfg)?
        }
    };
    let mut evaluations = result.evaluations;
    let (placement, report) = if opts.refine {
        let budgets =
            Budgets { time_limit: opts.time_limit.map(|t| t.saturating_sub(started.elapsed())), ..Budgets::default() };
        let refined = refine_pipeline(&result.best, inst, &budgets)?;
        evaluations += refined.stages.iter().map(|s| s.evaluations as u64).sum::<u64>();
        (refined.placement, refined.report)
    } else {
        (result.decoded.placement, result.decoded.report)
    };
    if let Some(v) = check_feasible(inst, &placement)? {
        return Err(CliError::Internal(format!("solver returned an infeasible placement: {v}")));
    }
    Ok(Outcome { placement, report, evaluations, wall_time_s: started.elapsed().as_secs_f64() })
}

/// Instance files of a directory, sorted by name.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Data(format!("cannot list {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!("no .json instances in {}", dir.display())));
    }
    Ok(files)
}

/// Run every algorithm `repeats` times on every instance; repeat `r` uses seed `seed + r`.
pub fn bench(
    files: &[PathBuf],
    algos: &[Algo],
    repeats: usize,
    base: &SolveOptions,
) -> Result<Vec<RunRecord>, CliError> {
    let mut records = Vec::with_capacity(files.len() * algos.len() * repeats);
    for path in files {
        let inst = load_instance(path)?;
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        for &algo in algos {
            for r in 0..repeats {
                let opts = SolveOptions { algo, seed: base.seed.wrapping_add(r as u64), ..base.clone() };
                let out = solve(&inst, &opts)?;
                log::info!("{name} {} #{r}: {}", algo.name(), out.report.total);
                records.push(RunRecord {
                    instance: name.clone(),
                    algorithm: algo.name().to_owned(),
                    total: out.report.total,
                });
            }
        }
    }
    Ok(records)
}
