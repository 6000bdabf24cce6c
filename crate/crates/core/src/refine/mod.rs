// SPDX-License-Identifier: Apache-2.0

//! Post-search improvement pipeline.
//!
//! Stages run in a fixed order and each one only accepts strict
//! improvements: variant retargeting, position-gene swaps, relocation of
//! placed units, then a linear program over continuous coordinates with
//! the relative positions frozen.

pub mod layout;
pub mod local;
pub mod lp;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{Chromosome, DecodeError, Decoder};
use crate::evaluator::CriterionReport;
use crate::model::{Infeasibility, Instance, ModelError, Placement};
use crate::scalar::Real;

pub use layout::{ls_layout, LayoutResult};
pub use local::{ls_positions, ls_variants, LocalResult};
pub use lp::{lp_refine, lp_step, relations, LpResult, Relation, RelationAssignment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("input placement is infeasible: {0}")]
    InfeasibleInput(Infeasibility),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Optional wall-clock deadline shared by the stages.
#[derive(Clone, Copy, Debug)]
pub struct Clock(Option<Instant>);

impl Clock {
    pub fn unlimited() -> Self {
        Self(None)
    }

    pub fn after(limit: Option<Duration>) -> Self {
        Self(limit.map(|d| Instant::now() + d))
    }

    pub fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}

/// Work limits per stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    /// Decodes spent on variant retargeting.
    pub variants: usize,
    /// Decodes spent on position swaps.
    pub positions: usize,
    /// Swaps are only tried on instances with at most this many rectangles.
    pub positions_max_n: usize,
    /// Unit relocation attempts.
    pub layout: usize,
    /// Linear-program rounds.
    pub lp_rounds: usize,
    pub time_limit: Option<Duration>,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { variants: 2_000, positions: 5_000, positions_max_n: 60, layout: 10_000, lp_rounds: 20, time_limit: None }
    }
}

impl Budgets {
    /// Budgets under which the pipeline is the identity.
    pub fn zero() -> Self {
        Self { variants: 0, positions: 0, positions_max_n: 60, layout: 0, lp_rounds: 0, time_limit: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Variants,
    Positions,
    Layout,
    Lp,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Variants, Stage::Positions, Stage::Layout, Stage::Lp];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Variants => "variants",
            Stage::Positions => "positions",
            Stage::Layout => "layout",
            Stage::Lp => "lp",
        }
    }
}

/// Totals before and after one stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport<R> {
    pub stage: Stage,
    pub before: R,
    pub after: R,
    /// Decodes, relocation attempts or LP solves, depending on the stage.
    pub evaluations: usize,
}

impl<R: Real> StageReport<R> {
    /// Relative improvement in percent.
    pub fn improvement_pct(&self) -> f64 {
        let b = self.before.as_f64();
        if b == 0.0 {
            0.0
        } else {
            100.0 * (b - self.after.as_f64()) / b
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refined<R> {
    /// Chromosome after the chromosome-level stages.
    pub chromosome: Chromosome<R>,
    pub placement: Placement,
    pub report: CriterionReport<R>,
    pub stages: Vec<StageReport<R>>,
}

impl<R: Real> Refined<R> {
    /// Total before the first stage.
    pub fn initial_total(&self) -> R {
        self.stages.first().map_or(self.report.total, |s| s.before)
    }
}

/// Run every stage on the decoding of `best`.
pub fn refine_pipeline<R: Real>(
    best: &Chromosome<R>,
    inst: &Instance<R>,
    budgets: &Budgets,
) -> Result<Refined<R>, RefineError> {
    let clock = Clock::after(budgets.time_limit);
    let dec = Decoder::new(inst)?;
    let mut stages = Vec::with_capacity(4);

    let v = ls_variants(&dec, best, budgets.variants, &clock)?;
    let before = dec.decode(best)?.report.total;
    stages.push(StageReport { stage: Stage::Variants, before, after: v.decoded.report.total, evaluations: v.decodes });

    let p = ls_positions(&dec, &v.chromosome, budgets.positions, budgets.positions_max_n, &clock)?;
    stages.push(StageReport {
        stage: Stage::Positions,
        before: v.decoded.report.total,
        after: p.decoded.report.total,
        evaluations: p.decodes,
    });

    let l = ls_layout(inst, &p.decoded.placement, budgets.layout, &clock)?;
    stages.push(StageReport {
        stage: Stage::Layout,
        before: p.decoded.report.total,
        after: l.report.total,
        evaluations: l.attempts,
    });

    let q = lp_refine(inst, &l.placement, budgets.lp_rounds, &clock)?;
    stages.push(StageReport { stage: Stage::Lp, before: l.report.total, after: q.report.total, evaluations: q.rounds });

    Ok(Refined { chromosome: p.chromosome, placement: q.placement, report: q.report, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::is_feasible;
    use crate::syngen::{generate, GenParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_chromosome(n: usize, seed: u64) -> Chromosome<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Chromosome::new((0..3 * n).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    #[test]
    fn zero_budgets_are_the_identity() {
        let inst: Instance<f64> = generate(&GenParams { n_rects: 12, rng_seed: 3, ..GenParams::default() }).unwrap();
        let c = random_chromosome(12, 1);
        let base = crate::decoder::decode(&c, &inst).unwrap();
        let out = refine_pipeline(&c, &inst, &Budgets::zero()).unwrap();
        assert_eq!(out.chromosome, c);
        assert_eq!(out.placement, base.placement);
        assert_eq!(out.report.total, base.report.total);
        assert!(out.stages.iter().all(|s| s.before == s.after));
    }

    #[test]
    fn stages_never_increase_the_total() {
        for seed in 0..4 {
            let params =
                GenParams { n_rects: 14, with_symmetry: seed % 2 == 0, rng_seed: seed, ..GenParams::default() };
            let inst: Instance<f64> = generate(&params).unwrap();
            let c = random_chromosome(14, seed + 10);
            let out = refine_pipeline(&c, &inst, &Budgets::default()).unwrap();
            assert_eq!(out.stages.len(), 4);
            for w in out.stages.windows(2) {
                assert_eq!(w[0].after, w[1].before);
            }
            for s in &out.stages {
                assert!(s.after <= s.before + 1e-9 * s.before.abs(), "{s:?}");
            }
            assert!(is_feasible(&inst, &out.placement));
            assert_eq!(out.report, crate::evaluator::evaluate(&out.placement, &inst));
        }
    }

    #[test]
    fn clock_without_limit_never_expires() {
        assert!(!Clock::unlimited().expired());
        assert!(Clock::after(Some(Duration::ZERO)).expired());
        assert!(!Clock::after(None).expired());
    }
}
