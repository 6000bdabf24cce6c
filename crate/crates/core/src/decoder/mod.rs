// SPDX-License-Identifier: Apache-2.0

//! Chromosome decoding.
//!
//! A chromosome holds, per rectangle, a position key, a variant gene and a
//! direction gene, optionally followed by a priority-modulation factor. The
//! decoder builds a placement greedily: units are taken in key order and
//! each is put at the candidate position of lowest incremental criterion.

pub mod modulation;
pub mod points;
pub mod slide;
pub mod symmetry;

use std::cmp::Ordering;

use thiserror::Error;

use crate::evaluator::{evaluate, CriterionReport, PartialEval, Tentative};
use crate::model::{separated, validate_instance, Axis, Instance, Placement, Point, Variant};
use crate::scalar::{cmp_real, Real};

pub use modulation::apply_priority_modulation;
pub use points::{Anchor, PointSet, Shift};
pub use slide::{slide, Direction, Obstacle, ObstacleIndex, Obstacles, SlideResult};
pub use symmetry::{place_symmetry_group, GroupLayout, GroupMember};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("chromosome has {got} genes, expected {expected} or {}", expected + 1)]
    Length { expected: usize, got: usize },
    #[error("gene {index} is {value}, outside [0, 1]")]
    GeneRange { index: usize, value: f64 },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("symmetry group {group}: {reason}")]
    Group { group: usize, reason: String },
    #[error("no feasible position for rectangle {rect}")]
    Stuck { rect: usize },
}

/// Genes in `[0, 1]`: `3n` of them, or `3n + 1` with a modulation factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Chromosome<R> {
    genes: Vec<R>,
}

impl<R: Real> Chromosome<R> {
    pub fn new(genes: Vec<R>) -> Result<Self, DecodeError> {
        if genes.len() < 3 || !matches!(genes.len() % 3, 0 | 1) {
            return Err(DecodeError::Length { expected: 3 * (genes.len() / 3).max(1), got: genes.len() });
        }
        if let Some((index, g)) = genes.iter().enumerate().find(|(_, g)| !(**g >= R::zero() && **g <= R::one())) {
            return Err(DecodeError::GeneRange { index, value: g.as_f64() });
        }
        Ok(Self { genes })
    }

    /// Clamp every gene into `[0, 1]`; NaN becomes 0.
    pub fn from_clipped(genes: Vec<R>) -> Result<Self, DecodeError> {
        let genes =
            genes.into_iter().map(|g| if g.is_nan() { R::zero() } else { g.max(R::zero()).min(R::one()) }).collect();
        Self::new(genes)
    }

    pub fn genes(&self) -> &[R] {
        &self.genes
    }

    pub fn into_genes(self) -> Vec<R> {
        self.genes
    }

    /// Number of rectangles encoded.
    pub fn n(&self) -> usize {
        self.genes.len() / 3
    }

    pub fn position(&self, i: usize) -> R {
        self.genes[i]
    }

    pub fn variant(&self, i: usize) -> R {
        self.genes[self.n() + i]
    }

    pub fn direction(&self, i: usize) -> Direction {
        Direction::from_gene(self.genes[2 * self.n() + i].as_f64())
    }

    pub fn modulation(&self) -> Option<R> {
        (self.genes.len() % 3 == 1).then(|| self.genes[self.genes.len() - 1])
    }
}

/// Variant selected by gene `g` among `m` variants.
pub fn variant_index<R: Real>(g: R, m: usize) -> usize {
    debug_assert!(m > 0);
    let k = (g * R::of_int(m as i64)).floor().to_usize().unwrap_or(0);
    k.min(m - 1)
}

/// Work counters of one decode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecodeStats {
    pub slides: u64,
    pub candidates: u64,
    pub fallbacks: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded<R> {
    pub placement: Placement,
    pub report: CriterionReport<R>,
    pub stats: DecodeStats,
}

/// One greedy step as seen by the decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace<R> {
    /// Rectangles placed in this step.
    pub rects: Vec<usize>,
    /// Evaluated positions of the unit outline with their criterion.
    pub candidates: Vec<(Point, R)>,
    pub chosen: Point,
}

#[derive(Clone, Debug)]
struct Unit {
    width: i64,
    height: i64,
    group: Option<(usize, Axis, i64)>,
    members: Vec<(usize, Point)>,
}

/// Decoder bound to one instance; validates it once and keeps the lookup
/// tables needed by every decode.
#[derive(Clone, Debug)]
pub struct Decoder<'a, R> {
    inst: &'a Instance<R>,
    nets_of: Vec<Vec<usize>>,
    net_members: Vec<Vec<usize>>,
    ungrouped: Vec<usize>,
    restricted_by: Vec<Vec<usize>>,
}

impl<'a, R: Real> Decoder<'a, R> {
    pub fn new(inst: &'a Instance<R>) -> Result<Self, DecodeError> {
        let issues = validate_instance(inst);
        if let Some(v) = issues.first() {
            return Err(DecodeError::InvalidInstance(v.to_string()));
        }
        let group_of = inst.group_of();
        let mut restricted_by = vec![Vec::new(); inst.len()];
        for (b, blk) in inst.blockages.iter().enumerate() {
            for &r in &blk.restricted {
                restricted_by[r].push(b);
            }
        }
        Ok(Self {
            inst,
            nets_of: inst.nets_of(),
            net_members: inst.nets.iter().map(|e| e.members.clone()).collect(),
            ungrouped: (0..inst.len()).filter(|&i| group_of[i].is_none()).collect(),
            restricted_by,
        })
    }

    pub fn instance(&self) -> &'a Instance<R> {
        self.inst
    }

    /// Chromosome length without the modulation gene.
    pub fn genome_len(&self) -> usize {
        3 * self.inst.len()
    }

    pub fn decode(&self, c: &Chromosome<R>) -> Result<Decoded<R>, DecodeError> {
        self.run(c, None)
    }

    /// Decode and record every greedy step.
    pub fn decode_traced(&self, c: &Chromosome<R>) -> Result<(Decoded<R>, Vec<StepTrace<R>>), DecodeError> {
        let mut trace = Vec::new();
        let d = self.run(c, Some(&mut trace))?;
        Ok((d, trace))
    }

    fn units(&self, c: &Chromosome<R>, variants: &mut [usize]) -> Result<Vec<Unit>, DecodeError> {
        let inst = self.inst;
        let mut units = Vec::with_capacity(self.ungrouped.len() + inst.groups.len());
        for g in 0..inst.groups.len() {
            let layout = place_symmetry_group(inst, g, c)?;
            for m in &layout.members {
                variants[m.rect] = m.variant;
            }
            units.push(Unit {
                width: layout.width,
                height: layout.height,
                group: Some((g, layout.axis, layout.axis2)),
                members: layout.members.iter().map(|m| (m.rect, m.offset)).collect(),
            });
        }
        for &i in &self.ungrouped {
            let v = inst.rects[i].variants[variants[i]];
            units.push(Unit { width: v.w, height: v.h, group: None, members: vec![(i, Point::ORIGIN)] });
        }
        Ok(units)
    }

    fn run(&self, c: &Chromosome<R>, mut trace: Option<&mut Vec<StepTrace<R>>>) -> Result<Decoded<R>, DecodeError> {
        let inst = self.inst;
        let n = inst.len();
        if c.n() != n {
            return Err(DecodeError::Length { expected: 3 * n, got: c.genes().len() });
        }
        let genes = c.genes();
        let mut variants: Vec<usize> =
            (0..n).map(|i| variant_index(genes[n + i], inst.rects[i].variants.len())).collect();
        let units = self.units(c, &mut variants)?;
        let dims = |i: usize, variants: &[usize]| inst.rects[i].variants[variants[i]];

        let mut keys: Vec<R> = genes[..n].to_vec();
        let p_m = c.modulation().unwrap_or_else(R::one);
        let mut coords = vec![Point::ORIGIN; n];
        let mut axes = vec![0i64; inst.groups.len()];
        let mut placed = vec![false; n];
        let mut unit_done = vec![false; units.len()];
        let mut rect_boxes: Vec<(usize, Obstacle)> = Vec::with_capacity(n);
        let mut boxes: Vec<(i64, i64, i64, i64)> = inst.blockages.iter().map(|b| (b.x, b.y, b.w, b.h)).collect();
        let mut points = PointSet::new();
        for b in &inst.blockages {
            for (x, y) in [(b.x, b.y), (b.x + b.w, b.y), (b.x, b.y + b.h), (b.x + b.w, b.y + b.h)] {
                points.seed(Point::new(x, y));
            }
        }
        let mut eval = PartialEval::new(inst);
        let mut margin = vec![0i64; n];
        let mut obstacles: Vec<Obstacle> = Vec::with_capacity(n + inst.blockages.len());
        let mut tentative: Vec<Tentative> = Vec::new();
        let mut stats = DecodeStats::default();
        let mut unit_margin = vec![0i64; units.len()];
        let mut index = ObstacleIndex::default();
        let size_cap = {
            let mut sizes: Vec<i64> = (0..n).map(|i| dims(i, &variants)).map(|v| v.w.max(v.h)).collect();
            sizes.sort_unstable();
            2 * sizes.get(sizes.len() * 9 / 10).copied().unwrap_or(1)
        };

        for _ in 0..units.len() {
            let u = (0..units.len())
                .filter(|&u| !unit_done[u])
                .map(|u| {
                    let (key, lead) = units[u]
                        .members
                        .iter()
                        .map(|&(r, _)| (keys[r], r))
                        .min_by(|a, b| cmp_real(a.0, b.0).then(a.1.cmp(&b.1)))
                        .expect("units are never empty");
                    (u, key, lead)
                })
                .min_by(|a, b| cmp_real(a.1, b.1).then(a.2.cmp(&b.2)))
                .expect("an unplaced unit remains");
            let (u, _, lead) = u;
            let unit = &units[u];
            let dir = c.direction(lead);
            let outline = Variant::new(unit.width, unit.height);

            margin.iter_mut().for_each(|m| *m = i64::MIN);
            for &(r, _) in &unit.members {
                for (o, &a) in inst.distances.row(r).iter().enumerate() {
                    margin[o] = margin[o].max(a);
                }
            }
            for (src, um) in unit_margin.iter_mut().enumerate() {
                if unit_done[src] {
                    *um = units[src].members.iter().map(|&(r, _)| margin[r]).max().unwrap_or(0);
                }
            }
            // Composite units slide as their outline, keeping the largest
            // member margin; every member then clears its own margin.
            obstacles.clear();
            obstacles.extend(rect_boxes.iter().map(|&(r, o)| Obstacle { margin: margin[r], ..o }));
            let mut blocked: Vec<usize> =
                unit.members.iter().flat_map(|&(r, _)| self.restricted_by[r].iter().copied()).collect();
            blocked.sort_unstable();
            blocked.dedup();
            obstacles.extend(blocked.iter().map(|&b| {
                let blk = &inst.blockages[b];
                Obstacle::new(blk.x, blk.y, blk.w, blk.h, 0)
            }));

            index.rebuild(&obstacles, size_cap);

            let to_tentative = |at: Point, out: &mut Vec<Tentative>| {
                out.clear();
                out.extend(unit.members.iter().map(|&(r, off)| Tentative {
                    rect: r,
                    at: Point::new(at.x + off.x, at.y + off.y),
                    dims: dims(r, &variants),
                }));
            };
            let fits = |at: Point, obstacles: &[Obstacle]| {
                let outer = (at.x, at.y, unit.width, unit.height);
                at.x >= 0 && at.y >= 0 && obstacles.iter().all(|o| separated(outer, (o.x, o.y, o.w, o.h), o.margin))
            };

            let mut best: Option<(R, Point, usize)> = None;
            let mut seen: Vec<(Point, R)> = Vec::new();
            let try_point = |pidx: usize,
                             start: Point,
                             best: &mut Option<(R, Point, usize)>,
                             stats: &mut DecodeStats,
                             tentative: &mut Vec<Tentative>,
                             eval: &mut PartialEval<'_, R>,
                             seen: &mut Vec<(Point, R)>,
                             record: bool| {
                stats.slides += 1;
                for at in slide(outline, start, dir, &index, Point::ORIGIN).iter() {
                    stats.candidates += 1;
                    to_tentative(at, tentative);
                    let s = eval.score(tentative);
                    if record {
                        seen.push((at, s));
                    }
                    let better = match best {
                        None => true,
                        Some((bs, bp, bi)) => {
                            cmp_real(s, *bs).then(at.y.cmp(&bp.y)).then(at.x.cmp(&bp.x)).then(pidx.cmp(bi))
                                == Ordering::Less
                        }
                    };
                    if better {
                        *best = Some((s, at, pidx));
                    }
                }
            };
            let record = trace.is_some();
            for (pidx, anchor) in points.iter().enumerate() {
                let m = anchor.source.map_or(0, |s| unit_margin[s]);
                let start = anchor.shift.apply(anchor.at, m);
                try_point(pidx, start, &mut best, &mut stats, &mut tentative, &mut eval, &mut seen, record);
            }
            if best.is_none() {
                stats.fallbacks += 1;
                let (w_all, h_all) = eval.extent();
                let base = points.len();
                for (k, at) in [Point::new(0, h_all), Point::new(w_all, 0)].into_iter().enumerate() {
                    points.seed(at);
                    try_point(base + k, at, &mut best, &mut stats, &mut tentative, &mut eval, &mut seen, record);
                }
            }
            let at = match best {
                Some((_, at, _)) => at,
                None => {
                    let (_, h_all) = eval.extent();
                    let top = inst.blockages.iter().map(|b| b.y + b.h).chain(std::iter::once(h_all)).max().unwrap_or(0);
                    let amax = rect_boxes.iter().map(|&(r, _)| margin[r]).max().unwrap_or(0).max(0);
                    let at = Point::new(0, top + amax);
                    if !fits(at, &obstacles) {
                        return Err(DecodeError::Stuck { rect: lead });
                    }
                    at
                }
            };

            to_tentative(at, &mut tentative);
            eval.commit(&tentative);
            let mut just = Vec::with_capacity(unit.members.len());
            for t in &tentative {
                coords[t.rect] = t.at;
                placed[t.rect] = true;
                just.push(t.rect);
                rect_boxes.push((t.rect, Obstacle::new(t.at.x, t.at.y, t.dims.w, t.dims.h, 0)));
                boxes.push((t.at.x, t.at.y, t.dims.w, t.dims.h));
            }
            if let Some((g, axis, axis2)) = unit.group {
                axes[g] = match axis {
                    Axis::Vertical => 2 * at.x + axis2,
                    Axis::Horizontal => 2 * at.y + axis2,
                };
            }
            unit_done[u] = true;
            points.expand(u, at, unit.width, unit.height, &boxes);
            apply_priority_modulation(&mut keys, &placed, &just, &self.nets_of, &self.net_members, p_m);
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(StepTrace { rects: just, candidates: seen, chosen: at });
            }
        }

        let placement = Placement { coords, variants, axes };
        let report = evaluate(&placement, inst);
        Ok(Decoded { placement, report, stats })
    }
}

/// Decode `c` for `inst`.
pub fn decode<R: Real>(c: &Chromosome<R>, inst: &Instance<R>) -> Result<Decoded<R>, DecodeError> {
    Decoder::new(inst)?.decode(c)
}
