// SPDX-License-Identifier: Apache-2.0

//! Relocation of placed units.
//!
//! A unit (a symmetry group moved as its outline, or a single rectangle)
//! is lifted out of the placement and re-slid from every anchor point
//! generated by the remaining rectangles, in every variant and both slide
//! orders. The best strictly improving spot is kept.

use std::cmp::Ordering;

use crate::decoder::{slide, Direction, Obstacle, ObstacleIndex, PointSet};
use crate::evaluator::{evaluate, CriterionReport, PartialEval, Tentative};
use crate::model::{check_feasible, Axis, Instance, Placement, Point, Variant};
use crate::refine::{Clock, RefineError};
use crate::scalar::{cmp_real, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct LayoutResult<R> {
    pub placement: Placement,
    pub report: CriterionReport<R>,
    /// Units lifted and re-slid.
    pub attempts: usize,
    /// Relocations accepted.
    pub moves: usize,
}

struct Unit {
    members: Vec<usize>,
    group: Option<usize>,
}

fn units<R>(inst: &Instance<R>) -> Vec<Unit> {
    let group_of = inst.group_of();
    let mut out: Vec<Unit> = Vec::with_capacity(inst.len());
    let mut seen = vec![false; inst.groups.len()];
    for (r, g) in group_of.iter().enumerate() {
        match *g {
            None => out.push(Unit { members: vec![r], group: None }),
            Some(g) if !seen[g] => {
                seen[g] = true;
                out.push(Unit { members: inst.groups[g].members().collect(), group: Some(g) });
            }
            Some(_) => {}
        }
    }
    out
}

/// A candidate shape of a unit: outline and member offsets.
struct Shape {
    outline: Variant,
    members: Vec<(usize, Point, usize)>,
}

fn shapes<R>(inst: &Instance<R>, p: &Placement, unit: &Unit) -> Vec<Shape> {
    if unit.group.is_none() {
        let r = unit.members[0];
        return inst.rects[r]
            .variants
            .iter()
            .enumerate()
            .map(|(k, &v)| Shape { outline: v, members: vec![(r, Point::ORIGIN, k)] })
            .collect();
    }
    let x0 = unit.members.iter().map(|&r| p.coords[r].x).min().unwrap_or(0);
    let y0 = unit.members.iter().map(|&r| p.coords[r].y).min().unwrap_or(0);
    let (mut w, mut h) = (0, 0);
    let members = unit
        .members
        .iter()
        .map(|&r| {
            let v = p.dims(inst, r);
            let off = Point::new(p.coords[r].x - x0, p.coords[r].y - y0);
            w = w.max(off.x + v.w);
            h = h.max(off.y + v.h);
            (r, off, p.variants[r])
        })
        .collect();
    vec![Shape { outline: Variant::new(w, h), members }]
}

fn tentatives<R>(inst: &Instance<R>, shape: &Shape, at: Point, out: &mut Vec<Tentative>) {
    out.clear();
    out.extend(shape.members.iter().map(|&(r, off, k)| Tentative {
        rect: r,
        at: Point::new(at.x + off.x, at.y + off.y),
        dims: inst.rects[r].variants[k],
    }));
}

/// Relocate units while the criterion strictly drops, for at most `budget`
/// attempts.
pub fn ls_layout<R: Real>(
    inst: &Instance<R>,
    p: &Placement,
    budget: usize,
    clock: &Clock,
) -> Result<LayoutResult<R>, RefineError> {
    if let Some(v) = check_feasible(inst, p)? {
        return Err(RefineError::InfeasibleInput(v));
    }
    let n = inst.len();
    let mut cur = p.clone();
    let mut report = evaluate(&cur, inst);
    let mut result = LayoutResult { placement: cur.clone(), report: report.clone(), attempts: 0, moves: 0 };
    if budget == 0 || n == 0 {
        return Ok(result);
    }

    let units = units(inst);
    let mut restricted_by = vec![Vec::new(); n];
    for (b, blk) in inst.blockages.iter().enumerate() {
        for &r in &blk.restricted {
            restricted_by[r].push(b);
        }
    }
    let size_cap = {
        let mut sizes: Vec<i64> = (0..n).map(|i| p.dims(inst, i)).map(|v| v.w.max(v.h)).collect();
        sizes.sort_unstable();
        2 * sizes[sizes.len() * 9 / 10]
    };

    let mut eval = PartialEval::from_placement(inst, &cur);
    let mut in_unit = vec![false; n];
    let mut margin = vec![0i64; n];
    let mut obstacles: Vec<Obstacle> = Vec::with_capacity(n + inst.blockages.len());
    let mut boxes: Vec<(i64, i64, i64, i64)> = Vec::with_capacity(n + inst.blockages.len());
    let mut index = ObstacleIndex::default();
    let mut tentative = Vec::new();

    loop {
        let mut improved = false;
        for unit in &units {
            if result.attempts >= budget || clock.expired() {
                result.placement = cur;
                result.report = report;
                return Ok(result);
            }
            result.attempts += 1;
            let old_total = report.total;

            for &r in &unit.members {
                in_unit[r] = true;
                eval.remove(r);
            }
            margin.iter_mut().for_each(|m| *m = i64::MIN);
            for &r in &unit.members {
                for (o, &a) in inst.distances.row(r).iter().enumerate() {
                    margin[o] = margin[o].max(a);
                }
            }
            obstacles.clear();
            boxes.clear();
            let mut points = PointSet::new();
            for b in &inst.blockages {
                boxes.push((b.x, b.y, b.w, b.h));
                for (x, y) in [(b.x, b.y), (b.x + b.w, b.y), (b.x, b.y + b.h), (b.x + b.w, b.y + b.h)] {
                    points.seed(Point::new(x, y));
                }
            }
            for o in (0..n).filter(|&o| !in_unit[o]) {
                let v = cur.dims(inst, o);
                let c = cur.coords[o];
                obstacles.push(Obstacle::new(c.x, c.y, v.w, v.h, margin[o]));
                boxes.push((c.x, c.y, v.w, v.h));
            }
            for o in (0..n).filter(|&o| !in_unit[o]) {
                let v = cur.dims(inst, o);
                points.expand(o, cur.coords[o], v.w, v.h, &boxes);
            }
            let mut blocked: Vec<usize> = unit.members.iter().flat_map(|&r| restricted_by[r].iter().copied()).collect();
            blocked.sort_unstable();
            blocked.dedup();
            obstacles.extend(blocked.iter().map(|&b| {
                let blk = &inst.blockages[b];
                Obstacle::new(blk.x, blk.y, blk.w, blk.h, 0)
            }));
            index.rebuild(&obstacles, size_cap);

            let shapes = shapes(inst, &cur, unit);
            let mut best: Option<(R, Point, usize)> = None;
            for (si, shape) in shapes.iter().enumerate() {
                for dir in [Direction::HorizontalFirst, Direction::VerticalFirst] {
                    for anchor in points.iter() {
                        let m = anchor.source.map_or(0, |s| margin[s]);
                        let start = anchor.shift.apply(anchor.at, m);
                        for at in slide(shape.outline, start, dir, &index, Point::ORIGIN).iter() {
                            tentatives(inst, shape, at, &mut tentative);
                            let s = eval.score(&tentative);
                            let better = match &best {
                                None => true,
                                Some((bs, bp, bi)) => {
                                    cmp_real(s, *bs).then(at.y.cmp(&bp.y)).then(at.x.cmp(&bp.x)).then(si.cmp(bi))
                                        == Ordering::Less
                                }
                            };
                            if better {
                                best = Some((s, at, si));
                            }
                        }
                    }
                }
            }

            let tol = R::of(1e-9) * old_total.abs().max(R::one());
            let mut accepted = false;
            if let Some((s, at, si)) = best {
                if s < old_total - tol {
                    let shape = &shapes[si];
                    let mut next = cur.clone();
                    tentatives(inst, shape, at, &mut tentative);
                    for t in &tentative {
                        next.coords[t.rect] = t.at;
                        next.variants[t.rect] = shape.members.iter().find(|m| m.0 == t.rect).map_or(0, |m| m.2);
                    }
                    if let Some(g) = unit.group {
                        let lead = unit.members[0];
                        let (dx, dy) =
                            (next.coords[lead].x - cur.coords[lead].x, next.coords[lead].y - cur.coords[lead].y);
                        next.axes[g] += match inst.groups[g].axis {
                            Axis::Vertical => 2 * dx,
                            Axis::Horizontal => 2 * dy,
                        };
                    }
                    let next_report = evaluate(&next, inst);
                    if matches!(check_feasible(inst, &next), Ok(None)) && next_report.total < old_total {
                        eval.commit(&tentative);
                        cur = next;
                        report = next_report;
                        accepted = true;
                        improved = true;
                        result.moves += 1;
                    }
                }
            }
            if !accepted {
                tentative.clear();
                tentative.extend(unit.members.iter().map(|&r| Tentative {
                    rect: r,
                    at: cur.coords[r],
                    dims: cur.dims(inst, r),
                }));
                eval.commit(&tentative);
            }
            for &r in &unit.members {
                in_unit[r] = false;
            }
        }
        if !improved {
            break;
        }
    }
    result.placement = cur;
    result.report = report;
    Ok(result)
}
