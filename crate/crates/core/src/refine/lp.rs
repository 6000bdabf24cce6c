// SPDX-License-Identifier: Apache-2.0

//! Detailed optimization with frozen relative positions.
//!
//! Every pair of rectangles (and every restricted rectangle against its
//! blockages) keeps the separation that currently has the most slack. With
//! variants and relations fixed the criterion becomes a linear program in
//! the coordinates, solved with `minilp`. The continuous optimum is rounded
//! back to the integer grid, symmetry is restored exactly and a few push
//! sweeps repair the rounding; the result is kept only if it is feasible
//! and strictly better.

use log::debug;
use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use serde::{Deserialize, Serialize};

use crate::evaluator::{evaluate, CriterionReport, Normalizers};
use crate::model::{check_feasible, Axis, Instance, Placement, Point, Side, Variant};
use crate::refine::{Clock, RefineError};
use crate::scalar::Real;

/// Separation kept between two boxes `a` and `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `a` is left of `b`.
    LeftOf,
    /// `a` is below `b`.
    Below,
    /// `a` is right of `b`.
    RightOf,
    /// `a` is above `b`.
    Above,
}

impl Relation {
    /// Tie-break order.
    pub const ORDER: [Relation; 4] = [Relation::LeftOf, Relation::Below, Relation::RightOf, Relation::Above];

    /// Residual of the separation constraint; non-negative when satisfied.
    pub fn slack(self, a: (i64, i64, i64, i64), b: (i64, i64, i64, i64), margin: i64) -> i64 {
        let (ax, ay, aw, ah) = a;
        let (bx, by, bw, bh) = b;
        match self {
            Relation::LeftOf => bx - (ax + aw + margin),
            Relation::Below => by - (ay + ah + margin),
            Relation::RightOf => ax - (bx + bw + margin),
            Relation::Above => ay - (by + bh + margin),
        }
    }

    /// The relation of largest slack, earliest in [`Relation::ORDER`] on ties.
    pub fn loosest(a: (i64, i64, i64, i64), b: (i64, i64, i64, i64), margin: i64) -> (Relation, i64) {
        let mut best = (Relation::LeftOf, Relation::LeftOf.slack(a, b, margin));
        for rel in &Relation::ORDER[1..] {
            let s = rel.slack(a, b, margin);
            if s > best.1 {
                best = (*rel, s);
            }
        }
        best
    }
}

/// Frozen relative positions of a placement.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationAssignment {
    /// `(i, j, relation, margin)` for every pair `i < j`.
    pub pairs: Vec<(usize, usize, Relation, i64)>,
    /// `(rect, blockage, relation)` for every restricted rectangle.
    pub blockages: Vec<(usize, usize, Relation)>,
}

fn boxes<R>(inst: &Instance<R>, p: &Placement) -> Vec<(i64, i64, i64, i64)> {
    (0..inst.len())
        .map(|i| {
            let v = p.dims(inst, i);
            (p.coords[i].x, p.coords[i].y, v.w, v.h)
        })
        .collect()
}

/// Extract the loosest relation of every pair and blockage restriction.
pub fn relations<R>(inst: &Instance<R>, p: &Placement) -> RelationAssignment {
    let n = inst.len();
    let bx = boxes(inst, p);
    let mut out = RelationAssignment::default();
    for i in 0..n {
        let row = inst.distances.row(i);
        for j in i + 1..n {
            let (rel, _) = Relation::loosest(bx[i], bx[j], row[j]);
            out.pairs.push((i, j, rel, row[j]));
        }
    }
    for (b, blk) in inst.blockages.iter().enumerate() {
        for &r in &blk.restricted {
            let (rel, _) = Relation::loosest(bx[r], (blk.x, blk.y, blk.w, blk.h), 0);
            out.blockages.push((r, b, rel));
        }
    }
    out
}

impl RelationAssignment {
    /// Whether every relation holds in `p`.
    pub fn satisfied_by<R>(&self, inst: &Instance<R>, p: &Placement) -> bool {
        let bx = boxes(inst, p);
        self.pairs.iter().all(|&(i, j, rel, a)| rel.slack(bx[i], bx[j], a) >= 0)
            && self.blockages.iter().all(|&(r, b, rel)| {
                let blk = &inst.blockages[b];
                rel.slack(bx[r], (blk.x, blk.y, blk.w, blk.h), 0) >= 0
            })
    }
}

/// Outcome of repeated LP rounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LpResult<R> {
    pub placement: Placement,
    pub report: CriterionReport<R>,
    /// LP solves performed.
    pub rounds: usize,
}

/// Run LP rounds until one fails to improve, `max_rounds` is reached or the
/// clock expires.
pub fn lp_refine<R: Real>(
    inst: &Instance<R>,
    p: &Placement,
    max_rounds: usize,
    clock: &Clock,
) -> Result<LpResult<R>, RefineError> {
    if let Some(v) = check_feasible(inst, p)? {
        return Err(RefineError::InfeasibleInput(v));
    }
    let mut out = LpResult { placement: p.clone(), report: evaluate(p, inst), rounds: 0 };
    while out.rounds < max_rounds && !clock.expired() {
        out.rounds += 1;
        match lp_step(inst, &out.placement)? {
            Some((q, r)) => {
                out.placement = q;
                out.report = r;
            }
            None => break,
        }
    }
    Ok(out)
}

/// One LP round; `None` when it does not yield a strictly better feasible
/// placement.
pub fn lp_step<R: Real>(
    inst: &Instance<R>,
    p: &Placement,
) -> Result<Option<(Placement, CriterionReport<R>)>, RefineError> {
    if let Some(v) = check_feasible(inst, p)? {
        return Err(RefineError::InfeasibleInput(v));
    }
    let n = inst.len();
    if n == 0 {
        return Ok(None);
    }
    let base = evaluate(p, inst);
    let rel = relations(inst, p);
    let Some((xs, ys, axes)) = solve(inst, p, &rel, &base) else {
        return Ok(None);
    };
    let Some(q) = round(inst, p, &rel, &xs, &ys, &axes) else {
        debug!("lp: rounding could not be repaired");
        return Ok(None);
    };
    if !matches!(check_feasible(inst, &q), Ok(None)) {
        debug!("lp: rounded placement infeasible");
        return Ok(None);
    }
    let report = evaluate(&q, inst);
    if report.total < base.total {
        Ok(Some((q, report)))
    } else {
        Ok(None)
    }
}

type Solved = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Size of a variant along one axis.
type Extent = fn(Variant) -> i64;

fn solve<R: Real>(
    inst: &Instance<R>,
    p: &Placement,
    rel: &RelationAssignment,
    base: &CriterionReport<R>,
) -> Option<Solved> {
    use ComparisonOp::{Eq, Ge, Le};
    let n = inst.len();
    let dims: Vec<Variant> = (0..n).map(|i| p.dims(inst, i)).collect();
    let w = &inst.weights;
    let norm = Normalizers::of(inst);
    let k = |c: R, s: R| if s == R::zero() { 0.0 } else { (c / s).as_f64() };
    let (k_conn, k_prox, k_inter) = (k(w.c_conn, norm.conn), k(w.c_prox, norm.prox), k(w.c_inter, norm.inter));
    let inf = f64::INFINITY;

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let c_area = w.c_area.as_f64();
    let width = lp.add_var(c_area, (0.0, inf));
    let height = lp.add_var(c_area, (0.0, inf));
    let x: Vec<Variable> = (0..n).map(|_| lp.add_var(0.0, (0.0, inf))).collect();
    let y: Vec<Variable> = (0..n).map(|_| lp.add_var(0.0, (0.0, inf))).collect();
    let axes: Vec<Variable> = inst.groups.iter().map(|_| lp.add_var(0.0, (-inf, inf))).collect();

    for i in 0..n {
        lp.add_constraint([(x[i], 1.0), (width, -1.0)], Le, -(dims[i].w as f64));
        lp.add_constraint([(y[i], 1.0), (height, -1.0)], Le, -(dims[i].h as f64));
    }
    for &(i, j, r, a) in &rel.pairs {
        let a = a as f64;
        match r {
            Relation::LeftOf => lp.add_constraint([(x[j], 1.0), (x[i], -1.0)], Ge, dims[i].w as f64 + a),
            Relation::Below => lp.add_constraint([(y[j], 1.0), (y[i], -1.0)], Ge, dims[i].h as f64 + a),
            Relation::RightOf => lp.add_constraint([(x[i], 1.0), (x[j], -1.0)], Ge, dims[j].w as f64 + a),
            Relation::Above => lp.add_constraint([(y[i], 1.0), (y[j], -1.0)], Ge, dims[j].h as f64 + a),
        }
    }
    for &(r, b, re) in &rel.blockages {
        let blk = &inst.blockages[b];
        match re {
            Relation::LeftOf => lp.add_constraint([(x[r], 1.0)], Le, (blk.x - dims[r].w) as f64),
            Relation::Below => lp.add_constraint([(y[r], 1.0)], Le, (blk.y - dims[r].h) as f64),
            Relation::RightOf => lp.add_constraint([(x[r], 1.0)], Ge, (blk.x + blk.w) as f64),
            Relation::Above => lp.add_constraint([(y[r], 1.0)], Ge, (blk.y + blk.h) as f64),
        }
    }
    for (g, group) in inst.groups.iter().enumerate() {
        let (across, along, size): (&[Variable], &[Variable], Extent) = match group.axis {
            Axis::Vertical => (&x, &y, |v| v.w),
            Axis::Horizontal => (&y, &x, |v| v.h),
        };
        for &(i, j) in &group.pairs {
            lp.add_constraint([(across[i], 1.0), (across[j], 1.0), (axes[g], -1.0)], Eq, -(size(dims[i]) as f64));
            lp.add_constraint([(along[i], 1.0), (along[j], -1.0)], Eq, 0.0);
        }
        for &s in &group.selfs {
            lp.add_constraint([(across[s], 2.0), (axes[g], -1.0)], Eq, -(size(dims[s]) as f64));
        }
    }
    if !base.penalty_applied {
        let (lo, hi) = (inst.aspect_lo.as_f64(), inst.aspect_hi.as_f64());
        let (long, short) = if base.width >= base.height { (width, height) } else { (height, width) };
        lp.add_constraint([(short, 1.0), (long, -1.0)], Le, 0.0);
        lp.add_constraint([(short, 1.0), (long, -lo)], Ge, 0.0);
        lp.add_constraint([(short, 1.0), (long, -hi)], Le, 0.0);
    }

    // Centroid coordinate of rect i: x_i + w_i / 2.
    if k_conn > 0.0 {
        for net in &inst.nets {
            let c = k_conn * net.cost.as_f64();
            if c == 0.0 {
                continue;
            }
            for (coord, size) in [(&x, 0usize), (&y, 1usize)] {
                let hi = lp.add_var(c, (-inf, inf));
                let lo = lp.add_var(-c, (-inf, inf));
                for &m in &net.members {
                    let half = if size == 0 { dims[m].w } else { dims[m].h } as f64 / 2.0;
                    lp.add_constraint([(hi, 1.0), (coord[m], -1.0)], Ge, half);
                    lp.add_constraint([(lo, 1.0), (coord[m], -1.0)], Le, half);
                }
            }
        }
    }
    if k_prox > 0.0 {
        for q in &inst.proximities {
            let c = k_prox * q.cost.as_f64();
            for (coord, size) in [(&x, 0usize), (&y, 1usize)] {
                let half = |m: usize| if size == 0 { dims[m].w } else { dims[m].h } as f64 / 2.0;
                // d = c_i - c_j = coord_i - coord_j + (half_i - half_j)
                let off = half(q.i) - half(q.j);
                if c > 0.0 {
                    let d = lp.add_var(c, (0.0, inf));
                    lp.add_constraint([(d, 1.0), (coord[q.i], -1.0), (coord[q.j], 1.0)], Ge, off);
                    lp.add_constraint([(d, 1.0), (coord[q.i], 1.0), (coord[q.j], -1.0)], Ge, -off);
                } else {
                    let (ci, cj) = if size == 0 {
                        (p.centroid2(inst, q.i).0, p.centroid2(inst, q.j).0)
                    } else {
                        (p.centroid2(inst, q.i).1, p.centroid2(inst, q.j).1)
                    };
                    let sign = if ci >= cj { 1.0 } else { -1.0 };
                    // Keep the current order and reward separation along it.
                    let d = lp.add_var(c, (0.0, inf));
                    lp.add_constraint([(d, 1.0), (coord[q.i], -sign), (coord[q.j], sign)], Eq, sign * off);
                }
            }
        }
    }
    if k_inter > 0.0 {
        for e in &inst.interfaces {
            let c = k_inter * e.cost.as_f64();
            let vertical_side = matches!(e.side, Side::Left | Side::Right);
            let (fixed_coord, free_coord, extent): (&[Variable], &[Variable], Variable) =
                if vertical_side { (&x, &y, height) } else { (&y, &x, width) };
            let t = lp.add_var(0.0, (0.0, inf));
            lp.add_constraint([(t, 1.0), (extent, -1.0)], Le, 0.0);
            for &m in &e.members {
                let (fixed_half, free_half) = if vertical_side {
                    (dims[m].w as f64 / 2.0, dims[m].h as f64 / 2.0)
                } else {
                    (dims[m].h as f64 / 2.0, dims[m].w as f64 / 2.0)
                };
                // Distance to the side is linear: the centroid is inside the box.
                match e.side {
                    Side::Left | Side::Bottom => {
                        let d = lp.add_var(c, (0.0, inf));
                        lp.add_constraint([(d, 1.0), (fixed_coord[m], -1.0)], Eq, fixed_half);
                    }
                    Side::Right | Side::Top => {
                        let far = if vertical_side { width } else { height };
                        let d = lp.add_var(c, (0.0, inf));
                        lp.add_constraint([(d, 1.0), (far, -1.0), (fixed_coord[m], 1.0)], Eq, -fixed_half);
                    }
                }
                let u = lp.add_var(c, (0.0, inf));
                lp.add_constraint([(u, 1.0), (free_coord[m], -1.0), (t, 1.0)], Ge, free_half);
                lp.add_constraint([(u, 1.0), (free_coord[m], 1.0), (t, -1.0)], Ge, -free_half);
            }
        }
    }

    match lp.solve() {
        Ok(sol) => Some((
            x.iter().map(|&v| sol[v]).collect(),
            y.iter().map(|&v| sol[v]).collect(),
            axes.iter().map(|&v| sol[v]).collect(),
        )),
        Err(e) => {
            debug!("lp: solver returned {e}");
            None
        }
    }
}

fn to_grid(v: f64) -> i64 {
    let r = v.round();
    let snapped = if (v - r).abs() < 1e-6 { r } else { v.floor() };
    (snapped as i64).max(0)
}

/// Round LP coordinates, restore symmetry and repair violated relations.
fn round<R>(
    inst: &Instance<R>,
    p: &Placement,
    rel: &RelationAssignment,
    xs: &[f64],
    ys: &[f64],
    axes_lp: &[f64],
) -> Option<Placement> {
    let n = inst.len();
    let mut q = Placement {
        coords: (0..n).map(|i| Point::new(to_grid(xs[i]), to_grid(ys[i]))).collect(),
        variants: p.variants.clone(),
        axes: vec![0; inst.groups.len()],
    };
    let group_of = inst.group_of();
    for (g, group) in inst.groups.iter().enumerate() {
        let parity = group.selfs.first().map(|&s| {
            let v = q.dims(inst, s);
            match group.axis {
                Axis::Vertical => v.w.rem_euclid(2),
                Axis::Horizontal => v.h.rem_euclid(2),
            }
        });
        let target = axes_lp[g];
        let mut a = target.round() as i64;
        if (target - a as f64).abs() >= 1e-6 {
            a = target.floor() as i64;
        }
        if let Some(par) = parity {
            if a.rem_euclid(2) != par {
                a += 1;
            }
        }
        q.axes[g] = a;
        restore_group(inst, &mut q, g);
        let min_x = group.members().map(|m| q.coords[m].x).min().unwrap_or(0);
        let min_y = group.members().map(|m| q.coords[m].y).min().unwrap_or(0);
        if min_x < 0 || min_y < 0 {
            let lead = group.members().next().unwrap_or(0);
            shift(inst, &mut q, &group_of, lead, (-min_x).max(0), (-min_y).max(0));
        }
    }
    let mut partner: Vec<Option<usize>> = vec![None; n];
    for group in &inst.groups {
        for &(i, j) in &group.pairs {
            partner[i] = Some(j);
            partner[j] = Some(i);
        }
    }

    // Push sweeps: move the far box of a violated relation (or its whole group).
    let max_sweeps = 4 * n + 4;
    for _ in 0..max_sweeps {
        let mut changed = false;
        for &(i, j, r, a) in &rel.pairs {
            let bi = box_of(inst, &q, i);
            let bj = box_of(inst, &q, j);
            let s = r.slack(bi, bj, a);
            if s >= 0 {
                continue;
            }
            let (mover, dx, dy) = match r {
                Relation::LeftOf => (j, -s, 0),
                Relation::Below => (j, 0, -s),
                Relation::RightOf => (i, -s, 0),
                Relation::Above => (i, 0, -s),
            };
            match group_of[i] {
                Some(g) if group_of[j] == Some(g) => {
                    // Inside a group only moves along the axis keep the mirror intact.
                    let along = match inst.groups[g].axis {
                        Axis::Vertical => dx == 0,
                        Axis::Horizontal => dy == 0,
                    };
                    if along {
                        for m in std::iter::once(mover).chain(partner[mover]) {
                            q.coords[m].x += dx;
                            q.coords[m].y += dy;
                        }
                    } else if !widen(inst, &mut q, g, i, j, dx + dy) {
                        return None;
                    }
                }
                _ => shift(inst, &mut q, &group_of, mover, dx, dy),
            }
            changed = true;
        }
        for &(r, b, re) in &rel.blockages {
            let blk = &inst.blockages[b];
            let s = re.slack(box_of(inst, &q, r), (blk.x, blk.y, blk.w, blk.h), 0);
            if s >= 0 {
                continue;
            }
            let (dx, dy) = match re {
                Relation::RightOf => (-s, 0),
                Relation::Above => (0, -s),
                // Moving toward the origin may break other relations; give up.
                Relation::LeftOf | Relation::Below => return None,
            };
            shift(inst, &mut q, &group_of, r, dx, dy);
            changed = true;
        }
        if !changed {
            return Some(q);
        }
    }
    None
}

fn box_of<R>(inst: &Instance<R>, q: &Placement, i: usize) -> (i64, i64, i64, i64) {
    let v = q.dims(inst, i);
    (q.coords[i].x, q.coords[i].y, v.w, v.h)
}

/// Place every member of group `g` from its axis and the coordinates of
/// the first member of each pair.
fn restore_group<R>(inst: &Instance<R>, q: &mut Placement, g: usize) {
    let group = &inst.groups[g];
    let a = q.axes[g];
    for &(i, j) in &group.pairs {
        let v = q.dims(inst, i);
        match group.axis {
            Axis::Vertical => {
                q.coords[j].x = a - q.coords[i].x - v.w;
                q.coords[j].y = q.coords[i].y;
            }
            Axis::Horizontal => {
                q.coords[j].y = a - q.coords[i].y - v.h;
                q.coords[j].x = q.coords[i].x;
            }
        }
    }
    for &s in &group.selfs {
        let v = q.dims(inst, s);
        match group.axis {
            Axis::Vertical => q.coords[s].x = (a - v.w) / 2,
            Axis::Horizontal => q.coords[s].y = (a - v.h) / 2,
        }
    }
}

/// Open group `g` by `d` across its axis: members past the axis move out by
/// `2d`, members on it by `d`. Only helps when `i` and `j` sit on
/// opposite sides.
fn widen<R>(inst: &Instance<R>, q: &mut Placement, g: usize, i: usize, j: usize, d: i64) -> bool {
    let group = &inst.groups[g];
    let a = q.axes[g];
    let across2 = |q: &Placement, m: usize| {
        let v = q.dims(inst, m);
        match group.axis {
            Axis::Vertical => 2 * q.coords[m].x + v.w,
            Axis::Horizontal => 2 * q.coords[m].y + v.h,
        }
    };
    if (across2(q, i) - a).signum() == (across2(q, j) - a).signum() {
        return false;
    }
    let members: Vec<usize> = group.members().collect();
    for m in members {
        let step = match across2(q, m).cmp(&a) {
            std::cmp::Ordering::Greater => 2 * d,
            std::cmp::Ordering::Equal => d,
            std::cmp::Ordering::Less => 0,
        };
        match group.axis {
            Axis::Vertical => q.coords[m].x += step,
            Axis::Horizontal => q.coords[m].y += step,
        }
    }
    q.axes[g] += 2 * d;
    true
}

/// Translate rectangle `r`, or its whole group, by `(dx, dy)`.
fn shift<R>(inst: &Instance<R>, q: &mut Placement, group_of: &[Option<usize>], r: usize, dx: i64, dy: i64) {
    match group_of[r] {
        None => {
            q.coords[r].x += dx;
            q.coords[r].y += dy;
        }
        Some(g) => {
            for m in inst.groups[g].members() {
                q.coords[m].x += dx;
                q.coords[m].y += dy;
            }
            q.axes[g] += match inst.groups[g].axis {
                Axis::Vertical => 2 * dx,
                Axis::Horizontal => 2 * dy,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{decode, Chromosome};
    use crate::model::{is_feasible, DistanceSpec, Net, Rect, SymmetryGroup};
    use crate::syngen::{generate, GenParams};
    use proptest::prelude::*;

    fn pair(a: i64, gap: i64) -> (Instance<f64>, Placement) {
        let mut inst: Instance<f64> =
            Instance::new(vec![Rect::new("a", vec![Variant::new(2, 2)]), Rect::new("b", vec![Variant::new(2, 2)])]);
        inst.weights.c_conn = 1.0;
        inst.distances = DistanceSpec::uniform(2, a);
        let p = Placement {
            coords: vec![Point::new(0, 0), Point::new(2 + a + gap, 0)],
            variants: vec![0, 0],
            axes: vec![],
        };
        (inst, p)
    }

    #[test]
    fn loosest_relation_and_tie_order() {
        let a = (0, 0, 2, 2);
        assert_eq!(Relation::loosest(a, (5, 0, 2, 2), 1), (Relation::LeftOf, 2));
        assert_eq!(Relation::loosest(a, (0, 4, 2, 2), 0), (Relation::Below, 2));
        assert_eq!(Relation::loosest((5, 0, 2, 2), a, 0), (Relation::RightOf, 3));
        // Diagonal with equal slack on both axes: left-of wins.
        assert_eq!(Relation::loosest(a, (3, 3, 2, 2), 0), (Relation::LeftOf, 1));
    }

    #[test]
    fn abutting_pair_without_wires_is_unchanged() {
        let (mut inst, p) = pair(0, 0);
        inst.weights.c_conn = 0.0;
        let out = lp_refine(&inst, &p, 20, &Clock::unlimited()).unwrap();
        assert_eq!(out.placement, p);
        assert_eq!(out.report, evaluate(&p, &inst));
    }

    #[test]
    fn slack_beyond_the_margin_is_removed() {
        let (mut inst, p) = pair(1, 3);
        inst.nets.push(Net::new(vec![0, 1]));
        let before = evaluate(&p, &inst);
        let out = lp_refine(&inst, &p, 20, &Clock::unlimited()).unwrap();
        assert_eq!(out.placement.coords[1], Point::new(3, 0));
        assert_eq!(before.conn_raw - out.report.conn_raw, 3.0);
        assert_eq!(before.area_term - out.report.area_term, 3.0);
        assert!(is_feasible(&inst, &out.placement));
    }

    #[test]
    fn symmetric_pair_closes_up_around_its_axis() {
        let mut inst: Instance<f64> = Instance::new(vec![
            Rect::new("a", vec![Variant::new(2, 2)]),
            Rect::new("b", vec![Variant::new(2, 2)]),
            Rect::new("s", vec![Variant::new(2, 2)]),
        ]);
        inst.groups.push(SymmetryGroup { axis: Axis::Vertical, pairs: vec![(0, 1)], selfs: vec![2] });
        inst.nets.push(Net::new(vec![0, 1, 2]));
        let p = Placement {
            coords: vec![Point::new(0, 0), Point::new(8, 0), Point::new(4, 5)],
            variants: vec![0; 3],
            axes: vec![10],
        };
        assert!(is_feasible(&inst, &p));
        let out = lp_refine(&inst, &p, 20, &Clock::unlimited()).unwrap();
        assert!(is_feasible(&inst, &out.placement));
        assert!(out.report.total < evaluate(&p, &inst).total);
        assert_eq!(out.report.width, 4);
    }

    #[test]
    fn relations_hold_for_their_source() {
        let inst: Instance<f64> = generate(&GenParams {
            n_rects: 15,
            n_blockages: 2,
            with_symmetry: true,
            rng_seed: 4,
            ..GenParams::default()
        })
        .unwrap();
        let c = Chromosome::new((0..45).map(|k| (k * 37 % 45) as f64 / 45.0).collect()).unwrap();
        let d = decode(&c, &inst).unwrap();
        let rel = relations(&inst, &d.placement);
        assert_eq!(rel.pairs.len(), 15 * 14 / 2);
        assert!(rel.satisfied_by(&inst, &d.placement));
    }

    #[test]
    fn infeasible_input_is_rejected() {
        let (inst, mut p) = pair(0, 0);
        p.coords[1] = Point::new(1, 0);
        assert!(matches!(lp_refine(&inst, &p, 1, &Clock::unlimited()), Err(RefineError::InfeasibleInput(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lp_is_guarded_and_idempotent(seed in 0u64..500, sym in any::<bool>(), n in 3usize..14) {
            let params = GenParams { n_rects: n, n_nets_range: (2, 8), with_symmetry: sym, n_blockages: (seed % 3) as usize, rng_seed: seed, ..GenParams::default() };
            let inst: Instance<f64> = generate(&params).unwrap();
            let genes: Vec<f64> = (0..3 * n).map(|k| ((k as u64 * 6151 + seed * 7727) % 997) as f64 / 997.0).collect();
            let d = decode(&Chromosome::new(genes).unwrap(), &inst).unwrap();
            let rel = relations(&inst, &d.placement);
            prop_assert!(rel.satisfied_by(&inst, &d.placement));
            let once = lp_refine(&inst, &d.placement, 20, &Clock::unlimited()).unwrap();
            prop_assert!(is_feasible(&inst, &once.placement));
            prop_assert!(once.report.total <= d.report.total + 1e-9 * d.report.total.abs());
            if once.rounds < 20 {
                let twice = lp_refine(&inst, &once.placement, 20, &Clock::unlimited()).unwrap();
                prop_assert!((twice.report.total - once.report.total).abs() <= 1e-9 * once.report.total.abs());
            }
        }
    }
}
