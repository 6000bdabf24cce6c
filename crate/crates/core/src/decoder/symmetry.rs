// SPDX-License-Identifier: Apache-2.0

//! Sub-placement of symmetry groups.
//!
//! A group is built on its own empty canvas around a fixed axis and then
//! handed to the main procedure as one rigid unit. Work happens in a frame
//! where the axis is vertical; horizontal groups are transposed in and out.
//! In that frame the doubled axis coordinate is the parity bit `p` (0 or 1)
//! shared by all self-symmetric members, pairs `(i, j)` satisfy
//! `x_i + x_j + w = p`, and self-symmetric members satisfy `2 x + w = p`.

use std::cmp::Ordering;

use crate::decoder::points::PointSet;
use crate::decoder::slide::{phase_y, slide, Direction, Obstacle};
use crate::decoder::{variant_index, Chromosome, DecodeError};
use crate::evaluator::{NetBox, Normalizers};
use crate::model::{self_parities, separated, Axis, Instance, Point, Variant};
use crate::scalar::{cmp_real, Real};

/// Position of one group member relative to the group outline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupMember {
    pub rect: usize,
    pub offset: Point,
    pub variant: usize,
}

/// A finished symmetry group: outline, member offsets and the doubled axis
/// coordinate measured from the outline's bottom-left corner (along x for a
/// vertical axis, along y for a horizontal one).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupLayout {
    pub group: usize,
    pub axis: Axis,
    pub width: i64,
    pub height: i64,
    pub axis2: i64,
    pub members: Vec<GroupMember>,
}

#[derive(Clone, Copy, Debug)]
enum Item {
    Pair(usize, usize),
    Single(usize),
}

impl Item {
    fn lead(&self) -> usize {
        match *self {
            Item::Pair(i, _) | Item::Single(i) => i,
        }
    }
}

#[derive(Clone, Copy)]
struct Placed {
    rect: usize,
    at: Point,
    dims: Variant,
}

impl Placed {
    fn bbox(&self) -> (i64, i64, i64, i64) {
        (self.at.x, self.at.y, self.dims.w, self.dims.h)
    }
}

fn ceil_half(v: i64) -> i64 {
    (v + 1).div_euclid(2)
}

/// Build the sub-placement of `group` from the member genes of `c`.
pub fn place_symmetry_group<R: Real>(
    inst: &Instance<R>,
    group: usize,
    c: &Chromosome<R>,
) -> Result<GroupLayout, DecodeError> {
    let g = &inst.groups[group];
    let n = inst.len();
    let genes = c.genes();
    let frame = |v: Variant| match g.axis {
        Axis::Vertical => v,
        Axis::Horizontal => v.transposed(),
    };

    let mut items: Vec<Item> =
        g.pairs.iter().map(|&(i, j)| Item::Pair(i, j)).chain(g.selfs.iter().map(|&s| Item::Single(s))).collect();
    items.sort_by(|a, b| cmp_real(genes[a.lead()], genes[b.lead()]).then(a.lead().cmp(&b.lead())));

    let mut variant = vec![0usize; n];
    for m in g.members() {
        variant[m] = variant_index(genes[n + m], inst.rects[m].variants.len());
    }
    for &(i, j) in &g.pairs {
        variant[j] = variant[i];
    }

    let mask = self_parities(inst, g);
    if mask == 0 {
        return Err(DecodeError::Group { group, reason: "self-symmetric members cannot share an axis".into() });
    }
    let parity = match items.iter().find_map(|it| matches!(it, Item::Single(_)).then(|| it.lead())) {
        None => 0,
        Some(s) => {
            let own = frame(inst.rects[s].variants[variant[s]]).w.rem_euclid(2);
            if mask & (1 << own) != 0 {
                own
            } else {
                i64::from(mask.trailing_zeros())
            }
        }
    };
    for &s in &g.selfs {
        let vs = &inst.rects[s].variants;
        if frame(vs[variant[s]]).w.rem_euclid(2) != parity {
            variant[s] = (0..vs.len())
                .filter(|&k| frame(vs[k]).w.rem_euclid(2) == parity)
                .min_by_key(|&k| (k.abs_diff(variant[s]), k))
                .expect("parity mask guarantees a matching variant");
        }
    }

    let norm = Normalizers::of(inst);
    let intra: Vec<(R, Vec<usize>)> = inst
        .nets
        .iter()
        .filter(|net| net.cost > R::zero())
        .map(|net| (net.cost, net.members.iter().copied().filter(|m| g.members().any(|x| x == *m)).collect::<Vec<_>>()))
        .filter(|(_, m)| m.len() >= 2)
        .collect();
    let conn_weight = if norm.conn == R::zero() { R::zero() } else { inst.weights.c_conn / norm.conn };
    let mut centroid: Vec<Option<(i64, i64)>> = vec![None; n];

    let score = |placed: &[Placed], extra: &[Placed], centroid: &mut Vec<Option<(i64, i64)>>| -> R {
        let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for p in placed.iter().chain(extra) {
            x0 = x0.min(p.at.x);
            y0 = y0.min(p.at.y);
            x1 = x1.max(p.at.x + p.dims.w);
            y1 = y1.max(p.at.y + p.dims.h);
        }
        for p in extra {
            centroid[p.rect] = Some((2 * p.at.x + p.dims.w, 2 * p.at.y + p.dims.h));
        }
        let mut conn = R::zero();
        for (cost, members) in &intra {
            let mut bbox = NetBox::EMPTY;
            for &(cx, cy) in members.iter().filter_map(|&m| centroid[m].as_ref()) {
                bbox.add(cx, cy);
            }
            conn = conn + *cost * R::half(bbox.span2());
        }
        for p in extra {
            centroid[p.rect] = None;
        }
        inst.weights.c_area * R::of_int(x1 - x0 + y1 - y0) + conn_weight * conn
    };

    let fits = |rect: usize, at: Point, dims: Variant, placed: &[Placed]| {
        placed.iter().all(|p| separated((at.x, at.y, dims.w, dims.h), p.bbox(), inst.distance(rect, p.rect)))
    };

    let mut placed: Vec<Placed> = Vec::with_capacity(g.len());
    let mut points = PointSet::new();
    let mut obstacles: Vec<Obstacle> = Vec::new();
    let mut boxes: Vec<(i64, i64, i64, i64)> = Vec::new();

    for item in &items {
        let lead = item.lead();
        let dims = frame(inst.rects[lead].variants[variant[lead]]);
        obstacles.clear();
        obstacles.extend(
            placed.iter().map(|p| Obstacle::new(p.at.x, p.at.y, p.dims.w, p.dims.h, inst.distance(lead, p.rect))),
        );

        let mut best: Option<(R, Point, usize)> = None;
        let mut consider = |new: &[Placed], pidx: usize, best: &mut Option<(R, Point, usize)>| {
            let s = score(&placed, new, &mut centroid);
            let at = new[0].at;
            let better = match best {
                None => true,
                Some((bs, bp, bi)) => {
                    cmp_real(s, *bs).then(at.y.cmp(&bp.y)).then(at.x.cmp(&bp.x)).then(pidx.cmp(bi)) == Ordering::Less
                }
            };
            if better {
                *best = Some((s, at, pidx));
            }
        };

        let new_members: Vec<Placed> = match *item {
            Item::Pair(i, j) => {
                let x_lo = ceil_half(inst.distance(i, j).max(0) + parity);
                let dir = Direction::from_gene(genes[2 * n + i].as_f64());
                let mirror = |at: Point| Point::new(parity - at.x - dims.w, at.y);
                for (pidx, anchor) in points.iter().enumerate() {
                    let margin = anchor.source.map_or(0, |s| inst.distance(i, s));
                    let start = anchor.shift.apply(anchor.at, margin);
                    for at in slide(dims, start, dir, obstacles.as_slice(), Point::new(x_lo, 0)).iter() {
                        let m_at = mirror(at);
                        if fits(j, m_at, dims, &placed) {
                            let new = [Placed { rect: i, at, dims }, Placed { rect: j, at: m_at, dims }];
                            consider(&new, pidx, &mut best);
                        }
                    }
                }
                let at = match best {
                    Some((_, at, _)) => at,
                    None => {
                        let top = placed.iter().map(|p| p.at.y + p.dims.h).max().unwrap_or(0);
                        let margin = placed
                            .iter()
                            .map(|p| inst.distance(i, p.rect).max(inst.distance(j, p.rect)))
                            .max()
                            .unwrap_or(0)
                            .max(0);
                        Point::new(x_lo, top + margin)
                    }
                };
                let m_at = mirror(at);
                if !fits(i, at, dims, &placed) || !fits(j, m_at, dims, &placed) {
                    return Err(DecodeError::Group { group, reason: format!("no room for pair ({i}, {j})") });
                }
                vec![Placed { rect: i, at, dims }, Placed { rect: j, at: m_at, dims }]
            }
            Item::Single(s) => {
                let x = (parity - dims.w).div_euclid(2);
                for (pidx, anchor) in points.iter().enumerate() {
                    let margin = anchor.source.map_or(0, |src| inst.distance(s, src));
                    let start = anchor.shift.apply(anchor.at, margin);
                    if let Some(y) = phase_y(dims, x, start.y.max(0), &obstacles, 0) {
                        consider(&[Placed { rect: s, at: Point::new(x, y), dims }], pidx, &mut best);
                    }
                }
                let at = match best {
                    Some((_, at, _)) => at,
                    None => {
                        let top = placed.iter().map(|p| p.at.y + p.dims.h).max().unwrap_or(0);
                        let margin = placed.iter().map(|p| inst.distance(s, p.rect)).max().unwrap_or(0).max(0);
                        Point::new(x, top + margin)
                    }
                };
                if !fits(s, at, dims, &placed) {
                    return Err(DecodeError::Group { group, reason: format!("no room for self-symmetric rect {s}") });
                }
                vec![Placed { rect: s, at, dims }]
            }
        };

        let lead_at = new_members[0].at;
        for p in &new_members {
            centroid[p.rect] = Some((2 * p.at.x + p.dims.w, 2 * p.at.y + p.dims.h));
            boxes.push(p.bbox());
        }
        placed.extend(new_members);
        points.expand(lead, lead_at, dims.w, dims.h, &boxes);
    }

    let x0 = placed.iter().map(|p| p.at.x).min().unwrap_or(0);
    let y0 = placed.iter().map(|p| p.at.y).min().unwrap_or(0);
    let x1 = placed.iter().map(|p| p.at.x + p.dims.w).max().unwrap_or(0);
    let y1 = placed.iter().map(|p| p.at.y + p.dims.h).max().unwrap_or(0);
    let local = |at: Point| Point::new(at.x - x0, at.y - y0);
    let (width, height) = (x1 - x0, y1 - y0);
    let axis2 = parity - 2 * x0;
    let mut members: Vec<GroupMember> = placed
        .iter()
        .map(|p| {
            let off = local(p.at);
            let offset = match g.axis {
                Axis::Vertical => off,
                Axis::Horizontal => Point::new(off.y, off.x),
            };
            GroupMember { rect: p.rect, offset, variant: variant[p.rect] }
        })
        .collect();
    members.sort_by_key(|m| m.rect);
    let (width, height) = match g.axis {
        Axis::Vertical => (width, height),
        Axis::Horizontal => (height, width),
    };
    Ok(GroupLayout { group, axis: g.axis, width, height, axis2, members })
}
