// SPDX-License-Identifier: Apache-2.0

//! Placement criterion.
//!
//! The criterion is a weighted sum of the bounding-box half perimeter
//! `W + H`, the cost-weighted half-perimeter wirelength over rectangle
//! centroids, a proximity term and an interface term. The last three are
//! divided by normalizers (sums of their element costs). A complete
//! placement whose aspect ratio falls outside the instance bounds has its
//! total multiplied by 2.5.
//!
//! Centroids are handled as doubled integers so that every geometric
//! quantity stays exact; conversion to reals happens only when a span is
//! multiplied by its cost.

use serde::{Deserialize, Serialize};

use crate::model::{Instance, Placement, Point, Side, Variant};
use crate::scalar::Real;

/// Decomposed criterion value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport<R> {
    pub width: i64,
    pub height: i64,
    /// `W + H` of the placed rectangles.
    pub area_term: R,
    pub conn_raw: R,
    pub prox_raw: R,
    pub inter_raw: R,
    pub s_conn: R,
    pub s_prox: R,
    pub s_inter: R,
    pub penalty_applied: bool,
    pub total: R,
}

/// Normalization constants of an instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalizers<R> {
    pub conn: R,
    pub prox: R,
    pub inter: R,
}

impl<R: Real> Normalizers<R> {
    pub fn of(inst: &Instance<R>) -> Self {
        Self {
            conn: inst.nets.iter().map(|n| n.cost).sum(),
            prox: inst.proximities.iter().map(|p| p.cost.abs()).sum(),
            inter: inst.interfaces.iter().map(|e| e.cost * R::of(e.members.len() as f64)).sum(),
        }
    }
}

fn weighted<R: Real>(c: R, s: R, raw: R) -> R {
    if s == R::zero() {
        R::zero()
    } else {
        c / s * raw
    }
}

/// Whether a complete `width x height` box violates the aspect bounds.
pub fn aspect_violated<R: Real>(inst: &Instance<R>, width: i64, height: i64) -> bool {
    let hi = width.max(height);
    if hi == 0 {
        return false;
    }
    let ratio = R::of_int(width.min(height)) / R::of_int(hi);
    ratio < inst.aspect_lo || ratio > inst.aspect_hi
}

#[allow(clippy::too_many_arguments)]
fn assemble<R: Real>(
    inst: &Instance<R>,
    s: &Normalizers<R>,
    width: i64,
    height: i64,
    conn_raw: R,
    prox_raw: R,
    inter_raw: R,
    complete: bool,
) -> CriterionReport<R> {
    let w = &inst.weights;
    let area_term = R::of_int(width + height);
    let mut total = w.c_area * area_term
        + weighted(w.c_conn, s.conn, conn_raw)
        + weighted(w.c_prox, s.prox, prox_raw)
        + weighted(w.c_inter, s.inter, inter_raw);
    let penalty_applied = complete && aspect_violated(inst, width, height);
    if penalty_applied {
        total = total * R::ASPECT_PENALTY;
    }
    CriterionReport {
        width,
        height,
        area_term,
        conn_raw,
        prox_raw,
        inter_raw,
        s_conn: s.conn,
        s_prox: s.prox,
        s_inter: s.inter,
        penalty_applied,
        total,
    }
}

/// Cost-weighted HPWL over the centroids of the placed net members.
///
/// Nets with fewer than two placed members contribute nothing.
pub fn hpwl<R: Real>(p: &Placement, inst: &Instance<R>, placed: &[bool]) -> R {
    inst.nets
        .iter()
        .map(|net| {
            let mut bbox = NetBox::EMPTY;
            for &m in net.members.iter().filter(|&&m| placed[m]) {
                let (cx, cy) = p.centroid2(inst, m);
                bbox.add(cx, cy);
            }
            net.cost * R::half(bbox.span2())
        })
        .sum()
}

fn manhattan2(a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - b.0).abs() + (a.1 - b.1).abs()
}

/// Interface term given the current box and a centroid lookup (doubled).
fn interface_raw<R: Real>(
    inst: &Instance<R>,
    width: i64,
    height: i64,
    centroid: impl Fn(usize) -> Option<(i64, i64)>,
) -> R {
    let mut total = R::zero();
    let mut along = Vec::new();
    for entry in &inst.interfaces {
        let pts: Vec<(i64, i64)> = entry.members.iter().filter_map(|&m| centroid(m)).collect();
        if pts.is_empty() {
            continue;
        }
        along.clear();
        let (extent2, fixed) = match entry.side {
            Side::Left => (2 * height, (Some(0), None)),
            Side::Right => (2 * height, (Some(2 * width), None)),
            Side::Bottom => (2 * width, (None, Some(0))),
            Side::Top => (2 * width, (None, Some(2 * height))),
        };
        let vertical_side = fixed.0.is_some();
        along.extend(pts.iter().map(|&(cx, cy)| if vertical_side { cy } else { cx }));
        along.sort_unstable();
        // Lower median minimizes the sum of absolute deviations.
        let free = along[(along.len() - 1) / 2].clamp(0, extent2);
        let entry_pt = match fixed {
            (Some(x), _) => (x, free),
            (_, Some(y)) => (free, y),
            _ => unreachable!(),
        };
        let dist2: i64 = pts.iter().map(|&c| manhattan2(c, entry_pt)).sum();
        total = total + entry.cost * R::half(dist2);
    }
    total
}

/// Full criterion of the placed subset of `p`.
///
/// The aspect penalty applies only when every rectangle is placed.
pub fn criterion<R: Real>(p: &Placement, inst: &Instance<R>, placed: &[bool]) -> CriterionReport<R> {
    let s = Normalizers::of(inst);
    let (mut width, mut height) = (0, 0);
    for i in (0..inst.len()).filter(|&i| placed[i]) {
        let v = p.dims(inst, i);
        width = width.max(p.coords[i].x + v.w);
        height = height.max(p.coords[i].y + v.h);
    }
    let conn = hpwl(p, inst, placed);
    let prox = inst
        .proximities
        .iter()
        .filter(|q| placed[q.i] && placed[q.j])
        .map(|q| q.cost * R::half(manhattan2(p.centroid2(inst, q.i), p.centroid2(inst, q.j))))
        .sum();
    let inter = interface_raw(inst, width, height, |m| placed[m].then(|| p.centroid2(inst, m)));
    let complete = !inst.is_empty() && placed.iter().all(|&b| b);
    assemble(inst, &s, width, height, conn, prox, inter, complete)
}

/// Criterion of a complete placement.
pub fn evaluate<R: Real>(p: &Placement, inst: &Instance<R>) -> CriterionReport<R> {
    criterion(p, inst, &vec![true; inst.len()])
}

/// Bounding box of the centroids of one net, in doubled coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct NetBox {
    count: u32,
    x0: i64,
    x1: i64,
    y0: i64,
    y1: i64,
}

impl NetBox {
    pub(crate) const EMPTY: NetBox = NetBox { count: 0, x0: i64::MAX, x1: i64::MIN, y0: i64::MAX, y1: i64::MIN };

    #[inline]
    pub(crate) fn add(&mut self, cx: i64, cy: i64) {
        self.count += 1;
        self.x0 = self.x0.min(cx);
        self.x1 = self.x1.max(cx);
        self.y0 = self.y0.min(cy);
        self.y1 = self.y1.max(cy);
    }

    #[inline]
    pub(crate) fn span2(&self) -> i64 {
        if self.count < 2 {
            0
        } else {
            self.x1 - self.x0 + self.y1 - self.y0
        }
    }

    /// Corners of the centroid box in real coordinates, if the net has two or more members.
    pub(crate) fn corners(&self) -> Option<((f64, f64), (f64, f64))> {
        (self.count >= 2)
            .then(|| ((self.x0 as f64 / 2.0, self.y0 as f64 / 2.0), (self.x1 as f64 / 2.0, self.y1 as f64 / 2.0)))
    }
}

/// Smallest box containing the centroids of a net's placed members (real coordinates).
pub fn net_contour<R: Real>(p: &Placement, inst: &Instance<R>, net: usize) -> Option<((f64, f64), (f64, f64))> {
    let mut bbox = NetBox::EMPTY;
    for &m in &inst.nets[net].members {
        let (cx, cy) = p.centroid2(inst, m);
        bbox.add(cx, cy);
    }
    bbox.corners()
}

/// A rectangle tentatively put at a position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Tentative {
    pub rect: usize,
    pub at: Point,
    pub dims: Variant,
}

impl Tentative {
    #[inline]
    fn centroid2(&self) -> (i64, i64) {
        (2 * self.at.x + self.dims.w, 2 * self.at.y + self.dims.h)
    }
}

/// Incrementally maintained criterion of a growing (or shrinking) placement.
///
/// Scoring a tentative rectangle costs time proportional to its net degree
/// instead of the size of the whole netlist.
pub(crate) struct PartialEval<'a, R> {
    inst: &'a Instance<R>,
    norm: Normalizers<R>,
    nets_of: Vec<Vec<usize>>,
    prox_of: Vec<Vec<(usize, R)>>,
    placed: Vec<bool>,
    count: usize,
    boxes: Vec<(Point, Variant)>,
    width: i64,
    height: i64,
    nets: Vec<NetBox>,
    conn: R,
    prox: R,
    scratch: Vec<NetBox>,
    stamp: Vec<u32>,
    epoch: u32,
    touched: Vec<usize>,
}

impl<'a, R: Real> PartialEval<'a, R> {
    pub(crate) fn new(inst: &'a Instance<R>) -> Self {
        let n = inst.len();
        let mut prox_of = vec![Vec::new(); n];
        for q in &inst.proximities {
            prox_of[q.i].push((q.j, q.cost));
            prox_of[q.j].push((q.i, q.cost));
        }
        Self {
            inst,
            norm: Normalizers::of(inst),
            nets_of: inst.nets_of(),
            prox_of,
            placed: vec![false; n],
            count: 0,
            boxes: vec![(Point::ORIGIN, Variant::new(0, 0)); n],
            width: 0,
            height: 0,
            nets: vec![NetBox::EMPTY; inst.nets.len()],
            conn: R::zero(),
            prox: R::zero(),
            scratch: vec![NetBox::EMPTY; inst.nets.len()],
            stamp: vec![0; inst.nets.len()],
            epoch: 0,
            touched: Vec::new(),
        }
    }

    /// State holding every rectangle of a complete placement.
    pub(crate) fn from_placement(inst: &'a Instance<R>, p: &Placement) -> Self {
        let mut eval = Self::new(inst);
        let all: Vec<Tentative> =
            (0..inst.len()).map(|i| Tentative { rect: i, at: p.coords[i], dims: p.dims(inst, i) }).collect();
        eval.commit(&all);
        eval
    }

    pub(crate) fn extent(&self) -> (i64, i64) {
        (self.width, self.height)
    }

    fn centroid_lookup<'b>(&'b self, extra: &'b [Tentative]) -> impl Fn(usize) -> Option<(i64, i64)> + 'b {
        move |m| {
            if self.placed[m] {
                let (p, v) = self.boxes[m];
                Some((2 * p.x + v.w, 2 * p.y + v.h))
            } else {
                extra.iter().find(|t| t.rect == m).map(Tentative::centroid2)
            }
        }
    }

    /// Criterion total if `members` were added to the current state.
    pub(crate) fn score(&mut self, members: &[Tentative]) -> R {
        let inst = self.inst;
        let mut width = self.width;
        let mut height = self.height;
        for t in members {
            width = width.max(t.at.x + t.dims.w);
            height = height.max(t.at.y + t.dims.h);
        }

        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.touched.clear();
        for t in members {
            let (cx, cy) = t.centroid2();
            for &e in &self.nets_of[t.rect] {
                if self.stamp[e] != self.epoch {
                    self.stamp[e] = self.epoch;
                    self.scratch[e] = self.nets[e];
                    self.touched.push(e);
                }
                self.scratch[e].add(cx, cy);
            }
        }
        let mut conn = self.conn;
        for &e in &self.touched {
            let delta = self.scratch[e].span2() - self.nets[e].span2();
            if delta != 0 {
                conn = conn + inst.nets[e].cost * R::half(delta);
            }
        }

        let mut prox = self.prox;
        for (k, t) in members.iter().enumerate() {
            for &(o, c) in &self.prox_of[t.rect] {
                let other = if self.placed[o] {
                    let (p, v) = self.boxes[o];
                    Some((2 * p.x + v.w, 2 * p.y + v.h))
                } else {
                    members[k + 1..].iter().find(|u| u.rect == o).map(Tentative::centroid2)
                };
                if let Some(oc) = other {
                    prox = prox + c * R::half(manhattan2(t.centroid2(), oc));
                }
            }
        }

        let inter = if inst.interfaces.is_empty() {
            R::zero()
        } else {
            interface_raw(inst, width, height, self.centroid_lookup(members))
        };
        let complete = self.count + members.len() == inst.len();
        assemble(inst, &self.norm, width, height, conn, prox, inter, complete).total
    }

    /// Criterion of the current state.
    #[cfg(test)]
    pub(crate) fn total(&mut self) -> R {
        self.score(&[])
    }

    pub(crate) fn commit(&mut self, members: &[Tentative]) {
        for (k, t) in members.iter().enumerate() {
            debug_assert!(!self.placed[t.rect]);
            let (cx, cy) = t.centroid2();
            for &(o, c) in &self.prox_of[t.rect] {
                let other = if self.placed[o] {
                    let (p, v) = self.boxes[o];
                    Some((2 * p.x + v.w, 2 * p.y + v.h))
                } else {
                    members[k + 1..].iter().find(|u| u.rect == o).map(Tentative::centroid2)
                };
                if let Some(oc) = other {
                    self.prox = self.prox + c * R::half(manhattan2((cx, cy), oc));
                }
            }
            for &e in &self.nets_of[t.rect] {
                let before = self.nets[e].span2();
                self.nets[e].add(cx, cy);
                let delta = self.nets[e].span2() - before;
                if delta != 0 {
                    self.conn = self.conn + self.inst.nets[e].cost * R::half(delta);
                }
            }
            self.placed[t.rect] = true;
            self.boxes[t.rect] = (t.at, t.dims);
            self.count += 1;
            self.width = self.width.max(t.at.x + t.dims.w);
            self.height = self.height.max(t.at.y + t.dims.h);
        }
    }

    /// Take rectangle `r` out of the state.
    pub(crate) fn remove(&mut self, r: usize) {
        debug_assert!(self.placed[r]);
        self.placed[r] = false;
        self.count -= 1;
        let (p, v) = self.boxes[r];
        let c = (2 * p.x + v.w, 2 * p.y + v.h);
        for &(o, cost) in &self.prox_of[r] {
            if self.placed[o] {
                let (op, ov) = self.boxes[o];
                self.prox = self.prox - cost * R::half(manhattan2(c, (2 * op.x + ov.w, 2 * op.y + ov.h)));
            }
        }
        for &e in &self.nets_of[r] {
            let before = self.nets[e].span2();
            let mut bbox = NetBox::EMPTY;
            for &m in self.inst.nets[e].members.iter().filter(|&&m| self.placed[m]) {
                let (mp, mv) = self.boxes[m];
                bbox.add(2 * mp.x + mv.w, 2 * mp.y + mv.h);
            }
            self.nets[e] = bbox;
            let delta = bbox.span2() - before;
            if delta != 0 {
                self.conn = self.conn + self.inst.nets[e].cost * R::half(delta);
            }
        }
        self.width = 0;
        self.height = 0;
        for (m, &(mp, mv)) in self.boxes.iter().enumerate() {
            if self.placed[m] {
                self.width = self.width.max(mp.x + mv.w);
                self.height = self.height.max(mp.y + mv.h);
            }
        }
    }
}
