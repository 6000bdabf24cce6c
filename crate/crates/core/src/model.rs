// SPDX-License-Identifier: Apache-2.0

//! Problem and solution data model.
//!
//! An [`Instance`] is the immutable description of a placement problem: the
//! rectangles with their admissible width/height variants, pairwise minimum
//! distances, nets, symmetry groups, blockages, optional proximity and
//! interface criteria, aspect-ratio bounds and cost weights.
//!
//! A [`Placement`] assigns every rectangle a variant and an integer
//! bottom-left corner. Symmetry axes are half-integer in general, so they are
//! stored doubled.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::scalar::Real;

/// One admissible realization of a device or topological structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub w: i64,
    pub h: i64,
}

impl Variant {
    pub const fn new(w: i64, h: i64) -> Self {
        Self { w, h }
    }

    pub fn area(&self) -> i64 {
        self.w * self.h
    }

    /// `min(w, h) / max(w, h)`, 1 for a square.
    pub fn squareness(&self) -> f64 {
        let (lo, hi) = if self.w < self.h { (self.w, self.h) } else { (self.h, self.w) };
        lo as f64 / hi as f64
    }

    pub fn transposed(&self) -> Self {
        Self { w: self.h, h: self.w }
    }
}

/// A device to place. Its id is its index in [`Instance::rects`].
#[derive(Clone, Debug, PartialEq)]
pub struct Rect {
    pub name: String,
    pub variants: Vec<Variant>,
}

impl Rect {
    pub fn new(name: impl Into<String>, variants: Vec<Variant>) -> Self {
        Self { name: name.into(), variants }
    }

    /// Rotation-only device: `w x h` and `h x w`, or a single variant when square.
    pub fn rotatable(name: impl Into<String>, w: i64, h: i64) -> Self {
        let mut variants = vec![Variant::new(w, h)];
        if w != h {
            variants.push(Variant::new(h, w));
        }
        Self::new(name, variants)
    }
}

/// Pairwise minimum distances, dense and symmetric.
///
/// Negative entries allow the pockets of the two devices to merge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceSpec {
    n: usize,
    default: i64,
    table: Vec<i64>,
}

impl DistanceSpec {
    pub fn uniform(n: usize, default: i64) -> Self {
        Self { n, default, table: vec![default; n * n] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn default_distance(&self) -> i64 {
        self.default
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.table[i * self.n + j]
    }

    /// Row `i` of the table; entry `i` itself is meaningless.
    #[inline]
    pub fn row(&self, i: usize) -> &[i64] {
        &self.table[i * self.n..(i + 1) * self.n]
    }

    pub fn set(&mut self, i: usize, j: usize, a: i64) -> Result<(), ModelError> {
        if i == j || i >= self.n || j >= self.n {
            return Err(ModelError::BadDistancePair { i, j, n: self.n });
        }
        self.table[i * self.n + j] = a;
        self.table[j * self.n + i] = a;
        Ok(())
    }

    /// Entries `(i, j, a)` with `i < j` that differ from the default.
    pub fn overrides(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| {
                let a = self.get(i, j);
                (a != self.default).then_some((i, j, a))
            })
        })
    }

    pub fn has_negative(&self) -> bool {
        self.overrides().any(|(_, _, a)| a < 0) || (self.n > 1 && self.default < 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Net<R> {
    pub members: Vec<usize>,
    pub cost: R,
}

impl<R: Real> Net<R> {
    pub fn new(members: Vec<usize>) -> Self {
        Self { members, cost: R::one() }
    }

    pub fn with_cost(members: Vec<usize>, cost: R) -> Self {
        Self { members, cost }
    }
}

/// Orientation of a symmetry axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Mirror left/right around a vertical line.
    Vertical,
    /// Mirror top/bottom around a horizontal line.
    Horizontal,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Vertical => "vertical",
            Axis::Horizontal => "horizontal",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryGroup {
    pub axis: Axis,
    pub pairs: Vec<(usize, usize)>,
    pub selfs: Vec<usize>,
}

impl SymmetryGroup {
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().flat_map(|&(i, j)| [i, j]).chain(self.selfs.iter().copied())
    }

    pub fn len(&self) -> usize {
        2 * self.pairs.len() + self.selfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fixed region that the `restricted` rectangles must not overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blockage {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    pub restricted: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProximityPair<R> {
    pub i: usize,
    pub j: usize,
    /// Positive attracts, negative repels.
    pub cost: R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Top => "top",
            Side::Bottom => "bottom",
        })
    }
}

/// External connection entering the placement through one side of its bounding box.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceEntry<R> {
    pub side: Side,
    pub members: Vec<usize>,
    pub cost: R,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostWeights<R> {
    pub c_area: R,
    pub c_conn: R,
    pub c_prox: R,
    pub c_inter: R,
}

impl<R: Real> CostWeights<R> {
    pub fn new(c_area: R, c_conn: R) -> Self {
        Self { c_area, c_conn, c_prox: R::zero(), c_inter: R::zero() }
    }
}

impl<R: Real> Default for CostWeights<R> {
    fn default() -> Self {
        Self::new(R::one(), R::zero())
    }
}

/// Immutable problem description.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<R> {
    pub rects: Vec<Rect>,
    pub distances: DistanceSpec,
    pub nets: Vec<Net<R>>,
    pub groups: Vec<SymmetryGroup>,
    pub blockages: Vec<Blockage>,
    pub proximities: Vec<ProximityPair<R>>,
    pub interfaces: Vec<InterfaceEntry<R>>,
    pub aspect_lo: R,
    pub aspect_hi: R,
    pub weights: CostWeights<R>,
}

impl<R> Instance<R> {
    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> i64 {
        self.distances.get(i, j)
    }

    /// Group index per rectangle, `None` when the rectangle is in no group.
    pub fn group_of(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.len()];
        for (g, group) in self.groups.iter().enumerate() {
            for m in group.members() {
                if m < out.len() {
                    out[m] = Some(g);
                }
            }
        }
        out
    }
}

impl<R: Real> Instance<R> {
    /// Instance with the given rectangles, uniform zero distances and nothing else.
    pub fn new(rects: Vec<Rect>) -> Self {
        let n = rects.len();
        Self {
            rects,
            distances: DistanceSpec::uniform(n, 0),
            nets: Vec::new(),
            groups: Vec::new(),
            blockages: Vec::new(),
            proximities: Vec::new(),
            interfaces: Vec::new(),
            aspect_lo: R::zero(),
            aspect_hi: R::one(),
            weights: CostWeights::default(),
        }
    }

    pub fn with_weights(mut self, weights: CostWeights<R>) -> Self {
        self.weights = weights;
        self
    }

    /// Indices of the nets with positive cost touching each rectangle.
    pub fn nets_of(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (e, net) in self.nets.iter().enumerate() {
            if net.cost <= R::zero() {
                continue;
            }
            for &m in &net.members {
                if m < out.len() && out[m].last() != Some(&e) {
                    out[m].push(e);
                }
            }
        }
        out
    }

    /// Total pin-to-pin area of the smallest variant of every rectangle.
    pub fn min_total_area(&self) -> i64 {
        self.rects.iter().map(|r| r.variants.iter().map(Variant::area).min().unwrap_or(0)).sum()
    }
}

/// Integer grid point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

/// A (possibly incomplete) solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    /// Bottom-left corner per rectangle.
    pub coords: Vec<Point>,
    /// Selected variant index per rectangle.
    pub variants: Vec<usize>,
    /// Doubled axis coordinate per symmetry group (`2 * x_G`, or `2 * y_G`
    /// for a horizontal axis).
    pub axes: Vec<i64>,
}

impl Placement {
    pub fn dims<R>(&self, inst: &Instance<R>, i: usize) -> Variant {
        inst.rects[i].variants[self.variants[i]]
    }

    /// Doubled centroid of rectangle `i`.
    pub fn centroid2<R>(&self, inst: &Instance<R>, i: usize) -> (i64, i64) {
        let v = self.dims(inst, i);
        let p = self.coords[i];
        (2 * p.x + v.w, 2 * p.y + v.h)
    }

    pub fn translated(&self, inst_groups: &[SymmetryGroup], dx: i64, dy: i64) -> Self {
        let coords = self.coords.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect();
        let axes = self
            .axes
            .iter()
            .zip(inst_groups)
            .map(|(&a, g)| match g.axis {
                Axis::Vertical => a + 2 * dx,
                Axis::Horizontal => a + 2 * dy,
            })
            .collect();
        Self { coords, variants: self.variants.clone(), axes }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("placement covers {got} rectangles, instance has {expected}")]
    IncompletePlacement { expected: usize, got: usize },
    #[error("placement has {got} group axes, instance has {expected} groups")]
    AxisCount { expected: usize, got: usize },
    #[error("rectangle {rect}: variant index {variant} out of range")]
    VariantIndex { rect: usize, variant: usize },
    #[error("invalid distance pair ({i}, {j}) for {n} rectangles")]
    BadDistancePair { i: usize, j: usize, n: usize },
    #[error("invalid enumeration parameters: {0}")]
    Enumeration(String),
}

/// Invariant violation found by [`validate_instance`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Violation {
    #[error("rect {rect}: no variants")]
    NoVariants { rect: usize },
    #[error("rect {rect}: variant {variant} has non-positive dimension")]
    BadVariant { rect: usize, variant: usize },
    #[error("distance table covers {got} rectangles, expected {expected}")]
    DistanceTableSize { expected: usize, got: usize },
    #[error("{element}: references rect {index}, instance has {n}")]
    DanglingReference { element: String, index: usize, n: usize },
    #[error("{element}: lists rect {index} more than once")]
    DuplicateMember { element: String, index: usize },
    #[error("net {net}: fewer than 2 members")]
    NetTooSmall { net: usize },
    #[error("net {net}: negative or non-finite cost")]
    NetCost { net: usize },
    #[error("aspect bounds [{lo}, {hi}] violate 0 <= lo <= hi <= 1")]
    AspectBounds { lo: f64, hi: f64 },
    #[error("weight {name} is negative or non-finite")]
    Weight { name: &'static str },
    #[error("rect {rect} belongs to groups {first} and {second}")]
    MultipleGroups { rect: usize, first: usize, second: usize },
    #[error("group {group}: empty")]
    EmptyGroup { group: usize },
    #[error("group {group}: pair ({i}, {j}) members have different variant lists")]
    PairVariants { group: usize, i: usize, j: usize },
    #[error("group {group}: self-symmetric members cannot share an axis parity")]
    SelfParity { group: usize },
    #[error("blockage {blockage}: non-positive size")]
    BlockageSize { blockage: usize },
    #[error("proximity {index}: pair ({i}, {j}) is degenerate or has zero cost")]
    Proximity { index: usize, i: usize, j: usize },
    #[error("interface {index}: needs members and positive cost")]
    Interface { index: usize },
}

/// Checks every instance invariant; an empty list means the instance is valid.
pub fn validate_instance<R: Real>(inst: &Instance<R>) -> Vec<Violation> {
    let n = inst.len();
    let mut out = Vec::new();

    for (r, rect) in inst.rects.iter().enumerate() {
        if rect.variants.is_empty() {
            out.push(Violation::NoVariants { rect: r });
        }
        for (k, v) in rect.variants.iter().enumerate() {
            if v.w < 1 || v.h < 1 {
                out.push(Violation::BadVariant { rect: r, variant: k });
            }
        }
    }
    if inst.distances.len() != n {
        out.push(Violation::DistanceTableSize { expected: n, got: inst.distances.len() });
    }

    let check_refs = |element: String, members: &mut dyn Iterator<Item = usize>, out: &mut Vec<Violation>| {
        let mut seen = BTreeSet::new();
        for m in members {
            if m >= n {
                out.push(Violation::DanglingReference { element: element.clone(), index: m, n });
            } else if !seen.insert(m) {
                out.push(Violation::DuplicateMember { element: element.clone(), index: m });
            }
        }
    };

    for (e, net) in inst.nets.iter().enumerate() {
        check_refs(format!("net {e}"), &mut net.members.iter().copied(), &mut out);
        if net.members.len() < 2 {
            out.push(Violation::NetTooSmall { net: e });
        }
        if !net.cost.is_finite() || net.cost < R::zero() {
            out.push(Violation::NetCost { net: e });
        }
    }

    let lo = inst.aspect_lo;
    let hi = inst.aspect_hi;
    if !(R::zero() <= lo && lo <= hi && hi <= R::one()) {
        out.push(Violation::AspectBounds { lo: lo.as_f64(), hi: hi.as_f64() });
    }

    let w = &inst.weights;
    for (name, value) in [("c_area", w.c_area), ("c_conn", w.c_conn), ("c_prox", w.c_prox), ("c_inter", w.c_inter)] {
        if !value.is_finite() || value < R::zero() {
            out.push(Violation::Weight { name });
        }
    }

    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (g, group) in inst.groups.iter().enumerate() {
        if group.is_empty() {
            out.push(Violation::EmptyGroup { group: g });
        }
        check_refs(format!("group {g}"), &mut group.members(), &mut out);
        for m in group.members().filter(|&m| m < n) {
            match owner[m] {
                Some(first) if first != g => out.push(Violation::MultipleGroups { rect: m, first, second: g }),
                _ => owner[m] = Some(g),
            }
        }
        for &(i, j) in &group.pairs {
            if i < n && j < n && inst.rects[i].variants != inst.rects[j].variants {
                out.push(Violation::PairVariants { group: g, i, j });
            }
        }
        if group.selfs.iter().all(|&s| s < n) && self_parities(inst, group) == 0 {
            out.push(Violation::SelfParity { group: g });
        }
    }

    for (b, blk) in inst.blockages.iter().enumerate() {
        if blk.w < 1 || blk.h < 1 {
            out.push(Violation::BlockageSize { blockage: b });
        }
        check_refs(format!("blockage {b}"), &mut blk.restricted.iter().copied(), &mut out);
    }

    for (k, p) in inst.proximities.iter().enumerate() {
        check_refs(format!("proximity {k}"), &mut [p.i, p.j].into_iter(), &mut out);
        if p.i == p.j || p.cost == R::zero() || !p.cost.is_finite() {
            out.push(Violation::Proximity { index: k, i: p.i, j: p.j });
        }
    }

    for (k, entry) in inst.interfaces.iter().enumerate() {
        check_refs(format!("interface {k}"), &mut entry.members.iter().copied(), &mut out);
        if entry.members.is_empty() || !entry.cost.is_finite() || entry.cost <= R::zero() {
            out.push(Violation::Interface { index: k });
        }
    }

    out
}

/// Bitmask of axis parities (bit 0 = even, bit 1 = odd) that every
/// self-symmetric member of `group` can realize with some variant.
pub(crate) fn self_parities<R>(inst: &Instance<R>, group: &SymmetryGroup) -> u8 {
    let mut mask = 0b11u8;
    for &s in &group.selfs {
        let mut own = 0u8;
        for v in &inst.rects[s].variants {
            let across = match group.axis {
                Axis::Vertical => v.w,
                Axis::Horizontal => v.h,
            };
            own |= 1 << (across.rem_euclid(2));
        }
        mask &= own;
    }
    mask
}

/// Matrix-array variants of a structure made of `count` identical devices.
///
/// For every row count `r` in `1..=min(max_rows, count)` the structure is
/// `ceil(count / r)` devices wide and `r` devices tall, surrounded by a
/// pocket on every side. Duplicates are removed and the result is sorted by
/// width (then height).
pub fn enumerate_variants(
    device_w: i64,
    device_h: i64,
    count: i64,
    max_rows: i64,
    pocket: i64,
) -> Result<Vec<Variant>, ModelError> {
    if device_w < 1 || device_h < 1 {
        return Err(ModelError::Enumeration(format!("device {device_w}x{device_h} must be positive")));
    }
    if count < 1 || max_rows < 1 {
        return Err(ModelError::Enumeration(format!("count {count} and max_rows {max_rows} must be >= 1")));
    }
    if pocket < 0 {
        return Err(ModelError::Enumeration(format!("pocket {pocket} must be >= 0")));
    }
    let mut out: Vec<Variant> = (1..=max_rows.min(count))
        .map(|rows| {
            let cols = (count + rows - 1) / rows;
            Variant::new(cols * device_w + 2 * pocket, rows * device_h + 2 * pocket)
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// First constraint found violated by a placement.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Infeasibility {
    #[error("rect {rect} has a negative coordinate")]
    NegativeCoordinate { rect: usize },
    #[error("rects {i} and {j} violate their minimum distance")]
    Overlap { i: usize, j: usize },
    #[error("rect {rect} overlaps blockage {blockage}")]
    Blockage { rect: usize, blockage: usize },
    #[error("group {group}: rect {rect} is off the symmetry axis")]
    OffAxis { group: usize, rect: usize },
    #[error("group {group}: pair ({i}, {j}) is not mirrored")]
    NotMirrored { group: usize, i: usize, j: usize },
}

/// Are two boxes separated by at least `margin` along some axis?
#[inline]
pub(crate) fn separated(a: (i64, i64, i64, i64), b: (i64, i64, i64, i64), margin: i64) -> bool {
    let (ax, ay, aw, ah) = a;
    let (bx, by, bw, bh) = b;
    ax + aw + margin <= bx || ay + ah + margin <= by || bx + bw + margin <= ax || by + bh + margin <= ay
}

/// Authoritative feasibility check.
///
/// Returns `Ok(None)` for a feasible placement, `Ok(Some(first violation))`
/// otherwise, and an error when the placement does not match the instance.
pub fn check_feasible<R>(inst: &Instance<R>, p: &Placement) -> Result<Option<Infeasibility>, ModelError> {
    let n = inst.len();
    if p.coords.len() != n || p.variants.len() != n {
        return Err(ModelError::IncompletePlacement { expected: n, got: p.coords.len().min(p.variants.len()) });
    }
    if p.axes.len() != inst.groups.len() {
        return Err(ModelError::AxisCount { expected: inst.groups.len(), got: p.axes.len() });
    }
    for (i, &k) in p.variants.iter().enumerate() {
        if k >= inst.rects[i].variants.len() {
            return Err(ModelError::VariantIndex { rect: i, variant: k });
        }
    }
    let boxes: Vec<(i64, i64, i64, i64)> = (0..n)
        .map(|i| {
            let v = p.dims(inst, i);
            (p.coords[i].x, p.coords[i].y, v.w, v.h)
        })
        .collect();

    if let Some(rect) = boxes.iter().position(|b| b.0 < 0 || b.1 < 0) {
        return Ok(Some(Infeasibility::NegativeCoordinate { rect }));
    }
    for i in 0..n {
        let row = inst.distances.row(i);
        for j in i + 1..n {
            if !separated(boxes[i], boxes[j], row[j]) {
                return Ok(Some(Infeasibility::Overlap { i, j }));
            }
        }
    }
    for (b, blk) in inst.blockages.iter().enumerate() {
        let bb = (blk.x, blk.y, blk.w, blk.h);
        for &r in &blk.restricted {
            if r < n && !separated(boxes[r], bb, 0) {
                return Ok(Some(Infeasibility::Blockage { rect: r, blockage: b }));
            }
        }
    }
    for (g, group) in inst.groups.iter().enumerate() {
        let axis2 = p.axes[g];
        // Project onto (position across the axis, size across, position along).
        let frame = |i: usize| {
            let (x, y, w, h) = boxes[i];
            match group.axis {
                Axis::Vertical => (x, w, y),
                Axis::Horizontal => (y, h, x),
            }
        };
        for &(i, j) in &group.pairs {
            let (ci, si, ai) = frame(i);
            let (cj, _, aj) = frame(j);
            if p.variants[i] != p.variants[j] || ai != aj {
                return Ok(Some(Infeasibility::NotMirrored { group: g, i, j }));
            }
            if ci + cj + si != axis2 {
                return Ok(Some(Infeasibility::OffAxis { group: g, rect: i }));
            }
        }
        for &s in &group.selfs {
            let (cs, ss, _) = frame(s);
            if 2 * cs + ss != axis2 {
                return Ok(Some(Infeasibility::OffAxis { group: g, rect: s }));
            }
        }
    }
    Ok(None)
}

/// Convenience wrapper: `true` iff the placement is complete and feasible.
pub fn is_feasible<R>(inst: &Instance<R>, p: &Placement) -> bool {
    matches!(check_feasible(inst, p), Ok(None))
}

/// Bounding box `(W, H)` of the rectangles; blockages do not count.
pub fn bounding_box<R>(p: &Placement, inst: &Instance<R>) -> (i64, i64) {
    (0..inst.len().min(p.coords.len())).fold((0, 0), |(w, h), i| {
        let v = p.dims(inst, i);
        (w.max(p.coords[i].x + v.w), h.max(p.coords[i].y + v.h))
    })
}
