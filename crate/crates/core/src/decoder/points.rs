// SPDX-License-Identifier: Apache-2.0

//! Candidate anchor points maintained while a placement is built.

use std::collections::HashSet;

use crate::model::Point;

/// Which coordinates of a point are pushed out by the minimum distance to
/// the rectangle that generated it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Shift {
    pub x: bool,
    pub y: bool,
}

impl Shift {
    pub const NONE: Shift = Shift { x: false, y: false };
    pub const X: Shift = Shift { x: true, y: false };
    pub const Y: Shift = Shift { x: false, y: true };
    pub const XY: Shift = Shift { x: true, y: true };

    /// Apply a positive margin; non-positive margins leave the point alone.
    pub fn apply(self, p: Point, margin: i64) -> Point {
        if margin <= 0 {
            return p;
        }
        Point::new(p.x + if self.x { margin } else { 0 }, p.y + if self.y { margin } else { 0 })
    }
}

/// An anchor point and where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Anchor {
    pub at: Point,
    /// Placed unit that generated the point; `None` for seeds.
    pub source: Option<usize>,
    pub shift: Shift,
}

/// Insertion-ordered, duplicate-free set of anchors.
#[derive(Clone, Debug)]
pub struct PointSet {
    anchors: Vec<Anchor>,
    seen: HashSet<(i64, i64, usize)>,
}

impl Default for PointSet {
    fn default() -> Self {
        Self::new()
    }
}

impl PointSet {
    /// A set holding only the origin.
    pub fn new() -> Self {
        let mut set = Self { anchors: Vec::new(), seen: HashSet::new() };
        set.push(Anchor { at: Point::ORIGIN, source: None, shift: Shift::NONE });
        set
    }

    pub fn push(&mut self, anchor: Anchor) -> bool {
        let key = (anchor.at.x, anchor.at.y, anchor.source.map_or(usize::MAX, |s| s));
        if self.seen.insert(key) {
            self.anchors.push(anchor);
            true
        } else {
            false
        }
    }

    pub fn seed(&mut self, at: Point) {
        self.push(Anchor { at, source: None, shift: Shift::NONE });
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Anchor> {
        self.anchors.iter()
    }

    pub fn contains(&self, at: Point) -> bool {
        self.anchors.iter().any(|a| a.at == at)
    }

    /// Add the (at most five) points generated by a box placed at `at`:
    /// its three corners other than the bottom-left one, the point reached
    /// by dropping from the bottom-right corner onto the nearest box below,
    /// and the point reached by moving left from the top-left corner onto
    /// the nearest box to the left. Returns how many were new.
    pub fn expand(&mut self, source: usize, at: Point, w: i64, h: i64, boxes: &[(i64, i64, i64, i64)]) -> usize {
        let right = at.x + w;
        let top = at.y + h;
        let drop_y = boxes
            .iter()
            .filter(|b| b.0 <= right && right < b.0 + b.2 && b.1 + b.3 <= at.y)
            .map(|b| b.1 + b.3)
            .max()
            .unwrap_or(0);
        let drop_x = boxes
            .iter()
            .filter(|b| b.1 <= top && top < b.1 + b.3 && b.0 + b.2 <= at.x)
            .map(|b| b.0 + b.2)
            .max()
            .unwrap_or(0);
        let source = Some(source);
        [
            Anchor { at: Point::new(right, at.y), source, shift: Shift::X },
            Anchor { at: Point::new(at.x, top), source, shift: Shift::Y },
            Anchor { at: Point::new(right, top), source, shift: Shift::XY },
            Anchor { at: Point::new(right, drop_y), source, shift: Shift::X },
            Anchor { at: Point::new(drop_x, top), source, shift: Shift::Y },
        ]
        .into_iter()
        .filter(|&a| self.push(a))
        .count()
    }
}
