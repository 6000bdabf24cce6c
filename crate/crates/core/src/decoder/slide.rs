// SPDX-License-Identifier: Apache-2.0

//! Two-phase rectangle sliding.
//!
//! Starting from a point, the rectangle first moves along one axis with the
//! other coordinate fixed, then along the other axis. In each phase the
//! obstacles that can collide given the fixed coordinate are split by
//! centroid into those that must stay before and those that must stay after
//! the rectangle; the rectangle lands at the lowest coordinate that clears
//! the former, if that does not run into the latter.

use crate::model::{Point, Variant};

/// Which coordinate moves first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    HorizontalFirst,
    VerticalFirst,
}

impl Direction {
    /// Genes up to 0.5 slide horizontally first.
    pub fn from_gene(gene: f64) -> Self {
        if gene <= 0.5 {
            Direction::HorizontalFirst
        } else {
            Direction::VerticalFirst
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::HorizontalFirst => Direction::VerticalFirst,
            Direction::VerticalFirst => Direction::HorizontalFirst,
        }
    }
}

/// A fixed box together with the minimum distance the sliding rectangle must keep from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Obstacle {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    pub margin: i64,
}

impl Obstacle {
    pub fn new(x: i64, y: i64, w: i64, h: i64, margin: i64) -> Self {
        Self { x, y, w, h, margin }
    }
}

#[inline]
fn bounds_x<'a>(
    dims: Variant,
    x: i64,
    y: i64,
    obstacles: impl Iterator<Item = &'a Obstacle>,
    lo: &mut i64,
    hi: &mut i64,
) {
    let c2 = 2 * x + dims.w;
    for o in obstacles {
        if y >= o.y + o.h + o.margin || y + dims.h + o.margin <= o.y {
            continue;
        }
        if 2 * o.x + o.w <= c2 {
            *lo = (*lo).max(o.x + o.w + o.margin);
        } else {
            *hi = (*hi).min(o.x - dims.w - o.margin);
        }
    }
}

#[inline]
fn bounds_y<'a>(
    dims: Variant,
    x: i64,
    y: i64,
    obstacles: impl Iterator<Item = &'a Obstacle>,
    lo: &mut i64,
    hi: &mut i64,
) {
    let c2 = 2 * y + dims.h;
    for o in obstacles {
        if x >= o.x + o.w + o.margin || x + dims.w + o.margin <= o.x {
            continue;
        }
        if 2 * o.y + o.h <= c2 {
            *lo = (*lo).max(o.y + o.h + o.margin);
        } else {
            *hi = (*hi).min(o.y - dims.h - o.margin);
        }
    }
}

/// Obstacles a rectangle can slide against.
pub trait Obstacles {
    /// Lowest feasible x for a rectangle with fixed `y`, if any.
    fn phase_x(&self, dims: Variant, x: i64, y: i64, floor: i64) -> Option<i64>;
    /// Lowest feasible y for a rectangle with fixed `x`, if any.
    fn phase_y(&self, dims: Variant, x: i64, y: i64, floor: i64) -> Option<i64>;
}

impl Obstacles for [Obstacle] {
    fn phase_x(&self, dims: Variant, x: i64, y: i64, floor: i64) -> Option<i64> {
        let (mut lo, mut hi) = (floor, i64::MAX);
        bounds_x(dims, x, y, self.iter(), &mut lo, &mut hi);
        (lo <= hi).then_some(lo)
    }

    fn phase_y(&self, dims: Variant, x: i64, y: i64, floor: i64) -> Option<i64> {
        let (mut lo, mut hi) = (floor, i64::MAX);
        bounds_y(dims, x, y, self.iter(), &mut lo, &mut hi);
        (lo <= hi).then_some(lo)
    }
}

#[cfg(test)]
pub(crate) fn phase_x(dims: Variant, x: i64, y: i64, obstacles: &[Obstacle], floor: i64) -> Option<i64> {
    obstacles.phase_x(dims, x, y, floor)
}

pub(crate) fn phase_y(dims: Variant, x: i64, y: i64, obstacles: &[Obstacle], floor: i64) -> Option<i64> {
    obstacles.phase_y(dims, x, y, floor)
}

/// Obstacles sorted along both axes so that each phase only visits the
/// band that can interact with the sliding rectangle. Large boxes are kept
/// in a separate list that is always scanned.
#[derive(Clone, Debug, Default)]
pub struct ObstacleIndex {
    by_x: Vec<Obstacle>,
    by_y: Vec<Obstacle>,
    large: Vec<Obstacle>,
    max_w: i64,
    max_h: i64,
    max_margin: i64,
}

impl ObstacleIndex {
    /// Boxes wider or taller than `cap` go to the always-scanned list.
    pub fn rebuild(&mut self, obstacles: &[Obstacle], cap: i64) {
        self.by_x.clear();
        self.by_y.clear();
        self.large.clear();
        self.max_w = 0;
        self.max_h = 0;
        self.max_margin = i64::MIN;
        for &o in obstacles {
            if o.w > cap || o.h > cap {
                self.large.push(o);
                continue;
            }
            self.max_w = self.max_w.max(o.w);
            self.max_h = self.max_h.max(o.h);
            self.max_margin = self.max_margin.max(o.margin);
            self.by_x.push(o);
        }
        if self.by_x.is_empty() {
            self.max_margin = 0;
        }
        self.by_y.extend_from_slice(&self.by_x);
        self.by_x.sort_unstable_by_key(|o| o.x);
        self.by_y.sort_unstable_by_key(|o| o.y);
    }

    fn band(sorted: &[Obstacle], key: impl Fn(&Obstacle) -> i64, from: i64, to: i64) -> &[Obstacle] {
        let a = sorted.partition_point(|o| key(o) <= from);
        let b = sorted.partition_point(|o| key(o) < to);
        &sorted[a..b.max(a)]
    }
}

impl Obstacles for ObstacleIndex {
    fn phase_x(&self, dims: Variant, x: i64, y: i64, floor: i64) -> Option<i64> {
        let (mut lo, mut hi) = (floor, i64::MAX);
        let m = self.max_margin;
        let band = Self::band(&self.by_y, |o| o.y, y - self.max_h - m, y + dims.h + m);
        bounds_x(dims, x, y, band.iter(), &mut lo, &mut hi);
        bounds_x(dims, x, y, self.large.iter(), &mut lo, &mut hi);
        (lo <= hi).then_some(lo)
    }

    fn phase_y(&self, dims: Variant, x: i64, y: i64, floor: i64) -> Option<i64> {
        let (mut lo, mut hi) = (floor, i64::MAX);
        let m = self.max_margin;
        let band = Self::band(&self.by_x, |o| o.x, x - self.max_w - m, x + dims.w + m);
        bounds_y(dims, x, y, band.iter(), &mut lo, &mut hi);
        bounds_y(dims, x, y, self.large.iter(), &mut lo, &mut hi);
        (lo <= hi).then_some(lo)
    }
}

/// Candidate positions produced by one slide: the position after the first
/// phase and the position after both phases, deduplicated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SlideResult {
    pub intermediate: Option<Point>,
    pub last: Option<Point>,
}

impl SlideResult {
    pub fn is_empty(&self) -> bool {
        self.intermediate.is_none() && self.last.is_none()
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> {
        self.intermediate.into_iter().chain(self.last)
    }
}

/// Slide a `dims` rectangle from `start` against `obstacles`.
///
/// Coordinates never go below `floor`. Both returned positions are feasible
/// with respect to every obstacle.
pub fn slide<O: Obstacles + ?Sized>(
    dims: Variant,
    start: Point,
    first: Direction,
    obstacles: &O,
    floor: Point,
) -> SlideResult {
    let start = Point::new(start.x.max(floor.x), start.y.max(floor.y));
    let (mid, end) = match first {
        Direction::HorizontalFirst => {
            let Some(x) = obstacles.phase_x(dims, start.x, start.y, floor.x) else {
                return SlideResult::default();
            };
            let mid = Point::new(x, start.y);
            (mid, obstacles.phase_y(dims, x, start.y, floor.y).map(|y| Point::new(x, y)))
        }
        Direction::VerticalFirst => {
            let Some(y) = obstacles.phase_y(dims, start.x, start.y, floor.y) else {
                return SlideResult::default();
            };
            let mid = Point::new(start.x, y);
            (mid, obstacles.phase_x(dims, start.x, y, floor.x).map(|x| Point::new(x, y)))
        }
    };
    SlideResult { intermediate: Some(mid), last: end.filter(|&p| p != mid) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::separated;

    #[test]
    fn slides_left_until_abutting() {
        let obstacles = [Obstacle::new(0, 0, 3, 3, 0)];
        let r = slide(
            Variant::new(2, 2),
            Point::new(5, 0),
            Direction::HorizontalFirst,
            obstacles.as_slice(),
            Point::ORIGIN,
        );
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![Point::new(3, 0)]);
    }

    #[test]
    fn no_obstacles_lands_at_the_floor() {
        let r = slide(Variant::new(2, 2), Point::new(7, 0), Direction::HorizontalFirst, &[][..], Point::ORIGIN);
        assert_eq!(r.intermediate, Some(Point::new(0, 0)));
        assert_eq!(r.last, None);
        let r = slide(Variant::new(2, 2), Point::new(7, 4), Direction::HorizontalFirst, &[][..], Point::ORIGIN);
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![Point::new(0, 4), Point::new(0, 0)]);
    }

    #[test]
    fn pinned_between_obstacles_is_infeasible() {
        let obstacles = [Obstacle::new(0, 0, 3, 3, 0), Obstacle::new(4, 0, 3, 3, 0)];
        // x_L = 3, x_R = 4 - 3 = 1
        assert_eq!(phase_x(Variant::new(3, 2), 3, 0, &obstacles, 0), None);
        let r = slide(
            Variant::new(3, 2),
            Point::new(3, 0),
            Direction::HorizontalFirst,
            obstacles.as_slice(),
            Point::ORIGIN,
        );
        assert!(r.is_empty());
    }

    #[test]
    fn margin_pushes_the_rectangle_away() {
        let obstacles = [Obstacle::new(0, 0, 4, 2, 1)];
        let r = slide(
            Variant::new(3, 3),
            Point::new(5, 0),
            Direction::HorizontalFirst,
            obstacles.as_slice(),
            Point::ORIGIN,
        );
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![Point::new(5, 0)]);
    }

    #[test]
    fn vertical_first_moves_y_then_x() {
        let obstacles = [Obstacle::new(0, 0, 4, 2, 0)];
        let r =
            slide(Variant::new(2, 2), Point::new(1, 6), Direction::VerticalFirst, obstacles.as_slice(), Point::ORIGIN);
        assert_eq!(r.intermediate, Some(Point::new(1, 2)));
        assert_eq!(r.last, Some(Point::new(0, 2)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn every_candidate_clears_every_obstacle(
                obs in prop::collection::vec((0i64..30, 0i64..30, 1i64..8, 1i64..8, -2i64..4), 0..8),
                w in 1i64..8, h in 1i64..8, sx in 0i64..40, sy in 0i64..40, vertical in any::<bool>(),
            ) {
                let obstacles: Vec<Obstacle> = obs.iter().map(|&(x, y, w, h, m)| Obstacle::new(x, y, w, h, m)).collect();
                let dir = if vertical { Direction::VerticalFirst } else { Direction::HorizontalFirst };
                let r = slide(Variant::new(w, h), Point::new(sx, sy), dir, obstacles.as_slice(), Point::ORIGIN);
                for p in r.iter() {
                    prop_assert!(p.x >= 0 && p.y >= 0);
                    for o in &obstacles {
                        prop_assert!(separated((p.x, p.y, w, h), (o.x, o.y, o.w, o.h), o.margin));
                    }
                }
            }

            #[test]
            fn index_matches_linear_scan(
                obs in prop::collection::vec((0i64..60, 0i64..60, 1i64..12, 1i64..12, -2i64..5), 0..20),
                w in 1i64..10, h in 1i64..10, sx in 0i64..70, sy in 0i64..70, vertical in any::<bool>(), cap in 4i64..14,
            ) {
                let obstacles: Vec<Obstacle> = obs.iter().map(|&(x, y, w, h, m)| Obstacle::new(x, y, w, h, m)).collect();
                let mut index = ObstacleIndex::default();
                index.rebuild(&obstacles, cap);
                let dir = if vertical { Direction::VerticalFirst } else { Direction::HorizontalFirst };
                let a = slide(Variant::new(w, h), Point::new(sx, sy), dir, obstacles.as_slice(), Point::ORIGIN);
                let b = slide(Variant::new(w, h), Point::new(sx, sy), dir, &index, Point::ORIGIN);
                prop_assert_eq!(a, b);
            }
        }
    }
}
