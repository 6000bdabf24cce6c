// SPDX-License-Identifier: Apache-2.0

//! Synthetic instance families.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{enumerate_variants, Axis, Blockage, DistanceSpec, Instance, Net, Rect, SymmetryGroup, Variant};
use crate::scalar::Real;

const DIM_RANGE: (i64, i64) = (2, 30);
const MIN_GROUP: usize = 10;
const BLOCKAGE_SHARE: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_rects: usize,
    pub n_nets_range: (usize, usize),
    pub n_blockages: usize,
    pub multi_variant_fraction: f64,
    pub with_symmetry: bool,
    pub allow_negative_distances: bool,
    pub rng_seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n_rects: 20,
            n_nets_range: (10, 20),
            n_blockages: 0,
            multi_variant_fraction: 0.5,
            with_symmetry: false,
            allow_negative_distances: true,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("n_rects must be at least 1")]
    NoRects,
    #[error("net count range {0}..{1} is reversed")]
    NetRange(usize, usize),
    #[error("at most 2 blockages are supported, got {0}")]
    Blockages(usize),
    #[error("multi-variant fraction {0} outside [0, 1]")]
    Fraction(f64),
    #[error("composition needs at least 2 copies, got {0}")]
    Copies(usize),
}

fn even_up(v: i64) -> i64 {
    v + v.rem_euclid(2)
}

fn closed_under_transpose(vs: &[Variant]) -> bool {
    vs.iter().all(|v| vs.contains(&v.transposed()))
}

/// 2 to 4 matrix-array variants; never a plain rotation set.
fn multi_variants(rng: &mut ChaCha8Rng, w: i64, h: i64) -> Vec<Variant> {
    let (mut w, mut h) = (w, h);
    loop {
        let count = rng.gen_range(2..=4i64);
        let dw = (w / count).max(1);
        let mut v = enumerate_variants(dw, h, count, count, 0).expect("positive device dims");
        v.truncate(4);
        if v.len() >= 2 && !closed_under_transpose(&v) {
            return v;
        }
        w = rng.gen_range(DIM_RANGE.0..=DIM_RANGE.1);
        h = rng.gen_range(DIM_RANGE.0..=DIM_RANGE.1);
    }
}

/// `(pairs, selfs)` per group.
fn symmetry_layout(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let groups = if n >= 4 * MIN_GROUP { rng.gen_range(1..=2) } else { 1 };
    let max = n / groups;
    let min = MIN_GROUP.min(max);
    (0..groups)
        .map(|_| {
            let size = rng.gen_range(min..=max.min(MIN_GROUP + 6).max(min));
            let selfs = if size % 2 == 1 { 1 } else { 2 * rng.gen_range(0..=1usize) };
            ((size - selfs) / 2, selfs)
        })
        .collect()
}

/// Random instance of the synthetic family described by `p`.
pub fn generate<R: Real>(p: &GenParams) -> Result<Instance<R>, GenError> {
    if p.n_rects == 0 {
        return Err(GenError::NoRects);
    }
    if p.n_nets_range.0 > p.n_nets_range.1 {
        return Err(GenError::NetRange(p.n_nets_range.0, p.n_nets_range.1));
    }
    if p.n_blockages > 2 {
        return Err(GenError::Blockages(p.n_blockages));
    }
    if !(0.0..=1.0).contains(&p.multi_variant_fraction) {
        return Err(GenError::Fraction(p.multi_variant_fraction));
    }
    let n = p.n_rects;
    let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let multi: BTreeSet<usize> =
        order[..((p.multi_variant_fraction * n as f64).round() as usize).min(n)].iter().copied().collect();

    let mut rects: Vec<Rect> = (0..n)
        .map(|i| {
            let w = rng.gen_range(DIM_RANGE.0..=DIM_RANGE.1);
            let h = rng.gen_range(DIM_RANGE.0..=DIM_RANGE.1);
            let name = format!("d{i}");
            if multi.contains(&i) {
                Rect::new(name, multi_variants(&mut rng, w, h))
            } else {
                Rect::rotatable(name, w, h)
            }
        })
        .collect();

    let mut groups = Vec::new();
    if p.with_symmetry && n >= 2 {
        let mut pool: Vec<usize> = (0..n).collect();
        pool.shuffle(&mut rng);
        let mut next = pool.into_iter();
        for (npairs, nselfs) in symmetry_layout(&mut rng, n) {
            let axis = if rng.gen_bool(0.5) { Axis::Vertical } else { Axis::Horizontal };
            let pairs: Vec<(usize, usize)> =
                (0..npairs).map(|_| (next.next().unwrap(), next.next().unwrap())).collect();
            let selfs: Vec<usize> = (0..nselfs).map(|_| next.next().unwrap()).collect();
            for &(i, j) in &pairs {
                rects[j].variants = rects[i].variants.clone();
            }
            for &s in &selfs {
                let v = rects[s].variants[0];
                let (w, h) = (even_up(v.w), even_up(v.h));
                rects[s].variants = if multi.contains(&s) {
                    let count = rng.gen_range(2..=4i64);
                    let dw = even_up((w / count).max(2));
                    let mut vs = enumerate_variants(dw, even_up(h), count, count, 0).expect("positive device dims");
                    vs.retain(|v| v.w % 2 == 0 && v.h % 2 == 0);
                    vs.truncate(4);
                    vs
                } else {
                    Rect::rotatable("", w, h).variants
                };
            }
            groups.push(SymmetryGroup { axis, pairs, selfs });
        }
    }

    let mut distances = DistanceSpec::uniform(n, 0);
    let lo = if p.allow_negative_distances { -2 } else { 0 };
    for i in 0..n {
        for j in i + 1..n {
            distances.set(i, j, rng.gen_range(lo..=6)).expect("indices in range");
        }
    }

    let mut nets = Vec::new();
    if n >= 2 {
        let count = rng.gen_range(p.n_nets_range.0..=p.n_nets_range.1);
        for _ in 0..count {
            let size = rng.gen_range(2..=6usize.min(n));
            let mut members: Vec<usize> = rand::seq::index::sample(&mut rng, n, size).into_vec();
            members.sort_unstable();
            nets.push(Net::with_cost(members, R::one()));
        }
    }

    let total: i64 = rects.iter().map(|r| r.variants[0].area()).sum();
    let side = ((total as f64 * 1.5).sqrt().ceil() as i64).max(4);
    let mut corners = [0usize, 1, 2, 3];
    corners.shuffle(&mut rng);
    let mut blockages = Vec::new();
    for &corner in corners.iter().take(p.n_blockages) {
        let w = rng.gen_range((side / 8).max(1)..=(side / 4).max(1));
        let h = rng.gen_range((side / 8).max(1)..=(side / 4).max(1));
        let (x, y) = match corner {
            0 => (0, 0),
            1 => (side - w, 0),
            2 => (0, side - h),
            _ => (side - w, side - h),
        };
        let k = ((BLOCKAGE_SHARE * n as f64).round() as usize).clamp(1, n);
        let restricted: BTreeSet<usize> = rand::seq::index::sample(&mut rng, n, k).into_iter().collect();
        blockages.push(Blockage { x, y, w, h, restricted });
    }

    let mut inst = Instance::new(rects);
    inst.distances = distances;
    inst.nets = nets;
    inst.groups = groups;
    inst.blockages = blockages;
    Ok(inst)
}

/// `k` disjoint copies of `inst`; blockages are dropped and no nets cross copies.
pub fn compose_copies<R: Real>(inst: &Instance<R>, k: usize) -> Result<Instance<R>, GenError> {
    if k < 2 {
        return Err(GenError::Copies(k));
    }
    let n = inst.len();
    let shift = |c: usize, i: usize| c * n + i;
    let mut rects = Vec::with_capacity(k * n);
    for c in 0..k {
        rects.extend(inst.rects.iter().map(|r| Rect::new(format!("{}_{c}", r.name), r.variants.clone())));
    }
    let mut out = Instance::new(rects);
    out.distances = DistanceSpec::uniform(k * n, inst.distances.default_distance());
    for c in 0..k {
        for (i, j, a) in inst.distances.overrides() {
            out.distances.set(shift(c, i), shift(c, j), a).expect("indices in range");
        }
        out.nets
            .extend(inst.nets.iter().map(|e| Net::with_cost(e.members.iter().map(|&m| shift(c, m)).collect(), e.cost)));
        out.groups.extend(inst.groups.iter().map(|g| SymmetryGroup {
            axis: g.axis,
            pairs: g.pairs.iter().map(|&(i, j)| (shift(c, i), shift(c, j))).collect(),
            selfs: g.selfs.iter().map(|&s| shift(c, s)).collect(),
        }));
        out.proximities.extend(inst.proximities.iter().map(|q| crate::model::ProximityPair {
            i: shift(c, q.i),
            j: shift(c, q.j),
            cost: q.cost,
        }));
        out.interfaces.extend(inst.interfaces.iter().map(|f| crate::model::InterfaceEntry {
            side: f.side,
            members: f.members.iter().map(|&m| shift(c, m)).collect(),
            cost: f.cost,
        }));
    }
    out.aspect_lo = inst.aspect_lo;
    out.aspect_hi = inst.aspect_hi;
    out.weights = inst.weights;
    Ok(out)
}
