// SPDX-License-Identifier: Apache-2.0

//! First-improvement local search over variant genes and position-gene swaps.

use crate::decoder::{variant_index, Chromosome, Decoded, Decoder};
use crate::refine::{Clock, RefineError};
use crate::scalar::Real;

/// Outcome of a chromosome-level local search.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalResult<R> {
    pub chromosome: Chromosome<R>,
    pub decoded: Decoded<R>,
    pub decodes: usize,
}

fn start<R: Real>(dec: &Decoder<'_, R>, c: &Chromosome<R>) -> Result<LocalResult<R>, RefineError> {
    Ok(LocalResult { chromosome: c.clone(), decoded: dec.decode(c)?, decodes: 1 })
}

/// Retarget variant genes one rectangle at a time, keeping strict improvements.
pub fn ls_variants<R: Real>(
    dec: &Decoder<'_, R>,
    c: &Chromosome<R>,
    budget: usize,
    clock: &Clock,
) -> Result<LocalResult<R>, RefineError> {
    let inst = dec.instance();
    let n = inst.len();
    let mut cur = start(dec, c)?;
    if budget == 0 {
        return Ok(cur);
    }
    // The second member of a pair follows the first one's variant gene.
    let mut follower = vec![false; n];
    for g in &inst.groups {
        for &(_, j) in &g.pairs {
            follower[j] = true;
        }
    }
    let mut spent = 0usize;
    loop {
        let mut improved = false;
        for i in (0..n).filter(|&i| !follower[i]) {
            let m = inst.rects[i].variants.len();
            let now = variant_index(cur.chromosome.variant(i), m);
            for k in (0..m).filter(|&k| k != now) {
                if spent >= budget || clock.expired() {
                    return Ok(cur);
                }
                let mut genes = cur.chromosome.genes().to_vec();
                genes[n + i] = R::of((k as f64 + 0.5) / m as f64);
                let cand = Chromosome::new(genes)?;
                let d = dec.decode(&cand)?;
                spent += 1;
                cur.decodes += 1;
                if d.report.total < cur.decoded.report.total {
                    cur.chromosome = cand;
                    cur.decoded = d;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            return Ok(cur);
        }
    }
}

/// 2-opt over position genes; identity when the instance has more than `max_n` rectangles.
pub fn ls_positions<R: Real>(
    dec: &Decoder<'_, R>,
    c: &Chromosome<R>,
    budget: usize,
    max_n: usize,
    clock: &Clock,
) -> Result<LocalResult<R>, RefineError> {
    let n = dec.instance().len();
    let mut cur = start(dec, c)?;
    if n > max_n || budget == 0 {
        return Ok(cur);
    }
    let mut spent = 0usize;
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in i + 1..n {
                if spent >= budget || clock.expired() {
                    return Ok(cur);
                }
                let mut genes = cur.chromosome.genes().to_vec();
                if genes[i] == genes[j] {
                    continue;
                }
                genes.swap(i, j);
                let cand = Chromosome::new(genes)?;
                let d = dec.decode(&cand)?;
                spent += 1;
                cur.decodes += 1;
                if d.report.total < cur.decoded.report.total {
                    cur.chromosome = cand;
                    cur.decoded = d;
                    improved = true;
                }
            }
        }
        if !improved {
            return Ok(cur);
        }
    }
}
