// SPDX-License-Identifier: Apache-2.0

use crate::scalar::Real;

/// Pull the net neighbours of freshly placed rectangles forward.
///
/// Every not-yet-placed rectangle that shares a net with any of
/// `just_placed` has its working position key multiplied by `p_m`, once per
/// call. Keys of repeated calls compound.
pub fn apply_priority_modulation<R: Real>(
    keys: &mut [R],
    placed: &[bool],
    just_placed: &[usize],
    nets_of: &[Vec<usize>],
    net_members: &[Vec<usize>],
    p_m: R,
) {
    if p_m == R::one() {
        return;
    }
    let mut hit = vec![false; keys.len()];
    for &r in just_placed {
        for &e in &nets_of[r] {
            for &m in &net_members[e] {
                if !placed[m] && !hit[m] && !just_placed.contains(&m) {
                    hit[m] = true;
                    keys[m] = keys[m] * p_m;
                }
            }
        }
    }
}
