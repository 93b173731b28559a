//! Bit-packed fast path for `F_2` with `n <= 63`.
//!
//! The statistical trend experiments hash thousands of seeded maps against
//! a fixed set; the generic exact machinery would allocate per element.
//! Here a point of `F_2^n` is one `u64` (coordinate `i` in bit `i`), a map
//! is `t` row masks, and applying a row is a popcount parity.

use crate::rng::SplitMix64;

/// Pack coordinates (each 0 or 1) into a word, coordinate `i` at bit `i`.
pub fn pack_gf2_point(coords: &[u64]) -> u64 {
    debug_assert!(coords.len() <= 63);
    coords
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &c)| acc | ((c & 1) << i))
}

/// Rank over `F_2` of the given row masks.
pub fn gf2_rank(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::with_capacity(rows.len());
    for &row in rows {
        let mut v = row;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
        }
    }
    basis.len()
}

/// Uniformly random surjective map `F_2^n -> F_2^t` as `t` row masks,
/// by rejection on full rank — the same scheme as the generic sampler.
pub fn gf2_sample_surjective(rng: &mut SplitMix64, n: u32, t: u32) -> Vec<u64> {
    assert!(t >= 1 && t <= n && n <= 63);
    loop {
        let rows: Vec<u64> = (0..t).map(|_| rng.below(1u64 << n)).collect();
        if gf2_rank(&rows) == t as usize {
            return rows;
        }
    }
}

/// Largest bucket load of the packed points under the map, counting over
/// all `2^t` buckets.
pub fn gf2_max_bucket_load(rows: &[u64], points: &[u64]) -> u64 {
    let t = rows.len();
    let mut counts = vec![0u64; 1 << t];
    for &p in points {
        let mut bucket = 0usize;
        for (j, &row) in rows.iter().enumerate() {
            bucket |= (((row & p).count_ones() & 1) as usize) << j;
        }
        counts[bucket] += 1;
    }
    counts.into_iter().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashcore::{histogram, PointSet};
    use crate::linalg::{FieldCtx, LinearMap, MatrixFq};

    #[test]
    fn rank_matches_generic_matrix_rank() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        let mut rng = SplitMix64::new(17);
        for _ in 0..200 {
            let n = 1 + (rng.below(6) as usize);
            let t = 1 + (rng.below(n as u64) as usize);
            let rows: Vec<u64> = (0..t).map(|_| rng.below(1 << n)).collect();
            let unpacked: Vec<Vec<u64>> = rows
                .iter()
                .map(|&r| (0..n).map(|i| (r >> i) & 1).collect())
                .collect();
            let m = MatrixFq::from_rows(&f2, &unpacked).unwrap();
            assert_eq!(gf2_rank(&rows), m.rank());
        }
    }

    #[test]
    fn max_load_matches_generic_histogram() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        let mut rng = SplitMix64::new(23);
        for _ in 0..50 {
            let n = 6;
            let t = 1 + (rng.below(3) as usize);
            let rows = gf2_sample_surjective(&mut rng, n as u32, t as u32);
            let set = PointSet::random(&mut rng, &f2, n, 30).unwrap();
            let packed: Vec<u64> = set.iter().map(|p| pack_gf2_point(p)).collect();
            let fast = gf2_max_bucket_load(&rows, &packed);

            let unpacked: Vec<Vec<u64>> = rows
                .iter()
                .map(|&r| (0..n).map(|i| (r >> i) & 1).collect())
                .collect();
            let map = LinearMap::new(MatrixFq::from_rows(&f2, &unpacked).unwrap()).unwrap();
            let h = histogram(&map, &set).unwrap();
            assert_eq!(fast, h.max_bucket());
        }
    }
}
