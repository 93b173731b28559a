//! The binary-to-extension-field embedding must be semantics-preserving:
//! an F_{2^ℓ}-linear map on the embedded set is also an F_2-linear map on
//! the original set, with the same fibers, so every bucket statistic is
//! identical. These tests build the F_2 matrix of an F_{2^ℓ} map
//! explicitly and compare both routes point by point and histogram by
//! histogram.

use kakeya_hash::hashcore::{
    embed_binary, histogram, l1_distance, linf_distance, PointSet,
};
use kakeya_hash::linalg::{sample_surjective_map, FieldCtx, LinearMap, MatrixFq};
use kakeya_hash::rng::SplitMix64;

/// F_2 matrix of multiplication by `a` in `F_{2^ell}`, in the embedding's
/// block coordinates (first bit of a block is the highest-degree
/// coefficient).
fn mul_by_matrix(big: &FieldCtx, a: u64) -> Vec<Vec<u64>> {
    let ell = big.ell() as usize;
    let mut rows = vec![vec![0u64; ell]; ell];
    for (j, row_src) in (0..ell).map(|j| {
        // block coordinate j corresponds to the basis element x^(ell-1-j),
        // whose packed encoding is the single bit ell-1-j
        let unit = 1u64 << (ell - 1 - j);
        (j, big.mul(a, unit))
    }) {
        for (i, row) in rows.iter_mut().enumerate() {
            row[j] = (row_src >> (ell - 1 - i)) & 1;
        }
    }
    rows
}

/// Unpack a t' x n' matrix over F_{2^ell} into the (t'*ell) x (n'*ell)
/// matrix over F_2 acting on embedded block coordinates.
fn unpack_matrix(big: &FieldCtx, map: &LinearMap) -> MatrixFq {
    let f2 = FieldCtx::new(2, 1).unwrap();
    let ell = big.ell() as usize;
    let (tp, np) = (map.t(), map.n());
    let mut out = MatrixFq::zero(&f2, tp * ell, np * ell);
    for br in 0..tp {
        for bc in 0..np {
            let block = mul_by_matrix(big, map.matrix().get(br, bc));
            for (i, row) in block.iter().enumerate() {
                for (j, &bit) in row.iter().enumerate() {
                    out.set(br * ell + i, bc * ell + j, bit);
                }
            }
        }
    }
    out
}

#[test]
fn extension_map_equals_unpacked_binary_map_pointwise() {
    let f2 = FieldCtx::new(2, 1).unwrap();
    for ell in [2u32, 3] {
        let big = FieldCtx::new(2, ell).unwrap();
        let n = 3 * ell as usize; // no padding: n' = 3 exactly
        let mut rng = SplitMix64::new(0xE4B_0000 + ell as u64);
        let set = PointSet::random(&mut rng, &f2, n, 40).unwrap();
        let embedded = embed_binary(&set, ell).unwrap();
        for _ in 0..10 {
            let map = sample_surjective_map(&mut rng, &big, 3, 2).unwrap();
            let binary = LinearMap::new(unpack_matrix(&big, &map)).unwrap();
            for (p, e) in set.iter().zip(embedded.iter()) {
                let via_field = map.apply(e).unwrap();
                let via_bits = binary.apply(p).unwrap();
                // repack the F_2 image into field elements, block by block
                let repacked: Vec<u64> = (0..2)
                    .map(|blk| {
                        (0..ell as usize).fold(0u64, |acc, i| {
                            acc | (via_bits[blk * ell as usize + i]
                                << (ell as usize - 1 - i))
                        })
                    })
                    .collect();
                assert_eq!(via_field, repacked, "ell={ell} point={p:?}");
            }
        }
    }
}

#[test]
fn extension_map_and_binary_map_have_identical_bucket_statistics() {
    // the two routes index buckets differently but partition S by the
    // same fibers, and the bucket counts (2^(t'*ell) of them each) match,
    // so the exact distances agree
    let f2 = FieldCtx::new(2, 1).unwrap();
    let big = FieldCtx::new(2, 2).unwrap();
    let n = 8usize; // n' = 4
    let mut rng = SplitMix64::new(77_001);
    let set = PointSet::random(&mut rng, &f2, n, 60).unwrap();
    let embedded = embed_binary(&set, 2).unwrap();
    for _ in 0..20 {
        let map = sample_surjective_map(&mut rng, &big, 4, 1).unwrap();
        let binary = LinearMap::new(unpack_matrix(&big, &map)).unwrap();
        let h_field = histogram(&map, &embedded).unwrap();
        let h_bits = histogram(&binary, &set).unwrap();
        assert_eq!(h_field.bucket_count(), h_bits.bucket_count());
        let mut field_counts: Vec<u64> = h_field.counts().values().copied().collect();
        let mut bit_counts: Vec<u64> = h_bits.counts().values().copied().collect();
        field_counts.sort_unstable();
        bit_counts.sort_unstable();
        assert_eq!(field_counts, bit_counts, "fibers must agree");
        assert_eq!(linf_distance(&h_field), linf_distance(&h_bits));
        assert_eq!(l1_distance(&h_field), l1_distance(&h_bits));
    }
}
