//! Subspaces and flats of `F_q^n` in canonical form.
//!
//! A subspace is stored as its reduced row-echelon basis, which is unique,
//! so equality is bit-for-bit. A flat is a subspace plus a shift vector
//! canonicalized to vanish on the pivot coordinates; that pair is likewise
//! unique per point set.

use num_bigint::BigUint;
use num_traits::One;

use super::field::FieldCtx;
use super::matrix::MatrixFq;
use super::LinalgError;

/// A `k`-dimensional subspace of `F_q^n` with RREF basis.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    n: usize,
    basis: MatrixFq, // k x n, RREF, no zero rows
    pivots: Vec<usize>,
}

impl std::fmt::Debug for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subspace(dim {} of F{}^{}, basis {:?})",
            self.dim(), self.ctx().q(), self.n, self.basis)
    }
}

impl Subspace {
    /// Canonicalize a spanning set (rows need not be independent).
    pub fn from_spanning(ctx: &FieldCtx, n: usize, spanning: &[Vec<u64>]) -> Subspace {
        if spanning.is_empty() {
            return Self::zero(ctx, n);
        }
        let m = MatrixFq::from_rows(ctx, spanning).expect("spanning rows must agree in length");
        assert_eq!(m.cols(), n);
        let (rref, rank, pivots) = m.rref();
        let mut rows = Vec::with_capacity(rank);
        for r in 0..rank {
            rows.push(rref.row(r).to_vec());
        }
        let basis = MatrixFq::from_rows(ctx, &rows)
            .unwrap_or_else(|_| MatrixFq::zero(ctx, 0, n));
        Subspace { n, basis, pivots }
    }

    /// The zero subspace `{0}`.
    pub fn zero(ctx: &FieldCtx, n: usize) -> Subspace {
        Subspace {
            n,
            basis: MatrixFq::zero(ctx, 0, n),
            pivots: Vec::new(),
        }
    }

    /// The full space `F_q^n`.
    pub fn full(ctx: &FieldCtx, n: usize) -> Subspace {
        Subspace {
            n,
            basis: MatrixFq::identity(ctx, n),
            pivots: (0..n).collect(),
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.basis.ctx()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &MatrixFq {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Membership test by reducing `v` against the RREF basis.
    pub fn contains(&self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.n);
        let f = self.ctx();
        let mut v = v.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            let c = v[p];
            if c == 0 {
                continue;
            }
            for j in 0..self.n {
                let t = f.mul(c, self.basis.get(i, j));
                v[j] = f.sub(v[j], t);
            }
        }
        v.iter().all(|&x| x == 0)
    }

    /// Is `self` contained in `other`?
    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        (0..self.dim()).all(|i| other.contains(self.basis.row(i)))
    }

    /// All `q^k` points, in lexicographic order of the coefficient vector
    /// (first basis row's coefficient most significant).
    pub fn points(&self) -> Vec<Vec<u64>> {
        let f = self.ctx();
        let q = f.q();
        let k = self.dim();
        let total = u32::try_from(k)
            .ok()
            .and_then(|e| q.checked_pow(e))
            .expect("subspace too large to enumerate");
        let mut out = Vec::with_capacity(total as usize);
        for idx in 0..total {
            let mut point = vec![0u64; self.n];
            let mut rest = idx;
            for i in (0..k).rev() {
                let coeff = rest % q;
                rest /= q;
                if coeff != 0 {
                    for j in 0..self.n {
                        let t = f.mul(coeff, self.basis.get(i, j));
                        point[j] = f.add(point[j], t);
                    }
                }
            }
            out.push(point);
        }
        out
    }
}

/// A flat (affine subspace): canonical shift plus direction.
#[derive(Clone, PartialEq, Eq)]
pub struct Flat {
    subspace: Subspace,
    shift: Vec<u64>,
}

impl std::fmt::Debug for Flat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Flat(shift {:?} + {:?})", self.shift, self.subspace)
    }
}

impl Flat {
    /// Canonical representative of `shift + subspace`: the shift is reduced
    /// so that it vanishes on every pivot coordinate of the direction.
    pub fn canonicalize(shift: &[u64], subspace: Subspace) -> Flat {
        assert_eq!(shift.len(), subspace.ambient_dim());
        let f = subspace.ctx().clone();
        let mut s = shift.to_vec();
        for (i, &p) in subspace.pivots.iter().enumerate() {
            let c = s[p];
            if c == 0 {
                continue;
            }
            for j in 0..s.len() {
                let t = f.mul(c, subspace.basis.get(i, j));
                s[j] = f.sub(s[j], t);
            }
        }
        Flat {
            subspace,
            shift: s,
        }
    }

    /// A subspace viewed as the flat through the origin.
    pub fn through_origin(subspace: Subspace) -> Flat {
        let shift = vec![0u64; subspace.ambient_dim()];
        Flat { subspace, shift }
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn shift(&self) -> &[u64] {
        &self.shift
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.subspace.ambient_dim()
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.subspace.ctx()
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let f = self.ctx();
        let diff: Vec<u64> = v
            .iter()
            .zip(&self.shift)
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        self.subspace.contains(&diff)
    }

    /// All `q^k` points of the flat.
    pub fn points(&self) -> Vec<Vec<u64>> {
        let f = self.ctx();
        self.subspace
            .points()
            .into_iter()
            .map(|p| {
                p.iter()
                    .zip(&self.shift)
                    .map(|(&a, &b)| f.add(a, b))
                    .collect()
            })
            .collect()
    }
}

/// Gaussian binomial `[n choose k]_q`: the number of `k`-dimensional
/// subspaces of `F_q^n`, as an exact big integer.
pub fn gaussian_binomial(n: u64, k: u64, q: u64) -> Result<BigUint, LinalgError> {
    if k > n {
        return Err(LinalgError::DimensionTooLarge { k, n });
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow(u32::try_from(n - i).unwrap()) - BigUint::one();
        den *= q.pow(u32::try_from(k - i).unwrap()) - BigUint::one();
    }
    Ok(num / den)
}

/// Iterator over all `k`-dimensional subspaces of `F_q^n`, each exactly
/// once, in lexicographic order of (pivot set, free entries).
pub fn enumerate_subspaces(
    ctx: &FieldCtx,
    n: usize,
    k: usize,
) -> Result<impl Iterator<Item = Subspace>, LinalgError> {
    if k > n {
        return Err(LinalgError::DimensionTooLarge {
            k: k as u64,
            n: n as u64,
        });
    }
    let ctx = ctx.clone();
    Ok(PivotSets::new(n, k).flat_map(move |pivots| {
        SubspaceCell::new(ctx.clone(), n, pivots).into_iter()
    }))
}

/// Iterator over all `k`-dimensional flats of `F_q^n`: every subspace with
/// every canonical shift (zeros at the pivot coordinates).
pub fn enumerate_flats(
    ctx: &FieldCtx,
    n: usize,
    k: usize,
) -> Result<impl Iterator<Item = Flat>, LinalgError> {
    let ctx2 = ctx.clone();
    Ok(enumerate_subspaces(ctx, n, k)?.flat_map(move |sub| {
        let ctx = ctx2.clone();
        let q = ctx.q();
        let free: Vec<usize> = (0..sub.ambient_dim())
            .filter(|c| !sub.pivots().contains(c))
            .collect();
        let total = u32::try_from(free.len())
            .ok()
            .and_then(|e| q.checked_pow(e))
            .expect("flat family too large to enumerate");
        let n = sub.ambient_dim();
        (0..total).map(move |idx| {
            let mut shift = vec![0u64; n];
            let mut rest = idx;
            for &c in free.iter().rev() {
                shift[c] = rest % q;
                rest /= q;
            }
            // shift already vanishes on pivots, so this is canonical
            Flat {
                subspace: sub.clone(),
                shift,
            }
        })
    }))
}

/// Lexicographic k-combinations of `0..n`.
struct PivotSets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl PivotSets {
    fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (0..k).collect());
        Self { n, current }
    }
}

impl Iterator for PivotSets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.take()?;
        let k = current.len();
        let mut next = current.clone();
        // advance to the lexicographic successor
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - (k - i) {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(current)
    }
}

/// All RREF bases with a fixed pivot set, free entries counted in
/// lexicographic (row-major, last position fastest) order.
struct SubspaceCell {
    ctx: FieldCtx,
    n: usize,
    pivots: Vec<usize>,
    /// (row, col) positions that may hold arbitrary values
    free_positions: Vec<(usize, usize)>,
}

impl SubspaceCell {
    fn new(ctx: FieldCtx, n: usize, pivots: Vec<usize>) -> Self {
        let k = pivots.len();
        let mut free_positions = Vec::new();
        for i in 0..k {
            for c in pivots[i] + 1..n {
                if !pivots.contains(&c) {
                    free_positions.push((i, c));
                }
            }
        }
        Self {
            ctx,
            n,
            pivots,
            free_positions,
        }
    }

    fn into_iter(self) -> impl Iterator<Item = Subspace> {
        let q = self.ctx.q();
        let total = u32::try_from(self.free_positions.len())
            .ok()
            .and_then(|e| q.checked_pow(e))
            .expect("subspace cell too large to enumerate");
        (0..total).map(move |idx| {
            let k = self.pivots.len();
            let mut basis = MatrixFq::zero(&self.ctx, k, self.n);
            for (i, &p) in self.pivots.iter().enumerate() {
                basis.set(i, p, 1);
            }
            let mut rest = idx;
            for &(r, c) in self.free_positions.iter().rev() {
                basis.set(r, c, rest % q);
                rest /= q;
            }
            Subspace {
                n: self.n,
                basis,
                pivots: self.pivots.clone(),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn f2() -> FieldCtx {
        FieldCtx::new(2, 1).unwrap()
    }

    fn f3() -> FieldCtx {
        FieldCtx::new(3, 1).unwrap()
    }

    #[test]
    fn gaussian_binomial_worked_values() {
        assert_eq!(gaussian_binomial(2, 1, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(gaussian_binomial(3, 1, 2).unwrap(), BigUint::from(7u32));
        assert_eq!(gaussian_binomial(4, 0, 7).unwrap(), BigUint::one());
        assert_eq!(gaussian_binomial(2, 1, 3).unwrap(), BigUint::from(4u32));
        assert!(gaussian_binomial(2, 3, 2).is_err());
    }

    #[test]
    fn subspace_counts_match_gaussian_binomial() {
        for q in [2u64, 3] {
            let ctx = FieldCtx::new(q, 1).unwrap();
            for n in 0..=4usize {
                for k in 0..=n {
                    let seen: BTreeSet<Vec<u64>> = enumerate_subspaces(&ctx, n, k)
                        .unwrap()
                        .map(|s| s.basis().entries().to_vec())
                        .collect();
                    let expected = gaussian_binomial(n as u64, k as u64, q).unwrap();
                    assert_eq!(
                        BigUint::from(seen.len()),
                        expected,
                        "distinct subspace count for q={q} n={n} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn flat_counts() {
        // (q=2, n=2, k=1) -> 6 flats
        assert_eq!(enumerate_flats(&f2(), 2, 1).unwrap().count(), 6);
        // (q=2, n=3, k=3) -> 1 flat
        assert_eq!(enumerate_flats(&f2(), 3, 3).unwrap().count(), 1);
        // (q=3, n=2, k=0) -> 9 flats (the points)
        assert_eq!(enumerate_flats(&f3(), 2, 0).unwrap().count(), 9);
        // general count q^{n-k} * gauss(n,k,q)
        for (q, n, k) in [(2u64, 4usize, 2usize), (3, 3, 1), (3, 3, 2)] {
            let ctx = FieldCtx::new(q, 1).unwrap();
            let count = enumerate_flats(&ctx, n, k).unwrap().count();
            let expected = gaussian_binomial(n as u64, k as u64, q).unwrap()
                * BigUint::from(q.pow((n - k) as u32));
            assert_eq!(BigUint::from(count), expected);
        }
    }

    #[test]
    fn k0_yields_zero_subspace_only() {
        let subs: Vec<Subspace> = enumerate_subspaces(&f3(), 3, 0).unwrap().collect();
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].dim(), 0);
    }

    #[test]
    fn canonicalize_worked_examples() {
        // shift (1,1) with span{(1,1)} over F_2: shift lies in the
        // subspace, canonical shift is (0,0)
        let sub = Subspace::from_spanning(&f2(), 2, &[vec![1, 1]]);
        let flat = Flat::canonicalize(&[1, 1], sub);
        assert_eq!(flat.shift(), &[0, 0]);

        // shift (0,1) with span{(1,0)}: unchanged
        let sub = Subspace::from_spanning(&f2(), 2, &[vec![1, 0]]);
        let flat = Flat::canonicalize(&[0, 1], sub.clone());
        assert_eq!(flat.shift(), &[0, 1]);

        // shift (1,1) with span{(1,0)}: pivot coordinate cleared -> (0,1)
        let flat = Flat::canonicalize(&[1, 1], sub);
        assert_eq!(flat.shift(), &[0, 1]);
    }

    #[test]
    fn canonicalize_is_idempotent_and_point_preserving() {
        for q in [2u64, 3] {
            let ctx = FieldCtx::new(q, 1).unwrap();
            for n in 1..=3usize {
                for k in 0..=n {
                    for sub in enumerate_subspaces(&ctx, n, k).unwrap() {
                        // every raw shift, not only canonical ones
                        let total = q.pow(n as u32);
                        for idx in 0..total {
                            let shift: Vec<u64> =
                                (0..n).map(|i| (idx / q.pow(i as u32)) % q).collect();
                            let flat = Flat::canonicalize(&shift, sub.clone());
                            let again =
                                Flat::canonicalize(flat.shift(), flat.subspace().clone());
                            assert_eq!(flat, again, "idempotence");
                            let mut raw: Vec<Vec<u64>> = sub
                                .points()
                                .iter()
                                .map(|p| {
                                    p.iter()
                                        .zip(&shift)
                                        .map(|(&a, &b)| ctx.add(a, b))
                                        .collect()
                                })
                                .collect();
                            raw.sort();
                            let mut canon = flat.points();
                            canon.sort();
                            assert_eq!(raw, canon, "point set preserved");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_is_canonical_under_enumeration() {
        // kernels of surjective maps land exactly on enumerated subspaces
        let ctx = f2();
        let all_planes: BTreeSet<Vec<u64>> = enumerate_subspaces(&ctx, 3, 2)
            .unwrap()
            .map(|s| s.basis().entries().to_vec())
            .collect();
        for l in crate::linalg::enumerate_surjective_maps(&ctx, 3, 1) {
            let ker = l.kernel();
            assert!(all_planes.contains(ker.basis().entries()));
        }
    }

    #[test]
    fn contains_and_points_agree() {
        let sub = Subspace::from_spanning(&f3(), 3, &[vec![1, 0, 2], vec![0, 1, 1]]);
        let pts = sub.points();
        assert_eq!(pts.len(), 9);
        for p in &pts {
            assert!(sub.contains(p));
        }
        assert!(!sub.contains(&[1, 0, 0]));
    }
}
