//! Dense matrices over `F_q` with deterministic reduction.
//!
//! Entries are raw packed field values (see [`super::field`]); every matrix
//! carries its context and all binary operations require matching contexts.

use crate::rng::SplitMix64;

use super::field::FieldCtx;
use super::subspace::Subspace;
use super::LinalgError;

#[derive(Clone, PartialEq, Eq)]
pub struct MatrixFq {
    ctx: FieldCtx,
    rows: usize,
    cols: usize,
    data: Vec<u64>, // row-major
}

impl std::fmt::Debug for MatrixFq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "MatrixFq {}x{} over F{} [", self.rows, self.cols, self.ctx.q())?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl MatrixFq {
    pub fn zero(ctx: &FieldCtx, rows: usize, cols: usize) -> Self {
        Self {
            ctx: ctx.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(ctx: &FieldCtx, n: usize) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Build from row-major raw values; every value must be `< q`.
    pub fn from_rows(ctx: &FieldCtx, rows: &[Vec<u64>]) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(LinalgError::DimensionMismatch);
            }
            for &v in row {
                if v >= ctx.q() {
                    return Err(LinalgError::ValueOutOfRange { val: v, q: ctx.q() });
                }
                data.push(v);
            }
        }
        Ok(Self {
            ctx: ctx.clone(),
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        debug_assert!(v < self.ctx.q());
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    /// Matrix-vector product `M·x`.
    pub fn mul_vec(&self, x: &[u64]) -> Result<Vec<u64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch);
        }
        let f = &self.ctx;
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = 0u64;
                for (c, &xc) in x.iter().enumerate() {
                    acc = f.add(acc, f.mul(self.get(r, c), xc));
                }
                acc
            })
            .collect())
    }

    /// Matrix product `self · other`.
    pub fn mul_mat(&self, other: &MatrixFq) -> Result<MatrixFq, LinalgError> {
        if self.ctx != other.ctx {
            return Err(LinalgError::CtxMismatch);
        }
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch);
        }
        let f = &self.ctx;
        let mut out = MatrixFq::zero(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Reduced row-echelon form with deterministic elimination order:
    /// scan columns left to right, pivot on the first row (top to bottom)
    /// with a nonzero entry. Returns `(rref, rank, pivot columns)`.
    pub fn rref(&self) -> (MatrixFq, usize, Vec<usize>) {
        let mut m = self.clone();
        let f = m.ctx.clone();
        let mut pivots = Vec::new();
        let mut next_row = 0usize;
        for col in 0..m.cols {
            if next_row == m.rows {
                break;
            }
            let Some(pivot_row) = (next_row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if pivot_row != next_row {
                for c in 0..m.cols {
                    let (a, b) = (m.get(next_row, c), m.get(pivot_row, c));
                    m.set(next_row, c, b);
                    m.set(pivot_row, c, a);
                }
            }
            let inv = f.inv(m.get(next_row, col));
            if inv != 1 {
                for c in 0..m.cols {
                    let v = f.mul(m.get(next_row, c), inv);
                    m.set(next_row, c, v);
                }
            }
            for r in 0..m.rows {
                if r == next_row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..m.cols {
                    let v = f.sub(m.get(r, c), f.mul(factor, m.get(next_row, c)));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            next_row += 1;
        }
        let rank = pivots.len();
        (m, rank, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    /// Right kernel `{x : M·x = 0}` as a canonical subspace of `F_q^cols`.
    pub fn kernel(&self) -> Subspace {
        let (rref, rank, pivots) = self.rref();
        let f = &self.ctx;
        let n = self.cols;
        let mut basis: Vec<Vec<u64>> = Vec::with_capacity(n - rank);
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; n];
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = Some(i);
            }
            v
        };
        for free_col in 0..n {
            if pivot_set[free_col].is_some() {
                continue;
            }
            let mut vec = vec![0u64; n];
            vec[free_col] = 1;
            for (i, &p) in pivots.iter().enumerate() {
                vec[p] = f.neg(rref.get(i, free_col));
            }
            basis.push(vec);
        }
        Subspace::from_spanning(&self.ctx, n, &basis)
    }
}

/// A surjective linear map `F_q^n -> F_q^t`: a `t x n` matrix of rank `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    matrix: MatrixFq,
}

impl LinearMap {
    /// Wrap a matrix, verifying surjectivity (full row rank).
    pub fn new(matrix: MatrixFq) -> Result<Self, LinalgError> {
        let t = matrix.rows();
        if t == 0 || matrix.rank() != t {
            return Err(LinalgError::NotSurjective);
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &MatrixFq {
        &self.matrix
    }

    /// Output dimension `t`.
    pub fn t(&self) -> usize {
        self.matrix.rows()
    }

    /// Input dimension `n`.
    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.matrix.ctx()
    }

    pub fn apply(&self, x: &[u64]) -> Result<Vec<u64>, LinalgError> {
        self.matrix.mul_vec(x)
    }

    pub fn kernel(&self) -> Subspace {
        self.matrix.kernel()
    }
}

/// Number of surjective `t x n` maps over `F_q`:
/// `(q^n - 1)(q^n - q) ... (q^n - q^{t-1})`.
pub fn surjective_map_count(q: u64, n: u32, t: u32) -> num_bigint::BigUint {
    use num_bigint::BigUint;
    let qn = BigUint::from(q).pow(n);
    let mut count = BigUint::from(1u32);
    let mut qi = BigUint::from(1u32);
    for _ in 0..t {
        count *= &qn - &qi;
        qi *= q;
    }
    count
}

/// Draw a uniformly random surjective `t x n` map by rejection: sample
/// uniform matrices until one has rank `t`. Uniform-on-matrices conditioned
/// on full rank is exactly uniform over the surjective family.
pub fn sample_surjective_map(
    rng: &mut SplitMix64,
    ctx: &FieldCtx,
    n: usize,
    t: usize,
) -> Result<LinearMap, LinalgError> {
    if t == 0 {
        return Err(LinalgError::ZeroOutputDimension);
    }
    if t > n {
        return Err(LinalgError::NoSurjection { n, t });
    }
    let q = ctx.q();
    loop {
        let mut m = MatrixFq::zero(ctx, t, n);
        for r in 0..t {
            for c in 0..n {
                m.set(r, c, rng.below(q));
            }
        }
        if m.rank() == t {
            return Ok(LinearMap { matrix: m });
        }
    }
}

/// Enumerate all `rows x cols` matrices over the field, in row-major
/// digit order. Count is `q^(rows*cols)`; callers keep dimensions tiny.
pub fn enumerate_matrices(
    ctx: &FieldCtx,
    rows: usize,
    cols: usize,
) -> impl Iterator<Item = MatrixFq> {
    let ctx = ctx.clone();
    let q = ctx.q();
    let cells = rows * cols;
    let total = q
        .checked_pow(u32::try_from(cells).expect("too many cells"))
        .expect("matrix family too large to enumerate");
    (0..total).map(move |index| {
        let mut data = vec![0u64; cells];
        let mut rest = index;
        for slot in data.iter_mut().rev() {
            *slot = rest % q;
            rest /= q;
        }
        MatrixFq {
            ctx: ctx.clone(),
            rows,
            cols,
            data,
        }
    })
}

/// Enumerate every surjective `t x n` map, in the matrix order of
/// [`enumerate_matrices`].
pub fn enumerate_surjective_maps(
    ctx: &FieldCtx,
    n: usize,
    t: usize,
) -> impl Iterator<Item = LinearMap> {
    enumerate_matrices(ctx, t, n)
        .filter(|m| m.rank() == m.rows())
        .map(|matrix| LinearMap { matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn f2() -> FieldCtx {
        FieldCtx::new(2, 1).unwrap()
    }

    fn f3() -> FieldCtx {
        FieldCtx::new(3, 1).unwrap()
    }

    #[test]
    fn rref_worked_examples() {
        let id = MatrixFq::identity(&f2(), 3);
        assert_eq!(id.rank(), 3);

        let m = MatrixFq::from_rows(&f2(), &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(m.rank(), 1);

        let z = MatrixFq::zero(&f2(), 2, 5);
        assert_eq!(z.rank(), 0);
    }

    #[test]
    fn rref_is_row_equivalent_and_reduced() {
        // det = 6 ≡ 0 (mod 3): row3 = row1 + row2 over F_3, so rank 2.
        let m = MatrixFq::from_rows(&f3(), &[vec![2, 1, 0], vec![1, 2, 1], vec![0, 0, 2]]).unwrap();
        let (r, rank, pivots) = m.rref();
        assert_eq!(rank, 2);
        assert_eq!(pivots, vec![0, 2]);
        let expected =
            MatrixFq::from_rows(&f3(), &[vec![1, 2, 0], vec![0, 0, 1], vec![0, 0, 0]]).unwrap();
        assert_eq!(r, expected);

        let full = MatrixFq::from_rows(&f3(), &[vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]]).unwrap();
        let (r, rank, _) = full.rref();
        assert_eq!(rank, 3);
        assert_eq!(r, MatrixFq::identity(&f3(), 3));
    }

    #[test]
    fn kernel_worked_examples() {
        // L = [1 1] over F_2 -> kernel spanned by (1,1)
        let l = MatrixFq::from_rows(&f2(), &[vec![1, 1]]).unwrap();
        let ker = l.kernel();
        assert_eq!(ker.dim(), 1);
        assert_eq!(ker.basis().row(0), &[1, 1]);

        // identity over F_3 -> zero kernel
        let id = MatrixFq::identity(&f3(), 2);
        assert_eq!(id.kernel().dim(), 0);

        // zero 1x3 over F_2 -> full kernel
        let z = MatrixFq::zero(&f2(), 1, 3);
        assert_eq!(z.kernel().dim(), 3);
    }

    #[test]
    fn rank_nullity_exhaustive_small() {
        // every L over F_2 with n <= 4, t <= 3: rank + dim ker = n and
        // L v = 0 for all kernel basis rows
        for n in 1..=4usize {
            for t in 1..=3.min(n) {
                for m in enumerate_matrices(&f2(), t, n) {
                    let rank = m.rank();
                    let ker = m.kernel();
                    assert_eq!(rank + ker.dim(), n);
                    for i in 0..ker.dim() {
                        let v = ker.basis().row(i).to_vec();
                        assert!(m.mul_vec(&v).unwrap().iter().all(|&x| x == 0));
                    }
                }
            }
        }
    }

    #[test]
    fn surjective_sampling_errors() {
        let mut rng = SplitMix64::new(0);
        assert!(matches!(
            sample_surjective_map(&mut rng, &f2(), 2, 3),
            Err(LinalgError::NoSurjection { .. })
        ));
        assert!(matches!(
            sample_surjective_map(&mut rng, &f2(), 2, 0),
            Err(LinalgError::ZeroOutputDimension)
        ));
    }

    #[test]
    fn surjective_counts() {
        assert_eq!(surjective_map_count(2, 3, 2), BigUint::from(42u32));
        assert_eq!(surjective_map_count(2, 2, 2), BigUint::from(6u32));
        assert_eq!(
            enumerate_surjective_maps(&f2(), 3, 2).count(),
            42,
            "enumeration must agree with the closed form"
        );
        assert_eq!(enumerate_surjective_maps(&f2(), 3, 3).count(), 168);
    }

    #[test]
    fn gl2_f2_sampling_is_uniform_chi_square() {
        // (n=2, t=2, q=2): 6 invertible matrices, chi-square over 6000 draws
        let maps: Vec<LinearMap> = enumerate_surjective_maps(&f2(), 2, 2).collect();
        assert_eq!(maps.len(), 6);
        let mut counts = vec![0u64; 6];
        let mut rng = SplitMix64::new(20240229);
        let draws = 6000;
        for _ in 0..draws {
            let l = sample_surjective_map(&mut rng, &f2(), 2, 2).unwrap();
            let idx = maps.iter().position(|m| *m == l).unwrap();
            counts[idx] += 1;
        }
        let expected = draws as f64 / 6.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // df = 5; 20.5 is the 0.999 quantile. Deterministic seed, so this
        // is a frozen regression value, not a flaky statistical test.
        assert!(chi2 < 20.5, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn sampling_hits_all_42_rank2_maps_within_5_sigma() {
        let maps: Vec<LinearMap> = enumerate_surjective_maps(&f2(), 3, 2).collect();
        let mut counts = vec![0u64; maps.len()];
        let draws = 10_000u64;
        let mut rng = SplitMix64::new(7);
        for _ in 0..draws {
            let l = sample_surjective_map(&mut rng, &f2(), 3, 2).unwrap();
            let idx = maps.iter().position(|m| *m == l).unwrap();
            counts[idx] += 1;
        }
        let p = 1.0 / 42.0;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!(c > 0, "matrix {i} never sampled");
            assert!(
                (c as f64 - mean).abs() <= 5.0 * sigma,
                "matrix {i}: count {c} vs mean {mean:.1} (sigma {sigma:.2})"
            );
        }
    }

    #[test]
    fn mul_mat_matches_pointwise_composition() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..50 {
            let l1 = sample_surjective_map(&mut rng, &f3(), 4, 3).unwrap();
            let l2 = sample_surjective_map(&mut rng, &f3(), 3, 2).unwrap();
            let composed = l2.matrix().mul_mat(l1.matrix()).unwrap();
            for x_idx in 0..81u64 {
                let x: Vec<u64> = (0..4).map(|i| (x_idx / 3u64.pow(i)) % 3).collect();
                let via_stages = l2.apply(&l1.apply(&x).unwrap()).unwrap();
                let via_product = composed.mul_vec(&x).unwrap();
                assert_eq!(via_stages, via_product);
            }
        }
    }
}
