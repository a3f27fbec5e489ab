//! Exact rational matrices and the small amount of linear algebra the rest
//! of the crate needs: products, ranks, kernels, inverses, Kronecker and
//! block-diagonal sums, and compound (minor) matrices for wedge powers.
//!
//! Everything is over `BigRational`; there is no floating point anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;

/// The scalar type used throughout the crate.
pub type Rat = BigRational;

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// `n` as an exact rational.
pub fn rati(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Column vector from a slice.
    pub fn column(v: &[Rat]) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rat::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.at(i, j).is_one()
                    } else {
                        self.at(i, j).is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self.at(i, j) + other.at(i, j))
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self.at(i, j) - other.at(i, j))
    }

    pub fn scaled(&self, c: &Rat) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.at(i, j) * c)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "dimension mismatch in matrix product"
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.at(i, j) + a * b;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for (j, entry) in v.iter().enumerate() {
                    if !entry.is_zero() {
                        acc += self.at(i, j) * entry;
                    }
                }
                acc
            })
            .collect()
    }

    /// Kronecker product; basis order is (i-major, j-minor) on both sides.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        Matrix::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            let (i1, i2) = (i / other.rows, i % other.rows);
            let (j1, j2) = (j / other.cols, j % other.cols);
            self.at(i1, j1) * other.at(i2, j2)
        })
    }

    pub fn direct_sum(&self, other: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.at(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m.set(self.rows + i, self.cols + j, other.at(i, j).clone());
            }
        }
        m
    }

    /// Stack matrices with equal column counts on top of each other.
    pub fn vstack(mats: &[Matrix]) -> Matrix {
        assert!(!mats.is_empty());
        let cols = mats[0].cols;
        assert!(mats.iter().all(|m| m.cols == cols));
        let rows = mats.iter().map(|m| m.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for m in mats {
            data.extend_from_slice(&m.data);
        }
        Matrix { rows, cols, data }
    }

    /// Rank by Gaussian elimination. Exact; terminates after `rank` pivots.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let pivot = (rank..m.rows).find(|&r| !m.at(r, col).is_zero());
            let Some(p) = pivot else { continue };
            m.swap_rows(rank, p);
            let inv = m.at(rank, col).recip();
            m.scale_row(rank, &inv);
            for r in 0..m.rows {
                if r != rank && !m.at(r, col).is_zero() {
                    let f = m.at(r, col).clone();
                    m.row_axpy(r, rank, &-f);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Basis of the right kernel, as vectors of length `cols`.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let (rref, pivots) = self.rref();
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![Rat::zero(); self.cols];
            v[free] = Rat::one();
            for &(r, c) in &pivots {
                v[c] = -rref.at(r, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Reduced row echelon form together with the (row, col) pivot list.
    fn rref(&self) -> (Matrix, Vec<(usize, usize)>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.at(i, col).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.at(r, col).recip();
            m.scale_row(r, &inv);
            for i in 0..m.rows {
                if i != r && !m.at(i, col).is_zero() {
                    let f = m.at(i, col).clone();
                    m.row_axpy(i, r, &-f);
                }
            }
            pivots.push((r, col));
            r += 1;
        }
        (m, pivots)
    }

    /// Solve `self * x = b` exactly. `None` when inconsistent.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.rows, b.len());
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for (i, rhs) in b.iter().enumerate() {
            for j in 0..self.cols {
                aug.set(i, j, self.at(i, j).clone());
            }
            aug.set(i, self.cols, rhs.clone());
        }
        let (rref, pivots) = aug.rref();
        // Inconsistent iff a pivot lands in the augmented column.
        if pivots.iter().any(|&(_, c)| c == self.cols) {
            return None;
        }
        let mut x = vec![Rat::zero(); self.cols];
        for &(r, c) in &pivots {
            x[c] = rref.at(r, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.at(i, j).clone());
            }
            aug.set(i, n + i, Rat::one());
        }
        let (rref, pivots) = aug.rref();
        if pivots.len() != n || pivots.iter().any(|&(_, c)| c >= n) {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| rref.at(i, n + j).clone()))
    }

    pub fn trace(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let mut t = Rat::zero();
        for i in 0..self.rows {
            t += self.at(i, i);
        }
        t
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, r: usize, c: &Rat) {
        for j in 0..self.cols {
            let v = self.at(r, j) * c;
            self.set(r, j, v);
        }
    }

    /// row[dst] += c * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, c: &Rat) {
        for j in 0..self.cols {
            if !self.at(src, j).is_zero() {
                let v = self.at(dst, j) + c * self.at(src, j);
                self.set(dst, j, v);
            }
        }
    }

    /// `p`-th compound matrix: entry (`S`, `T`) is the minor with rows `S`
    /// and columns `T`, subsets enumerated in lexicographic order. This is
    /// the matrix of the induced map on `p`-th wedge powers.
    pub fn wedge(&self, p: usize) -> Matrix {
        match self.try_as_i64() {
            Some(ints) => {
                let c = compound(&ints, self.rows, self.cols, p);
                Matrix {
                    rows: c.rows,
                    cols: c.cols,
                    data: c.data.into_iter().map(rati).collect(),
                }
            }
            None => {
                let c = compound(&self.data, self.rows, self.cols, p);
                Matrix {
                    rows: c.rows,
                    cols: c.cols,
                    data: c.data,
                }
            }
        }
    }

    pub(crate) fn try_as_i64(&self) -> Option<Vec<i64>> {
        self.data
            .iter()
            .map(|r| {
                if r.is_integer() {
                    r.to_integer().to_i64()
                } else {
                    None
                }
            })
            .collect()
    }
}

pub(crate) struct Compound<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

/// All `p`-minors of an `m x n` array for every `p` in `0..=pmax`, built
/// level by level with Laplace expansion along the last chosen column.
/// Works for any exact scalar.
pub(crate) fn compound_levels<T>(data: &[T], m: usize, n: usize, pmax: usize) -> Vec<Compound<T>>
where
    T: Clone
        + Zero
        + One
        + std::ops::Add<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Sub<Output = T>,
{
    assert_eq!(data.len(), m * n);
    let mut levels = vec![Compound {
        rows: 1,
        cols: 1,
        data: vec![T::one()],
    }];
    let mut prev_rows = subsets_lex(m, 0);
    let mut prev_cols = subsets_lex(n, 0);
    for level in 1..=pmax {
        let cur_rows = subsets_lex(m, level);
        let cur_cols = subsets_lex(n, level);
        let prev = &levels[level - 1];
        let prev_row_index: HashMap<&[usize], usize> = prev_rows
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let prev_col_index: HashMap<&[usize], usize> = prev_cols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let mut cur = vec![T::zero(); cur_rows.len() * cur_cols.len()];
        for (ti, t) in cur_cols.iter().enumerate() {
            let t_last = *t.last().unwrap();
            let t_rest = &t[..level - 1];
            let tj = prev_col_index[t_rest];
            for (si, s) in cur_rows.iter().enumerate() {
                let mut acc = T::zero();
                let mut rest: Vec<usize> = Vec::with_capacity(level - 1);
                for (pos, &r) in s.iter().enumerate() {
                    rest.clear();
                    rest.extend(s.iter().copied().filter(|&x| x != r));
                    let sj = prev_row_index[rest.as_slice()];
                    let term =
                        data[r * n + t_last].clone() * prev.data[sj * prev.cols + tj].clone();
                    // sign (-1)^{(level-1)+pos} from expanding along the last column
                    if (level - 1 + pos) % 2 == 0 {
                        acc = acc + term;
                    } else {
                        acc = acc - term;
                    }
                }
                cur[si * cur_cols.len() + ti] = acc;
            }
        }
        levels.push(Compound {
            rows: cur_rows.len(),
            cols: cur_cols.len(),
            data: cur,
        });
        prev_rows = cur_rows;
        prev_cols = cur_cols;
    }
    levels
}

/// The single level-`p` compound matrix.
pub(crate) fn compound<T>(data: &[T], m: usize, n: usize, p: usize) -> Compound<T>
where
    T: Clone
        + Zero
        + One
        + std::ops::Add<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Sub<Output = T>,
{
    compound_levels(data, m, n, p).pop().unwrap()
}

/// Precomputed Laplace-expansion schedule for all minor levels of a square
/// `dim x dim` matrix. Building the schedule once and replaying it per
/// matrix avoids re-deriving the subset bookkeeping inside hot loops.
pub(crate) struct WedgePlan {
    dim: usize,
    levels: Vec<WedgePlanLevel>,
}

struct WedgePlanLevel {
    rows: usize,
    cols: usize,
    /// Per column subset: (last point of T, index of T minus its last point
    /// at the previous level).
    col_info: Vec<(usize, usize)>,
    /// Per row subset: the Laplace terms (point r, index of S minus r at
    /// the previous level, negate?).
    row_terms: Vec<Vec<(usize, usize, bool)>>,
}

impl WedgePlan {
    pub fn new(dim: usize, pmax: usize) -> Self {
        let mut levels = Vec::new();
        let mut prev_sets = subsets_lex(dim, 0);
        for level in 1..=pmax.min(dim) {
            let cur_sets = subsets_lex(dim, level);
            let prev_index: HashMap<&[usize], usize> = prev_sets
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_slice(), i))
                .collect();
            let col_info = cur_sets
                .iter()
                .map(|t| {
                    let last = *t.last().unwrap();
                    (last, prev_index[&t[..level - 1]])
                })
                .collect();
            let row_terms = cur_sets
                .iter()
                .map(|s| {
                    s.iter()
                        .enumerate()
                        .map(|(pos, &r)| {
                            let rest: Vec<usize> = s.iter().copied().filter(|&x| x != r).collect();
                            (r, prev_index[rest.as_slice()], (level - 1 + pos) % 2 != 0)
                        })
                        .collect()
                })
                .collect();
            levels.push(WedgePlanLevel {
                rows: cur_sets.len(),
                cols: cur_sets.len(),
                col_info,
                row_terms,
            });
            prev_sets = cur_sets;
        }
        WedgePlan { dim, levels }
    }

    /// All minor levels `0..=pmax` of `data` (row-major `dim x dim`).
    pub fn run_i64(&self, data: &[i64]) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = vec![vec![1]];
        let mut prev_cols = 1usize;
        for level in &self.levels {
            let prev = out.last().unwrap();
            let mut cur = vec![0i64; level.rows * level.cols];
            for (ti, &(t_last, tj)) in level.col_info.iter().enumerate() {
                for (si, terms) in level.row_terms.iter().enumerate() {
                    let mut acc = 0i64;
                    for &(r, sj, neg) in terms {
                        let term = data[r * self.dim + t_last] * prev[sj * prev_cols + tj];
                        if neg {
                            acc -= term;
                        } else {
                            acc += term;
                        }
                    }
                    cur[si * level.cols + ti] = acc;
                }
            }
            prev_cols = level.cols;
            out.push(cur);
        }
        out
    }
}

/// All `k`-element subsets of `{0, .., n-1}` in lexicographic order.
pub fn subsets_lex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Binomial coefficient as usize (small arguments only).
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (n - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as usize
}
