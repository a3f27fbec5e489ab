//! Rank-free sign model of the equivariant complex attached to a sheaf on
//! the n-th product of a surface: terms indexed by subsets of `[n]`,
//! differentials by point-insertion signs, and the group linearization by
//! restricted permutation signs. The module checks, purely at the level of
//! these signs, that the differential squares to zero and commutes with
//! the linearization.

use crate::signs::{eps_point_in_set, eps_sigma_m, Permutation, SignError, Subset};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("need n >= 2, got {n}")]
    NTooSmall { n: usize },
    #[error("degree {p} out of range 0..={max}")]
    DegreeOutOfRange { p: usize, max: usize },
    #[error(transparent)]
    Sign(#[from] SignError),
}

/// The subset index of the degree-`p` term: all `I ⊆ [n]` with `|I| = p+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexIndex {
    pub n: usize,
    pub p: usize,
    pub subsets: Vec<Subset>,
}

impl ComplexIndex {
    pub fn new(n: usize, p: usize) -> Result<Self, ComplexError> {
        if n < 2 {
            return Err(ComplexError::NTooSmall { n });
        }
        if p > n - 1 {
            return Err(ComplexError::DegreeOutOfRange { p, max: n - 1 });
        }
        Ok(ComplexIndex {
            n,
            p,
            subsets: Subset::all_of_size(n, p + 1),
        })
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn position(&self, s: &Subset) -> Option<usize> {
        self.subsets.iter().position(|x| x == s)
    }
}

/// A matrix with entries in {-1, 0, +1} indexed by two subset families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    pub rows: ComplexIndex,
    pub cols: ComplexIndex,
    data: Vec<i64>,
}

impl SignMatrix {
    fn zeros(rows: ComplexIndex, cols: ComplexIndex) -> Self {
        let data = vec![0; rows.len() * cols.len()];
        SignMatrix { rows, cols, data }
    }

    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols.len() + j]
    }

    fn set(&mut self, i: usize, j: usize, v: i64) {
        let cols = self.cols.len();
        self.data[i * cols + j] = v;
    }

    pub fn mul(&self, other: &SignMatrix) -> Vec<i64> {
        assert_eq!(self.cols.len(), other.rows.len());
        let (r, k, c) = (self.rows.len(), self.cols.len(), other.cols.len());
        let mut out = vec![0i64; r * c];
        for i in 0..r {
            for m in 0..k {
                let a = self.at(i, m);
                if a == 0 {
                    continue;
                }
                for j in 0..c {
                    out[i * c + j] += a * other.at(m, j);
                }
            }
        }
        out
    }
}

/// Differential from degree `p` to `p+1`: entry `(J, I)` is the insertion
/// sign of the added point when `J = I ∪ {i}`, zero otherwise.
pub fn differential(n: usize, p: usize) -> Result<SignMatrix, ComplexError> {
    if n < 2 {
        return Err(ComplexError::NTooSmall { n });
    }
    if p + 1 > n - 1 {
        return Err(ComplexError::DegreeOutOfRange {
            p,
            max: n.saturating_sub(2),
        });
    }
    let cols = ComplexIndex::new(n, p)?;
    let rows = ComplexIndex::new(n, p + 1)?;
    let mut m = SignMatrix::zeros(rows, cols);
    for (ji, j_set) in m.rows.subsets.clone().iter().enumerate() {
        for &i in j_set.members() {
            let smaller = j_set.without(i);
            let ii = m.cols.position(&smaller).expect("subset of the right size");
            m.set(ji, ii, eps_point_in_set(i, j_set)?);
        }
    }
    Ok(m)
}

/// Linearization of the degree-`p` term by `σ`: entry `(I, σ^{-1}(I))` is
/// the restricted permutation sign of σ on σ^{-1}(I).
pub fn linearization(n: usize, p: usize, sigma: &Permutation) -> Result<SignMatrix, ComplexError> {
    let idx = ComplexIndex::new(n, p)?;
    let mut m = SignMatrix::zeros(idx.clone(), idx);
    for (ii, i_set) in m.rows.subsets.clone().iter().enumerate() {
        let pre = i_set.image_under(&sigma.inverse());
        let jj = m.cols.position(&pre).expect("images stay in the family");
        m.set(ii, jj, eps_sigma_m(sigma, &pre)?);
    }
    Ok(m)
}

/// Result of one of the exhaustive sign checks.
#[derive(Debug, Clone, Default)]
pub struct SignReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl SignReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for SignReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed() {
            write!(f, "ok ({} identities checked)", self.checked)
        } else {
            write!(
                f,
                "FAILED ({} violations): {}",
                self.violations.len(),
                self.violations.join("; ")
            )
        }
    }
}

/// Checks `d ∘ d = 0` in two ways: as matrix products of consecutive
/// differentials, and as the two-term insertion-sign identity
/// `ε_{i,J} ε_{j,J\{i}} + ε_{j,J} ε_{i,J\{j}} = 0` over all `J` and pairs.
pub fn check_d_squared(n: usize) -> Result<SignReport, ComplexError> {
    if n < 2 {
        return Err(ComplexError::NTooSmall { n });
    }
    let mut report = SignReport::default();
    for p in 0..n.saturating_sub(2) {
        let d0 = differential(n, p)?;
        let d1 = differential(n, p + 1)?;
        let product = d1.mul(&d0);
        report.checked += product.len();
        if product.iter().any(|&v| v != 0) {
            report
                .violations
                .push(format!("d^{} ∘ d^{} != 0 at n={}", p + 1, p, n));
        }
    }
    for size in 2..=n {
        for j_set in Subset::all_of_size(n, size) {
            for &i in j_set.members() {
                for &j in j_set.members() {
                    if i == j {
                        continue;
                    }
                    let lhs = eps_point_in_set(i, &j_set)?
                        * eps_point_in_set(j, &j_set.without(i))?
                        + eps_point_in_set(j, &j_set)? * eps_point_in_set(i, &j_set.without(j))?;
                    report.checked += 1;
                    if lhs != 0 {
                        report.violations.push(format!("J={j_set}, i={i}, j={j}"));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Checks that the linearization commutes with the differential for one
/// permutation: the sign identity
/// `ε_{i,J} ε_{σ,I} = ε_{σ,J} ε_{σ(i),σ(J)}` for all `I ⊂ J = I ∪ {i}`,
/// and the matrix identity `d ∘ λ_σ = λ_σ ∘ d` in every degree.
pub fn check_equivariance(n: usize, sigma: &Permutation) -> Result<SignReport, ComplexError> {
    if n < 2 {
        return Err(ComplexError::NTooSmall { n });
    }
    if sigma.n() != n {
        return Err(ComplexError::Sign(SignError::GroundSetMismatch {
            n,
            subset_n: sigma.n(),
        }));
    }
    let mut report = SignReport::default();
    for size in 2..=n {
        for j_set in Subset::all_of_size(n, size) {
            for &i in j_set.members() {
                let i_sub = j_set.without(i);
                let lhs = eps_point_in_set(i, &j_set)? * eps_sigma_m(sigma, &i_sub)?;
                let rhs = eps_sigma_m(sigma, &j_set)?
                    * eps_point_in_set(sigma.apply(i), &j_set.image_under(sigma))?;
                report.checked += 1;
                if lhs != rhs {
                    report
                        .violations
                        .push(format!("I={i_sub}, i={i}, σ={:?}", sigma.images()));
                }
            }
        }
    }
    for p in 0..n - 1 {
        if p + 1 > n - 1 {
            break;
        }
        let d = differential(n, p)?;
        let lam_p = linearization(n, p, sigma)?;
        let lam_p1 = linearization(n, p + 1, sigma)?;
        let lhs = d.mul(&lam_p);
        let rhs = lam_p1.mul(&d);
        report.checked += lhs.len();
        if lhs != rhs {
            report
                .violations
                .push(format!("matrix commutation fails at degree {p}"));
        }
    }
    Ok(report)
}

/// Alternating sum of the term counts; the subset model forces this to be
/// `1` for every `n` (inclusion-exclusion over nonempty subsets).
pub fn euler_characteristic_of_index(n: usize) -> i64 {
    let mut acc = 0i64;
    for p in 0..n {
        let c = crate::linalg::binomial(n, p + 1) as i64;
        if p % 2 == 0 {
            acc += c;
        } else {
            acc -= c;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differential_n2_p0() {
        let d = differential(2, 0).unwrap();
        // columns {1}, {2}; row {1,2}. Column {1} inserts the point 2 and
        // carries ε_{2,{1,2}} = -1; column {2} inserts 1 and carries
        // ε_{1,{1,2}} = +1.
        assert_eq!(d.rows.len(), 1);
        assert_eq!(d.cols.len(), 2);
        assert_eq!(d.at(0, 0), -1);
        assert_eq!(d.at(0, 1), 1);
    }

    #[test]
    fn differential_n3_structure() {
        let d = differential(3, 1).unwrap();
        // each column (|I| = 2) has a single entry
        for j in 0..d.cols.len() {
            let nonzero = (0..d.rows.len()).filter(|&i| d.at(i, j) != 0).count();
            assert_eq!(nonzero, 1);
        }
        // the row {1,2,3} collects +1, -1, +1 from dropping 1, 2, 3
        let row = 0;
        let col_of = |members: &[usize]| {
            d.cols
                .position(&Subset::new(3, members.iter().copied()).unwrap())
                .unwrap()
        };
        assert_eq!(d.at(row, col_of(&[2, 3])), 1);
        assert_eq!(d.at(row, col_of(&[1, 3])), -1);
        assert_eq!(d.at(row, col_of(&[1, 2])), 1);
    }

    #[test]
    fn differential_range_errors() {
        assert!(differential(4, 3).is_err());
        assert!(differential(1, 0).is_err());
    }

    #[test]
    fn d_squared_small() {
        for n in 2..=6 {
            let report = check_d_squared(n).unwrap();
            assert!(report.passed(), "n={n}: {report}");
        }
    }

    #[test]
    fn single_sign_identity_instance() {
        // J = {1,2,3}, i = 1, j = 2: (+1)(+1) + (-1)(+1) = 0
        let j_set = Subset::new(3, [1, 2, 3]).unwrap();
        let a = eps_point_in_set(1, &j_set).unwrap();
        let b = eps_point_in_set(2, &j_set.without(1)).unwrap();
        let c = eps_point_in_set(2, &j_set).unwrap();
        let d = eps_point_in_set(1, &j_set.without(2)).unwrap();
        assert_eq!((a, b, c, d), (1, 1, -1, 1));
        assert_eq!(a * b + c * d, 0);
    }

    #[test]
    fn equivariance_exhaustive_n3() {
        for sigma in Permutation::all(3) {
            let report = check_equivariance(3, &sigma).unwrap();
            assert!(report.passed(), "σ={:?}: {report}", sigma.images());
        }
    }

    #[test]
    fn equivariance_identity_trivially_passes() {
        let id = Permutation::identity(5);
        assert!(check_equivariance(5, &id).unwrap().passed());
    }

    #[test]
    fn euler_characteristic_is_one() {
        for n in 2..=8 {
            assert_eq!(euler_characteristic_of_index(n), 1, "n={n}");
        }
    }
}
