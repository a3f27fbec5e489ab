//! Subsets of `{1, .., n}`, permutations in one-line form, and the two
//! sign functions attached to them: the sign of a permutation restricted to
//! a subset, and the sign counting members of a subset below a point.
//! Also the coset and orbit representative enumerations built from them.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignError {
    #[error("images {images:?} are not a bijection of 1..={n}")]
    NotABijection { n: usize, images: Vec<usize> },
    #[error("point {point} outside ground set 1..={n}")]
    OutOfRange { n: usize, point: usize },
    #[error("subset over 1..={subset_n} used with ground set 1..={n}")]
    GroundSetMismatch { n: usize, subset_n: usize },
    #[error("{point} is not a member of {members:?}")]
    NotAMember { point: usize, members: Vec<usize> },
    #[error("empty subset not allowed here")]
    EmptySubset,
    #[error("orbit representative [{i}] ∪ [{lo}, {hi}] exceeds ground set 1..={n}")]
    RepresentativeOutOfRange {
        i: usize,
        lo: usize,
        hi: usize,
        n: usize,
    },
    #[error("length mismatch: permutation on {perm} slots, {given} degrees given")]
    LengthMismatch { perm: usize, given: usize },
}

/// A permutation of `{1, .., n}` in one-line form: `images[i-1] = σ(i)`.
///
/// Composition applies the right factor first: `(σ ∘ τ)(x) = σ(τ(x))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self, SignError> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(SignError::NotABijection { n, images });
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    /// The transposition (a b) in S_n.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(a - 1, b - 1);
        Permutation { images }
    }

    /// The cycle a_1 -> a_2 -> ... -> a_k -> a_1 in S_n.
    pub fn cycle(n: usize, points: &[usize]) -> Self {
        let mut images: Vec<usize> = (1..=n).collect();
        for w in points.windows(2) {
            images[w[0] - 1] = w[1];
        }
        if points.len() > 1 {
            images[points[points.len() - 1] - 1] = points[0];
        }
        Permutation { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.n(), other.n());
        Permutation {
            images: (1..=self.n()).map(|i| self.apply(other.apply(i))).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v - 1] = i + 1;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn sign(&self) -> i64 {
        let mut inv = 0usize;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                if self.images[i] > self.images[j] {
                    inv += 1;
                }
            }
        }
        if inv.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Factor into adjacent transpositions `(i, i+1)`, rightmost applied
    /// first; the product of the returned generators equals `self`.
    pub fn adjacent_word(&self) -> Vec<usize> {
        // Sort the one-line form back to the identity, recording swaps.
        let mut img = self.images.clone();
        let mut word = Vec::new();
        for target in (1..=self.n()).rev() {
            let pos = img.iter().position(|&v| v == target).unwrap();
            for p in pos..target - 1 {
                img.swap(p, p + 1);
                word.push(p + 1); // generator (p+1, p+2), 1-based
            }
        }
        // word currently transforms self into identity by LEFT multiplication
        // with adjacent transpositions; reversing yields a factorization.
        word.reverse();
        word
    }

    /// All n! permutations, ordered so consecutive entries differ by one
    /// adjacent transposition applied on the right (plain changes).
    pub fn plain_changes(n: usize) -> Vec<(Permutation, Option<usize>)> {
        // Steinhaus-Johnson-Trotter with directions.
        let mut perm: Vec<usize> = (1..=n).collect();
        let mut dir: Vec<i8> = vec![-1; n]; // -1 = left, +1 = right
        let mut out = Vec::with_capacity((1..=n).product());
        out.push((
            Permutation {
                images: perm.clone(),
            },
            None,
        ));
        loop {
            // find largest mobile element
            let mut mobile: Option<usize> = None; // position
            for i in 0..n {
                let j = i as i64 + dir[i] as i64;
                if j < 0 || j >= n as i64 {
                    continue;
                }
                if perm[i] > perm[j as usize]
                    && (mobile.is_none() || perm[i] > perm[mobile.unwrap()])
                {
                    mobile = Some(i);
                }
            }
            let Some(i) = mobile else { break };
            let j = (i as i64 + dir[i] as i64) as usize;
            perm.swap(i, j);
            dir.swap(i, j);
            let swapped_pos = i.min(j); // generator (swapped_pos+1, swapped_pos+2)
            let moved = perm[j];
            for (k, &v) in perm.iter().enumerate() {
                if v > moved {
                    dir[k] = -dir[k];
                }
            }
            out.push((
                Permutation {
                    images: perm.clone(),
                },
                Some(swapped_pos + 1),
            ));
        }
        out
    }

    /// All n! permutations (plain-changes order, without the swap trace).
    pub fn all(n: usize) -> Vec<Permutation> {
        Permutation::plain_changes(n)
            .into_iter()
            .map(|(p, _)| p)
            .collect()
    }
}

/// A subset of `{1, .., n}` stored strictly ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset {
    n: usize,
    members: Vec<usize>,
}

impl Subset {
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self, SignError> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            if m == 0 || m > n {
                return Err(SignError::OutOfRange { n, point: m });
            }
        }
        Ok(Subset { n, members })
    }

    pub fn full(n: usize) -> Self {
        Subset {
            n,
            members: (1..=n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, m: usize) -> bool {
        self.members.binary_search(&m).is_ok()
    }

    pub fn complement(&self) -> Subset {
        Subset {
            n: self.n,
            members: (1..=self.n).filter(|m| !self.contains(*m)).collect(),
        }
    }

    pub fn union_with(&self, m: usize) -> Subset {
        let mut members = self.members.clone();
        if let Err(pos) = members.binary_search(&m) {
            members.insert(pos, m);
        }
        Subset { n: self.n, members }
    }

    pub fn without(&self, m: usize) -> Subset {
        Subset {
            n: self.n,
            members: self.members.iter().copied().filter(|&x| x != m).collect(),
        }
    }

    /// Image σ(M) as a subset.
    pub fn image_under(&self, sigma: &Permutation) -> Subset {
        Subset::new(self.n, self.members.iter().map(|&m| sigma.apply(m))).unwrap()
    }

    /// All subsets of `{1, .., n}` with `k` elements, lexicographic.
    pub fn all_of_size(n: usize, k: usize) -> Vec<Subset> {
        crate::linalg::subsets_lex(n, k)
            .into_iter()
            .map(|s| Subset {
                n,
                members: s.into_iter().map(|x| x + 1).collect(),
            })
            .collect()
    }
}

impl std::fmt::Display for Subset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{{{}}}",
            self.members
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// Sign of the permutation `u_{σ(M)->M} ∘ σ|_M`: the number of inversions
/// of σ among pairs of `M`, as a sign.
pub fn eps_sigma_m(sigma: &Permutation, m: &Subset) -> Result<i64, SignError> {
    if m.n() != sigma.n() {
        return Err(SignError::GroundSetMismatch {
            n: sigma.n(),
            subset_n: m.n(),
        });
    }
    let mem = m.members();
    let mut inv = 0usize;
    for i in 0..mem.len() {
        for j in i + 1..mem.len() {
            if sigma.apply(mem[i]) > sigma.apply(mem[j]) {
                inv += 1;
            }
        }
    }
    Ok(if inv.is_multiple_of(2) { 1 } else { -1 })
}

/// `(-1)^{#{j in M | j < m}}` for a member `m` of `M`.
pub fn eps_point_in_set(m: usize, set: &Subset) -> Result<i64, SignError> {
    if !set.contains(m) {
        return Err(SignError::NotAMember {
            point: m,
            members: set.members().to_vec(),
        });
    }
    let below = set.members().iter().filter(|&&j| j < m).count();
    Ok(if below.is_multiple_of(2) { 1 } else { -1 })
}

/// One representative per coset of S_I x S_{I-complement} in S_n: for each
/// subset J of the same size, the permutation mapping I to J increasingly
/// and the complement to the complement increasingly.
pub fn coset_reps(n: usize, i_set: &Subset) -> Result<Vec<Permutation>, SignError> {
    if i_set.is_empty() {
        return Err(SignError::EmptySubset);
    }
    if i_set.n() != n {
        return Err(SignError::GroundSetMismatch {
            n,
            subset_n: i_set.n(),
        });
    }
    let k = i_set.len();
    let comp = i_set.complement();
    let mut reps = Vec::new();
    for j_set in Subset::all_of_size(n, k) {
        let j_comp = j_set.complement();
        let mut images = vec![0usize; n];
        for (src, dst) in i_set.members().iter().zip(j_set.members()) {
            images[src - 1] = *dst;
        }
        for (src, dst) in comp.members().iter().zip(j_comp.members()) {
            images[src - 1] = *dst;
        }
        reps.push(Permutation::from_images(images)?);
    }
    Ok(reps)
}

/// Canonical representatives `[i] ∪ [k+1, k+p-i]`, `i = 0..min(k,p)`, of
/// the orbits of p-subsets of `[n]` under S_{[k]} x S_{[k]-complement}.
pub fn orbit_reps(k: usize, p: usize, n: usize) -> Result<Vec<Subset>, SignError> {
    let mut reps = Vec::new();
    for i in 0..=k.min(p) {
        let hi = k + p - i;
        if hi > n {
            return Err(SignError::RepresentativeOutOfRange {
                i,
                lo: k + 1,
                hi,
                n,
            });
        }
        let members = (1..=i).chain(k + 1..=hi);
        reps.push(Subset::new(n, members)?);
    }
    Ok(reps)
}
