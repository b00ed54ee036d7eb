//! Block-partitioned dense complex matrices.
//!
//! A [`BlockSpec`] slices a square matrix of size `α + m·(k + N)` into a
//! corner block of size `α` followed by `m` copies, each made of an active
//! block of size `k` and a tail of size `N`:
//!
//! ```text
//! | corner | active_1 | tail_1 | active_2 | tail_2 | … |
//! ```
//!
//! The small group `U(α + mk)` lives on the corner and active blocks, and
//! `K_N` acts diagonally by one `(k+N)`-matrix repeated on every copy.

mod io;
mod norm;
mod perm;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CosetError, Result};
use crate::scalar::{cmatmul, cone, czero, to_complex, CMat, RMat, Real};

pub use io::MatrixFile;
pub use norm::{is_unitary, operator_norm};
pub use perm::PermutationWord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockSpec {
    pub alpha: usize,
    pub k: usize,
    #[serde(rename = "N")]
    pub n_tail: usize,
    pub m: usize,
}

impl BlockSpec {
    pub fn new(alpha: usize, k: usize, n_tail: usize, m: usize) -> Result<Self> {
        if k == 0 {
            return Err(CosetError::InvalidSpec("k must be at least 1".into()));
        }
        if m == 0 {
            return Err(CosetError::InvalidSpec("m must be at least 1".into()));
        }
        Ok(Self {
            alpha,
            k,
            n_tail,
            m,
        })
    }

    /// The `N = 0` spec of the small group `U(α + mk)` itself.
    pub fn small(&self) -> Self {
        Self {
            n_tail: 0,
            ..*self
        }
    }

    pub fn with_tail(&self, n_tail: usize) -> Self {
        Self { n_tail, ..*self }
    }

    /// `α + m·(k + N)`.
    pub fn dim(&self) -> usize {
        self.alpha + self.m * self.copy_len()
    }

    /// `k + N`, the size of the `K_N` block.
    pub fn copy_len(&self) -> usize {
        self.k + self.n_tail
    }

    /// `α + m·k`.
    pub fn small_dim(&self) -> usize {
        self.alpha + self.m * self.k
    }

    pub fn copy_start(&self, copy: usize) -> usize {
        self.alpha + copy * self.copy_len()
    }

    pub fn range(&self, block: BlockName) -> Result<Range<usize>> {
        match block {
            BlockName::Corner => Ok(0..self.alpha),
            BlockName::Active(i) if (1..=self.m).contains(&i) => {
                let s = self.copy_start(i - 1);
                Ok(s..s + self.k)
            }
            BlockName::Tail(i) if (1..=self.m).contains(&i) => {
                let s = self.copy_start(i - 1) + self.k;
                Ok(s..s + self.n_tail)
            }
            other => Err(CosetError::UnknownBlock(other.to_string())),
        }
    }

    /// Position in the full matrix of coordinate `i` of the small group.
    pub fn small_to_full(&self, i: usize) -> usize {
        if i < self.alpha {
            i
        } else {
            let j = i - self.alpha;
            self.copy_start(j / self.k) + j % self.k
        }
    }

    pub fn require_tail_fits(&self) -> Result<()> {
        if self.n_tail < self.k {
            Err(CosetError::TailTooShort {
                k: self.k,
                n_tail: self.n_tail,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for BlockSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={} k={} N={} m={}",
            self.alpha, self.k, self.n_tail, self.m
        )
    }
}

/// Named block of the partition. Copies are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockName {
    Corner,
    Active(usize),
    Tail(usize),
}

impl fmt::Display for BlockName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockName::Corner => f.write_str("corner"),
            BlockName::Active(i) => write!(f, "active_{i}"),
            BlockName::Tail(i) => write!(f, "tail_{i}"),
        }
    }
}

impl FromStr for BlockName {
    type Err = CosetError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "corner" {
            return Ok(BlockName::Corner);
        }
        let unknown = || CosetError::UnknownBlock(s.to_string());
        let (kind, idx) = s.split_once('_').ok_or_else(unknown)?;
        let idx: usize = idx.parse().map_err(|_| unknown())?;
        if idx == 0 {
            return Err(unknown());
        }
        match kind {
            "active" => Ok(BlockName::Active(idx)),
            "tail" => Ok(BlockName::Tail(idx)),
            _ => Err(unknown()),
        }
    }
}

/// Dense complex square matrix with an optional block partition.
///
/// When `permutation` is present the entries are exactly the corresponding
/// 0-1 matrix, and products of two such matrices are composed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix<T: Real> {
    entries: CMat<T>,
    spec: Option<BlockSpec>,
    permutation: Option<PermutationWord>,
}

impl<T: Real> BlockMatrix<T> {
    pub fn from_entries(entries: CMat<T>, spec: Option<BlockSpec>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(CosetError::DimensionMismatch {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        check_spec(entries.nrows(), spec)?;
        Ok(Self {
            entries,
            spec,
            permutation: None,
        })
    }

    pub fn from_real(entries: &RMat<T>, spec: Option<BlockSpec>) -> Result<Self> {
        Self::from_entries(to_complex(entries), spec)
    }

    pub fn from_permutation(perm: PermutationWord, spec: Option<BlockSpec>) -> Result<Self> {
        check_spec(perm.degree(), spec)?;
        Ok(Self {
            entries: perm.to_matrix(),
            spec,
            permutation: Some(perm),
        })
    }

    pub fn identity(dim: usize, spec: Option<BlockSpec>) -> Result<Self> {
        Self::from_permutation(PermutationWord::identity(dim), spec)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat<T> {
        &self.entries
    }

    pub fn into_entries(self) -> CMat<T> {
        self.entries
    }

    pub fn spec(&self) -> Option<BlockSpec> {
        self.spec
    }

    pub fn exact_permutation(&self) -> Option<&PermutationWord> {
        self.permutation.as_ref()
    }

    pub fn with_spec(mut self, spec: Option<BlockSpec>) -> Result<Self> {
        check_spec(self.dim(), spec)?;
        self.spec = spec;
        Ok(self)
    }

    /// Recognizes exact 0-1 permutation entries and records them.
    pub fn detect_permutation(mut self) -> Self {
        if self.permutation.is_none() {
            self.permutation = PermutationWord::from_matrix(&self.entries);
        }
        self
    }

    /// Matrix product; exact when both factors are permutations. The result
    /// keeps `self`'s spec.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(CosetError::DimensionMismatch {
                expected: self.dim(),
                actual: rhs.dim(),
            });
        }
        let spec = self.spec.or(rhs.spec);
        match (&self.permutation, &rhs.permutation) {
            (Some(a), Some(b)) => Self::from_permutation(a.compose(b), spec),
            _ => Ok(Self {
                entries: cmatmul(&self.entries, &rhs.entries),
                spec,
                permutation: None,
            }),
        }
    }

    /// Conjugate transpose, which is the inverse for unitary matrices.
    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            spec: self.spec,
            permutation: self.permutation.as_ref().map(PermutationWord::inverse),
        }
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        is_unitary(&self.entries, tol)
    }

    pub fn block(&self, row: BlockName, col: BlockName) -> Result<CMat<T>> {
        block(self, row, col)
    }
}

fn check_spec(dim: usize, spec: Option<BlockSpec>) -> Result<()> {
    match spec {
        Some(s) if s.dim() != dim => Err(CosetError::DimensionMismatch {
            expected: s.dim(),
            actual: dim,
        }),
        _ => Ok(()),
    }
}

/// Copy of the sub-matrix addressed by two block names.
pub fn block<T: Real>(m: &BlockMatrix<T>, row: BlockName, col: BlockName) -> Result<CMat<T>> {
    let spec = m.spec.ok_or(CosetError::MissingSpec)?;
    let rows = spec.range(row)?;
    let cols = spec.range(col)?;
    Ok(m
        .entries
        .view((rows.start, cols.start), (rows.len(), cols.len()))
        .clone_owned())
}

/// Places `g ∈ U(α + mk)` into `G_N`, with `1_N` on every tail.
pub fn embed<T: Real>(g: &BlockMatrix<T>, spec: BlockSpec) -> Result<BlockMatrix<T>> {
    let small = spec.small_dim();
    if g.dim() != small {
        return Err(CosetError::DimensionMismatch {
            expected: small,
            actual: g.dim(),
        });
    }
    if let Some(p) = &g.permutation {
        return BlockMatrix::from_permutation(embed_permutation(p, spec), Some(spec));
    }
    let n = spec.dim();
    let mut out = CMat::<T>::identity(n, n);
    for j in 0..small {
        for i in 0..small {
            out[(spec.small_to_full(i), spec.small_to_full(j))] = g.entries[(i, j)];
        }
    }
    BlockMatrix::from_entries(out, Some(spec))
}

/// `diag(1_α, u, …, u)` with `m` copies of the `(k+N)`-matrix `u`.
pub fn embed_k<T: Real>(u: &BlockMatrix<T>, spec: BlockSpec) -> Result<BlockMatrix<T>> {
    let s = spec.copy_len();
    if u.dim() != s {
        return Err(CosetError::DimensionMismatch {
            expected: s,
            actual: u.dim(),
        });
    }
    if let Some(p) = &u.permutation {
        return BlockMatrix::from_permutation(diag_copy_permutation(p, spec), Some(spec));
    }
    BlockMatrix::from_entries(diag_copies(&u.entries, spec), Some(spec))
}

pub(crate) fn diag_copies<T: Real>(u: &CMat<T>, spec: BlockSpec) -> CMat<T> {
    let n = spec.dim();
    let s = spec.copy_len();
    let mut out = CMat::<T>::from_element(n, n, czero());
    for i in 0..spec.alpha {
        out[(i, i)] = cone();
    }
    for c in 0..spec.m {
        let o = spec.copy_start(c);
        out.view_mut((o, o), (s, s)).copy_from(u);
    }
    out
}

/// The block permutation `J_N`: inside every copy it swaps the active block
/// with the first `k` coordinates of the tail.
pub fn build_jn<T: Real>(spec: BlockSpec) -> Result<BlockMatrix<T>> {
    BlockMatrix::from_permutation(jn_permutation(spec)?, Some(spec))
}

pub fn embed_permutation(g: &PermutationWord, spec: BlockSpec) -> PermutationWord {
    assert_eq!(g.degree(), spec.small_dim(), "embed_permutation: degree");
    let mut images: Vec<usize> = (0..spec.dim()).collect();
    for i in 0..spec.small_dim() {
        images[spec.small_to_full(i)] = spec.small_to_full(g.apply(i));
    }
    PermutationWord::from_zero_based(images).expect("embedding preserves bijectivity")
}

/// `diag(1_α, u, …, u)` as a permutation of `{1..α+m(k+N)}`.
pub fn diag_copy_permutation(u: &PermutationWord, spec: BlockSpec) -> PermutationWord {
    let s = spec.copy_len();
    assert_eq!(u.degree(), s, "diag_copy_permutation: degree");
    let mut images: Vec<usize> = (0..spec.alpha).collect();
    for c in 0..spec.m {
        let o = spec.copy_start(c);
        images.extend((0..s).map(|j| o + u.apply(j)));
    }
    PermutationWord::from_zero_based(images).expect("diagonal copies form a bijection")
}

pub fn jn_permutation(spec: BlockSpec) -> Result<PermutationWord> {
    spec.require_tail_fits()?;
    let mut images: Vec<usize> = (0..spec.dim()).collect();
    for c in 0..spec.m {
        let o = spec.copy_start(c);
        for j in 0..spec.k {
            images.swap(o + j, o + spec.k + j);
        }
    }
    Ok(PermutationWord::from_zero_based(images).expect("swaps form a bijection"))
}
