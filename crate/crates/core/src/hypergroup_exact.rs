//! Exact structure constants `λ_{g,h}` for the symmetric families.
//!
//! `σ_g * σ_h` pushes the uniform measure on `K_N` forward through
//! `u ↦ g·D(u)·h`, where `D(u)` is the diagonal copy of `u ∈ S(k+N)`. The
//! double cosets of the resulting elements are found by exact membership
//! against representatives in order of first discovery.

use num_rational::Ratio;
use num_traits::{CheckedAdd, One};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::blockmat::{diag_copy_permutation, embed_permutation, BlockMatrix, PermutationWord};
use crate::cosets::{circ_n, CosetTarget, FamilyKind, GroupFamily};
use crate::error::{CosetError, Result};
use crate::geometry::sym_membership;

/// Exact probability.
pub type Probability = Ratio<i64>;

/// Default cap on `(k+N)!`.
pub const DEFAULT_BUDGET: u64 = 5040;

/// Permutations of `{0..n}` in lexicographic order of their image lists.
pub fn all_permutations(n: usize) -> impl Iterator<Item = PermutationWord> {
    let mut next: Option<Vec<usize>> = Some((0..n).collect());
    std::iter::from_fn(move || {
        let cur = next.take()?;
        next = next_lexicographic(&cur);
        Some(PermutationWord::from_zero_based(cur).expect("lexicographic step keeps a bijection"))
    })
}

fn next_lexicographic(p: &[usize]) -> Option<Vec<usize>> {
    let n = p.len();
    let i = (1..n).rev().find(|&i| p[i - 1] < p[i])? - 1;
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("a larger suffix element exists");
    let mut q = p.to_vec();
    q.swap(i, j);
    q[i + 1..].reverse();
    Some(q)
}

fn factorial_within(n: usize, budget: u64) -> Result<u64> {
    let mut f: u64 = 1;
    for i in 2..=n as u64 {
        f = match f.checked_mul(i) {
            Some(v) if v <= budget => v,
            _ => return Err(CosetError::BudgetExceeded { size: n, budget }),
        };
    }
    Ok(f)
}

fn serialize_ratio<S: Serializer>(p: &Probability, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", p.numer(), p.denom()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub representative: PermutationWord,
    #[serde(rename = "prob", serialize_with = "serialize_ratio")]
    pub probability: Probability,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDistribution {
    #[serde(skip)]
    pub family: GroupFamily,
    pub atoms: Vec<Atom>,
}

impl ExactDistribution {
    pub fn target(&self, atom: &Atom) -> CosetTarget<f64> {
        CosetTarget::new(
            BlockMatrix::from_permutation(atom.representative.clone(), None)
                .expect("atom representatives have the family degree"),
            self.family,
        )
        .expect("atom representatives have the family degree")
    }

    /// Index of the atom whose coset contains `x`.
    pub fn find(&self, x: &PermutationWord) -> Result<Option<usize>> {
        for (i, atom) in self.atoms.iter().enumerate() {
            if sym_membership(x, &self.target(atom))? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Probability of the coset containing `x` (zero if no atom matches).
    pub fn probability_of(&self, x: &PermutationWord) -> Result<Probability> {
        Ok(self
            .find(x)?
            .map_or_else(|| Ratio::from_integer(0), |i| self.atoms[i].probability))
    }

    /// `Σ p`, checked; equals 1 for every distribution built here.
    pub fn total(&self) -> Result<Probability> {
        self.atoms.iter().try_fold(Ratio::from_integer(0), |acc, a| {
            acc.checked_add(&a.probability).ok_or(CosetError::Overflow)
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }
}

/// Raw counts of `g·D(u)·h` per first-discovered coset.
struct Tally {
    reps: Vec<PermutationWord>,
    counts: Vec<u64>,
}

impl Tally {
    fn new() -> Self {
        Self {
            reps: Vec::new(),
            counts: Vec::new(),
        }
    }

    fn classify(&mut self, y: PermutationWord, family: GroupFamily, count: u64) -> Result<()> {
        for (i, rep) in self.reps.iter().enumerate() {
            let target = CosetTarget::<f64>::new(BlockMatrix::from_permutation(rep.clone(), None)?, family)?;
            if sym_membership(&y, &target)? {
                self.counts[i] += count;
                return Ok(());
            }
        }
        self.reps.push(y);
        self.counts.push(count);
        Ok(())
    }
}

/// Exact distribution of the double coset of `g·D(u)·h` for uniform `u`.
///
/// `g`, `h` are permutations of the `α + mk` small coordinates (or already of
/// full degree `α + m(k+N)`).
pub fn exact_convolution(
    g: &PermutationWord,
    h: &PermutationWord,
    family: &GroupFamily,
    budget: u64,
) -> Result<ExactDistribution> {
    if family.kind != FamilyKind::Symmetric {
        return Err(CosetError::FamilyMismatch(
            "exact enumeration needs the symmetric family".into(),
        ));
    }
    let spec = family.spec;
    let s = spec.copy_len();
    let total = factorial_within(s, budget)?;
    let lift = |p: &PermutationWord| -> Result<PermutationWord> {
        if p.degree() == spec.small_dim() {
            Ok(embed_permutation(p, spec))
        } else if p.degree() == spec.dim() {
            Ok(p.clone())
        } else {
            Err(CosetError::DimensionMismatch {
                expected: spec.small_dim(),
                actual: p.degree(),
            })
        }
    };
    let (ge, he) = (lift(g)?, lift(h)?);

    // One task per value of u(0); merging in task order reproduces the
    // sequential lexicographic discovery order.
    let per_first: Vec<Tally> = (0..s)
        .into_par_iter()
        .map(|first| -> Result<Tally> {
            let mut tally = Tally::new();
            for rest in all_permutations(s - 1) {
                let images: Vec<usize> = std::iter::once(first)
                    .chain(rest.images().iter().map(|&v| if v >= first { v + 1 } else { v }))
                    .collect();
                let u = PermutationWord::from_zero_based(images)?;
                let y = ge.compose(&diag_copy_permutation(&u, spec)).compose(&he);
                tally.classify(y, *family, 1)?;
            }
            Ok(tally)
        })
        .collect::<Result<_>>()?;
    let mut merged = Tally::new();
    for part in per_first {
        for (rep, count) in part.reps.into_iter().zip(part.counts) {
            merged.classify(rep, *family, count)?;
        }
    }

    let denom = i64::try_from(total).map_err(|_| CosetError::Overflow)?;
    let atoms = merged
        .reps
        .into_iter()
        .zip(merged.counts)
        .map(|(representative, c)| {
            let numer = i64::try_from(c).map_err(|_| CosetError::Overflow)?;
            Ok(Atom {
                representative,
                probability: Ratio::new(numer, denom),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dist = ExactDistribution {
        family: *family,
        atoms,
    };
    debug_assert!(dist.total()?.is_one());
    Ok(dist)
}

/// Exact probability of the coset `g ∘_N h` under `σ_g * σ_h` for each `N`.
pub fn concentration_exact(
    g: &PermutationWord,
    h: &PermutationWord,
    family: &GroupFamily,
    n_list: &[usize],
    budget: u64,
) -> Result<Vec<(usize, Probability)>> {
    n_list
        .iter()
        .map(|&n| {
            let fam = family.with_tail(n);
            let gm = BlockMatrix::<f64>::from_permutation(g.clone(), None)?;
            let hm = BlockMatrix::<f64>::from_permutation(h.clone(), None)?;
            let target = circ_n(&gm, &hm, fam.spec, FamilyKind::Symmetric)?;
            let dist = exact_convolution(g, h, &fam, budget)?;
            Ok((n, dist.probability_of(target.permutation()?)?))
        })
        .collect()
}

/// JSON form of a list of `(N, p)` pairs: `[{"N": .., "prob": "p/q"}]`.
pub fn concentration_json(rows: &[(usize, Probability)]) -> String {
    #[derive(Serialize, Deserialize)]
    struct Row {
        #[serde(rename = "N")]
        n: usize,
        prob: String,
    }
    let rows: Vec<Row> = rows
        .iter()
        .map(|(n, p)| Row {
            n: *n,
            prob: format!("{}/{}", p.numer(), p.denom()),
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize")
}
