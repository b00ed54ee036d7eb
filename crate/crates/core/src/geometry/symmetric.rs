use nalgebra::DMatrix;

use crate::blockmat::{BlockSpec, PermutationWord};
use crate::cosets::{CosetTarget, FamilyKind};
use crate::error::{CosetError, Result};
use crate::scalar::Real;

/// The `α × α` corner of the permutation matrix of `x`: entry `(i, j)` is 1
/// iff `x(j) = i`. Constant on `K_N`-double cosets.
pub fn sym_corner_invariant(x: &PermutationWord, alpha: usize) -> DMatrix<u8> {
    DMatrix::from_fn(alpha, alpha, |i, j| u8::from(j < x.degree() && x.apply(j) == i))
}

/// Exact test of `x ∈ K_N r K_N` for the diagonal symmetric family.
///
/// Writes `x = ψ ∘ r ∘ D(u)` and searches for `u ∈ S(k+N)` such that
/// `ψ = x ∘ D(u)⁻¹ ∘ r⁻¹` is diagonal as well. The unknown `u` is extended
/// on its smallest unassigned point first, trying images in increasing
/// order, and every assignment is checked against the partial `ψ`.
pub fn sym_membership<T: Real>(x: &PermutationWord, target: &CosetTarget<T>) -> Result<bool> {
    if target.family.kind != FamilyKind::Symmetric {
        return Err(CosetError::FamilyMismatch(
            "exact membership needs the symmetric family".into(),
        ));
    }
    let r = target.permutation()?;
    if x.degree() != r.degree() {
        return Err(CosetError::DimensionMismatch {
            expected: r.degree(),
            actual: x.degree(),
        });
    }
    let spec = target.family.spec;
    if sym_corner_invariant(x, spec.alpha) != sym_corner_invariant(r, spec.alpha) {
        return Ok(false);
    }
    let mut search = Search::new(x, r, spec);
    for i in 0..spec.alpha {
        if !search.require(r.apply(i), x.apply(i)) {
            return Ok(false);
        }
    }
    Ok(search.extend(0))
}

struct Search<'a> {
    x: &'a PermutationWord,
    r: &'a PermutationWord,
    spec: BlockSpec,
    s: usize,
    /// `u` as images; `usize::MAX` when unassigned.
    u: Vec<usize>,
    u_used: Vec<bool>,
    /// The copy block of `ψ` and its inverse.
    psi: Vec<usize>,
    psi_inv: Vec<usize>,
    /// Offsets of `ψ` set since the start, for undo.
    trail: Vec<usize>,
}

const UNSET: usize = usize::MAX;

impl<'a> Search<'a> {
    fn new(x: &'a PermutationWord, r: &'a PermutationWord, spec: BlockSpec) -> Self {
        let s = spec.copy_len();
        Self {
            x,
            r,
            spec,
            s,
            u: vec![UNSET; s],
            u_used: vec![false; s],
            psi: vec![UNSET; s],
            psi_inv: vec![UNSET; s],
            trail: Vec::new(),
        }
    }

    /// `(copy, offset)` of a position, `None` on the corner.
    fn locate(&self, p: usize) -> Option<(usize, usize)> {
        p.checked_sub(self.spec.alpha).map(|q| (q / self.s, q % self.s))
    }

    /// Records `ψ(p) = y`; `false` if that contradicts `ψ` being diagonal.
    fn require(&mut self, p: usize, y: usize) -> bool {
        match (self.locate(p), self.locate(y)) {
            (None, None) => p == y,
            (Some((cp, jp)), Some((cy, jy))) if cp == cy => {
                if self.psi[jp] == UNSET && self.psi_inv[jy] == UNSET {
                    self.psi[jp] = jy;
                    self.psi_inv[jy] = jp;
                    self.trail.push(jp);
                    true
                } else {
                    self.psi[jp] == jy
                }
            }
            _ => false,
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let jp = self.trail.pop().expect("trail longer than mark");
            self.psi_inv[self.psi[jp]] = UNSET;
            self.psi[jp] = UNSET;
        }
    }

    fn extend(&mut self, j: usize) -> bool {
        if j == self.s {
            return true;
        }
        for t in 0..self.s {
            if self.u_used[t] {
                continue;
            }
            let mark = self.trail.len();
            let consistent = (0..self.spec.m).all(|c| {
                let o = self.spec.copy_start(c);
                self.require(self.r.apply(o + t), self.x.apply(o + j))
            });
            if consistent {
                self.u[j] = t;
                self.u_used[t] = true;
                if self.extend(j + 1) {
                    return true;
                }
                self.u_used[t] = false;
                self.u[j] = UNSET;
            }
            self.undo_to(mark);
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmat::{diag_copy_permutation, BlockMatrix};
    use crate::cosets::GroupFamily;
    use crate::haar::{uniform_permutation, RandomStream};

    fn target(r: &str, spec: BlockSpec) -> CosetTarget<f64> {
        let p = PermutationWord::parse(r, spec.dim()).unwrap();
        CosetTarget::new(
            BlockMatrix::from_permutation(p, None).unwrap(),
            GroupFamily::new(FamilyKind::Symmetric, spec).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn small_cases() {
        let spec = BlockSpec::new(1, 1, 3, 1).unwrap();
        let id = PermutationWord::identity(5);
        assert!(!sym_membership(&id, &target("(1 2)", spec)).unwrap());
        let x = PermutationWord::parse("(1 4)", 5).unwrap();
        assert!(sym_membership(&x, &target("(1 3)", spec)).unwrap());
        let r = PermutationWord::parse("(1 3)", 5).unwrap();
        assert!(sym_membership(&r, &target("(1 3)", spec)).unwrap());
    }

    #[test]
    fn orbit_elements_are_members() {
        let spec = BlockSpec::new(2, 2, 3, 2).unwrap();
        let mut rng = RandomStream::new(1, 0).rng();
        for _ in 0..30 {
            let r = uniform_permutation(spec.dim(), &mut rng);
            let t = CosetTarget::<f64>::new(
                BlockMatrix::from_permutation(r.clone(), None).unwrap(),
                GroupFamily::new(FamilyKind::Symmetric, spec).unwrap(),
            )
            .unwrap();
            let k1 = diag_copy_permutation(&uniform_permutation(5, &mut rng), spec);
            let k2 = diag_copy_permutation(&uniform_permutation(5, &mut rng), spec);
            let x = k1.compose(&r).compose(&k2);
            assert!(sym_membership(&x, &t).unwrap());
            assert_eq!(
                sym_corner_invariant(&x, spec.alpha),
                sym_corner_invariant(&r, spec.alpha)
            );
        }
    }

    #[test]
    fn corner_invariant_cases() {
        assert_eq!(sym_corner_invariant(&PermutationWord::identity(4), 2), DMatrix::identity(2, 2));
        let x = PermutationWord::parse("(1 2)", 3).unwrap();
        assert_eq!(sym_corner_invariant(&x, 1), DMatrix::from_element(1, 1, 0u8));
    }

    #[test]
    fn degree_and_family_errors() {
        let spec = BlockSpec::new(1, 1, 3, 1).unwrap();
        let t = target("(1 3)", spec);
        assert!(matches!(
            sym_membership(&PermutationWord::identity(4), &t),
            Err(CosetError::DimensionMismatch { .. })
        ));
        let fam = GroupFamily::new(FamilyKind::UnitaryOrthogonal, spec).unwrap();
        let t = CosetTarget::<f64>::new(BlockMatrix::identity(5, None).unwrap(), fam).unwrap();
        assert!(sym_membership(&PermutationWord::identity(5), &t).is_err());
    }
}
