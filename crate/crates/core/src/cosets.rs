//! The ∘-products and samplers for the convolution measures.
//!
//! Three families are supported:
//!
//! * `unitary_orthogonal`: `G_N = U(α + m(k+N))` with `K_N ≅ O(k+N)` acting
//!   diagonally, equivalence by two-sided cosets `K g K`;
//! * `unitary_conjugation`: `G_N = U(α + k + N)`, `K_N = U(k+N)`, equivalence
//!   by `K`-conjugation (operator colligations), `m = 1`;
//! * `symmetric`: permutations of `α + m(k+N)` points with `K_N ≅ S(k+N)`
//!   acting diagonally.
//!
//! Representatives are stored, never equivalence classes; deciding whether
//! two representatives are equivalent is the job of [`crate::geometry`].

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::blockmat::{
    build_jn, embed, BlockMatrix, BlockName, BlockSpec, PermutationWord,
};
use crate::error::{CosetError, Result};
use crate::haar::{haar_orthogonal, haar_unitary, uniform_permutation};
use crate::scalar::{cmatmul, czero, to_complex, CMat, RMat, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    UnitaryOrthogonal,
    UnitaryConjugation,
    Symmetric,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::UnitaryOrthogonal => "unitary_orthogonal",
            FamilyKind::UnitaryConjugation => "unitary_conjugation",
            FamilyKind::Symmetric => "symmetric",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupFamily {
    pub kind: FamilyKind,
    pub spec: BlockSpec,
}

impl GroupFamily {
    pub fn new(kind: FamilyKind, spec: BlockSpec) -> Result<Self> {
        if kind == FamilyKind::UnitaryConjugation && spec.m != 1 {
            return Err(CosetError::InvalidSpec(
                "the conjugation family requires m = 1".into(),
            ));
        }
        Ok(Self { kind, spec })
    }

    pub fn with_tail(&self, n_tail: usize) -> Self {
        Self {
            kind: self.kind,
            spec: self.spec.with_tail(n_tail),
        }
    }
}

/// A representative `r` standing for `K_N r K_N` (or its `K_N`-conjugacy
/// class for the conjugation family).
#[derive(Debug, Clone, PartialEq)]
pub struct CosetTarget<T: Real> {
    pub representative: BlockMatrix<T>,
    pub family: GroupFamily,
}

impl<T: Real> CosetTarget<T> {
    pub fn new(representative: BlockMatrix<T>, family: GroupFamily) -> Result<Self> {
        if representative.dim() != family.spec.dim() {
            return Err(CosetError::DimensionMismatch {
                expected: family.spec.dim(),
                actual: representative.dim(),
            });
        }
        if family.kind == FamilyKind::Symmetric && representative.exact_permutation().is_none() {
            return Err(CosetError::NotPermutation);
        }
        let representative = representative.with_spec(Some(family.spec))?;
        Ok(Self {
            representative,
            family,
        })
    }

    pub fn dim(&self) -> usize {
        self.representative.dim()
    }

    /// The representative as an exact permutation (symmetric family).
    pub fn permutation(&self) -> Result<&PermutationWord> {
        self.representative
            .exact_permutation()
            .ok_or(CosetError::NotPermutation)
    }
}

/// Lifts a small-group element to `G_N`, or accepts one already of full size.
pub(crate) fn lift_small<T: Real>(g: &BlockMatrix<T>, spec: BlockSpec) -> Result<BlockMatrix<T>> {
    if g.dim() == spec.small_dim() {
        embed(g, spec)
    } else if g.dim() == spec.dim() {
        g.clone().with_spec(Some(spec))
    } else {
        Err(CosetError::DimensionMismatch {
            expected: spec.small_dim(),
            actual: g.dim(),
        })
    }
}

fn infinite_spec<T: Real>(g: &BlockMatrix<T>, h: &BlockMatrix<T>) -> Result<BlockSpec> {
    let spec = g.spec().or(h.spec()).ok_or(CosetError::MissingSpec)?;
    if spec.m != 1 || spec.n_tail != 0 {
        return Err(CosetError::InvalidSpec(format!(
            "the infinite product takes m = 1, N = 0 representatives, got {spec}"
        )));
    }
    for x in [g, h] {
        if x.dim() != spec.dim() {
            return Err(CosetError::DimensionMismatch {
                expected: spec.dim(),
                actual: x.dim(),
            });
        }
    }
    Ok(spec)
}

/// Representative of `g ∘ h` in `U(α + 2k)` with blocks
///
/// ```text
/// | ap  b  aq |
/// | cp  d  cq |
/// | r   0  t  |
/// ```
///
/// where `g = [a b; c d]` and `h = [p q; r t]`.
pub fn circ_infinite<T: Real>(g: &BlockMatrix<T>, h: &BlockMatrix<T>) -> Result<BlockMatrix<T>> {
    let spec = infinite_spec(g, h)?;
    let (alpha, k) = (spec.alpha, spec.k);
    let a = g.block(BlockName::Corner, BlockName::Corner)?;
    let b = g.block(BlockName::Corner, BlockName::Active(1))?;
    let c = g.block(BlockName::Active(1), BlockName::Corner)?;
    let d = g.block(BlockName::Active(1), BlockName::Active(1))?;
    let p = h.block(BlockName::Corner, BlockName::Corner)?;
    let q = h.block(BlockName::Corner, BlockName::Active(1))?;
    let r = h.block(BlockName::Active(1), BlockName::Corner)?;
    let t = h.block(BlockName::Active(1), BlockName::Active(1))?;

    let n = alpha + 2 * k;
    let mut out = CMat::<T>::from_element(n, n, czero());
    let mut put = |row: usize, col: usize, m: &CMat<T>| {
        out.view_mut((row, col), m.shape()).copy_from(m);
    };
    put(0, 0, &(&a * &p));
    put(0, alpha, &b);
    put(0, alpha + k, &(&a * &q));
    put(alpha, 0, &(&c * &p));
    put(alpha, alpha, &d);
    put(alpha, alpha + k, &(&c * &q));
    put(alpha + k, 0, &r);
    put(alpha + k, alpha + k, &t);

    let out_spec = BlockSpec::new(alpha, 2 * k, 0, 1)?;
    let m = BlockMatrix::from_entries(out, Some(out_spec))?;
    Ok(if g.exact_permutation().is_some() && h.exact_permutation().is_some() {
        m.detect_permutation()
    } else {
        m
    })
}

/// Colligation product on `U(α+∞)//U(∞)`; the representative formula is the
/// one of [`circ_infinite`], only the equivalence relation differs.
pub fn circ_colligation<T: Real>(g: &BlockMatrix<T>, h: &BlockMatrix<T>) -> Result<BlockMatrix<T>> {
    circ_infinite(g, h)
}

/// `g ∘_N h`: the target with representative `g J_N h`, or `g J h J⁻¹` for the
/// conjugation family.
pub fn circ_n<T: Real>(
    g: &BlockMatrix<T>,
    h: &BlockMatrix<T>,
    spec: BlockSpec,
    kind: FamilyKind,
) -> Result<CosetTarget<T>> {
    let family = GroupFamily::new(kind, spec)?;
    let j = build_jn::<T>(spec)?;
    let ge = lift_small(g, spec)?;
    let he = lift_small(h, spec)?;
    let mut rep = ge.mul(&j)?.mul(&he)?;
    if kind == FamilyKind::UnitaryConjugation {
        rep = rep.mul(&j.adjoint())?;
    }
    CosetTarget::new(rep, family)
}

/// An element of `K_N`, stored as its `(k+N)`-block.
#[derive(Debug, Clone, PartialEq)]
pub enum KElement<T: Real> {
    Orthogonal(RMat<T>),
    Unitary(CMat<T>),
    Permutation(PermutationWord),
}

impl<T: Real> KElement<T> {
    /// One draw from the Haar (uniform) measure of `K_N` for the family.
    pub fn draw<R: Rng + ?Sized>(family: &GroupFamily, rng: &mut R) -> Self {
        let s = family.spec.copy_len();
        match family.kind {
            FamilyKind::UnitaryOrthogonal => KElement::Orthogonal(haar_orthogonal(s, rng)),
            FamilyKind::UnitaryConjugation => KElement::Unitary(haar_unitary(s, rng)),
            FamilyKind::Symmetric => KElement::Permutation(uniform_permutation(s, rng)),
        }
    }

    pub fn identity(kind: FamilyKind, s: usize) -> Self {
        match kind {
            FamilyKind::UnitaryOrthogonal => KElement::Orthogonal(RMat::identity(s, s)),
            FamilyKind::UnitaryConjugation => KElement::Unitary(CMat::identity(s, s)),
            FamilyKind::Symmetric => KElement::Permutation(PermutationWord::identity(s)),
        }
    }

    /// Product `self · rhs`; mixed kinds fall back to complex matrices.
    pub fn compose(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (KElement::Orthogonal(a), KElement::Orthogonal(b)) => KElement::Orthogonal(a * b),
            (KElement::Permutation(a), KElement::Permutation(b)) => {
                KElement::Permutation(a.compose(b))
            }
            _ => KElement::Unitary(cmatmul(&self.complex_block(), &rhs.complex_block())),
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            KElement::Orthogonal(m) => KElement::Orthogonal(m.transpose()),
            KElement::Unitary(m) => KElement::Unitary(m.adjoint()),
            KElement::Permutation(p) => KElement::Permutation(p.inverse()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            KElement::Orthogonal(m) => m.nrows(),
            KElement::Unitary(m) => m.nrows(),
            KElement::Permutation(p) => p.degree(),
        }
    }

    /// The `(k+N)`-block as a matrix without spec.
    pub fn block(&self) -> BlockMatrix<T> {
        match self {
            KElement::Orthogonal(m) => BlockMatrix::from_real(m, None),
            KElement::Unitary(m) => BlockMatrix::from_entries(m.clone(), None),
            KElement::Permutation(p) => BlockMatrix::from_permutation(p.clone(), None),
        }
        .expect("square block")
    }

    pub fn complex_block(&self) -> CMat<T> {
        match self {
            KElement::Orthogonal(m) => to_complex(m),
            KElement::Unitary(m) => m.clone(),
            KElement::Permutation(p) => p.to_matrix(),
        }
    }

    /// `diag(1_α, u, …, u)` in `G_N`.
    pub fn embed(&self, spec: BlockSpec) -> Result<BlockMatrix<T>> {
        crate::blockmat::embed_k(&self.block(), spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `δ_g * κ_N * δ_h` (or `x ↦ g x h x⁻¹` for conjugation): one draw.
    #[default]
    TauTilde,
    /// `κ_N * δ_g * κ_N * δ_h * κ_N` (or `(x, z) ↦ z g x h x⁻¹ z⁻¹`).
    TauFull,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::TauTilde => "tau_tilde",
            Measure::TauFull => "tau_full",
        })
    }
}

/// The `K_N` draws behind one sample of `τ̃` or `τ`, kept in factored form.
///
/// Double cosets: `left · g · middle · h · right`. Conjugation:
/// `left · g · middle · h · middle⁻¹ · left⁻¹`, with `right` unused.
#[derive(Debug, Clone, PartialEq)]
pub struct TauDraw<T: Real> {
    pub measure: Measure,
    pub left: Option<KElement<T>>,
    pub middle: KElement<T>,
    pub right: Option<KElement<T>>,
}

impl<T: Real> TauDraw<T> {
    pub fn draw<R: Rng + ?Sized>(measure: Measure, family: &GroupFamily, rng: &mut R) -> Self {
        match (measure, family.kind) {
            (Measure::TauTilde, _) => TauDraw {
                measure,
                left: None,
                middle: KElement::draw(family, rng),
                right: None,
            },
            (Measure::TauFull, FamilyKind::UnitaryConjugation) => {
                let z = KElement::draw(family, rng);
                let x = KElement::draw(family, rng);
                TauDraw {
                    measure,
                    left: Some(z),
                    middle: x,
                    right: None,
                }
            }
            (Measure::TauFull, _) => {
                let k1 = KElement::draw(family, rng);
                let k2 = KElement::draw(family, rng);
                let k3 = KElement::draw(family, rng);
                TauDraw {
                    measure,
                    left: Some(k1),
                    middle: k2,
                    right: Some(k3),
                }
            }
        }
    }

    /// Multiplies out the sample; `g`, `h` may be small or already embedded.
    pub fn assemble(
        &self,
        g: &BlockMatrix<T>,
        h: &BlockMatrix<T>,
        family: &GroupFamily,
    ) -> Result<BlockMatrix<T>> {
        let spec = family.spec;
        let ge = lift_small(g, spec)?;
        let he = lift_small(h, spec)?;
        let x = self.middle.embed(spec)?;
        let mut out = ge.mul(&x)?.mul(&he)?;
        if family.kind == FamilyKind::UnitaryConjugation {
            out = out.mul(&x.adjoint())?;
            if let Some(z) = &self.left {
                let z = z.embed(spec)?;
                out = z.mul(&out)?.mul(&z.adjoint())?;
            }
        } else {
            if let Some(k1) = &self.left {
                out = k1.embed(spec)?.mul(&out)?;
            }
            if let Some(k3) = &self.right {
                out = out.mul(&k3.embed(spec)?)?;
            }
        }
        out.with_spec(Some(spec))
    }
}

/// One sample of `τ̃_{g,h}`: `g·x·h` (or `g x h x⁻¹`) for a fresh `x ∈ K_N`.
pub fn sample_tau_tilde<T: Real, R: Rng + ?Sized>(
    g: &BlockMatrix<T>,
    h: &BlockMatrix<T>,
    family: &GroupFamily,
    rng: &mut R,
) -> Result<BlockMatrix<T>> {
    TauDraw::draw(Measure::TauTilde, family, rng).assemble(g, h, family)
}

/// One sample of `τ_{g,h}` with independent `K_N` draws.
pub fn sample_tau_full<T: Real, R: Rng + ?Sized>(
    g: &BlockMatrix<T>,
    h: &BlockMatrix<T>,
    family: &GroupFamily,
    rng: &mut R,
) -> Result<BlockMatrix<T>> {
    TauDraw::draw(Measure::TauFull, family, rng).assemble(g, h, family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmat::embed_k;
    use crate::haar::RandomStream;
    use crate::scalar::{cone, Complex};

    fn perm(s: &str, n: usize) -> BlockMatrix<f64> {
        BlockMatrix::from_permutation(PermutationWord::parse(s, n).unwrap(), None).unwrap()
    }

    fn swap_2x2(alpha: usize, k: usize) -> BlockMatrix<f64> {
        let spec = BlockSpec::new(alpha, k, 0, 1).unwrap();
        BlockMatrix::from_permutation(PermutationWord::parse("(1 2)", alpha + k).unwrap(), Some(spec))
            .unwrap()
    }

    /// The three-factor product `(g ⊕ 1_k) · S · (h ⊕ 1_k)` with
    /// `S = [1 0 0; 0 0 1; 0 1 0]`, followed by swapping the last two column
    /// blocks, which is right multiplication by an element of `K`.
    fn three_factor_oracle(g: &CMat<f64>, h: &CMat<f64>, alpha: usize, k: usize) -> CMat<f64> {
        let n = alpha + 2 * k;
        let pad = |m: &CMat<f64>| {
            let mut out = CMat::<f64>::identity(n, n);
            out.view_mut((0, 0), (alpha + k, alpha + k)).copy_from(m);
            out
        };
        let mut s = CMat::<f64>::from_element(n, n, czero());
        for i in 0..alpha {
            s[(i, i)] = cone();
        }
        for j in 0..k {
            s[(alpha + j, alpha + k + j)] = cone();
            s[(alpha + k + j, alpha + j)] = cone();
        }
        let prod = pad(g) * &s * pad(h);
        // columns (α | k | k) -> (α | third | second)
        let mut out = prod.clone();
        for j in 0..k {
            out.set_column(alpha + j, &prod.column(alpha + k + j));
            out.set_column(alpha + k + j, &prod.column(alpha + j));
        }
        out
    }

    #[test]
    fn circ_infinite_of_identities() {
        let spec = BlockSpec::new(2, 1, 0, 1).unwrap();
        let id = BlockMatrix::<f64>::identity(3, Some(spec)).unwrap();
        let out = circ_infinite(&id, &id).unwrap();
        assert!(out.exact_permutation().unwrap().is_identity());
        assert_eq!(out.dim(), 4);
    }

    #[test]
    fn circ_infinite_swap_example() {
        let g = swap_2x2(1, 1);
        let out = circ_infinite(&g, &g).unwrap();
        let expected = CMat::<f64>::from_row_slice(
            3,
            3,
            &[0., 1., 0., 0., 0., 1., 1., 0., 0.].map(|x| Complex::new(x, 0.0)),
        );
        assert_eq!(out.entries(), &expected);
        assert_eq!(out.entries(), &three_factor_oracle(g.entries(), g.entries(), 1, 1));
        assert_eq!(circ_colligation(&g, &g).unwrap(), out);
    }

    #[test]
    fn circ_infinite_right_identity() {
        let spec = BlockSpec::new(1, 2, 0, 1).unwrap();
        let mut rng = RandomStream::new(1, 0).rng();
        let g = BlockMatrix::from_entries(haar_unitary::<f64, _>(3, &mut rng), Some(spec)).unwrap();
        let id = BlockMatrix::identity(3, Some(spec)).unwrap();
        let out = circ_infinite(&g, &id).unwrap();
        let mut expected = CMat::<f64>::identity(5, 5);
        expected.view_mut((0, 0), (3, 3)).copy_from(g.entries());
        assert!((out.entries() - expected).norm() < 1e-15);
    }

    #[test]
    fn circ_infinite_matches_oracle_and_is_unitary() {
        let spec = BlockSpec::new(2, 2, 0, 1).unwrap();
        let mut rng = RandomStream::new(2, 0).rng();
        for _ in 0..10 {
            let g = BlockMatrix::from_entries(haar_unitary::<f64, _>(4, &mut rng), Some(spec)).unwrap();
            let h = BlockMatrix::from_entries(haar_unitary::<f64, _>(4, &mut rng), Some(spec)).unwrap();
            let out = circ_infinite(&g, &h).unwrap();
            let oracle = three_factor_oracle(g.entries(), h.entries(), 2, 2);
            assert!((out.entries() - oracle).norm() < 1e-12);
            assert!(out.is_unitary(1e-10));
        }
    }

    #[test]
    fn circ_infinite_rejects_bad_specs() {
        let g = BlockMatrix::<f64>::identity(3, None).unwrap();
        assert!(matches!(circ_infinite(&g, &g), Err(CosetError::MissingSpec)));
        let spec = BlockSpec::new(1, 1, 1, 1).unwrap();
        let g = BlockMatrix::<f64>::identity(3, Some(spec)).unwrap();
        assert!(circ_infinite(&g, &g).is_err());
        let s2 = BlockSpec::new(1, 1, 0, 1).unwrap();
        let a = BlockMatrix::<f64>::identity(2, Some(s2)).unwrap();
        let b = BlockMatrix::<f64>::identity(3, None).unwrap();
        assert!(matches!(
            circ_infinite(&a, &b),
            Err(CosetError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn circ_n_identity_gives_jn_or_identity() {
        let spec = BlockSpec::new(1, 2, 3, 1).unwrap();
        let id = BlockMatrix::<f64>::identity(spec.small_dim(), None).unwrap();
        let t = circ_n(&id, &id, spec, FamilyKind::UnitaryOrthogonal).unwrap();
        assert_eq!(t.representative, build_jn(spec).unwrap());
        let t = circ_n(&id, &id, spec, FamilyKind::UnitaryConjugation).unwrap();
        assert!(t.representative.exact_permutation().unwrap().is_identity());
        let spec2 = BlockSpec::new(1, 1, 2, 2).unwrap();
        let id2 = BlockMatrix::<f64>::identity(spec2.small_dim(), None).unwrap();
        let t = circ_n(&id2, &id2, spec2, FamilyKind::Symmetric).unwrap();
        assert_eq!(t.representative, build_jn(spec2).unwrap());
    }

    #[test]
    fn circ_n_symmetric_example() {
        let spec = BlockSpec::new(1, 1, 3, 1).unwrap();
        let g = perm("(1 2)", 2);
        let t = circ_n(&g, &g, spec, FamilyKind::Symmetric).unwrap();
        assert_eq!(
            t.permutation().unwrap(),
            &PermutationWord::parse("(1 3)", 5).unwrap()
        );
    }

    #[test]
    fn circ_n_rejects_short_tail() {
        let spec = BlockSpec::new(1, 2, 1, 1).unwrap();
        let id = BlockMatrix::<f64>::identity(spec.small_dim(), None).unwrap();
        assert!(matches!(
            circ_n(&id, &id, spec, FamilyKind::UnitaryOrthogonal),
            Err(CosetError::TailTooShort { .. })
        ));
        let spec = BlockSpec::new(1, 1, 3, 2).unwrap();
        let id = BlockMatrix::<f64>::identity(spec.small_dim(), None).unwrap();
        assert!(circ_n(&id, &id, spec, FamilyKind::UnitaryConjugation).is_err());
    }

    #[test]
    fn circ_n_m1_block_layout() {
        // rows: (ap aq b 0 / cp cq d 0 / r t 0 0 / 0 0 0 1)
        let (alpha, k, n) = (1, 2, 4);
        let spec = BlockSpec::new(alpha, k, n, 1).unwrap();
        let mut rng = RandomStream::new(3, 0).rng();
        let g = haar_unitary::<f64, _>(alpha + k, &mut rng);
        let h = haar_unitary::<f64, _>(alpha + k, &mut rng);
        let sub = |m: &CMat<f64>, r0, c0, r, c| m.view((r0, c0), (r, c)).clone_owned();
        let (a, b, c, d) = (
            sub(&g, 0, 0, alpha, alpha),
            sub(&g, 0, alpha, alpha, k),
            sub(&g, alpha, 0, k, alpha),
            sub(&g, alpha, alpha, k, k),
        );
        let (p, q, r, t) = (
            sub(&h, 0, 0, alpha, alpha),
            sub(&h, 0, alpha, alpha, k),
            sub(&h, alpha, 0, k, alpha),
            sub(&h, alpha, alpha, k, k),
        );
        let gb = BlockMatrix::from_entries(g, None).unwrap();
        let hb = BlockMatrix::from_entries(h, None).unwrap();
        let rep = circ_n(&gb, &hb, spec, FamilyKind::UnitaryOrthogonal)
            .unwrap()
            .representative;
        let e = rep.entries();
        let close = |x: CMat<f64>, y: CMat<f64>| assert!((x - y).norm() < 1e-12);
        close(sub(e, 0, 0, alpha, alpha), &a * &p);
        close(sub(e, 0, alpha, alpha, k), &a * &q);
        close(sub(e, 0, alpha + k, alpha, k), b.clone());
        close(sub(e, alpha, 0, k, alpha), &c * &p);
        close(sub(e, alpha, alpha, k, k), &c * &q);
        close(sub(e, alpha, alpha + k, k, k), d.clone());
        close(sub(e, alpha + k, 0, k, alpha), r.clone());
        close(sub(e, alpha + k, alpha, k, k), t.clone());
        close(sub(e, alpha + k, alpha + k, k, k), CMat::zeros(k, k));
        close(
            sub(e, alpha + 2 * k, alpha + 2 * k, n - k, n - k),
            CMat::identity(n - k, n - k),
        );
    }

    #[test]
    fn tau_tilde_identity_lands_in_k() {
        let spec = BlockSpec::new(2, 1, 4, 1).unwrap();
        let fam = GroupFamily::new(FamilyKind::UnitaryOrthogonal, spec).unwrap();
        let id = BlockMatrix::<f64>::identity(spec.small_dim(), None).unwrap();
        let mut rng = RandomStream::new(4, 0).rng();
        let x = sample_tau_tilde(&id, &id, &fam, &mut rng).unwrap();
        assert_eq!(
            x.block(BlockName::Corner, BlockName::Corner).unwrap(),
            CMat::identity(2, 2)
        );
        assert_eq!(
            x.block(BlockName::Corner, BlockName::Tail(1)).unwrap(),
            CMat::zeros(2, 4)
        );
        assert!(x.is_unitary(1e-9));
        assert!(x.entries().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn tau_full_identity_lands_in_k_and_is_unitary() {
        let spec = BlockSpec::new(1, 2, 3, 2).unwrap();
        let fam = GroupFamily::new(FamilyKind::UnitaryOrthogonal, spec).unwrap();
        let id = BlockMatrix::<f64>::identity(spec.small_dim(), None).unwrap();
        let mut rng = RandomStream::new(5, 0).rng();
        let x = sample_tau_full(&id, &id, &fam, &mut rng).unwrap();
        assert!(x.is_unitary(1e-9));
        let b1 = x.block(BlockName::Active(1), BlockName::Tail(1)).unwrap();
        let b2 = x.block(BlockName::Active(2), BlockName::Tail(2)).unwrap();
        assert!((b1 - b2).norm() < 1e-12);
        assert_eq!(
            x.block(BlockName::Active(1), BlockName::Active(2)).unwrap().norm(),
            0.0
        );

        let g = BlockMatrix::from_entries(haar_unitary::<f64, _>(spec.small_dim(), &mut rng), None)
            .unwrap();
        let h = BlockMatrix::from_entries(haar_unitary::<f64, _>(spec.small_dim(), &mut rng), None)
            .unwrap();
        let y = sample_tau_full(&g, &h, &fam, &mut rng).unwrap();
        assert!(y.is_unitary(1e-9));
    }

    #[test]
    fn conjugation_draws_have_expected_shape() {
        let spec = BlockSpec::new(1, 1, 3, 1).unwrap();
        let fam = GroupFamily::new(FamilyKind::UnitaryConjugation, spec).unwrap();
        let mut rng = RandomStream::new(6, 0).rng();
        let g = BlockMatrix::from_entries(haar_unitary::<f64, _>(2, &mut rng), None).unwrap();
        let h = BlockMatrix::from_entries(haar_unitary::<f64, _>(2, &mut rng), None).unwrap();
        let draw = TauDraw::<f64>::draw(Measure::TauTilde, &fam, &mut rng);
        let x = draw.assemble(&g, &h, &fam).unwrap();
        let xe = draw.middle.embed(spec).unwrap();
        let manual = embed(&g, spec)
            .unwrap()
            .mul(&xe)
            .unwrap()
            .mul(&embed(&h, spec).unwrap())
            .unwrap()
            .mul(&xe.adjoint())
            .unwrap();
        assert!((x.entries() - manual.entries()).norm() < 1e-12);
        assert!(x.is_unitary(1e-9));
    }

    #[test]
    fn symmetric_tau_tilde_enumeration_count() {
        // Over all 24 x in S({2,3,4,5}), g x h lies in the coset of (1 3)
        // exactly when x moves point 2, i.e. for 18 of them.
        let spec = BlockSpec::new(1, 1, 3, 1).unwrap();
        let g = perm("(1 2)", 2);
        let target = circ_n(&g, &g, spec, FamilyKind::Symmetric).unwrap();
        let mut hits = 0;
        for u in crate::hypergroup_exact::all_permutations(4) {
            let x = embed_k(&BlockMatrix::<f64>::from_permutation(u, None).unwrap(), spec).unwrap();
            let y = embed(&g, spec).unwrap().mul(&x).unwrap().mul(&embed(&g, spec).unwrap()).unwrap();
            if crate::geometry::sym_membership(y.exact_permutation().unwrap(), &target).unwrap() {
                hits += 1;
            }
        }
        assert_eq!(hits, 18);
    }
}
