//! Distance from a factored sample `g·X·h` to `g ∘_N h` without forming the
//! `(α + m(k+N))`-dimensional problem.
//!
//! Rotations acting only on the tail coordinates of every copy lie in `K_N`
//! and commute with the embedded `g` and `h`. Choosing them from Householder
//! reflections of the off-diagonal blocks of `O ∈ K_N` and an SVD of the
//! remaining tail block writes
//!
//! ```text
//! O = diag(1_k, L) · (B ⊕ 1_{N−2k}) · diag(1_k, R)ᴴ,      B ∈ K_{2k},
//! ```
//!
//! so `g X h = T_L (g X_B h) T_Rᴴ` with `T_L, T_R ∈ K_N`, and the problem drops
//! to tail size `2k`. `J_N` lives inside the same reduced block, so the
//! target reduces too. Witnesses of the small problem are lifted back.

use nalgebra::{ComplexField, DMatrix};

use super::{dist_conjugacy, dist_double_coset, DistanceEstimate, DistanceOptions, Witness};
use crate::blockmat::BlockMatrix;
use crate::cosets::{circ_n, FamilyKind, GroupFamily, KElement, Measure, TauDraw};
use crate::error::{CosetError, Result};
use crate::scalar::{householder_complete, polar, Real};

struct Compression<F: ComplexField> {
    /// `N × N` left tail rotation.
    left: DMatrix<F>,
    /// `N × N` right tail rotation.
    right: DMatrix<F>,
    /// `3k × 3k` unitary core.
    core: DMatrix<F>,
    /// Frobenius norm of `O − diag(1,L)(core ⊕ 1)diag(1,R)ᴴ`.
    residual: F::RealField,
}

fn tail_embed<F: ComplexField>(m: &DMatrix<F>, k: usize) -> DMatrix<F> {
    let s = m.nrows() + k;
    let mut out = DMatrix::<F>::identity(s, s);
    out.view_mut((k, k), m.shape()).copy_from(m);
    out
}

fn pad_identity<F: ComplexField>(m: &DMatrix<F>, s: usize) -> DMatrix<F> {
    let mut out = DMatrix::<F>::identity(s, s);
    out.view_mut((0, 0), m.shape()).copy_from(m);
    out
}

fn compress<F: ComplexField>(o: &DMatrix<F>, k: usize) -> Compression<F> {
    let s = o.nrows();
    let n = s - k;
    let qw = householder_complete(&o.view((k, 0), (n, k)).clone_owned());
    let qv = householder_complete(&o.view((0, k), (k, n)).adjoint());
    let y = qw.adjoint() * o.view((k, k), (n, n)) * &qv;
    let y22 = y.view((k, k), (n - k, n - k)).clone_owned();
    let svd = y22.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..n - k).collect();
    order.sort_by(|&a, &b| sv[a].partial_cmp(&sv[b]).expect("finite singular values"));
    let p = DMatrix::<F>::from_fn(n - k, n - k, |i, j| u[(i, order[j])].clone());
    let q = DMatrix::<F>::from_fn(n - k, n - k, |i, j| v_t[(order[j], i)].clone().conjugate());
    let left = qw * tail_embed(&p, k);
    let right = qv * tail_embed(&q, k);

    let o2 = tail_embed(&left.adjoint(), k) * o * tail_embed(&right, k);
    let c = 3 * k;
    let core_raw = o2.view((0, 0), (c, c)).clone_owned();
    let mut rest = o2;
    rest.view_mut((0, 0), (c, c)).fill(F::zero());
    for i in c..s {
        rest[(i, i)] -= F::one();
    }
    let core = polar(&core_raw);
    let residual = rest.norm() + (&core - &core_raw).norm();
    Compression {
        left,
        right,
        core,
        residual,
    }
}

/// Distance from the sample described by `draw` to the target `g ∘_N h`.
///
/// `g` and `h` are elements of the small group `U(α + mk)`. The result is an
/// upper bound realized by full-size witnesses, exactly as if the sample had
/// been assembled and passed to [`dist_double_coset`] or [`dist_conjugacy`];
/// the bound additionally absorbs the rounding residual of the reduction.
pub fn dist_to_product<T: Real>(
    draw: &TauDraw<T>,
    g: &BlockMatrix<T>,
    h: &BlockMatrix<T>,
    family: &GroupFamily,
    opts: &DistanceOptions,
) -> Result<DistanceEstimate<T>> {
    let spec = family.spec;
    for m in [g, h] {
        if m.dim() != spec.small_dim() {
            return Err(CosetError::DimensionMismatch {
                expected: spec.small_dim(),
                actual: m.dim(),
            });
        }
    }
    let solve = |x: &BlockMatrix<T>, fam: &GroupFamily| -> Result<DistanceEstimate<T>> {
        let target = circ_n(g, h, fam.spec, fam.kind)?;
        match fam.kind {
            FamilyKind::UnitaryOrthogonal => dist_double_coset(x, &target, opts),
            FamilyKind::UnitaryConjugation => dist_conjugacy(x, &target, opts),
            FamilyKind::Symmetric => Err(CosetError::FamilyMismatch(
                "symmetric samples are decided by exact membership".into(),
            )),
        }
    };
    let k = spec.k;
    if spec.n_tail <= 2 * k || family.kind == FamilyKind::Symmetric {
        let x = draw.assemble(g, h, family)?;
        return solve(&x, family);
    }

    let small = family.with_tail(2 * k);
    let s = spec.copy_len();
    let (core, tl, tr_adj, residual) = match (&draw.middle, family.kind) {
        (KElement::Orthogonal(o), FamilyKind::UnitaryOrthogonal) => {
            let c = compress(o, k);
            (
                KElement::Orthogonal(c.core),
                KElement::Orthogonal(tail_embed(&c.left, k)),
                KElement::Orthogonal(tail_embed(&c.right, k).transpose()),
                c.residual,
            )
        }
        (KElement::Unitary(o), FamilyKind::UnitaryConjugation) => {
            let c = compress(o, k);
            (
                KElement::Unitary(c.core),
                KElement::Unitary(tail_embed(&c.left, k)),
                KElement::Unitary(tail_embed(&c.right, k).adjoint()),
                c.residual,
            )
        }
        _ => {
            return Err(CosetError::FamilyMismatch(format!(
                "draw does not belong to the {} family",
                family.kind
            )))
        }
    };
    let reduced = TauDraw {
        measure: Measure::TauTilde,
        left: None,
        middle: core,
        right: None,
    };
    let x_small = reduced.assemble(g, h, &small)?;
    let est = solve(&x_small, &small)?;

    let pad = |e: &KElement<T>| match e {
        KElement::Orthogonal(m) => KElement::Orthogonal(pad_identity(m, s)),
        KElement::Unitary(m) => KElement::Unitary(pad_identity(m, s)),
        KElement::Permutation(_) => unreachable!("unitary families only"),
    };
    let (witness, factor) = match est.witness {
        Witness::DoubleCoset { left, right } => {
            let mut l = tl.compose(&pad(&left));
            if let Some(k1) = &draw.left {
                l = k1.compose(&l);
            }
            let mut r = pad(&right).compose(&tr_adj);
            if let Some(k3) = &draw.right {
                r = r.compose(k3);
            }
            (Witness::DoubleCoset { left: l, right: r }, T::one())
        }
        Witness::Conjugation { conjugator } => {
            let mut w = tl.compose(&pad(&conjugator));
            if let Some(z) = &draw.left {
                w = z.compose(&w);
            }
            (Witness::Conjugation { conjugator: w }, T::lit(2.0))
        }
    };
    Ok(DistanceEstimate {
        upper_bound: est.upper_bound + factor * residual,
        iterations: est.iterations,
        converged: est.converged,
        witness,
    })
}
