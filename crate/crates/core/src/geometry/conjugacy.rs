//! Distance from `x` to the `K`-conjugacy class of `r`, `K = diag(1_α, U(k+N))`.
//!
//! For unitary `W`, `‖x − W r W⁻¹‖_F = ‖xW − Wr‖_F`. The solver seeds `W` from
//! the near-kernel of the linear map `W ↦ xW − Wr` on block-structured `W`
//! (small sizes only), then refines by a monotone majorization step: with
//! `F(W) = Re tr(xᴴ W r Wᴴ)` the shifted function `F(W) + ‖W‖²_F` is convex,
//! so maximizing its linearization over `K` never decreases `F`.

use super::procrustes::random_start;
use super::{check_dims, DistanceEstimate, DistanceOptions, Witness};
use crate::blockmat::{diag_copies, operator_norm, BlockMatrix, BlockSpec};
use crate::cosets::{CosetTarget, FamilyKind, KElement};
use crate::error::{CosetError, Result};
use crate::haar::RandomStream;
use crate::scalar::{cmatmul, polar, CMat, Complex, Real};

/// Largest `k+N` for which the linear-map initialization is attempted; the
/// map has `(α+k+N)²` rows and `(k+N)² + 1` columns.
const LINEAR_INIT_MAX: usize = 12;

/// Upper bound on the operator-norm distance from `x` to `{W r W⁻¹ : W ∈ K_N}`.
pub fn dist_conjugacy<T: Real>(
    x: &BlockMatrix<T>,
    target: &CosetTarget<T>,
    opts: &DistanceOptions,
) -> Result<DistanceEstimate<T>> {
    check_dims(x, target)?;
    let family = target.family;
    if family.kind != FamilyKind::UnitaryConjugation {
        return Err(CosetError::FamilyMismatch(
            "conjugacy distance needs the unitary_conjugation family".into(),
        ));
    }
    let spec = family.spec;
    let s = spec.copy_len();
    let problem = Problem {
        x: x.entries(),
        xh: x.entries().adjoint(),
        r: target.representative.entries(),
        rh: target.representative.entries().adjoint(),
        spec,
    };

    let mut starts = vec![CMat::<T>::identity(s, s)];
    if s <= LINEAR_INIT_MAX {
        if let Some(w) = problem.linear_init() {
            starts.push(w);
        }
    }
    for i in 0..opts.restarts {
        let mut rng = RandomStream::new(opts.seed, i as u64).rng();
        starts.push(random_start::<T, _>(&family, &mut rng).complex_block());
    }

    let mut best: Option<DistanceEstimate<T>> = None;
    for w in starts {
        let run = problem.refine(w, opts);
        if best.as_ref().is_none_or(|b| run.upper_bound < b.upper_bound) {
            best = Some(run);
        }
    }
    Ok(best.expect("identity start always runs"))
}

struct Problem<'a, T: Real> {
    x: &'a CMat<T>,
    xh: CMat<T>,
    r: &'a CMat<T>,
    rh: CMat<T>,
    spec: BlockSpec,
}

impl<T: Real> Problem<'_, T> {
    fn commutator_residual(&self, we: &CMat<T>) -> CMat<T> {
        cmatmul(self.x, we) - cmatmul(we, self.r)
    }

    fn distance(&self, we: &CMat<T>) -> T {
        let aligned = cmatmul(&cmatmul(we, self.r), &we.adjoint());
        operator_norm(&(self.x - aligned))
    }

    /// Near-kernel element of `(λ, w) ↦ x·diag(λ1_α, w) − diag(λ1_α, w)·r`
    /// with the largest `λ`, normalized to `λ = 1` and projected to the
    /// unitary group.
    fn linear_init(&self) -> Option<CMat<T>> {
        let alpha = self.spec.alpha;
        let n = self.spec.dim();
        let s = self.spec.copy_len();
        let cols = 1 + s * s;
        let mut a = CMat::<T>::zeros(n * n, cols);
        let idx = |i: usize, j: usize| i + j * n;
        // λ: x[:, 0..α] in columns 0..α, minus rows 0..α of r.
        for j in 0..alpha {
            for i in 0..n {
                a[(idx(i, j), 0)] += self.x[(i, j)];
                a[(idx(j, i), 0)] -= self.r[(j, i)];
            }
        }
        // w_{pq} = E_{α+p, α+q}: x E puts x[:, α+p] in column α+q, E r puts r[α+q, :] in row α+p.
        for q in 0..s {
            for p in 0..s {
                let col = 1 + p + q * s;
                for i in 0..n {
                    a[(idx(i, alpha + q), col)] += self.x[(i, alpha + p)];
                    a[(idx(alpha + p, i), col)] -= self.r[(alpha + q, i)];
                }
            }
        }
        let svd = a.svd(false, true);
        let v_t = svd.v_t?;
        let sv = &svd.singular_values;
        let (lo, hi) = sv.iter().fold((T::max_value()?, T::zero()), |(lo, hi), &x| {
            (if x < lo { x } else { lo }, if x > hi { x } else { hi })
        });
        // The kernel contains W₀·C for every C commuting with r, so it is
        // often many-dimensional; project the λ-direction onto it.
        let thr = lo + T::lit(1e-6) * hi;
        let mut vec = vec![Complex::new(T::zero(), T::zero()); cols];
        for (i, _) in sv.iter().enumerate().filter(|(_, &x)| x <= thr) {
            let weight = v_t[(i, 0)];
            for (j, slot) in vec.iter_mut().enumerate() {
                *slot += v_t[(i, j)].conj() * weight;
            }
        }
        let lambda = vec[0];
        if lambda.norm_sqr() < T::lit(1e-16) {
            return None;
        }
        let w = CMat::<T>::from_fn(s, s, |p, q| vec[1 + p + q * s] / lambda);
        Some(polar(&w))
    }

    fn refine(&self, mut w: CMat<T>, opts: &DistanceOptions) -> DistanceEstimate<T> {
        let alpha = self.spec.alpha;
        let s = self.spec.copy_len();
        let tol = T::lit(opts.tol);
        let two = Complex::new(T::lit(2.0), T::zero());
        let mut we = diag_copies(&w, self.spec);
        let mut f = self.commutator_residual(&we).norm();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iters {
            // Gradient of Re tr(xᴴ W r Wᴴ) plus the convexifying 2W.
            let g = cmatmul(&cmatmul(&self.xh, &we), self.r)
                + cmatmul(&cmatmul(self.x, &we), &self.rh)
                + we.map(|z| z * two);
            w = polar(&g.view((alpha, alpha), (s, s)).clone_owned());
            we = diag_copies(&w, self.spec);
            iterations += 1;
            let f_new = self.commutator_residual(&we).norm();
            let improvement = f - f_new;
            f = f_new;
            if improvement < tol {
                converged = true;
                break;
            }
        }
        DistanceEstimate {
            upper_bound: self.distance(&we),
            iterations,
            converged,
            witness: Witness::Conjugation {
                conjugator: KElement::Unitary(w),
            },
        }
    }
}
