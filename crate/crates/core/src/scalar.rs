//! Scalar abstraction shared by the dense linear algebra.
//!
//! Everything numeric in the crate is generic over [`Real`], which is
//! implemented for `f32` and `f64`. Complex matrices are `DMatrix<Complex<T>>`.

use nalgebra::{ComplexField, DMatrix, RealField};
use num_traits::{FromPrimitive, ToPrimitive, Zero};

pub use nalgebra::Complex;

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Display + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;

/// Dense real matrix.
pub type RMat<T> = DMatrix<T>;

pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

pub fn to_complex<T: Real>(m: &RMat<T>) -> CMat<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

pub fn real_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    m.map(|z| z.re)
}

pub fn imag_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    m.map(|z| z.im)
}

/// Complex product computed with four real products.
///
/// nalgebra dispatches real `f32`/`f64` products to a blocked GEMM, while
/// complex products fall back to a naive kernel that is an order of magnitude
/// slower at the sizes used here.
pub fn cmatmul<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    assert_eq!(a.ncols(), b.nrows(), "cmatmul: inner dimensions differ");
    if a.nrows() * a.ncols() * b.ncols() < 32 * 32 * 32 {
        return a * b;
    }
    let (ar, ai) = (real_part(a), imag_part(a));
    let (br, bi) = (real_part(b), imag_part(b));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex::new)
}

/// Frobenius norm of a matrix over any nalgebra field.
pub fn frobenius<F: ComplexField>(m: &DMatrix<F>) -> F::RealField {
    m.norm()
}

/// Unitary polar factor `U Vᴴ` of `a = U Σ Vᴴ`.
///
/// Maximizes `Re tr(Wᴴ a)` over unitary (orthogonal, for real `F`) `W`.
pub fn polar<F: ComplexField>(a: &DMatrix<F>) -> DMatrix<F> {
    if a.is_empty() {
        return a.clone();
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    u * v_t
}

/// Full unitary `Q` (rows × rows) with `Qᴴ a` upper trapezoidal.
///
/// Householder reflections with the usual phase choice; real input gives a
/// real orthogonal `Q` exactly.
pub fn householder_complete<F: ComplexField>(a: &DMatrix<F>) -> DMatrix<F> {
    let n = a.nrows();
    let mut work = a.clone();
    let mut q = DMatrix::<F>::identity(n, n);
    let two = F::one() + F::one();
    for j in 0..a.ncols().min(n.saturating_sub(1)) {
        let x = work.view((j, j), (n - j, 1)).clone_owned();
        let norm = x.norm();
        if norm == F::RealField::zero() {
            continue;
        }
        let x0 = x[0].clone();
        let phase = if x0.clone().modulus() == F::RealField::zero() {
            F::one()
        } else {
            x0.clone().scale(x0.clone().modulus().recip())
        };
        let mut v = x;
        v[0] = x0 + phase.scale(norm);
        let vnorm = v.norm();
        if vnorm == F::RealField::zero() {
            continue;
        }
        v.unscale_mut(vnorm);
        // work[j.., j..] <- (I - 2 v vᴴ) work[j.., j..]
        {
            let mut block = work.view_mut((j, j), (n - j, a.ncols() - j));
            let vh_block = v.adjoint() * &block;
            block -= (&v * vh_block) * two.clone();
        }
        // q[.., j..] <- q[.., j..] (I - 2 v vᴴ)
        {
            let mut cols = q.view_mut((0, j), (n, n - j));
            let cv = &cols * &v;
            cols -= (cv * v.adjoint()) * two.clone();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cmatmul_matches_naive_product() {
        let a = CMat::<f64>::from_fn(40, 35, |i, j| {
            Complex::new((i as f64 * 0.3 + j as f64).sin(), (i * j) as f64 * 0.01)
        });
        let b = CMat::<f64>::from_fn(35, 41, |i, j| {
            Complex::new((i + 2 * j) as f64 * 0.02, (i as f64 - j as f64).cos())
        });
        let fast = cmatmul(&a, &b);
        let slow = &a * &b;
        assert!((fast - slow).norm() < 1e-10);
    }

    #[test]
    fn householder_triangularizes_real_and_complex() {
        let a = RMat::<f64>::from_fn(7, 3, |i, j| ((i * 5 + j * 3) % 7) as f64 - 2.5);
        let q = householder_complete(&a);
        assert!((q.transpose() * &q - RMat::identity(7, 7)).norm() < 1e-12);
        let r = q.transpose() * &a;
        for j in 0..3 {
            for i in (j + 1)..7 {
                assert!(r[(i, j)].abs() < 1e-12);
            }
        }
        let c = to_complex(&a).map(|z| z * Complex::new(0.6, 0.8));
        let qc = householder_complete(&c);
        let rc = qc.adjoint() * &c;
        for j in 0..3 {
            for i in (j + 1)..7 {
                assert!(rc[(i, j)].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn polar_of_orthogonal_is_itself() {
        let c = 0.6f64;
        let s = 0.8f64;
        let q = RMat::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!((polar(&q) - &q).norm() < 1e-14);
    }
}
