use crate::scalar::{cmatmul, CMat, Real};

/// Largest singular value; `0` for an empty matrix.
pub fn operator_norm<T: Real>(m: &CMat<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    if m.iter().all(|z| z.re == T::zero() && z.im == T::zero()) {
        return T::zero();
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// `‖mᴴm − I‖ ≤ tol` in operator norm.
pub fn is_unitary<T: Real>(m: &CMat<T>, tol: T) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let n = m.nrows();
    let gram = cmatmul(&m.adjoint(), m) - CMat::<T>::identity(n, n);
    operator_norm(&gram) <= tol
}
