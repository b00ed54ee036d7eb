use nalgebra::linalg::Schur;
use nalgebra::ComplexField;

use crate::blockmat::{BlockMatrix, BlockName};
use crate::error::{CosetError, Result};
use crate::scalar::{CMat, Complex, Real};

/// Tolerance for grid points of the characteristic function near `σ(d)`.
pub const SINGULAR_TOL: f64 = 1e-8;

/// Deflation tolerances tried in turn, in units of machine epsilon.
const DEFLATION_STEPS: [f64; 3] = [4.0, 64.0, 1024.0];

/// Eigenvalues of a square complex matrix, read off a complex Schur form.
///
/// The shifted QR iteration can stall on tight eigenvalue clusters (large,
/// nearly degenerate eigenspaces). When it does, the deflation tolerance is
/// relaxed step by step; for normal matrices the eigenvalue error stays of
/// the order of that tolerance times the norm.
///
/// # Panics
/// If the iteration stalls at every tolerance.
pub fn eigenvalues<T: Real>(m: &CMat<T>) -> Vec<Complex<T>> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let max_iter = 30 * n;
    let (t, tol) = DEFLATION_STEPS
        .iter()
        .find_map(|&step| {
            let tol = T::default_epsilon() * T::lit(step);
            Schur::try_new(m.clone(), tol, max_iter).map(|s| (s.unpack().1, tol))
        })
        .expect("Schur iteration failed to converge");
    let modulus = |z: Complex<T>| z.norm_sqr().sqrt();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let deflated = |i: usize| {
            modulus(t[(i + 1, i)]) <= tol * T::lit(64.0) * (modulus(t[(i, i)]) + modulus(t[(i + 1, i + 1)]))
        };
        if i + 1 < n && !deflated(i) {
            // Unreduced 2×2 block: roots of λ² − tr λ + det.
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half = Complex::new(T::lit(0.5), T::zero());
            let tr = a + d;
            let disc = ComplexField::sqrt((a - d) * (a - d) + b * c * Complex::new(T::lit(4.0), T::zero()));
            out.push((tr + disc) * half);
            out.push((tr - disc) * half);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

/// Bottleneck (ℓ∞) matching distance between two multisets of equal size:
/// the least `δ` such that some bijection moves every point by at most `δ`.
pub fn matched_spectral_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    assert_eq!(a.len(), b.len(), "spectra must have equal size");
    let n = a.len();
    if n == 0 {
        return T::zero();
    }
    let dist: Vec<Vec<T>> = a
        .iter()
        .map(|x| b.iter().map(|y| (*x - *y).norm_sqr().sqrt()).collect())
        .collect();
    let mut cands: Vec<T> = dist.iter().flatten().copied().collect();
    cands.sort_by(|x, y| x.partial_cmp(y).expect("finite distances"));
    cands.dedup();
    let (mut lo, mut hi) = (0, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&dist, cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands[lo]
}

fn perfect_matching<T: Real>(dist: &[Vec<T>], thr: T) -> bool {
    let n = dist.len();
    let mut match_b = vec![usize::MAX; n];
    fn augment<T: Real>(
        i: usize,
        dist: &[Vec<T>],
        thr: T,
        seen: &mut [bool],
        match_b: &mut [usize],
    ) -> bool {
        for j in 0..dist.len() {
            if dist[i][j] <= thr && !seen[j] {
                seen[j] = true;
                if match_b[j] == usize::MAX || augment(match_b[j], dist, thr, seen, match_b) {
                    match_b[j] = i;
                    return true;
                }
            }
        }
        false
    }
    (0..n).all(|i| augment(i, dist, thr, &mut vec![false; n], &mut match_b))
}

/// `θ(z) = a + b (z − d)⁻¹ c` for `g = [a b; c d]` with the corner size taken
/// from `g`'s spec, evaluated on every grid point.
pub fn colligation_char_function<T: Real>(
    g: &BlockMatrix<T>,
    z_grid: &[Complex<T>],
) -> Result<Vec<CMat<T>>> {
    let spec = g.spec().ok_or(CosetError::MissingSpec)?;
    let alpha = spec.alpha;
    let n = g.dim() - alpha;
    let e = g.entries();
    let a = g.block(BlockName::Corner, BlockName::Corner)?;
    let b = e.view((0, alpha), (alpha, n)).clone_owned();
    let c = e.view((alpha, 0), (n, alpha)).clone_owned();
    let d = e.view((alpha, alpha), (n, n)).clone_owned();
    let spectrum = eigenvalues(&d);
    let tol = T::lit(SINGULAR_TOL);
    z_grid
        .iter()
        .enumerate()
        .map(|(index, &z)| {
            if spectrum.iter().any(|&l| (z - l).norm_sqr().sqrt() <= tol) {
                return Err(CosetError::SingularPoint {
                    index,
                    z: format!("{z}"),
                    tol: SINGULAR_TOL,
                });
            }
            if n == 0 {
                return Ok(a.clone());
            }
            let resolvent = CMat::<T>::from_diagonal_element(n, n, z) - &d;
            let y = resolvent.lu().solve(&c).ok_or_else(|| CosetError::SingularPoint {
                index,
                z: format!("{z}"),
                tol: SINGULAR_TOL,
            })?;
            Ok(&a + &b * y)
        })
        .collect()
}
