//! Haar-random orthogonal and unitary matrices and uniform permutations.
//!
//! Randomness comes from a [`RandomStream`]: ChaCha8 seeded with the 64-bit
//! seed via `seed_from_u64`, with the stream index selecting the ChaCha
//! stream. Gaussians are `rand_distr::StandardNormal` drawn as `f64` and
//! converted to the target scalar, so `f32` and `f64` samples share one
//! sequence. Matrices are filled column by column.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::blockmat::PermutationWord;
use crate::error::{CosetError, Result};
use crate::scalar::{CMat, Complex, RMat, Real};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Haar sample from `O(n)`: QR of a Gaussian matrix, columns of `Q` scaled by
/// the signs of `diag(R)`.
pub fn haar_orthogonal<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> RMat<T> {
    assert!(n >= 1, "haar_orthogonal: n must be positive");
    let data: Vec<T> = (0..n * n).map(|_| T::lit(gaussian(rng))).collect();
    let qr = DMatrix::from_vec(n, n, data).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar sample from `U(n)`: QR of a complex Gaussian matrix, columns of `Q`
/// multiplied by the phases of `diag(R)`.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat<T> {
    assert!(n >= 1, "haar_unitary: n must be positive");
    let data: Vec<Complex<T>> = (0..n * n)
        .map(|_| {
            let re = gaussian(rng);
            let im = gaussian(rng);
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    let qr = DMatrix::from_vec(n, n, data).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let modulus = d.norm_sqr().sqrt();
        if modulus > T::zero() {
            let phase = d / Complex::new(modulus, T::zero());
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Uniform permutation of `{1..n}` by Fisher–Yates.
pub fn uniform_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PermutationWord {
    assert!(n >= 1, "uniform_permutation: n must be positive");
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    PermutationWord::from_zero_based(images).expect("shuffle is a bijection")
}

/// Leading principal `k × k` block `u` of an orthogonal `(k+N)`-matrix.
pub fn top_block<T: Real>(u_full: &RMat<T>, k: usize) -> Result<RMat<T>> {
    let n = u_full.nrows().min(u_full.ncols());
    if k > n {
        return Err(CosetError::DimensionMismatch {
            expected: n,
            actual: k,
        });
    }
    Ok(u_full.view((0, 0), (k, k)).clone_owned())
}
