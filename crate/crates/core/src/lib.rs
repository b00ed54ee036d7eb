//! Block-matrix groups `G_N` with subgroups `K_N = diag(1_α, u, …, u)`, the
//! double-coset product `g ∘_N h`, and tools for watching the convolution of
//! two double cosets concentrate on that product as `N` grows.
//!
//! Three families are supported:
//!
//! * `symmetric`: permutations, with exact coset membership and exact
//!   rational convolution by enumeration;
//! * `unitary_orthogonal`: `U(n)` modulo the orthogonal `K_N`, with certified
//!   distance upper bounds from alternating block Procrustes;
//! * `unitary_conjugation`: `U(α+n)` modulo conjugation by `U(n)`
//!   (operator colligations), with characteristic-function invariants.
//!
//! Numerical code is generic over the real scalar ([`scalar::Real`], `f32` or
//! `f64`); the aliases below fix `f64`, which the experiments use.
//!
//! ```
//! use cosetlab::blockmat::{BlockSpec, PermutationWord};
//! use cosetlab::cosets::{circ_n, FamilyKind};
//! use cosetlab::BlockMatrix64;
//!
//! let swap = PermutationWord::parse("(1 2)", 2).unwrap();
//! let g = BlockMatrix64::from_permutation(swap, None).unwrap();
//! let spec = BlockSpec::new(1, 1, 3, 1).unwrap();
//! let target = circ_n(&g, &g, spec, FamilyKind::Symmetric).unwrap();
//! assert_eq!(target.permutation().unwrap().to_cycles(), "(1 3)");
//! ```

pub mod blockmat;
pub mod cli;
pub mod cosets;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod haar;
pub mod hypergroup_exact;
pub mod scalar;

pub use error::{CosetError, Result};
pub use hypergroup_exact::Probability;

pub type BlockMatrix64 = blockmat::BlockMatrix<f64>;
pub type BlockMatrix32 = blockmat::BlockMatrix<f32>;
pub type CosetTarget64 = cosets::CosetTarget<f64>;
pub type DistanceEstimate64 = geometry::DistanceEstimate<f64>;
pub type KElement64 = cosets::KElement<f64>;
