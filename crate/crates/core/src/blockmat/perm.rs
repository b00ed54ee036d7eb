//! Exact permutations of `{1..n}`.
//!
//! Stored zero-based; every external form (JSON, cycle notation, image lists)
//! is one-based. A permutation `σ` corresponds to the 0-1 matrix with
//! `P[σ(j)][j] = 1`, so matrix products match composition:
//! `P(σ) P(τ) = P(σ ∘ τ)`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CosetError, Result};
use crate::scalar::{cone, czero, CMat, Real};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermutationWord {
    images: Vec<usize>,
}

impl PermutationWord {
    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// From one-based images `σ(1), …, σ(n)`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        if images.iter().any(|&v| v == 0) {
            return Err(CosetError::InvalidPermutation(
                "images are one-based; found 0".into(),
            ));
        }
        Self::from_zero_based(images.iter().map(|&v| v - 1).collect())
    }

    pub fn from_zero_based(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n {
                return Err(CosetError::InvalidPermutation(format!(
                    "image {} out of range 1..={n}",
                    v + 1
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(CosetError::InvalidPermutation(format!(
                    "image {} repeated",
                    v + 1
                )));
            }
        }
        Ok(Self { images })
    }

    /// Transposition of two zero-based points.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Self { images }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Zero-based image of a zero-based point.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.images.iter().map(|&v| v + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree(), "compose: degree mismatch");
        Self {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v] = i;
        }
        Self { images: inv }
    }

    /// Extends with fixed points up to `degree`.
    pub fn padded(&self, degree: usize) -> Result<Self> {
        if degree < self.degree() {
            return Err(CosetError::DimensionMismatch {
                expected: degree,
                actual: self.degree(),
            });
        }
        let mut images = self.images.clone();
        images.extend(self.degree()..degree);
        Ok(Self { images })
    }

    pub fn to_matrix<T: Real>(&self) -> CMat<T> {
        let n = self.degree();
        let mut m = CMat::from_element(n, n, czero());
        for (j, &i) in self.images.iter().enumerate() {
            m[(i, j)] = cone();
        }
        m
    }

    /// Recovers the permutation from an exact 0-1 matrix.
    pub fn from_matrix<T: Real>(m: &CMat<T>) -> Option<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return None;
        }
        let mut images = Vec::with_capacity(n);
        for j in 0..n {
            let mut hit = None;
            for i in 0..n {
                let z = m[(i, j)];
                if z.im != T::zero() {
                    return None;
                }
                if z.re == T::one() {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(i);
                } else if z.re != T::zero() {
                    return None;
                }
            }
            images.push(hit?);
        }
        Self::from_zero_based(images).ok()
    }

    /// Parses cycle notation `"(1 2)(3 5 4)"`, an image list `"2 1 3"` /
    /// `"[2,1,3]"`, or `"identity"`/`"id"`. A leading `(` means cycles.
    /// The result is padded with fixed points up to `degree`.
    pub fn parse(text: &str, degree: usize) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("identity") || t.eq_ignore_ascii_case("id") || t == "()" {
            return Ok(Self::identity(degree));
        }
        if t.starts_with('(') {
            return Self::parse_cycles(t, degree);
        }
        let body = t.trim_start_matches('[').trim_end_matches(']');
        let images = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>().map_err(|_| {
                    CosetError::InvalidPermutation(format!("`{s}` is not a positive integer"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(&images)?.padded(degree)
    }

    fn parse_cycles(t: &str, degree: usize) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        let mut rest = t;
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| {
                CosetError::InvalidPermutation(format!("expected `(` in `{t}`"))
            })?;
            let close = open.find(')').ok_or_else(|| {
                CosetError::InvalidPermutation(format!("unbalanced parenthesis in `{t}`"))
            })?;
            let points = open[..close]
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| match s.parse::<usize>() {
                    Ok(v) if v >= 1 && v <= degree => Ok(v - 1),
                    _ => Err(CosetError::InvalidPermutation(format!(
                        "cycle entry `{s}` is not in 1..={degree}"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            for &p in &points {
                if std::mem::replace(&mut touched[p], true) {
                    return Err(CosetError::InvalidPermutation(format!(
                        "point {} appears in more than one cycle",
                        p + 1
                    )));
                }
            }
            for (i, &p) in points.iter().enumerate() {
                images[p] = points[(i + 1) % points.len()];
            }
            rest = open[close + 1..].trim_start();
        }
        Ok(Self { images })
    }

    /// Disjoint-cycle notation, one-based; `"()"` for the identity.
    pub fn to_cycles(&self) -> String {
        let mut seen = vec![false; self.degree()];
        let mut out = String::new();
        for start in 0..self.degree() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            out.push('(');
            let mut p = start;
            let mut first = true;
            while !seen[p] {
                seen[p] = true;
                if !first {
                    out.push(' ');
                }
                out.push_str(&(p + 1).to_string());
                first = false;
                p = self.images[p];
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

impl fmt::Debug for PermutationWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{}[{}]", self.to_cycles(), self.degree())
    }
}

impl fmt::Display for PermutationWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycles())
    }
}

impl Serialize for PermutationWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PermutationWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Self::from_images(&images).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cycles_and_images_agree() {
        let a = PermutationWord::parse("(1 2)", 5).unwrap();
        let b = PermutationWord::parse("2 1 3 4 5", 5).unwrap();
        let c = PermutationWord::parse("[2,1]", 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.to_cycles(), "(1 2)");
        assert_eq!(PermutationWord::identity(3).to_cycles(), "()");
    }

    #[test]
    fn conjugating_a_transposition() {
        let s12 = PermutationWord::parse("(1 2)", 5).unwrap();
        let s23 = PermutationWord::parse("(2 3)", 5).unwrap();
        let r = s12.compose(&s23).compose(&s12);
        assert_eq!(r, PermutationWord::parse("(1 3)", 5).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PermutationWord::from_images(&[1, 1, 2]).is_err());
        assert!(PermutationWord::from_images(&[0, 1]).is_err());
        assert!(PermutationWord::parse("(1 9)", 4).is_err());
        assert!(PermutationWord::parse("(1 2)(2 3)", 4).is_err());
        assert!(PermutationWord::parse("(1 2", 4).is_err());
        assert!(PermutationWord::parse("1 2 3", 2).is_err());
    }

    #[test]
    fn matrix_product_is_composition() {
        let a = PermutationWord::parse("(1 2 3)", 4).unwrap();
        let b = PermutationWord::parse("(2 4)", 4).unwrap();
        let prod = a.to_matrix::<f64>() * b.to_matrix::<f64>();
        assert_eq!(prod, a.compose(&b).to_matrix::<f64>());
    }

    fn perm_strategy() -> impl Strategy<Value = PermutationWord> {
        (1usize..9)
            .prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|v| PermutationWord::from_zero_based(v).unwrap())
    }

    proptest! {
        #[test]
        fn word_matrix_word_round_trip(p in perm_strategy()) {
            let m = p.to_matrix::<f64>();
            prop_assert_eq!(PermutationWord::from_matrix(&m), Some(p.clone()));
            let reparsed = PermutationWord::parse(&p.to_cycles(), p.degree()).unwrap();
            prop_assert_eq!(reparsed, p.clone());
            prop_assert!(p.compose(&p.inverse()).is_identity());
        }
    }
}
