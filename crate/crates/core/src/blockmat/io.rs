//! JSON matrix files: `{"dim": n, "re": [[..]], "im": [[..]]}` (row-major)
//! or `{"perm": [images]}` (one-based).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BlockMatrix, BlockSpec, PermutationWord};
use crate::error::{CosetError, Result};
use crate::scalar::{CMat, Complex, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixFile {
    Permutation {
        perm: PermutationWord,
    },
    Dense {
        dim: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
}

impl MatrixFile {
    pub fn from_matrix<T: Real>(m: &BlockMatrix<T>) -> Self {
        if let Some(p) = m.exact_permutation() {
            return MatrixFile::Permutation { perm: p.clone() };
        }
        let e = m.entries();
        let rows = |f: &dyn Fn(Complex<T>) -> T| {
            (0..e.nrows())
                .map(|i| (0..e.ncols()).map(|j| f(e[(i, j)]).as_f64()).collect())
                .collect()
        };
        MatrixFile::Dense {
            dim: e.nrows(),
            re: rows(&|z| z.re),
            im: rows(&|z| z.im),
        }
    }

    pub fn to_matrix<T: Real>(&self, spec: Option<BlockSpec>) -> Result<BlockMatrix<T>> {
        match self {
            MatrixFile::Permutation { perm } => BlockMatrix::from_permutation(perm.clone(), spec),
            MatrixFile::Dense { dim, re, im } => {
                let n = *dim;
                let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
                if !shape_ok(re) || !shape_ok(im) {
                    return Err(CosetError::Config(format!(
                        "matrix file: `re` and `im` must both be {n}x{n}"
                    )));
                }
                let entries = CMat::<T>::from_fn(n, n, |i, j| {
                    Complex::new(T::lit(re[i][j]), T::lit(im[i][j]))
                });
                Ok(BlockMatrix::from_entries(entries, spec)?.detect_permutation())
            }
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CosetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CosetError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix file serializes")
    }
}
