use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::{Error, Result};

/// Symmetric sparse matrix in compressed row form. Both triangles are
/// stored, so rows double as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Build from off-diagonal pairs (mirrored automatically) and diagonal
    /// entries. Duplicates are summed in input order.
    pub fn from_parts(n: usize, off: &[(usize, usize, f64)], diag: &[f64]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * off.len() + n);
        for &(i, j, v) in off {
            entries.push((i, j, v));
            entries.push((j, i, v));
        }
        for (i, &d) in diag.iter().enumerate() {
            entries.push((i, i, d));
        }
        Self::from_entries(n, entries)
    }

    /// Build from entries that are already symmetric.
    pub(crate) fn from_entries(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `x^T A x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    /// `A + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.n);
        for i in 0..self.n {
            entries.extend(self.row(i).map(|(j, v)| (i, j, v)));
            entries.push((i, i, d[i]));
        }
        Self::from_entries(self.n, entries)
    }

    /// Principal submatrix on the listed indices (in that order).
    pub fn principal(&self, keep: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let mut entries = Vec::new();
        for (k, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos[j] != usize::MAX {
                    entries.push((k, pos[j], v));
                }
            }
        }
        Self::from_entries(keep.len(), entries)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i][j] = v;
            }
        }
        d
    }

    /// Sparse Cholesky factorization; fails unless the matrix is positive definite.
    pub fn factor(&self) -> Result<Factor> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.push(Triplet::new(i, j, v));
            }
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(self.n, self.n, &t)
            .map_err(|e| Error::Assembly(format!("sparse matrix construction failed: {e:?}")))?;
        let llt = a.sp_cholesky(Side::Lower).map_err(|e| Error::Numeric {
            message: format!("Cholesky factorization failed: {e:?}"),
            residual: f64::NAN,
        })?;
        Ok(Factor { llt, n: self.n })
    }
}

/// Cholesky factor of a [`SparseSym`].
pub struct Factor {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl Factor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(m.as_mut());
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }

    /// Solve for several right-hand sides at once.
    pub fn solve_many(&self, bs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut m = Mat::<f64>::from_fn(self.n, bs.len(), |i, j| bs[j][i]);
        self.llt.solve_in_place(m.as_mut());
        (0..bs.len()).map(|j| (0..self.n).map(|i| m[(i, j)]).collect()).collect()
    }
}

/// Solve `A x = b` with the factor of `A`, refining until the relative
/// residual drops below `tol`.
pub(crate) fn solve_refined(a: &SparseSym, f: &Factor, b: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
    let bn = norm(b);
    if bn == 0.0 {
        return Ok((vec![0.0; b.len()], 0.0));
    }
    let mut x = f.solve(b);
    let mut res = f64::INFINITY;
    for _ in 0..4 {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        res = norm(&r) / bn;
        if res <= tol {
            return Ok((x, res));
        }
        let dx = f.solve(&r);
        for (x, d) in x.iter_mut().zip(dx) {
            *x += d;
        }
    }
    Err(Error::Numeric { message: "linear solve did not reach tolerance".into(), residual: res })
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
