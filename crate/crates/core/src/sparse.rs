//! Compressed-column storage and thin wrappers around the sparse direct solvers.

use crate::error::{Error, Result};
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat, SymbolicSparseColMatRef};
use faer::{c64, Mat};
use std::sync::Arc;

/// Sparsity pattern of a square matrix in compressed-column form with sorted rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl Pattern {
    /// Pattern containing every `(row, col)` pair given.
    pub fn from_entries(n: usize, mut entries: Vec<(usize, usize)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c)| (c, r));
        entries.dedup();
        let mut col_ptr = vec![0; n + 1];
        for &(_, c) in &entries {
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx = entries.into_iter().map(|(r, _)| r).collect();
        Pattern { n, col_ptr, row_idx }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Storage slot of entry `(row, col)`.
    pub fn slot(&self, row: usize, col: usize) -> Option<usize> {
        let (s, e) = (self.col_ptr[col], self.col_ptr[col + 1]);
        self.row_idx[s..e].binary_search(&row).ok().map(|k| s + k)
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.col_ptr[col]..self.col_ptr[col + 1]).map(move |k| (self.row_idx[k], k))
    }

    fn symbolic(&self) -> SymbolicSparseColMatRef<'_, usize> {
        SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.col_ptr, None, &self.row_idx)
    }

    fn symbolic_owned(&self) -> SymbolicSparseColMat<usize> {
        SymbolicSparseColMat::new_checked(self.n, self.n, self.col_ptr.clone(), None, self.row_idx.clone())
    }
}

/// Square sparse matrix sharing its pattern with other matrices.
#[derive(Clone, Debug)]
pub struct CscMatrix<T> {
    pub pattern: Arc<Pattern>,
    pub values: Vec<T>,
}

impl<T: Copy + Default + std::ops::AddAssign + std::ops::Mul<Output = T>> CscMatrix<T> {
    pub fn zeros(pattern: Arc<Pattern>) -> Self {
        let values = vec![T::default(); pattern.nnz()];
        CscMatrix { pattern, values }
    }

    /// Sums duplicate triplets in the order given, so symmetric insertions yield exactly
    /// symmetric values.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        let pattern = Arc::new(Pattern::from_entries(n, triplets.iter().map(|&(r, c, _)| (r, c)).collect()));
        let mut m = Self::zeros(pattern);
        m.accumulate(triplets);
        m
    }

    /// Adds triplets whose positions must already be in the pattern.
    pub fn accumulate(&mut self, triplets: &[(usize, usize, T)]) {
        for &(r, c, v) in triplets {
            let k = self.pattern.slot(r, c).expect("triplet outside the sparsity pattern");
            self.values[k] += v;
        }
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.pattern.slot(row, col).map_or(T::default(), |k| self.values[k])
    }

    pub fn matvec<X>(&self, x: &[X]) -> Vec<X>
    where
        X: Copy + Default + std::ops::AddAssign + std::ops::Mul<T, Output = X>,
    {
        let mut y = vec![X::default(); self.dim()];
        for c in 0..self.dim() {
            for (r, k) in self.pattern.column(c) {
                y[r] += x[c] * self.values[k];
            }
        }
        y
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim()).flat_map(move |c| self.pattern.column(c).map(move |(r, k)| (r, c, self.values[k])))
    }
}

/// Maximum absolute asymmetry `|A_ij - A_ji|` over the stored entries.
pub fn max_asymmetry(a: &CscMatrix<c64>) -> f64 {
    a.entries().map(|(r, c, v)| (v - a.get(c, r)).norm()).fold(0.0, f64::max)
}

/// Sparse LU factorization of a complex matrix.
pub struct ComplexLu {
    lu: Lu<usize, c64>,
    n: usize,
}

/// Symbolic LU analysis reusable for any matrix on the same pattern.
#[derive(Clone)]
pub struct ComplexLuSymbolic {
    symbolic: SymbolicLu<usize>,
    pattern: Arc<Pattern>,
}

impl ComplexLuSymbolic {
    pub fn new(pattern: Arc<Pattern>) -> Result<Self> {
        let symbolic = SymbolicLu::try_new(pattern.symbolic())
            .map_err(|e| Error::Singular(format!("symbolic LU analysis failed: {e:?}")))?;
        Ok(ComplexLuSymbolic { symbolic, pattern })
    }

    pub fn factor(&self, a: &CscMatrix<c64>) -> Result<ComplexLu> {
        assert!(Arc::ptr_eq(&self.pattern, &a.pattern) || *self.pattern == *a.pattern);
        let mat = SparseColMatRef::new(self.pattern.symbolic(), &a.values);
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), mat)
            .map_err(|e| Error::Singular(format!("LU factorization failed: {e:?}")))?;
        Ok(ComplexLu { lu, n: a.dim() })
    }
}

impl ComplexLu {
    pub fn solve(&self, rhs: &[c64]) -> Vec<c64> {
        let mut b = Mat::<c64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(b.as_mut());
        (0..self.n).map(|i| b[(i, 0)]).collect()
    }
}

/// Sparse Cholesky factorization of a real symmetric positive definite matrix.
pub struct RealCholesky {
    llt: Llt<usize, f64>,
    n: usize,
}

impl RealCholesky {
    pub fn new(a: &CscMatrix<f64>) -> Result<Self> {
        let sym = SymbolicLlt::try_new(a.pattern.symbolic(), faer::Side::Lower)
            .map_err(|e| Error::Singular(format!("symbolic Cholesky failed: {e:?}")))?;
        let owned = a.pattern.symbolic_owned();
        let mat = SparseColMatRef::new(owned.as_ref(), &a.values);
        let llt = Llt::try_new_with_symbolic(sym, mat, faer::Side::Lower)
            .map_err(|e| Error::Singular(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(RealCholesky { llt, n: a.dim() })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.llt.solve_in_place(b.as_mut());
        (0..self.n).map(|i| b[(i, 0)]).collect()
    }
}

pub fn norm2(v: &[c64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
