//! Observed entries `Ω`, the sampling models that produce them, the masked
//! residual operator `P_Ω`, and Matrix Market I/O.

mod mtx;
mod residual;
mod sampling;

pub use mtx::{read_matrix_market, write_matrix_market};
pub use residual::{residual_on_omega, SparseResidual};
pub use sampling::{sample_bernoulli, sample_uniform};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Observed entries of an `n1 × n2` matrix in coordinate form.
///
/// Indices are zero-based, unique and sorted row-major; `values[k]` is the
/// observation at `indices[k]`. Row and column groupings are precomputed so
/// per-row and per-column sweeps cost `O(m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSet<T> {
    n1: usize,
    n2: usize,
    indices: Vec<(usize, usize)>,
    values: Vec<T>,
    row_ptr: Vec<usize>,
    col_ptr: Vec<usize>,
    col_order: Vec<usize>,
}

impl<T: Scalar> ObservationSet<T> {
    /// Builds a set from unordered `(row, col, value)` triples.
    pub fn new(n1: usize, n2: usize, mut entries: Vec<(usize, usize, T)>) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(invalid!("matrix dimensions must be positive"));
        }
        if entries.is_empty() {
            return Err(invalid!("an observation set needs at least one entry"));
        }
        for &(i, j, v) in &entries {
            if i >= n1 || j >= n2 {
                return Err(invalid!("index ({i}, {j}) out of range for {n1}x{n2}"));
            }
            if !v.is_finite() {
                return Err(invalid!("non-finite value at ({i}, {j})"));
            }
        }
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(invalid!("duplicate index ({}, {})", w[0].0, w[0].1));
        }
        let (indices, values) = entries.into_iter().map(|(i, j, v)| ((i, j), v)).unzip();
        Ok(Self::from_sorted(n1, n2, indices, values))
    }

    /// Assumes sorted, unique, in-range indices and finite values.
    pub(crate) fn from_sorted(
        n1: usize,
        n2: usize,
        indices: Vec<(usize, usize)>,
        values: Vec<T>,
    ) -> Self {
        let mut row_ptr = vec![0; n1 + 1];
        let mut col_ptr = vec![0; n2 + 1];
        for &(i, j) in &indices {
            row_ptr[i + 1] += 1;
            col_ptr[j + 1] += 1;
        }
        for k in 0..n1 {
            row_ptr[k + 1] += row_ptr[k];
        }
        for k in 0..n2 {
            col_ptr[k + 1] += col_ptr[k];
        }
        let mut fill = col_ptr.clone();
        let mut col_order = vec![0; indices.len()];
        for (k, &(_, j)) in indices.iter().enumerate() {
            col_order[fill[j]] = k;
            fill[j] += 1;
        }
        Self {
            n1,
            n2,
            indices,
            values,
            row_ptr,
            col_ptr,
            col_order,
        }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Number of observed entries `m`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Empirical sampling rate `m / (n1·n2)`.
    pub fn p_hat(&self) -> T {
        T::lit(self.len() as f64 / (self.n1 as f64 * self.n2 as f64))
    }

    /// Positions (into `indices`/`values`) of the entries in row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Positions (into `indices`/`values`) of the entries in column `j`,
    /// ordered by row.
    pub fn col_positions(&self, j: usize) -> &[usize] {
        &self.col_order[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    /// `‖P_Ω(X⋆)‖_F`.
    pub fn values_norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Whether every row and every column has at least one observation.
    pub fn covers_all_rows_and_cols(&self) -> bool {
        (0..self.n1).all(|i| !self.row_range(i).is_empty())
            && (0..self.n2).all(|j| !self.col_positions(j).is_empty())
    }

    /// `scale · P_Ω(X⋆)` as a sparse operator.
    pub fn scaled(&self, scale: T) -> SparseResidual<'_, T> {
        SparseResidual::new(self, self.values.iter().map(|&v| scale * v).collect())
    }
}
