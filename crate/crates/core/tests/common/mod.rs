#![allow(dead_code)]

use bmc_core::linalg::{thin_qr, DenseMatrix};
use bmc_core::rng::{gaussian_matrix, seeded};
use nalgebra::DMatrix;

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
    gaussian_matrix(rows, cols, &mut seeded(seed))
}

/// Random orthogonal matrix; a reflection half of the time.
pub fn random_orthogonal(r: usize, seed: u64) -> DenseMatrix<f64> {
    let (mut q, _) = thin_qr(&gaussian(r, r, seed)).unwrap();
    if seed % 2 == 1 {
        for i in 0..r {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

pub fn orthonormal(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
    thin_qr(&gaussian(rows, cols, seed)).unwrap().0
}

pub fn to_na(a: &DenseMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

/// Singular values from nalgebra, descending.
pub fn na_singular_values(a: &DenseMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
