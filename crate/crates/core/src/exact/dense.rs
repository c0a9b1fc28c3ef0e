use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::SparseOperator;

/// Largest matrix [`dense_spectrum`] diagonalizes by default.
pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// Full eigendecomposition, eigenvalues ascending, eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn vector(&self, n: usize) -> Vec<f64> {
        self.vectors.column(n).iter().copied().collect()
    }

    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }
}

pub fn dense_spectrum(h: &SparseOperator) -> Result<Spectrum> {
    dense_spectrum_with_limit(h, DEFAULT_DENSE_LIMIT)
}

pub fn dense_spectrum_with_limit(h: &SparseOperator, limit: usize) -> Result<Spectrum> {
    if h.dim() > limit {
        return Err(Error::Dimension { dim: h.dim(), limit });
    }
    dense_matrix_spectrum(h.to_dense(), limit)
}

pub fn dense_matrix_spectrum(m: DMatrix<f64>, limit: usize) -> Result<Spectrum> {
    if m.nrows() != m.ncols() {
        return Err(Error::Mismatch(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    if m.nrows() > limit {
        return Err(Error::Dimension { dim: m.nrows(), limit });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    Ok(Spectrum { values, vectors })
}
