//! Classical low-rank baselines: truncated SVD and NNMF.

mod nnmf;
mod svd;

pub use nnmf::{nnmf, NnmfResult};
pub use svd::{svd, svd_truncate, SvdResult};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::tropical::TropicalMatrix;

/// Classical view of a finite min-plus matrix.
pub fn to_dense(m: &TropicalMatrix) -> Result<Array2<f64>> {
    if !m.is_finite() {
        return Err(Error::Domain(
            "classical baselines need a finite matrix".into(),
        ));
    }
    Ok(Array2::from_shape_vec(m.shape(), m.as_slice().to_vec()).expect("shape matches data"))
}

pub(crate) fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}
