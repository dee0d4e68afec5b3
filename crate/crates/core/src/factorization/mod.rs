//! Min-plus low-rank approximation.
//!
//! Three routes are provided:
//!
//! - [`actual_waypoint`]: factors made of columns of a distance matrix,
//!   with an exhaustive or sampled search over waypoint sets;
//! - [`nonsym_factorize`]: alternating 2-norm regressions for general
//!   matrices, initialised from k-means centres;
//! - [`sym_factorize`]: damped Jacobi-approximated Newton steps for
//!   symmetric distance matrices.

mod general;
pub mod kmeans;
mod symmetric;
mod waypoint;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tropical::{frobenius_distance, mp_multiply, TropicalMatrix};

pub use general::{nonsym_factorize, nonsym_factorize_from, GeneralFactorConfig};
pub use symmetric::{
    jacobi_map, jacobi_map_with, sym_factorize, sym_factorize_from, sym_factorize_with_starts,
    SelectorTable, SymFactorConfig,
};
pub use waypoint::{actual_waypoint, actual_waypoint_search};

/// A pair of factors with the residual they achieve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorPair {
    pub left: TropicalMatrix,
    pub right: TropicalMatrix,
    /// `‖M − left ⊗ right‖_F`.
    pub residual: f64,
    pub restarts_used: usize,
    /// Residual after initialisation and after every iteration of the
    /// winning run.
    pub iteration_trace: Vec<f64>,
}

impl FactorPair {
    pub fn rank(&self) -> usize {
        self.left.cols()
    }

    pub fn product(&self) -> TropicalMatrix {
        mp_multiply(&self.left, &self.right).expect("factor shapes agree")
    }

    /// Running minimum of [`FactorPair::iteration_trace`].
    pub fn best_so_far(&self) -> Vec<f64> {
        self.iteration_trace
            .iter()
            .scan(f64::INFINITY, |best, &r| {
                *best = best.min(r);
                Some(*best)
            })
            .collect()
    }
}

/// `‖D − F ⊗ Fᵀ‖_F` for a given symmetric factor `F`.
pub fn residual_of_given_factor(d: &TropicalMatrix, f: &TropicalMatrix) -> Result<f64> {
    if f.rows() != d.rows() || !d.is_square() {
        return Err(Error::Shape(format!(
            "factor with {} rows does not fit a {}x{} matrix",
            f.rows(),
            d.rows(),
            d.cols()
        )));
    }
    frobenius_distance(d, &mp_multiply(f, &f.transpose())?)
}

fn require_finite(m: &TropicalMatrix, what: &str) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what} has infinite entries; replace them with a finite cap first"
        )))
    }
}

/// Pick the lowest residual; earlier candidates win ties.
fn best_of(candidates: impl IntoIterator<Item = FactorPair>) -> Option<FactorPair> {
    candidates.into_iter().fold(None, |best, c| match best {
        Some(b) if b.residual <= c.residual => Some(b),
        _ => Some(c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn given_factor_cases() {
        let d = TropicalMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(residual_of_given_factor(&d, &d).unwrap(), 0.0);
        let f = TropicalMatrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        assert!(matches!(
            residual_of_given_factor(&d, &f),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn best_so_far_is_running_min() {
        let p = FactorPair {
            left: TropicalMatrix::identity(1),
            right: TropicalMatrix::identity(1),
            residual: 1.0,
            restarts_used: 1,
            iteration_trace: vec![3.0, 2.0, 2.5, 1.0, 1.5],
        };
        assert_eq!(p.best_so_far(), vec![3.0, 2.0, 2.0, 1.0, 1.0]);
    }
}
