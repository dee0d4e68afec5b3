//! Alternating factorization `A ⊗ B ≈ M` of general finite matrices.

use rayon::prelude::*;

use super::kmeans::kmeans;
use super::{best_of, require_finite, FactorPair};
use crate::error::{Error, Result};
use crate::regression::{chebyshev_regression, newton_directed_line_search, LineSearchConfig};
use crate::rng::restart_rng;
use crate::tropical::{frobenius_distance, mp_multiply, TropicalMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralFactorConfig {
    pub rank: usize,
    pub max_iter: usize,
    /// Stop once no factor entry moves by more than this.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Update the left factor against the freshly updated right factor
    /// instead of the previous one.
    pub gauss_seidel: bool,
    pub kmeans_iter: usize,
    pub line_search: LineSearchConfig,
}

impl GeneralFactorConfig {
    pub fn new(rank: usize) -> Self {
        GeneralFactorConfig {
            rank,
            max_iter: 100,
            tol: 1e-8,
            restarts: 1,
            seed: 0,
            gauss_seidel: false,
            kmeans_iter: 50,
            line_search: LineSearchConfig::default(),
        }
    }

    fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.rank == 0 || self.rank > n.min(d) {
            return Err(Error::Config(format!(
                "rank {} must lie in 1..={}",
                self.rank,
                n.min(d)
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Config("at least one restart is required".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Config("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

fn residual(m: &TropicalMatrix, a: &TropicalMatrix, b: &TropicalMatrix) -> Result<f64> {
    frobenius_distance(m, &mp_multiply(a, b)?)
}

/// Right factor whose columns are the ∞-norm infimum solutions against `a`.
fn fit_right(a: &TropicalMatrix, m: &TropicalMatrix) -> Result<TropicalMatrix> {
    let mut columns = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        columns.push(chebyshev_regression(a, &m.column(j))?.solution);
    }
    Ok(TropicalMatrix::from_rows(&columns)?.transpose())
}

fn update_right(
    a: &TropicalMatrix,
    b: &TropicalMatrix,
    m: &TropicalMatrix,
    cfg: &LineSearchConfig,
) -> Result<TropicalMatrix> {
    let mut columns = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let out = newton_directed_line_search(a, &m.column(j), &b.column(j), cfg)?;
        columns.push(out.solution);
    }
    Ok(TropicalMatrix::from_rows(&columns)?.transpose())
}

fn update_left(
    a: &TropicalMatrix,
    b: &TropicalMatrix,
    m: &TropicalMatrix,
    cfg: &LineSearchConfig,
) -> Result<TropicalMatrix> {
    // row i of A solves Bᵀ ⊗ a_iᵀ ≈ m_iᵀ
    let bt = b.transpose();
    let mut rows = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let out = newton_directed_line_search(&bt, m.row(i), a.row(i), cfg)?;
        rows.push(out.solution);
    }
    TropicalMatrix::from_rows(&rows)
}

/// Run the alternation from given factors; `right = None` fits the right
/// factor by ∞-norm regression first. The best iterate seen is returned.
pub fn nonsym_factorize_from(
    m: &TropicalMatrix,
    left: TropicalMatrix,
    right: Option<TropicalMatrix>,
    cfg: &GeneralFactorConfig,
) -> Result<FactorPair> {
    require_finite(m, "the matrix to factor")?;
    require_finite(&left, "the initial left factor")?;
    if left.rows() != m.rows() {
        return Err(Error::Shape(format!(
            "left factor has {} rows, matrix has {}",
            left.rows(),
            m.rows()
        )));
    }
    let mut a = left;
    let mut b = match right {
        Some(b) => {
            require_finite(&b, "the initial right factor")?;
            if b.shape() != (a.cols(), m.cols()) {
                return Err(Error::Shape(format!(
                    "right factor is {:?}, expected {:?}",
                    b.shape(),
                    (a.cols(), m.cols())
                )));
            }
            b
        }
        None => fit_right(&a, m)?,
    };

    let mut r = residual(m, &a, &b)?;
    let mut trace = vec![r];
    let mut best = (a.clone(), b.clone(), r);
    for _ in 0..cfg.max_iter {
        if r == 0.0 {
            break;
        }
        let b_next = update_right(&a, &b, m, &cfg.line_search)?;
        let basis = if cfg.gauss_seidel { &b_next } else { &b };
        let a_next = update_left(&a, basis, m, &cfg.line_search)?;
        let change = a_next.max_abs_diff(&a).max(b_next.max_abs_diff(&b));
        a = a_next;
        b = b_next;
        r = residual(m, &a, &b)?;
        trace.push(r);
        if r < best.2 {
            best = (a.clone(), b.clone(), r);
        }
        if change < cfg.tol {
            break;
        }
    }
    Ok(FactorPair {
        left: best.0,
        right: best.1,
        residual: best.2,
        restarts_used: 1,
        iteration_trace: trace,
    })
}

fn kmeans_left(m: &TropicalMatrix, cfg: &GeneralFactorConfig, restart: usize) -> TropicalMatrix {
    let points: Vec<Vec<f64>> = (0..m.cols()).map(|j| m.column(j)).collect();
    let mut rng = restart_rng(cfg.seed, restart as u64);
    let centers = kmeans(&points, cfg.rank, cfg.kmeans_iter, &mut rng);
    TropicalMatrix::from_rows(&centers)
        .expect("centres share the column length")
        .transpose()
}

/// Rank-`cfg.rank` factorization of a finite matrix, keeping the best of
/// `cfg.restarts` k-means initialisations.
pub fn nonsym_factorize(m: &TropicalMatrix, cfg: &GeneralFactorConfig) -> Result<FactorPair> {
    require_finite(m, "the matrix to factor")?;
    cfg.validate(m.rows(), m.cols())?;
    let runs: Vec<FactorPair> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| nonsym_factorize_from(m, kmeans_left(m, cfg, r), None, cfg))
        .collect::<Result<_>>()?;
    let mut best = best_of(runs).expect("restarts >= 1");
    best.restarts_used = cfg.restarts;
    Ok(best)
}
