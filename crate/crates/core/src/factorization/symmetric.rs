//! Symmetric factorization `F ⊗ Fᵀ ≈ D` by damped, Jacobi-approximated
//! Newton steps.
//!
//! For a fixed selector table `K(i, j) = argmin_k (f_ik + f_jk)` the squared
//! residual is the quadratic
//! `q(F') = Σ_ij (f'_{i,K(i,j)} + f'_{j,K(i,j)} − d_ij)²`, and one Jacobi
//! sweep on its normal equations updates every entry independently:
//!
//! ```text
//! f_ik ← (d_ii·[K(i,i)=k] + Σ_{j≠i, K(i,j)=k} (d_ij − f'_jk))
//!        / (2·[K(i,i)=k] + #{j≠i : K(i,j)=k})
//! ```
//!
//! Entries with an empty denominator are left untouched.

use rand::seq::index::sample;
use rayon::prelude::*;

use super::{best_of, require_finite, FactorPair};
use crate::error::{Error, Result};
use crate::rng::restart_rng;
use crate::tropical::{is_idempotent, TropicalMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SymFactorConfig {
    pub rank: usize,
    /// Jacobi sweeps per Newton step.
    pub jacobi_steps: usize,
    /// Initial step fraction towards the approximate Newton point.
    pub mu: f64,
    /// Factor applied to `mu` after `patience` iterations without improvement.
    pub mu_decay: f64,
    pub patience: usize,
    pub mu_floor: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Stop a run once no entry of `F` moves by more than this.
    pub tol: f64,
}

impl SymFactorConfig {
    pub fn new(rank: usize) -> Self {
        SymFactorConfig {
            rank,
            jacobi_steps: 5,
            mu: 0.5,
            mu_decay: 0.5,
            patience: 5,
            mu_floor: 1e-3,
            max_iter: 100,
            restarts: 100,
            seed: 0,
            tol: 1e-12,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.rank == 0 || self.rank > n {
            return Err(Error::Config(format!("rank {} must lie in 1..={n}", self.rank)));
        }
        if self.jacobi_steps == 0 {
            return Err(Error::Config("at least one Jacobi step is required".into()));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::Config(format!("mu = {} must lie in (0, 1]", self.mu)));
        }
        if !(self.mu_decay > 0.0 && self.mu_decay <= 1.0) {
            return Err(Error::Config("mu_decay must lie in (0, 1]".into()));
        }
        if !(self.mu_floor > 0.0 && self.mu_floor <= self.mu) {
            return Err(Error::Config("mu_floor must lie in (0, mu]".into()));
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

/// `K(i, j)`: the smallest `k` minimising `f_ik + f_jk`, for all pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectorTable {
    n: usize,
    table: Vec<usize>,
}

impl SelectorTable {
    pub fn new(f: &TropicalMatrix) -> Self {
        selectors_and_residual(f, None).0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.table[i * self.n + j]
    }
}

/// Selector table of `f`, and `‖D − F ⊗ Fᵀ‖_F²` when `d` is given.
fn selectors_and_residual(f: &TropicalMatrix, d: Option<&TropicalMatrix>) -> (SelectorTable, f64) {
    let (n, m) = f.shape();
    let mut table = vec![0usize; n * n];
    let mut r2 = 0.0;
    for i in 0..n {
        let fi = f.row(i);
        for j in i..n {
            let fj = f.row(j);
            let mut best = 0;
            let mut best_val = f64::INFINITY;
            for k in 0..m {
                let v = fi[k] + fj[k];
                if v < best_val {
                    best_val = v;
                    best = k;
                }
            }
            table[i * n + j] = best;
            table[j * n + i] = best;
            if let Some(d) = d {
                let e = best_val - d.get(i, j);
                r2 += if i == j { e * e } else { 2.0 * e * e };
            }
        }
    }
    (SelectorTable { n, table }, r2)
}

fn check_pair(d: &TropicalMatrix, f: &TropicalMatrix) -> Result<()> {
    if !d.is_square() || f.rows() != d.rows() {
        return Err(Error::Shape(format!(
            "factor of shape {:?} does not fit a {:?} matrix",
            f.shape(),
            d.shape()
        )));
    }
    require_finite(d, "the distance matrix")?;
    require_finite(f, "the factor")
}

/// One Jacobi sweep for the quadratic frozen at `selectors`, applied to `fp`.
pub fn jacobi_map_with(
    d: &TropicalMatrix,
    selectors: &SelectorTable,
    fp: &TropicalMatrix,
) -> TropicalMatrix {
    let (n, m) = fp.shape();
    let mut num = vec![0.0; n * m];
    let mut den = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..n {
            let k = selectors.get(i, j);
            if i == j {
                num[i * m + k] += d.get(i, i);
                den[i * m + k] += 2.0;
            } else {
                num[i * m + k] += d.get(i, j) - fp.get(j, k);
                den[i * m + k] += 1.0;
            }
        }
    }
    let data = (0..n * m)
        .map(|idx| {
            if den[idx] == 0.0 {
                fp.as_slice()[idx]
            } else {
                num[idx] / den[idx]
            }
        })
        .collect();
    TropicalMatrix::from_raw(n, m, data)
}

/// `J_F(F')`: one Jacobi sweep with selectors taken from `f`, applied to `fp`.
pub fn jacobi_map(
    d: &TropicalMatrix,
    f: &TropicalMatrix,
    fp: &TropicalMatrix,
) -> Result<TropicalMatrix> {
    check_pair(d, f)?;
    check_pair(d, fp)?;
    if f.cols() != fp.cols() {
        return Err(Error::Shape("F and F' must have the same rank".into()));
    }
    Ok(jacobi_map_with(d, &SelectorTable::new(f), fp))
}

/// A single damped-Newton run from the factor `f0`; returns the best iterate.
pub fn sym_factorize_from(
    d: &TropicalMatrix,
    f0: TropicalMatrix,
    cfg: &SymFactorConfig,
) -> Result<FactorPair> {
    check_pair(d, &f0)?;
    if !d.is_symmetric() {
        return Err(Error::Shape("symmetric factorization needs a symmetric matrix".into()));
    }
    let mut f = f0;
    let (mut selectors, r2) = selectors_and_residual(&f, Some(d));
    let mut trace = vec![r2.sqrt()];
    let mut best = (f.clone(), r2.sqrt());
    let mut mu = cfg.mu;
    let mut stall = 0;

    for _ in 0..cfg.max_iter {
        if best.1 == 0.0 {
            break;
        }
        let mut newton = f.clone();
        for _ in 0..cfg.jacobi_steps {
            newton = jacobi_map_with(d, &selectors, &newton);
        }
        let data: Vec<f64> = newton
            .as_slice()
            .iter()
            .zip(f.as_slice())
            .map(|(nv, fv)| mu * nv + (1.0 - mu) * fv)
            .collect();
        let next = TropicalMatrix::from_raw(f.rows(), f.cols(), data);
        let change = next.max_abs_diff(&f);
        f = next;
        let (s, r2) = selectors_and_residual(&f, Some(d));
        selectors = s;
        let r = r2.sqrt();
        trace.push(r);
        if r < best.1 {
            best = (f.clone(), r);
            stall = 0;
        } else {
            stall += 1;
            if stall >= cfg.patience {
                mu = (mu * cfg.mu_decay).max(cfg.mu_floor);
                stall = 0;
            }
        }
        if change <= cfg.tol {
            break;
        }
    }

    let (left, residual) = best;
    Ok(FactorPair {
        right: left.transpose(),
        left,
        residual,
        restarts_used: 1,
        iteration_trace: trace,
    })
}

fn random_waypoint_start(d: &TropicalMatrix, cfg: &SymFactorConfig, restart: usize) -> TropicalMatrix {
    let mut rng = restart_rng(cfg.seed, restart as u64);
    let mut w = sample(&mut rng, d.rows(), cfg.rank).into_vec();
    w.sort_unstable();
    d.select_columns(&w).expect("waypoints are in range")
}

/// Best of `cfg.restarts` runs from random waypoint initialisations plus
/// one run from each of `starts`. Candidates are compared in order
/// (extra starts after the random ones), earlier ones winning ties.
pub fn sym_factorize_with_starts(
    d: &TropicalMatrix,
    cfg: &SymFactorConfig,
    starts: &[TropicalMatrix],
) -> Result<FactorPair> {
    if !d.is_square() || !d.is_symmetric() {
        return Err(Error::Shape("symmetric factorization needs a symmetric matrix".into()));
    }
    require_finite(d, "the distance matrix")?;
    cfg.validate(d.rows())?;
    if let Some(s) = starts.iter().find(|s| s.shape() != (d.rows(), cfg.rank)) {
        return Err(Error::Shape(format!(
            "start factor is {:?}, expected {:?}",
            s.shape(),
            (d.rows(), cfg.rank)
        )));
    }
    if !is_idempotent(d, 1e-9) {
        log::warn!("distance matrix is not idempotent; the factorization may be poor");
    }
    let total = cfg.restarts + starts.len();
    let runs: Vec<FactorPair> = (0..total)
        .into_par_iter()
        .map(|r| {
            let f0 = if r < cfg.restarts {
                random_waypoint_start(d, cfg, r)
            } else {
                starts[r - cfg.restarts].clone()
            };
            sym_factorize_from(d, f0, cfg)
        })
        .collect::<Result<_>>()?;
    let mut best = best_of(runs).expect("at least one run");
    best.restarts_used = total;
    Ok(best)
}

/// Symmetric rank-`cfg.rank` factorization with random waypoint restarts.
pub fn sym_factorize(d: &TropicalMatrix, cfg: &SymFactorConfig) -> Result<FactorPair> {
    sym_factorize_with_starts(d, cfg, &[])
}
