//! Non-negative matrix factorization with Frobenius multiplicative updates.

use ndarray::Array2;
use rand::Rng;

use super::frobenius;
use crate::error::{Error, Result};
use crate::rng::restart_rng;

/// Floor applied to every factor entry after an update.
const FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NnmfResult {
    pub w: Array2<f64>,
    pub h: Array2<f64>,
    /// `‖M − WH‖_F` at initialisation and after every iteration.
    pub residual_trace: Vec<f64>,
}

impl NnmfResult {
    pub fn residual(&self) -> f64 {
        *self.residual_trace.last().expect("trace is never empty")
    }
}

fn update(factor: &mut Array2<f64>, numer: &Array2<f64>, denom: &Array2<f64>) {
    ndarray::Zip::from(factor)
        .and(numer)
        .and(denom)
        .for_each(|f, &n, &d| {
            *f = (*f * n / d.max(f64::MIN_POSITIVE)).max(FLOOR);
        });
}

/// Rank-`rank` factorization `M ≈ WH` with `W, H ≥ 0`, from a seeded
/// uniform random start.
pub fn nnmf(m: &Array2<f64>, rank: usize, iters: usize, seed: u64) -> Result<NnmfResult> {
    if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Domain("NNMF input must be finite and non-negative".into()));
    }
    let (n, d) = m.dim();
    if rank == 0 || rank > n.min(d) {
        return Err(Error::Config(format!(
            "rank {rank} must lie in 1..={}",
            n.min(d)
        )));
    }
    let mean = m.sum() / (n * d) as f64;
    let scale = if mean > 0.0 { (mean / rank as f64).sqrt() } else { 1.0 };
    let mut rng = restart_rng(seed, 0);
    let mut w = Array2::from_shape_fn((n, rank), |_| scale * rng.random::<f64>() + FLOOR);
    let mut h = Array2::from_shape_fn((rank, d), |_| scale * rng.random::<f64>() + FLOOR);

    let mut trace = vec![frobenius(&(m - &w.dot(&h)))];
    for _ in 0..iters {
        let numer = w.t().dot(m);
        let denom = w.t().dot(&w).dot(&h);
        update(&mut h, &numer, &denom);
        let numer = m.dot(&h.t());
        let denom = w.dot(&h.dot(&h.t()));
        update(&mut w, &numer, &denom);
        trace.push(frobenius(&(m - &w.dot(&h))));
    }
    Ok(NnmfResult {
        w,
        h,
        residual_trace: trace,
    })
}
