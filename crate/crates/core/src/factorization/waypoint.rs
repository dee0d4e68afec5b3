//! Actual-waypoint factorizations `D(:,W) ⊗ D(:,W)ᵀ`.

use rand::seq::index::sample;

use super::{require_finite, FactorPair};
use crate::error::{Error, Result};
use crate::rng::restart_rng;
use crate::tropical::{frobenius_distance, mp_multiply, TropicalMatrix};

/// Factor `D` through the waypoint columns `waypoints` (0-based).
///
/// Entry `(i, j)` of the product is the shortest `i → j` distance forced
/// through at least one waypoint.
pub fn actual_waypoint(d: &TropicalMatrix, waypoints: &[usize]) -> Result<FactorPair> {
    if !d.is_square() {
        return Err(Error::Shape("waypoint factors need a square matrix".into()));
    }
    require_finite(d, "the distance matrix")?;
    if waypoints.is_empty() {
        return Err(Error::Config("at least one waypoint is required".into()));
    }
    let mut sorted = waypoints.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("waypoints must be distinct".into()));
    }
    let left = d.select_columns(waypoints)?;
    let right = left.transpose();
    let residual = frobenius_distance(d, &mp_multiply(&left, &right)?)?;
    Ok(FactorPair {
        left,
        right,
        residual,
        restarts_used: 1,
        iteration_trace: vec![residual],
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Advance `comb` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    for pos in (0..k).rev() {
        if comb[pos] < n - k + pos {
            comb[pos] += 1;
            for q in pos + 1..k {
                comb[q] = comb[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Best rank-`m` waypoint set: exhaustive over all `C(n, m)` subsets when that
/// count fits in `budget`, otherwise `budget` uniformly sampled subsets.
/// Ties go to the lexicographically smallest set.
pub fn actual_waypoint_search(
    d: &TropicalMatrix,
    m: usize,
    budget: usize,
    seed: u64,
) -> Result<(Vec<usize>, FactorPair)> {
    let n = d.rows();
    if m == 0 || m > n {
        return Err(Error::Config(format!("rank {m} must lie in 1..={n}")));
    }
    if budget == 0 {
        return Err(Error::Config("search budget must be positive".into()));
    }
    let mut best: Option<(Vec<usize>, FactorPair)> = None;
    let mut consider = |w: Vec<usize>| -> Result<()> {
        let pair = actual_waypoint(d, &w)?;
        let better = match &best {
            None => true,
            Some((bw, bp)) => {
                pair.residual < bp.residual || (pair.residual == bp.residual && w < *bw)
            }
        };
        if better {
            best = Some((w, pair));
        }
        Ok(())
    };

    let total = binomial(n, m);
    if total <= budget as u128 {
        let mut comb: Vec<usize> = (0..m).collect();
        loop {
            consider(comb.clone())?;
            if !next_combination(&mut comb, n) {
                break;
            }
        }
    } else {
        let mut rng = restart_rng(seed, 0);
        for _ in 0..budget {
            let mut w = sample(&mut rng, n, m).into_vec();
            w.sort_unstable();
            consider(w)?;
        }
    }
    let (w, mut pair) = best.expect("at least one subset evaluated");
    pair.restarts_used = total.min(budget as u128) as usize;
    Ok((w, pair))
}
