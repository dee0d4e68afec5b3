//! Min-plus linear regression `min_x ‖A ⊗ x − y‖`.
//!
//! The ∞-norm problem has a closed form built on the principal solution
//! `x̂ = −(Aᵀ ⊗ (−y))`. The 2-norm residual is piecewise quadratic; it is
//! minimised locally by a Newton-directed exact line search whose breakpoints
//! come from the lower envelopes of each row.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tropical::TropicalMatrix;

/// Absolute tolerance for deciding that a row's minimum is attained twice.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    #[serde(rename = "inf")]
    Inf,
    #[serde(rename = "2")]
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionOutcome {
    pub solution: Vec<f64>,
    pub residual_norm: f64,
    pub norm_kind: NormKind,
    pub iterations: usize,
    pub converged: bool,
    /// Residual norm after each accepted iterate, starting with the initial point.
    pub residual_trace: Vec<f64>,
}

/// Which column attains each row minimum of `A ⊗ x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivePattern {
    /// Smallest minimising column for each row.
    pub selectors: Vec<usize>,
    /// Rows whose minimum is attained by more than one column, with those columns.
    pub tied_rows: BTreeMap<usize, Vec<usize>>,
}

impl ActivePattern {
    /// True when `x` lies on the surface where the residual is not differentiable.
    pub fn on_discontinuity(&self) -> bool {
        !self.tied_rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    pub max_iter: usize,
    /// Relative decrease of the squared residual below which iteration stops.
    pub tol: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        LineSearchConfig {
            max_iter: 500,
            tol: 1e-10,
        }
    }
}

fn check_system(a: &TropicalMatrix, y: &[f64]) -> Result<()> {
    if a.rows() != y.len() {
        return Err(Error::Shape(format!(
            "matrix has {} rows but the right-hand side has {} entries",
            a.rows(),
            y.len()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("y[{i}] is not finite")));
    }
    Ok(())
}

fn check_point(a: &TropicalMatrix, x: &[f64]) -> Result<()> {
    if a.cols() != x.len() {
        return Err(Error::Shape(format!(
            "matrix has {} columns but x has {} entries",
            a.cols(),
            x.len()
        )));
    }
    if let Some(j) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("x[{j}] is not finite")));
    }
    Ok(())
}

fn check_rows_finite(a: &TropicalMatrix) -> Result<()> {
    match (0..a.rows()).find(|&i| a.row(i).iter().all(|v| v.is_infinite())) {
        Some(row) => Err(Error::InfiniteResidual { row }),
        None => Ok(()),
    }
}

/// `A ⊗ x` for a vector `x`.
pub fn mp_apply(a: &TropicalMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .zip(x)
                .map(|(aij, xj)| aij + xj)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// `x̂_j = max_i (y_i − a_ij)`, the least `x` with `A ⊗ x ≥ y`.
pub fn principal_solution(a: &TropicalMatrix, y: &[f64]) -> Result<Vec<f64>> {
    check_system(a, y)?;
    (0..a.cols())
        .map(|j| {
            let best = (0..a.rows())
                .filter(|&i| a.get(i, j).is_finite())
                .map(|i| y[i] - a.get(i, j))
                .fold(f64::NEG_INFINITY, f64::max);
            if best == f64::NEG_INFINITY {
                Err(Error::UnboundedCoordinate { column: j })
            } else {
                Ok(best)
            }
        })
        .collect()
}

/// ∞-norm residual `max_i |(A ⊗ x)_i − y_i|`.
pub fn residual_inf(a: &TropicalMatrix, y: &[f64], x: &[f64]) -> Result<f64> {
    check_system(a, y)?;
    check_point(a, x)?;
    Ok(mp_apply(a, x)
        .iter()
        .zip(y)
        .map(|(p, yi)| (p - yi).abs())
        .fold(0.0, f64::max))
}

/// Infimum of the ∞-norm optimal set: the principal solution shifted down by
/// half of its largest overshoot.
pub fn chebyshev_regression(a: &TropicalMatrix, y: &[f64]) -> Result<RegressionOutcome> {
    let x_hat = principal_solution(a, y)?;
    check_rows_finite(a)?;
    // A ⊗ x̂ ≥ y with equality in at least one row, so the overshoot ranges
    // over [0, max]; centring it halves the worst residual.
    let overshoot = mp_apply(a, &x_hat)
        .iter()
        .zip(y)
        .map(|(p, yi)| p - yi)
        .fold(0.0, f64::max);
    let shift = -overshoot / 2.0;
    let solution: Vec<f64> = x_hat.iter().map(|v| v + shift).collect();
    let residual_norm = residual_inf(a, y, &solution)?;
    Ok(RegressionOutcome {
        solution,
        residual_norm,
        norm_kind: NormKind::Inf,
        iterations: 0,
        converged: true,
        residual_trace: vec![residual_norm],
    })
}

/// `Σ_i ((A ⊗ x)_i − y_i)²`.
pub fn residual_sq(a: &TropicalMatrix, y: &[f64], x: &[f64]) -> Result<f64> {
    check_system(a, y)?;
    check_point(a, x)?;
    Ok(residual_sq_unchecked(a, y, x))
}

fn residual_sq_unchecked(a: &TropicalMatrix, y: &[f64], x: &[f64]) -> f64 {
    mp_apply(a, x)
        .iter()
        .zip(y)
        .map(|(p, yi)| (p - yi) * (p - yi))
        .sum()
}

/// Minimising columns of every row of `A ⊗ x`, ties broken towards the
/// smallest index and reported within [`TIE_TOL`].
pub fn active_pattern(a: &TropicalMatrix, x: &[f64]) -> ActivePattern {
    let mut selectors = Vec::with_capacity(a.rows());
    let mut tied_rows = BTreeMap::new();
    for i in 0..a.rows() {
        let row = a.row(i);
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for (j, (aij, xj)) in row.iter().zip(x).enumerate() {
            let v = aij + xj;
            if v < best_val {
                best_val = v;
                best = j;
            }
        }
        selectors.push(best);
        if best_val.is_finite() {
            let tied: Vec<usize> = row
                .iter()
                .zip(x)
                .enumerate()
                .filter(|(_, (aij, xj))| *aij + *xj - best_val <= TIE_TOL)
                .map(|(j, _)| j)
                .collect();
            if tied.len() > 1 {
                tied_rows.insert(i, tied);
            }
        }
    }
    ActivePattern {
        selectors,
        tied_rows,
    }
}

/// Minimiser of the quadratic piece selected by `pattern`:
/// `N_k = mean_{i: J(i)=k} (y_i − a_ik)`. Unselected coordinates keep their
/// value from `x`.
pub fn newton_target(
    a: &TropicalMatrix,
    y: &[f64],
    x: &[f64],
    pattern: &ActivePattern,
) -> Vec<f64> {
    let d = x.len();
    let mut sums = vec![0.0; d];
    let mut counts = vec![0usize; d];
    for (i, &k) in pattern.selectors.iter().enumerate() {
        let aik = a.get(i, k);
        if aik.is_finite() {
            sums[k] += y[i] - aik;
            counts[k] += 1;
        }
    }
    (0..d)
        .map(|k| {
            if counts[k] == 0 {
                x[k]
            } else {
                sums[k] / counts[k] as f64
            }
        })
        .collect()
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Newton target restricted to the tangent space of the discontinuity
/// surface: columns tied in some row move together by one shared increment,
/// chosen to minimise the quadratic piece.
pub fn projected_newton_target(
    a: &TropicalMatrix,
    y: &[f64],
    x: &[f64],
    pattern: &ActivePattern,
) -> Vec<f64> {
    let d = x.len();
    let mut parent: Vec<usize> = (0..d).collect();
    for cols in pattern.tied_rows.values() {
        let root = find(&mut parent, cols[0]);
        for &c in &cols[1..] {
            let r = find(&mut parent, c);
            parent[r] = root;
        }
    }
    let mut sums = vec![0.0; d];
    let mut counts = vec![0usize; d];
    for (i, &k) in pattern.selectors.iter().enumerate() {
        let aik = a.get(i, k);
        if aik.is_finite() {
            let g = find(&mut parent, k);
            sums[g] += y[i] - aik - x[k];
            counts[g] += 1;
        }
    }
    (0..d)
        .map(|k| {
            let g = find(&mut parent, k);
            if counts[g] == 0 {
                x[k]
            } else {
                x[k] + sums[g] / counts[g] as f64
            }
        })
        .collect()
}

/// Result of an exact search along `x + λ (target − x)`, `λ ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchStep {
    pub lambda: f64,
    pub point: Vec<f64>,
    pub residual_sq: f64,
    /// Sorted values of λ where some row changes its minimising column.
    pub breakpoints: Vec<f64>,
}

/// A line `offset + slope * λ` on the lower envelope of one row.
#[derive(Debug, Clone, Copy)]
struct Piece {
    start: f64,
    offset: f64,
    slope: f64,
}

/// Lower envelope of `min_j (offset_j + slope_j λ)` restricted to `λ ≥ 0`.
fn lower_envelope(mut lines: Vec<(f64, f64)>) -> Vec<Piece> {
    // decreasing slope; for equal slopes only the lowest offset matters
    lines.sort_by(|p, q| q.1.total_cmp(&p.1).then(p.0.total_cmp(&q.0)));
    lines.dedup_by(|later, earlier| later.1 == earlier.1);

    let cross = |p: (f64, f64), q: (f64, f64)| (q.0 - p.0) / (p.1 - q.1);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(lines.len());
    for line in lines {
        while hull.len() >= 2 {
            let (p, q) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if cross(p, line) <= cross(p, q) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(line);
    }

    let mut pieces = Vec::with_capacity(hull.len());
    for (k, &line) in hull.iter().enumerate() {
        let end = hull.get(k + 1).map_or(f64::INFINITY, |&next| cross(line, next));
        if end <= 0.0 {
            continue;
        }
        let start = if k == 0 { 0.0 } else { cross(hull[k - 1], line).max(0.0) };
        pieces.push(Piece {
            start: if pieces.is_empty() { 0.0 } else { start },
            offset: line.0,
            slope: line.1,
        });
    }
    pieces
}

/// Exact minimisation of the squared residual along the segment from `x`
/// towards `target` (extended beyond it), by sweeping the sorted breakpoints
/// and minimising each quadratic piece.
pub fn line_search(
    a: &TropicalMatrix,
    y: &[f64],
    x: &[f64],
    target: &[f64],
) -> Result<LineSearchStep> {
    check_system(a, y)?;
    check_point(a, x)?;
    check_point(a, target)?;
    check_rows_finite(a)?;
    let dir: Vec<f64> = target.iter().zip(x).map(|(t, xi)| t - xi).collect();

    let mut current: Vec<(f64, f64)> = Vec::with_capacity(a.rows());
    let mut events: Vec<(f64, usize, f64, f64)> = Vec::new();
    for (i, yi) in y.iter().enumerate() {
        let lines: Vec<(f64, f64)> = a
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, aij)| aij.is_finite())
            .map(|(j, aij)| (aij + x[j] - yi, dir[j]))
            .collect();
        let pieces = lower_envelope(lines);
        current.push((pieces[0].offset, pieces[0].slope));
        for p in &pieces[1..] {
            events.push((p.start, i, p.offset, p.slope));
        }
    }
    events.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));

    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for &(c, s) in &current {
        s0 += c * c;
        s1 += c * s;
        s2 += s * s;
    }
    let piece_min = |s0: f64, s1: f64, s2: f64, lo: f64, hi: f64| -> (f64, f64) {
        let lam = if s2 > 0.0 { (-s1 / s2).clamp(lo, hi) } else { lo };
        (lam, s0 + 2.0 * s1 * lam + s2 * lam * lam)
    };

    let mut best = (0.0, s0);
    let mut lo = 0.0;
    let mut k = 0;
    while k <= events.len() {
        let hi = events.get(k).map_or(f64::INFINITY, |e| e.0);
        if hi == f64::INFINITY {
            // the unbounded piece is sensitive to drift in s2; resum exactly
            (s0, s1, s2) = (0.0, 0.0, 0.0);
            for &(c, s) in &current {
                s0 += c * c;
                s1 += c * s;
                s2 += s * s;
            }
        }
        if hi > lo {
            let cand = piece_min(s0, s1, s2, lo, hi);
            if cand.1 < best.1 {
                best = cand;
            }
            lo = hi;
        }
        if k == events.len() {
            break;
        }
        // apply every event at this breakpoint
        while k < events.len() && events[k].0 == hi {
            let (_, i, c, s) = events[k];
            let (oc, os) = current[i];
            s0 += c * c - oc * oc;
            s1 += c * s - oc * os;
            s2 += s * s - os * os;
            current[i] = (c, s);
            k += 1;
        }
    }

    let lambda = best.0;
    let point: Vec<f64> = x.iter().zip(&dir).map(|(xi, v)| xi + lambda * v).collect();
    let residual_sq = residual_sq_unchecked(a, y, &point);
    let mut breakpoints: Vec<f64> = events.iter().map(|e| e.0).collect();
    breakpoints.dedup();
    Ok(LineSearchStep {
        lambda,
        point,
        residual_sq,
        breakpoints,
    })
}

/// Local minimiser of `‖A ⊗ x − y‖₂` from `x0`.
///
/// Each iteration moves towards the Newton target of the current quadratic
/// piece (restricted to the tangent space when `x` sits on a tie) with an
/// exact line search. If the restricted direction makes no progress the
/// unrestricted Newton direction is tried before stopping. The residual is
/// non-increasing across iterations.
pub fn newton_directed_line_search(
    a: &TropicalMatrix,
    y: &[f64],
    x0: &[f64],
    cfg: &LineSearchConfig,
) -> Result<RegressionOutcome> {
    check_system(a, y)?;
    check_point(a, x0)?;
    check_rows_finite(a)?;

    let mut x = x0.to_vec();
    let mut r2 = residual_sq_unchecked(a, y, &x);
    let mut trace = vec![r2.sqrt()];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iter {
        if r2 == 0.0 {
            converged = true;
            break;
        }
        let pattern = active_pattern(a, &x);
        let mut targets = Vec::with_capacity(2);
        if pattern.on_discontinuity() {
            targets.push(projected_newton_target(a, y, &x, &pattern));
        }
        targets.push(newton_target(a, y, &x, &pattern));

        let mut accepted = None;
        for target in targets {
            if target == x {
                continue;
            }
            let step = line_search(a, y, &x, &target)?;
            if step.residual_sq < r2 - cfg.tol * r2 {
                accepted = Some(step);
                break;
            }
        }
        let Some(step) = accepted else {
            converged = true;
            break;
        };
        x = step.point;
        r2 = step.residual_sq;
        trace.push(r2.sqrt());
        iterations += 1;
    }

    Ok(RegressionOutcome {
        residual_norm: r2.sqrt(),
        solution: x,
        norm_kind: NormKind::Two,
        iterations,
        converged,
        residual_trace: trace,
    })
}

/// 2-norm regression started from the ∞-norm infimum solution.
pub fn least_squares_regression(
    a: &TropicalMatrix,
    y: &[f64],
    cfg: &LineSearchConfig,
) -> Result<RegressionOutcome> {
    let start = chebyshev_regression(a, y)?;
    newton_directed_line_search(a, y, &start.solution, cfg)
}
