//! Dense SVD by one-sided (Hestenes) Jacobi rotations.

use ndarray::{s, Array1, Array2, Axis};

use super::frobenius;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U diag(σ) Vᵀ` with `k = min(n, d)` components.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Non-increasing.
    pub singular_values: Vec<f64>,
    /// `n × k`, orthonormal columns.
    pub left_vectors: Array2<f64>,
    /// `d × k`, orthonormal columns.
    pub right_vectors: Array2<f64>,
}

impl SvdResult {
    /// `Σ_{i<rank} σ_i u_i v_iᵀ`.
    pub fn reconstruct(&self, rank: usize) -> Array2<f64> {
        let rank = rank.min(self.singular_values.len());
        let u = self.left_vectors.slice(s![.., ..rank]);
        let v = self.right_vectors.slice(s![.., ..rank]);
        let sigma = Array1::from(self.singular_values[..rank].to_vec());
        (&u * &sigma).dot(&v.t())
    }
}

fn check_finite(m: &Array2<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("SVD input must be finite".into()))
    }
}

/// Orthogonalise the columns of `work` (tall, `rows ≥ cols`) in place,
/// accumulating the rotations in `v`.
fn hestenes(work: &mut Array2<f64>, v: &mut Array2<f64>) {
    let cols = work.ncols();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = {
                    let cp = work.column(p);
                    let cq = work.column(q);
                    (cp.dot(&cp), cq.dot(&cq), cp.dot(&cq))
                };
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for mat in [&mut *work, &mut *v] {
                    for r in 0..mat.nrows() {
                        let (xp, xq) = (mat[[r, p]], mat[[r, q]]);
                        mat[[r, p]] = c * xp - sn * xq;
                        mat[[r, q]] = sn * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Replace the listed columns of `u` with unit vectors orthogonal to all
/// other columns (modified Gram–Schmidt against the standard basis).
fn complete_basis(u: &mut Array2<f64>, missing: &[usize]) {
    let n = u.nrows();
    let mut filled: Vec<usize> = (0..u.ncols()).filter(|c| !missing.contains(c)).collect();
    let mut candidate = 0;
    for &col in missing {
        loop {
            assert!(candidate < n, "ran out of basis vectors");
            let mut e = Array1::<f64>::zeros(n);
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &f in &filled {
                    let proj = u.column(f).dot(&e);
                    e.scaled_add(-proj, &u.column(f));
                }
            }
            let norm = e.dot(&e).sqrt();
            if norm > 1e-6 {
                u.column_mut(col).assign(&(e / norm));
                filled.push(col);
                break;
            }
        }
    }
}

pub fn svd(m: &Array2<f64>) -> Result<SvdResult> {
    check_finite(m)?;
    let (n, d) = m.dim();
    let transposed = n < d;
    let mut work = if transposed { m.t().to_owned() } else { m.clone() };
    let cols = work.ncols();
    let mut v = Array2::<f64>::eye(cols);
    hestenes(&mut work, &mut v);

    let norms: Vec<f64> = work.axis_iter(Axis(1)).map(|c| c.dot(&c).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let sigma_max = norms.iter().cloned().fold(0.0, f64::max);
    let cutoff = sigma_max * f64::EPSILON * (work.nrows().max(cols) as f64);

    let mut u = Array2::<f64>::zeros((work.nrows(), cols));
    let mut vv = Array2::<f64>::zeros((cols, cols));
    let mut sigma = Vec::with_capacity(cols);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        vv.column_mut(dst).assign(&v.column(src));
        if norms[src] > cutoff && norms[src] > 0.0 {
            u.column_mut(dst).assign(&(&work.column(src) / norms[src]));
            sigma.push(norms[src]);
        } else {
            missing.push(dst);
            sigma.push(0.0);
        }
    }
    complete_basis(&mut u, &missing);

    let (left_vectors, right_vectors) = if transposed { (vv, u) } else { (u, vv) };
    Ok(SvdResult {
        singular_values: sigma,
        left_vectors,
        right_vectors,
    })
}

/// Best rank-`rank` approximation and its relative residual
/// `sqrt(Σ_{i≥rank} σ_i²) / ‖M‖_F`.
pub fn svd_truncate(m: &Array2<f64>, rank: usize) -> Result<(Array2<f64>, f64)> {
    let k = m.nrows().min(m.ncols());
    if rank == 0 || rank > k {
        return Err(Error::Config(format!("rank {rank} must lie in 1..={k}")));
    }
    let result = svd(m)?;
    let norm = frobenius(m);
    let tail = result.singular_values[rank..].iter().fold(0.0, |acc, s| acc + s * s);
    let relative = if norm > 0.0 { tail.sqrt() / norm } else { 0.0 };
    Ok((result.reconstruct(rank), relative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn orthonormal(q: &Array2<f64>) -> f64 {
        let g = q.t().dot(q);
        let eye = Array2::<f64>::eye(g.nrows());
        (&g - &eye).iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn reconstructs_rectangular_inputs() {
        for m in [
            array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]],
            array![[1.0, 2.0], [3.0, 4.0], [5.0, 7.0], [0.5, -1.0]],
        ] {
            let r = svd(&m).unwrap();
            let back = r.reconstruct(r.singular_values.len());
            assert!(frobenius(&(&back - &m)) <= 1e-12 * frobenius(&m));
            assert!(orthonormal(&r.left_vectors) < 1e-12);
            assert!(orthonormal(&r.right_vectors) < 1e-12);
            assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_one_is_exact() {
        let u = array![1.0, -2.0, 0.5];
        let v = array![3.0, 1.0, 2.0, -1.0];
        let m = u
            .clone()
            .insert_axis(Axis(1))
            .dot(&v.clone().insert_axis(Axis(0)));
        let (approx, rel) = svd_truncate(&m, 1).unwrap();
        assert!(rel < 1e-12);
        assert!(frobenius(&(&approx - &m)) < 1e-12);
        let r = svd(&m).unwrap();
        assert!(orthonormal(&r.left_vectors) < 1e-10);
    }

    #[test]
    fn full_rank_residual_is_zero() {
        let m = array![[2.0, 1.0], [1.0, 3.0]];
        assert_eq!(svd_truncate(&m, 2).unwrap().1, 0.0);
        assert!(svd_truncate(&m, 0).is_err());
        assert!(svd_truncate(&m, 3).is_err());
    }

    #[test]
    fn zero_matrix() {
        let m = Array2::<f64>::zeros((3, 2));
        let r = svd(&m).unwrap();
        assert_eq!(r.singular_values, vec![0.0, 0.0]);
        assert!(orthonormal(&r.left_vectors) < 1e-12);
        assert_eq!(svd_truncate(&m, 1).unwrap().1, 0.0);
    }
}
