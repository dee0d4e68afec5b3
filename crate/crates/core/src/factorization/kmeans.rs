//! k-means with k-means++ seeding, used to initialise alternating
//! factorizations.

use rand::Rng;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    centers
        .iter()
        .enumerate()
        .map(|(c, center)| (c, dist2(point, center)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// k-means++ seeding: first centre uniform, the rest drawn with probability
/// proportional to the squared distance to the nearest chosen centre.
pub fn plus_plus_init<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(k >= 1 && k <= points.len(), "k must lie in 1..=points");
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = d2.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

/// Lloyd iterations from k-means++ seeds. Empty clusters are re-seeded with
/// the point farthest from its current centre.
pub fn kmeans<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut centers = plus_plus_init(points, k, rng);
    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        let mut dists = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centers);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
            dists.push(d);
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..points.len())
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("points non-empty");
                centers[c] = points[far].clone();
                dists[far] = 0.0;
                assignment[far] = c;
                changed = true;
            } else {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }
    centers
}
