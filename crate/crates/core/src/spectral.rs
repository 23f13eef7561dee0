//! Normalized spectral clustering with a seeded k-means backend.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degree assigned to isolated nodes.
const ISOLATED_DEGREE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub assign: Vec<usize>,
    pub k: usize,
}

/// Embeds with the `k` bottom eigenvectors of `I - D^{-1/2} W D^{-1/2}`,
/// row-normalizes the embedding and clusters the rows with [`kmeans`].
pub fn spectral_clustering(w: &DMatrix<f64>, k: usize, seed: u64) -> Result<Partition> {
    let n = w.nrows();
    if !w.is_square() {
        return Err(Error::Shape {
            context: "spectral_clustering",
            left: w.shape(),
            right: (n, n),
        });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count must satisfy 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument(
            "affinity must be finite and nonnegative".into(),
        ));
    }

    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| {
            let d = w.row(i).sum();
            1.0 / if d > 0.0 { d } else { ISOLATED_DEGREE }.sqrt()
        })
        .collect();
    // Bottom eigenvectors of L_sym are the top eigenvectors of D^{-1/2} W D^{-1/2}.
    let mut a = DMatrix::from_fn(n, n, |i, j| inv_sqrt_deg[i] * w[(i, j)] * inv_sqrt_deg[j]);
    a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 0)
        .ok_or_else(|| Error::numerical("symmetric eigendecomposition", w))?;

    let mut order: Vec<usize> = (0..n).collect();
    // descending eigenvalue of the normalized affinity, index breaks ties
    order.sort_by(|&p, &q| {
        eig.eigenvalues[q]
            .total_cmp(&eig.eigenvalues[p])
            .then(p.cmp(&q))
    });
    let mut embedding = DMatrix::zeros(n, k);
    for (col, &idx) in order[..k].iter().enumerate() {
        embedding.set_column(col, &eig.eigenvectors.column(idx));
    }
    for mut row in embedding.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }

    let assign = kmeans(&embedding, k, seed)?;
    Ok(Partition { assign, k })
}

/// k-means settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeans {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeans {
    fn default() -> Self {
        KMeans {
            restarts: 20,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assign: Vec<usize>,
    pub wcss: f64,
    /// Final within-cluster sum of squares of every restart, in run order.
    pub restart_wcss: Vec<f64>,
}

/// Clusters the rows of `points` with default settings.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    KMeans::default().fit(points, k, seed).map(|f| f.assign)
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    (points.row(i) - centers.row(c)).norm_squared()
}

impl KMeans {
    /// D^2-weighted seeding followed by Lloyd iterations, best of `restarts`
    /// by WCSS (ties keep the earliest restart).
    pub fn fit(&self, points: &DMatrix<f64>, k: usize, seed: u64) -> Result<KMeansFit> {
        let n = points.nrows();
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "cluster count must satisfy 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("need at least one restart".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut restart_wcss = Vec::with_capacity(self.restarts);
        for _ in 0..self.restarts {
            let (assign, wcss) = self.run_once(points, k, &mut rng);
            restart_wcss.push(wcss);
            if best.as_ref().is_none_or(|(_, b)| wcss < *b) {
                best = Some((assign, wcss));
            }
        }
        let (assign, wcss) = best.expect("at least one restart");
        Ok(KMeansFit {
            assign,
            wcss,
            restart_wcss,
        })
    }

    fn run_once(&self, points: &DMatrix<f64>, k: usize, rng: &mut impl Rng) -> (Vec<usize>, f64) {
        let n = points.nrows();
        let mut centers = seed_centers(points, k, rng);
        let mut assign = vec![usize::MAX; n];
        for _ in 0..self.max_iter {
            let mut changed = false;
            for (i, slot) in assign.iter_mut().enumerate() {
                let mut best_c = 0;
                let mut best_d = f64::INFINITY;
                for c in 0..k {
                    let d = sq_dist(points, i, &centers, c);
                    if d < best_d {
                        best_d = d;
                        best_c = c;
                    }
                }
                if *slot != best_c {
                    *slot = best_c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            update_centers(points, &mut assign, &mut centers);
        }
        let wcss = (0..n)
            .map(|i| sq_dist(points, i, &centers, assign[i]))
            .sum();
        (assign, wcss)
    }
}

/// k-means++ style seeding: each new center is drawn with probability
/// proportional to the squared distance to the nearest existing center.
fn seed_centers(points: &DMatrix<f64>, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| (points.row(i) - points.row(chosen[0])).norm_squared())
        .collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&nearest) {
            Ok(dist) => dist.sample(rng),
            // all remaining mass is zero: pick any unchosen index
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                free[rng.gen_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min((points.row(i) - points.row(next)).norm_squared());
        }
    }
    DMatrix::from_fn(k, points.ncols(), |c, j| points[(chosen[c], j)])
}

fn update_centers(points: &DMatrix<f64>, assign: &mut [usize], centers: &mut DMatrix<f64>) {
    let k = centers.nrows();
    let mut sums = DMatrix::<f64>::zeros(k, points.ncols());
    let mut counts = vec![0usize; k];
    for (i, &c) in assign.iter().enumerate() {
        let mut row = sums.row_mut(c);
        row += points.row(i);
        counts[c] += 1;
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            centers.set_row(c, &(sums.row(c) / count as f64));
        }
    }
    // Empty clusters move to the point farthest from its current center.
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let far = (0..points.nrows())
            .filter(|&i| counts[assign[i]] > 1)
            .max_by(|&a, &b| {
                sq_dist(points, a, centers, assign[a])
                    .total_cmp(&sq_dist(points, b, centers, assign[b]))
                    .then(b.cmp(&a))
            });
        if let Some(i) = far {
            counts[assign[i]] -= 1;
            centers.set_row(c, &points.row(i));
            assign[i] = c;
            counts[c] = 1;
        }
    }
}
