//! kNN neighbor graph over samples and its unnormalized Laplacian.

use nalgebra::DMatrix;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Symmetric 0/1 adjacency of the kNN graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    w: DMatrix<f64>,
    k: usize,
}

impl NeighborGraph {
    /// Wraps an arbitrary weight matrix; it must be square, symmetric,
    /// nonnegative, finite and have a zero diagonal.
    pub fn from_weights(w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::Shape {
                context: "NeighborGraph",
                left: w.shape(),
                right: (w.ncols(), w.nrows()),
            });
        }
        let n = w.nrows();
        for i in 0..n {
            if w[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = w[(i, j)];
                if !v.is_finite() || v < 0.0 || v != w[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "weight ({i}, {j}) must be finite, nonnegative and symmetric"
                    )));
                }
            }
        }
        Ok(NeighborGraph { w, k: 0 })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Unnormalized graph Laplacian `degree - w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    l: DMatrix<f64>,
}

impl Laplacian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn zeros(n: usize) -> Self {
        Laplacian {
            l: DMatrix::zeros(n, n),
        }
    }

    pub fn size(&self) -> usize {
        self.l.nrows()
    }
}

/// Binary kNN graph, symmetrized by maximum: `i ~ j` if either is among the
/// other's `k` nearest neighbors in Euclidean distance. Ties go to the smaller
/// index.
pub fn knn_graph(x: &DataMatrix, k: usize) -> Result<NeighborGraph> {
    let n = x.sample_count();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "neighbor count must satisfy 1 <= k < n, got k={k}, n={n}"
        )));
    }
    let m = x.matrix();
    let mut dist = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (m.column(i) - m.column(j)).norm_squared();
            dist[(i, j)] = d;
            dist[(j, i)] = d;
        }
    }

    let mut w = DMatrix::<f64>::zeros(n, n);
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
        for &j in &order[..k] {
            w[(i, j)] = 1.0;
            w[(j, i)] = 1.0;
        }
    }
    Ok(NeighborGraph { w, k })
}

pub fn laplacian(g: &NeighborGraph) -> Laplacian {
    let w = &g.w;
    let n = w.nrows();
    let mut l = -w.clone();
    for i in 0..n {
        let degree: f64 = w.row(i).sum();
        l[(i, i)] += degree;
    }
    Laplacian { l }
}
