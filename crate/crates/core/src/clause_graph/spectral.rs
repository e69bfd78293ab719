use nalgebra::DMatrix;
use ndarray::Array2;

use super::{ClauseGraph, MAX_NODES};

/// Number of eigenvectors kept per node.
pub const SPECTRAL_DIM: usize = 64;

/// Larger graphs take their spectrum from the subgraph induced by their
/// first `SPECTRAL_NODE_CAP` nodes. Build order is breadth first, so that
/// prefix is connected and contains every node that can survive truncation.
pub const SPECTRAL_NODE_CAP: usize = MAX_NODES;

/// Eigen-decomposition of a graph Laplacian, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
}

/// Decomposes `L = D - A` of the undirected version of `g`.
///
/// Eigenpairs are sorted by ascending eigenvalue (stable in the solver's
/// order) and each eigenvector's first entry with magnitude above 1e-12 is
/// made positive.
pub fn laplacian_eigen(g: &ClauseGraph) -> Eigen {
    prefix_eigen(g, g.len())
}

/// [`laplacian_eigen`] of the subgraph induced by nodes `0..n`.
fn prefix_eigen(g: &ClauseGraph, n: usize) -> Eigen {
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(a, b) in &g.edges {
        if a == b || a >= n || b >= n || l[(a, b)] != 0.0 {
            continue;
        }
        l[(a, b)] = -1.0;
        l[(b, a)] = -1.0;
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
    }
    if n == 0 {
        return Eigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
            laplacian: l,
        };
    }
    let eig = l.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(k, &v);
        values.push(eig.eigenvalues[i]);
    }
    Eigen {
        values,
        vectors,
        laplacian: l,
    }
}

/// Per-node encoding (`nodes × SPECTRAL_DIM`): row `i` holds entry `i` of
/// the lowest-frequency eigenvectors, zero padded. Rows past
/// [`SPECTRAL_NODE_CAP`] are zero.
pub fn spectral_encoding(g: &ClauseGraph) -> Array2<f64> {
    let n = g.len();
    let m = n.min(SPECTRAL_NODE_CAP);
    let eig = prefix_eigen(g, m);
    let k = m.min(SPECTRAL_DIM);
    let mut out = Array2::zeros((n, SPECTRAL_DIM));
    for i in 0..m {
        for j in 0..k {
            out[(i, j)] = eig.vectors[(i, j)];
        }
    }
    out
}
