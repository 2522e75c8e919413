//! Connection matrices of a graph parameter and their positive
//! semidefiniteness: the fully-labeled matrix on [k], its
//! zeta/diagonal factorization over the edge-subset lattice, and
//! truncated matrices over k-labeled graphs with a bounded node count.

use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::densities::GraphParameter;
use crate::error::{Error, Result};
use crate::graphs::{pair_count, KLabeledGraph, SimpleGraph};
use crate::matrix::Matrix;
use crate::numeric::Kahan;

/// A finite connection matrix: entry (i,j) is f applied to the gluing
/// of index graphs i and j.
#[derive(Clone, Debug)]
pub struct ConnectionMatrix {
    pub k: usize,
    pub index: Vec<KLabeledGraph>,
    pub entries: Matrix,
}

impl ConnectionMatrix {
    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    /// Position of an index graph equal (as a labeled graph) to `g`.
    pub fn position_of(&self, g: &KLabeledGraph) -> Option<usize> {
        let key = g.labeled_canonical_key().ok()?;
        self.index
            .iter()
            .position(|h| h.labeled_canonical_key().ok() == Some(key.clone()))
    }

    /// Principal minor on the given index positions.
    pub fn minor(&self, positions: &[usize]) -> Matrix {
        Matrix::from_fn(positions.len(), positions.len(), |i, j| {
            self.entries.get(positions[i], positions[j])
        })
    }
}

fn m0_budget(k: usize) -> Result<()> {
    if k > 4 {
        return Err(Error::Budget(format!(
            "fully-labeled connection matrices kept for k <= 4, got {k}"
        )));
    }
    Ok(())
}

/// The fully-labeled connection matrix on [k]: rows and columns are the
/// 2^C(k,2) graphs on [k] in edge-bitmask order; the entry at (F1, F2)
/// is f of the edge-set union.
pub fn m0_matrix(f: &GraphParameter, k: usize) -> Result<ConnectionMatrix> {
    m0_budget(k)?;
    let m = pair_count(k);
    let dim = 1usize << m;
    let values: Vec<f64> = {
        let mut vals = vec![0.0; dim];
        for (mask, slot) in vals.iter_mut().enumerate() {
            *slot = f.value(&SimpleGraph::from_edge_mask(k, mask as u64))?;
        }
        vals
    };
    let entries = Matrix::from_fn(dim, dim, |a, b| values[a | b]);
    let index = (0..dim)
        .map(|mask| KLabeledGraph::fully_labeled(SimpleGraph::from_edge_mask(k, mask as u64)))
        .collect();
    Ok(ConnectionMatrix {
        k,
        index,
        entries,
    })
}

/// Zeta/diagonal factorization of the fully-labeled connection matrix:
/// Z is the containment indicator over graphs on [k], D the diagonal of
/// inclusion-exclusion transform values, and M0 = Z D Z^T (entry (A,B)
/// sums the transform over supergraphs of the union). The reconstruction
/// is verified entrywise.
#[derive(Clone, Debug)]
pub struct ZetaFactorization {
    pub k: usize,
    /// containment matrix: z[a][b] = 1 iff graph a is a subgraph of b
    pub z: Matrix,
    /// transform values in edge-bitmask order
    pub d: Vec<f64>,
    pub max_reconstruction_err: f64,
}

pub fn lw_factorization(f: &GraphParameter, k: usize) -> Result<ZetaFactorization> {
    m0_budget(k)?;
    let m = pair_count(k);
    let dim = 1usize << m;
    let z = Matrix::from_fn(dim, dim, |a, b| {
        if a & b == a {
            1.0
        } else {
            0.0
        }
    });
    let mut d = Vec::with_capacity(dim);
    for mask in 0..dim {
        d.push(f.dagger(&SimpleGraph::from_edge_mask(k, mask as u64))?);
    }
    let m0 = m0_matrix(f, k)?;
    let mut max_err = 0.0f64;
    for a in 0..dim {
        for b in 0..dim {
            let mut acc = Kahan::new();
            let union = a | b;
            for (sup, &dv) in d.iter().enumerate() {
                if sup & union == union {
                    acc.add(dv);
                }
            }
            max_err = max_err.max((acc.value() - m0.entries.get(a, b)).abs());
        }
    }
    if max_err > 1e-10 {
        return Err(Error::Invariant(format!(
            "factorization reconstruction off by {max_err} (parameter not \
             isomorphism-invariant, or buggy)"
        )));
    }
    Ok(ZetaFactorization {
        k,
        z,
        d,
        max_reconstruction_err: max_err,
    })
}

/// Symmetric eigenvalues of a connection matrix, ascending.
pub fn eigenvalues(m: &ConnectionMatrix) -> Vec<f64> {
    let dim = m.dim();
    let dm = DMatrix::from_fn(dim, dim, |i, j| m.entries.get(i, j));
    let mut eigs: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// Positive semidefiniteness up to a relative tolerance: accepts iff
/// the smallest eigenvalue is at least -tol * max(1, spectral radius).
pub fn psd_check(m: &ConnectionMatrix, tol: f64) -> (bool, f64) {
    let eigs = eigenvalues(m);
    let min_eig = eigs.first().copied().unwrap_or(0.0);
    let radius = eigs
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e.abs()));
    (min_eig >= -tol * radius.max(1.0), min_eig)
}

/// Inertia of a connection matrix: counts of (negative, zero, positive)
/// eigenvalues under an absolute tolerance.
pub fn signature(m: &ConnectionMatrix, tol: f64) -> (usize, usize, usize) {
    let eigs = eigenvalues(m);
    let neg = eigs.iter().filter(|&&e| e < -tol).count();
    let zero = eigs.iter().filter(|&&e| e.abs() <= tol).count();
    let pos = eigs.iter().filter(|&&e| e > tol).count();
    (neg, zero, pos)
}

/// Truncation of the full connection matrix: rows and columns are the
/// label-preserving isomorphism types of k-labeled graphs with at most
/// `max_nodes` nodes (labels on vertices 0..k), ordered by node count
/// then canonical form. Positive semidefiniteness of any truncation is
/// necessary for reflection positivity.
pub fn truncated_m(
    f: &GraphParameter,
    k: usize,
    max_nodes: usize,
) -> Result<ConnectionMatrix> {
    if max_nodes < k {
        return Err(Error::Precondition(format!(
            "max_nodes {max_nodes} below label count {k}"
        )));
    }
    if max_nodes > k + 3 {
        return Err(Error::Budget(format!(
            "truncated matrices kept to max_nodes <= k+3, got {max_nodes}"
        )));
    }
    if pair_count(max_nodes) > 15 {
        return Err(Error::Budget(format!(
            "enumeration over graphs on {max_nodes} nodes"
        )));
    }
    let mut index: Vec<KLabeledGraph> = Vec::new();
    let mut seen = HashSet::new();
    for n in k..=max_nodes {
        let mut with_keys: Vec<((usize, usize, u64), KLabeledGraph)> = Vec::new();
        for mask in 0u64..(1 << pair_count(n)) {
            let g = SimpleGraph::from_edge_mask(n, mask);
            let labeled = KLabeledGraph::with_first_labeled(g, k)?;
            let key = labeled.labeled_canonical_key()?;
            if seen.insert(key.clone()) {
                with_keys.push((key, labeled));
            }
        }
        with_keys.sort_by_key(|(key, _)| key.clone());
        index.extend(with_keys.into_iter().map(|(_, g)| g));
    }
    let dim = index.len();
    let mut entries = Matrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let glued = index[i].glue(&index[j])?;
            let v = f.value(&glued)?;
            entries.set(i, j, v);
            entries.set(j, i, v);
        }
    }
    Ok(ConnectionMatrix { k, index, entries })
}
