//! Weak regular partitions by iterative cut decomposition: find a cut
//! where the graph deviates from its block-density approximation, split
//! every block by the cut's sides, repeat until no deviating cut is
//! found (a heuristic certificate) or the block cap is hit.

use crate::cutnorm::cutnorm_heuristic;
use crate::error::{Error, Result};
use crate::graphons::{GraphonRepr, StepGraphon};
use crate::graphs::{SimpleGraph, WeightedGraph};
use crate::matrix::Matrix;
use crate::numeric::Kahan;

/// A partition of `0..n` into disjoint nonempty blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::Precondition("empty block".into()));
            }
            for &v in block {
                if v >= n {
                    return Err(Error::Precondition(format!(
                        "vertex {} out of range",
                        v + 1
                    )));
                }
                if seen[v] {
                    return Err(Error::Precondition(format!(
                        "vertex {} in two blocks",
                        v + 1
                    )));
                }
                seen[v] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Precondition("blocks do not cover the vertex set".into()));
        }
        let mut blocks = blocks;
        for b in &mut blocks {
            b.sort_unstable();
        }
        Ok(Partition { n, blocks })
    }

    /// The one-block partition.
    pub fn trivial(n: usize) -> Self {
        Partition {
            n,
            blocks: vec![(0..n).collect()],
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            n,
            blocks: (0..n).map(|v| vec![v]).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// block index of each vertex
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &v in block {
                out[v] = b;
            }
        }
        out
    }

    /// Every block of self lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.n != coarser.n {
            return false;
        }
        let coarse = coarser.assignment();
        self.blocks
            .iter()
            .all(|block| block.iter().all(|&v| coarse[v] == coarse[block[0]]))
    }

    /// Splits each block by membership in the index sets S and T; drops
    /// empty parts. Strictly refines unless both sets are unions of blocks.
    fn split_by_cut(&self, s: &[usize], t: &[usize]) -> Partition {
        let mut in_s = vec![false; self.n];
        for &v in s {
            in_s[v] = true;
        }
        let mut in_t = vec![false; self.n];
        for &v in t {
            in_t[v] = true;
        }
        let mut blocks = Vec::new();
        for block in &self.blocks {
            let mut parts: [Vec<usize>; 4] = Default::default();
            for &v in block {
                let idx = (in_s[v] as usize) | ((in_t[v] as usize) << 1);
                parts[idx].push(v);
            }
            for part in parts {
                if !part.is_empty() {
                    blocks.push(part);
                }
            }
        }
        Partition { n: self.n, blocks }
    }

    /// Rebalances block sizes to within one of each other by moving the
    /// highest-index vertices out of oversized blocks, keeping the
    /// block count. Returns the balanced partition.
    pub fn balanced(&self) -> Partition {
        let k = self.blocks.len();
        let base = self.n / k;
        let extra = self.n % k; // first `extra` blocks get base+1
        let mut blocks = self.blocks.clone();
        let mut spill: Vec<usize> = Vec::new();
        for (i, block) in blocks.iter_mut().enumerate() {
            let target = if i < extra { base + 1 } else { base };
            while block.len() > target {
                spill.push(block.pop().expect("nonempty"));
            }
        }
        spill.sort_unstable();
        for (i, block) in blocks.iter_mut().enumerate() {
            let target = if i < extra { base + 1 } else { base };
            while block.len() < target {
                block.push(spill.pop().expect("spill covers deficits"));
            }
            block.sort_unstable();
        }
        Partition { n: self.n, blocks }
    }
}

/// Pairwise block densities of a symmetric matrix under a partition:
/// plain block averages. For a 0/1 adjacency matrix the off-diagonal
/// entry is (edges between)/(|Vi||Vj|) and the diagonal is 2e(Vi)/|Vi|^2
/// (the diagonal of the matrix itself is zero for simple graphs).
pub fn block_density_matrix(a: &Matrix, p: &Partition) -> Matrix {
    let k = p.block_count();
    Matrix::from_fn(k, k, |i, j| {
        let mut acc = Kahan::new();
        for &u in &p.blocks()[i] {
            for &v in &p.blocks()[j] {
                acc.add(a.get(u, v));
            }
        }
        acc.value() / (p.blocks()[i].len() * p.blocks()[j].len()) as f64
    })
}

/// Density matrix of a simple graph under a partition.
pub fn density_matrix(g: &SimpleGraph, p: &Partition) -> Result<Matrix> {
    if p.n() != g.n() {
        return Err(Error::Precondition(format!(
            "partition over {} vertices against graph on {}",
            p.n(),
            g.n()
        )));
    }
    Ok(block_density_matrix(&g.adjacency_matrix(), p))
}

/// The block-constant weighted graph of a partition and density matrix:
/// complete with loops, unit node weights, edge weight Q at the blocks
/// of the endpoints.
pub fn build_kpq(p: &Partition, q: &Matrix) -> Result<WeightedGraph> {
    if q.rows() != p.block_count() || q.cols() != p.block_count() {
        return Err(Error::Precondition(format!(
            "density matrix is {}x{}, partition has {} blocks",
            q.rows(),
            q.cols(),
            p.block_count()
        )));
    }
    let assignment = p.assignment();
    let beta = Matrix::from_fn(p.n(), p.n(), |u, v| q.get(assignment[u], assignment[v]));
    WeightedGraph::new(vec![1.0; p.n()], beta)
}

fn deviation_matrix(a: &Matrix, p: &Partition, q: &Matrix) -> Matrix {
    let assignment = p.assignment();
    Matrix::from_fn(a.rows(), a.cols(), |u, v| {
        a.get(u, v) - q.get(assignment[u], assignment[v])
    })
}

/// Mean-square block density: sum over block pairs of
/// (|Vi||Vj|/n^2) Q_ij^2. Non-decreasing under refinement; each
/// accepted cut of deviation d raises it by at least (d/n^2)^2.
pub fn partition_index(p: &Partition, q: &Matrix) -> f64 {
    let n2 = (p.n() * p.n()) as f64;
    let mut acc = Kahan::new();
    for i in 0..p.block_count() {
        for j in 0..p.block_count() {
            let w = (p.blocks()[i].len() * p.blocks()[j].len()) as f64 / n2;
            acc.add(w * q.get(i, j) * q.get(i, j));
        }
    }
    acc.value()
}

/// What the refinement loop certifies (or fails to).
#[derive(Clone, Debug)]
pub struct RegularityCertificate {
    /// no cut with deviation above the threshold was found by the
    /// heuristic search (a heuristic certificate, not a proof)
    pub certified: bool,
    pub rounds: usize,
    pub restarts: usize,
    /// best |rectangle sum| of A - K(P,Q) found on the final partition
    pub best_deviation: f64,
    /// eps * n^2
    pub threshold: f64,
    pub block_cap: usize,
    /// mean-square density index after each round
    pub index_history: Vec<f64>,
    pub n: usize,
}

#[derive(Clone, Debug)]
pub struct WeakRegularityOutcome {
    pub partition: Partition,
    pub density: Matrix,
    pub certificate: RegularityCertificate,
}

pub fn default_block_cap(eps: f64) -> usize {
    let exponent = (1.0 / (eps * eps)).min(14.0);
    1usize << exponent.ceil() as u32
}

fn fk_refine(
    a: &Matrix,
    eps: f64,
    seed: u64,
    restarts: usize,
    init: Option<&Partition>,
    cap: usize,
) -> Result<WeakRegularityOutcome> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Precondition(format!("eps must be in (0,1), got {eps}")));
    }
    let n = a.rows();
    if n == 0 || !a.is_symmetric(1e-9) {
        return Err(Error::Precondition(
            "refinement needs a nonempty symmetric matrix".into(),
        ));
    }
    if let Some(p) = init {
        if p.n() != n {
            return Err(Error::Precondition(format!(
                "initial partition over {} vertices against matrix of size {n}",
                p.n()
            )));
        }
    }
    let threshold = eps * (n * n) as f64;
    let mut partition = init.cloned().unwrap_or_else(|| Partition::trivial(n));
    let mut history = Vec::new();
    let mut rounds = 0usize;
    loop {
        let q = block_density_matrix(a, &partition);
        history.push(partition_index(&partition, &q));
        let dev = deviation_matrix(a, &partition, &q);
        use rand::Rng;
        let round_seed = crate::rng::stream(seed, rounds as u64).gen::<u64>();
        let witness = cutnorm_heuristic(&dev, restarts, round_seed);
        let certified = witness.value <= threshold;
        if certified || partition.block_count() > cap {
            return Ok(WeakRegularityOutcome {
                partition: partition.clone(),
                density: q,
                certificate: RegularityCertificate {
                    certified,
                    rounds,
                    restarts,
                    best_deviation: witness.value,
                    threshold,
                    block_cap: cap,
                    index_history: history,
                    n,
                },
            });
        }
        let refined = partition.split_by_cut(&witness.rows, &witness.cols);
        if refined.block_count() > cap || refined == partition {
            return Ok(WeakRegularityOutcome {
                partition: partition.clone(),
                density: q,
                certificate: RegularityCertificate {
                    certified: false,
                    rounds,
                    restarts,
                    best_deviation: witness.value,
                    threshold,
                    block_cap: cap,
                    index_history: history,
                    n,
                },
            });
        }
        partition = refined;
        rounds += 1;
    }
}

/// Weak regular partition of a simple graph: refines until the
/// heuristic cut search finds no rectangle where the graph deviates
/// from its block approximation by more than eps * n^2. Optionally
/// starts from (and hence refines) a given partition.
pub fn weak_regular_partition(
    g: &SimpleGraph,
    eps: f64,
    seed: u64,
    refine: Option<&Partition>,
) -> Result<WeakRegularityOutcome> {
    fk_refine(
        &g.adjacency_matrix(),
        eps,
        seed,
        32,
        refine,
        default_block_cap(eps),
    )
}

/// A stepfunction approximant together with the cell partition that
/// produced it (over the classes of the exact grid form of the input).
#[derive(Clone, Debug)]
pub struct GraphonApproximation {
    pub step: StepGraphon,
    /// the exact stepfunction form of the input the partition refers to
    pub grid: StepGraphon,
    pub partition: Partition,
    pub certificate: RegularityCertificate,
}

/// Stepfunction approximation of a graphon within eps in cut norm.
/// Stepfunction inputs are already their own approximation; kernels run
/// the refinement machinery on their exact grid representation
/// (`grid_m` cells for the half-graph limit).
pub fn approximate_graphon(
    input: &GraphonRepr,
    eps: f64,
    seed: u64,
    grid_m: usize,
) -> Result<GraphonApproximation> {
    if let GraphonRepr::Step(w) = input {
        return Ok(GraphonApproximation {
            step: w.clone(),
            grid: w.clone(),
            partition: Partition::singletons(w.q()),
            certificate: RegularityCertificate {
                certified: true,
                rounds: 0,
                restarts: 0,
                best_deviation: 0.0,
                threshold: eps * (w.q() * w.q()) as f64,
                block_cap: default_block_cap(eps),
                index_history: Vec::new(),
                n: w.q(),
            },
        });
    }
    let step = input.to_step(grid_m)?;
    let outcome = fk_refine(step.values(), eps, seed, 32, None, default_block_cap(eps))?;
    let m = step.q();
    let weights: Vec<f64> = outcome
        .partition
        .blocks()
        .iter()
        .map(|b| b.len() as f64 / m as f64)
        .collect();
    let k = weights.len();
    let values = Matrix::from_fn(k, k, |i, j| outcome.density.get(i, j).clamp(0.0, 1.0));
    Ok(GraphonApproximation {
        step: StepGraphon::new(weights, values)?,
        grid: step,
        partition: outcome.partition,
        certificate: outcome.certificate,
    })
}

/// Exact deviation of A from its block approximation over cuts that
/// respect a coarsening of the partition into at most `max_superblocks`
/// groups: a certified lower bound on the true cut deviation, exact
/// when the partition itself has at most `max_superblocks` blocks.
pub fn coarsened_exact_deviation(
    a: &Matrix,
    p: &Partition,
    max_superblocks: usize,
) -> Result<f64> {
    let q = block_density_matrix(a, p);
    let dev = deviation_matrix(a, p, &q);
    // group consecutive blocks into at most max_superblocks supergroups
    let b = p.block_count();
    let groups = b.min(max_superblocks);
    let mut group_of_block = vec![0usize; b];
    for (i, g) in group_of_block.iter_mut().enumerate() {
        *g = i * groups / b;
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); groups];
    for (block, &g) in group_of_block.iter().enumerate() {
        members[g].extend(p.blocks()[block].iter().copied());
    }
    let coarse = Matrix::from_fn(groups, groups, |i, j| {
        let mut acc = Kahan::new();
        for &u in &members[i] {
            for &v in &members[j] {
                acc.add(dev.get(u, v));
            }
        }
        acc.value()
    });
    Ok(crate::cutnorm::cutnorm_exact(&coarse)?.value)
}

/// Exhaustive deviation search for small graphs: the true cut norm of
/// A - K(P,Q). Cross-checks heuristic certificates.
pub fn exact_deviation(a: &Matrix, p: &Partition) -> Result<f64> {
    let q = block_density_matrix(a, p);
    let dev = deviation_matrix(a, p, &q);
    Ok(crate::cutnorm::cutnorm_exact(&dev)?.value)
}
