//! Limit objects W: [0,1]^2 -> [0,1]. Stepfunctions are the exact
//! workhorse; the built-in kernels (constant, half-graph limit, grids)
//! all convert to stepfunctions without quadrature error.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{GraphParameter, PartialMap};
use crate::error::{Error, Result};
use crate::graphs::SimpleGraph;
use crate::graphs::WeightedGraph;
use crate::matrix::Matrix;
use crate::numeric::{kahan_sum, mean_stderr, Kahan};

/// Anything evaluable pointwise as a symmetric kernel on [0,1]^2.
pub trait Graphon: Sync {
    fn eval(&self, x: f64, y: f64) -> f64;
}

/// A stepfunction graphon: q classes with positive measures summing to
/// one, laid out consecutively on [0,1] in index order, and a symmetric
/// q x q value matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepGraphonRaw", into = "StepGraphonRaw")]
pub struct StepGraphon {
    weights: Vec<f64>,
    values: Matrix,
    boundaries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StepGraphonRaw {
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl TryFrom<StepGraphonRaw> for StepGraphon {
    type Error = Error;
    fn try_from(raw: StepGraphonRaw) -> Result<Self> {
        StepGraphon::new(raw.weights, Matrix::from_rows(raw.values)?)
    }
}

impl From<StepGraphon> for StepGraphonRaw {
    fn from(w: StepGraphon) -> Self {
        let q = w.q();
        StepGraphonRaw {
            weights: w.weights.clone(),
            values: (0..q).map(|i| w.values.row(i).to_vec()).collect(),
        }
    }
}

impl StepGraphon {
    pub fn new(weights: Vec<f64>, values: Matrix) -> Result<Self> {
        let q = weights.len();
        if q == 0 {
            return Err(Error::Parse("stepfunction needs at least one class".into()));
        }
        if values.rows() != q || values.cols() != q {
            return Err(Error::Parse(format!(
                "value matrix must be {q}x{q}, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0) {
                return Err(Error::Parse(format!(
                    "class weight {} must be positive, got {w}",
                    i + 1
                )));
            }
        }
        let total = kahan_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parse(format!(
                "class weights must sum to 1, got {total}"
            )));
        }
        for i in 0..q {
            for j in 0..q {
                let v = values.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Parse(format!(
                        "value[{}][{}] = {v} outside [0,1]",
                        i + 1,
                        j + 1
                    )));
                }
                if (v - values.get(j, i)).abs() > 1e-12 {
                    return Err(Error::Parse(format!(
                        "values asymmetric at ({},{})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let mut boundaries = Vec::with_capacity(q + 1);
        let mut acc = 0.0;
        boundaries.push(0.0);
        for &w in &weights {
            acc += w;
            boundaries.push(acc);
        }
        boundaries[q] = 1.0;
        Ok(StepGraphon {
            weights,
            values,
            boundaries,
        })
    }

    pub fn constant(p: f64) -> Result<Self> {
        StepGraphon::new(vec![1.0], Matrix::from_rows(vec![vec![p]])?)
    }

    /// The balanced two-class bipartite limit: values [[0,1],[1,0]].
    pub fn balanced_bipartite() -> Self {
        StepGraphon::new(
            vec![0.5, 0.5],
            Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    pub fn q(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    /// Class containing x under the consecutive-interval layout.
    pub fn class_of(&self, x: f64) -> usize {
        let q = self.q();
        let idx = self.boundaries.partition_point(|&b| b <= x);
        idx.clamp(1, q) - 1
    }

    /// The weighted graph with one node per class; its densities agree
    /// with this stepfunction exactly.
    pub fn to_weighted(&self) -> Result<WeightedGraph> {
        WeightedGraph::new(self.weights.clone(), self.values.clone())
    }

    /// Midpoint sampling onto an m x m equal-width grid.
    pub fn to_grid_midpoint(&self, m: usize) -> KernelGraphon {
        let vals = Matrix::from_fn(m, m, |i, j| {
            let x = (i as f64 + 0.5) / m as f64;
            let y = (j as f64 + 0.5) / m as f64;
            self.eval(x, y)
        });
        KernelGraphon::Grid(vals)
    }

    /// The density functional t(., W) as a memoized graph parameter.
    pub fn density_parameter(&self) -> GraphParameter {
        let w = self.clone();
        GraphParameter::from_fn("t(.,W)", true, true, move |f| t_step(f, &w))
    }
}

impl Graphon for StepGraphon {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.value(self.class_of(x), self.class_of(y))
    }
}

/// Non-step kernels: constants, the half-graph limit indicator
/// 1[|x-y| >= 1/2], and piecewise-constant grids (equal-width cells).
#[derive(Clone, Debug, PartialEq)]
pub enum KernelGraphon {
    Constant(f64),
    HalfGraphLimit,
    Grid(Matrix),
}

impl KernelGraphon {
    pub fn grid(values: Matrix) -> Result<Self> {
        if values.rows() != values.cols() {
            return Err(Error::Parse(format!(
                "grid kernel must be square, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        if !values.is_symmetric(1e-12) {
            return Err(Error::Parse("grid kernel must be symmetric".into()));
        }
        if values.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Parse("grid kernel entries must lie in [0,1]".into()));
        }
        Ok(KernelGraphon::Grid(values))
    }

    /// Exact stepfunction form. Constants become one class; grids keep
    /// their own cells; the half-graph limit averages each cell of an
    /// even m x m grid exactly (the diagonal discontinuity bisects the
    /// straddling cells, which get value 1/2).
    pub fn to_step(&self, m: usize) -> Result<StepGraphon> {
        match self {
            KernelGraphon::Constant(p) => StepGraphon::constant(*p),
            KernelGraphon::Grid(vals) => {
                let q = vals.rows();
                StepGraphon::new(vec![1.0 / q as f64; q], vals.clone())
            }
            KernelGraphon::HalfGraphLimit => {
                if m == 0 || m % 2 != 0 {
                    return Err(Error::Precondition(format!(
                        "half-graph limit needs an even grid size, got {m}"
                    )));
                }
                let half = m / 2;
                let vals = Matrix::from_fn(m, m, |i, j| {
                    let d = i.abs_diff(j);
                    if d > half {
                        1.0
                    } else if d == half {
                        0.5
                    } else {
                        0.0
                    }
                });
                StepGraphon::new(vec![1.0 / m as f64; m], vals)
            }
        }
    }
}

impl Graphon for KernelGraphon {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            KernelGraphon::Constant(p) => *p,
            KernelGraphon::HalfGraphLimit => {
                if (x - y).abs() >= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelGraphon::Grid(vals) => {
                let m = vals.rows();
                let cell = |z: f64| (((z * m as f64) as usize).min(m - 1)).max(0);
                vals.get(cell(x), cell(y))
            }
        }
    }
}

/// A graphon in any of the representations the file formats and CLI
/// support.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphonRepr {
    Step(StepGraphon),
    Kernel(KernelGraphon),
}

impl GraphonRepr {
    /// Exact stepfunction form; `m` sizes the grid for the half-graph
    /// limit and is ignored by representations with their own classes.
    pub fn to_step(&self, m: usize) -> Result<StepGraphon> {
        match self {
            GraphonRepr::Step(w) => Ok(w.clone()),
            GraphonRepr::Kernel(k) => k.to_step(m),
        }
    }
}

impl Graphon for GraphonRepr {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            GraphonRepr::Step(w) => w.eval(x, y),
            GraphonRepr::Kernel(k) => k.eval(x, y),
        }
    }
}

/// The stepfunction of a weighted graph: one class per node with
/// measure alpha_i / total, values beta.
pub fn from_weighted_graph(h: &WeightedGraph) -> StepGraphon {
    let total = h.alpha_total();
    let weights: Vec<f64> = h.alpha().iter().map(|a| a / total).collect();
    StepGraphon::new(weights, h.beta_matrix().clone())
        .expect("weighted graph invariants imply stepfunction invariants")
}

fn step_budget(k: usize, q: usize) -> Result<()> {
    // the last level is folded into a dot product, so the enumeration
    // visits at most q^(k-1) prefixes
    if k <= 1 || (q as f64).powi(k as i32 - 1) <= 2e9 {
        Ok(())
    } else {
        Err(Error::Budget(format!(
            "stepfunction density over {q}^{k} class assignments"
        )))
    }
}

/// Exact homomorphism density into a stepfunction: the sum over class
/// assignments of the product of class measures and edge values,
/// enumerated in mixed-radix order with zero-product subtrees skipped.
pub fn t_step(f: &SimpleGraph, w: &StepGraphon) -> Result<f64> {
    let k = f.n();
    let q = w.q();
    step_budget(k, q)?;
    if k == 0 {
        return Ok(1.0);
    }
    let earlier: Vec<Vec<usize>> = (0..k)
        .map(|v| {
            f.edges()
                .iter()
                .filter_map(|&(a, b)| {
                    if b == v && a < v {
                        Some(a)
                    } else if a == v && b < v {
                        Some(b)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    if k == 1 {
        return Ok(1.0); // class weights sum to one
    }
    // fold the last level into precomputed dot products where possible
    let last = k - 1;
    let row_dots: Vec<f64> = if earlier[last].len() == 1 {
        (0..q)
            .map(|r| kahan_sum((0..q).map(|c| w.weights[c] * w.value(r, c))))
            .collect()
    } else {
        Vec::new()
    };

    fn descend(
        w: &StepGraphon,
        earlier: &[Vec<usize>],
        row_dots: &[f64],
        phi: &mut [usize],
        level: usize,
        last: usize,
        weight: f64,
        acc: &mut Kahan,
    ) {
        if level == last {
            match earlier[last].len() {
                0 => acc.add(weight),
                1 => acc.add(weight * row_dots[phi[earlier[last][0]]]),
                _ => {
                    let q = w.q();
                    let mut inner = 0.0;
                    for c in 0..q {
                        let mut p = w.weights[c];
                        for &j in &earlier[last] {
                            p *= w.value(phi[j], c);
                            if p == 0.0 {
                                break;
                            }
                        }
                        inner += p;
                    }
                    acc.add(weight * inner);
                }
            }
            return;
        }
        let q = w.q();
        for c in 0..q {
            let mut p = weight * w.weights[c];
            for &j in &earlier[level] {
                p *= w.value(phi[j], c);
                if p == 0.0 {
                    break;
                }
            }
            if p == 0.0 {
                continue;
            }
            phi[level] = c;
            descend(w, earlier, row_dots, phi, level + 1, last, p, acc);
        }
    }

    // parallel over the first coordinate; per-chunk results are summed
    // in index order so the value is independent of the worker count
    let per_root: Vec<f64> = (0..q)
        .into_par_iter()
        .map(|c0| {
            let mut acc = Kahan::new();
            let mut phi = vec![0usize; k];
            phi[0] = c0;
            descend(w, &earlier, &row_dots, &mut phi, 1, last, w.weights[c0], &mut acc);
            acc.value()
        })
        .collect();
    Ok(kahan_sum(per_root.into_iter()))
}

/// Density with some vertices pinned to classes: pinned vertices
/// contribute edge values but no class measure. No pins reduces to
/// `t_step`; all vertices pinned gives the bare product of values.
pub fn t_pinned(f: &SimpleGraph, w: &StepGraphon, pins: &PartialMap) -> Result<f64> {
    let k = f.n();
    let q = w.q();
    step_budget(k, q)?;
    let pin_table = pins.pin_table(k, q)?;
    if k == 0 {
        return Ok(1.0);
    }
    let earlier: Vec<Vec<usize>> = (0..k)
        .map(|v| {
            f.edges()
                .iter()
                .filter_map(|&(a, b)| {
                    if b == v && a < v {
                        Some(a)
                    } else if a == v && b < v {
                        Some(b)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    fn descend(
        w: &StepGraphon,
        earlier: &[Vec<usize>],
        pins: &[Option<usize>],
        phi: &mut [usize],
        level: usize,
        k: usize,
        weight: f64,
        acc: &mut Kahan,
    ) {
        let q = w.q();
        let (lo, hi, free) = match pins[level] {
            Some(c) => (c, c + 1, false),
            None => (0, q, true),
        };
        for c in lo..hi {
            let mut p = weight;
            if free {
                p *= w.weights[c];
            }
            for &j in &earlier[level] {
                p *= w.value(phi[j], c);
                if p == 0.0 {
                    break;
                }
            }
            if p == 0.0 {
                continue;
            }
            if level + 1 == k {
                acc.add(p);
            } else {
                phi[level] = c;
                descend(w, earlier, pins, phi, level + 1, k, p, acc);
            }
        }
    }

    let mut acc = Kahan::new();
    let mut phi = vec![0usize; k];
    descend(w, &earlier, &pin_table, &mut phi, 0, k, 1.0, &mut acc);
    Ok(acc.value())
}

/// Monte-Carlo density estimate for an arbitrary kernel: the mean over
/// `samples` i.i.d. uniform vertex placements of the edge-value
/// product, with its standard error. Deterministic for a fixed seed and
/// independent of worker count (one derived stream per sample).
pub fn t_mc(
    f: &SimpleGraph,
    w: &impl Graphon,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let k = f.n();
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = crate::rng::stream(seed, s);
            let xs: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            f.edges()
                .iter()
                .map(|&(u, v)| w.eval(xs[u], xs[v]))
                .product()
        })
        .collect();
    Ok(mean_stderr(&values))
}

/// Tensor-product stepfunction: classes are pairs, measures multiply,
/// values multiply. Densities multiply for every test graph.
pub fn product_graphon(w1: &StepGraphon, w2: &StepGraphon) -> StepGraphon {
    let (q1, q2) = (w1.q(), w2.q());
    let mut weights = Vec::with_capacity(q1 * q2);
    for i in 0..q1 {
        for j in 0..q2 {
            weights.push(w1.weights[i] * w2.weights[j]);
        }
    }
    let values = Matrix::from_fn(q1 * q2, q1 * q2, |a, b| {
        let (i1, j1) = (a / q2, a % q2);
        let (i2, j2) = (b / q2, b % q2);
        w1.value(i1, i2) * w2.value(j1, j2)
    });
    // renormalize the last weight against accumulated rounding
    let total = kahan_sum(weights.iter().copied());
    let q = weights.len();
    weights[q - 1] += 1.0 - total;
    StepGraphon::new(weights, values).expect("product of valid stepfunctions is valid")
}

/// Replaces each factor x factor block by its average. Coarsening by a
/// then b equals coarsening by a*b.
pub fn coarsen(values: &Matrix, factor: usize) -> Result<Matrix> {
    if values.rows() != values.cols() {
        return Err(Error::Precondition(format!(
            "coarsening needs a square matrix, got {}x{}",
            values.rows(),
            values.cols()
        )));
    }
    let n = values.rows();
    if factor == 0 || n % factor != 0 {
        return Err(Error::Precondition(format!(
            "factor {factor} does not divide matrix dimension {n}"
        )));
    }
    let m = n / factor;
    let mut out = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = Kahan::new();
            for a in 0..factor {
                for b in 0..factor {
                    acc.add(values.get(i * factor + a, j * factor + b));
                }
            }
            out.set(i, j, acc.value() / (factor * factor) as f64);
        }
    }
    Ok(out)
}

/// Common interval refinement of two stepfunctions: returns the refined
/// class measures and, per refined class, the source class in each input.
pub fn common_refinement(a: &StepGraphon, b: &StepGraphon) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
    let mut cuts: Vec<f64> = a
        .boundaries
        .iter()
        .chain(b.boundaries.iter())
        .copied()
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut weights = Vec::new();
    let mut ia = Vec::new();
    let mut ib = Vec::new();
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let width = hi - lo;
        if width <= 1e-14 {
            continue;
        }
        let mid = (lo + hi) / 2.0;
        weights.push(width);
        ia.push(a.class_of(mid));
        ib.push(b.class_of(mid));
    }
    (weights, ia, ib)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities;
    use crate::graphs::pair_count;
    use rand::Rng;

    fn random_step(rng: &mut impl Rng, q: usize) -> StepGraphon {
        let mut weights: Vec<f64> = (0..q).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let t = kahan_sum(weights.iter().copied());
        weights[q - 1] += 1.0 - t;
        let mut vals = Matrix::zeros(q, q);
        for i in 0..q {
            for j in i..q {
                let v = rng.gen_range(0.0..=1.0);
                vals.set(i, j, v);
                vals.set(j, i, v);
            }
        }
        StepGraphon::new(weights, vals).unwrap()
    }

    fn random_weighted(rng: &mut impl Rng, n: usize) -> WeightedGraph {
        let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..=1.0)).collect();
        let mut beta = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let b: f64 = rng.gen_range(0.0..=1.0);
                beta.set(i, j, b);
                beta.set(j, i, b);
            }
        }
        WeightedGraph::new(alpha, beta).unwrap()
    }

    #[test]
    fn t_step_frozen_examples() {
        let k2 = SimpleGraph::complete(2);
        let k3 = SimpleGraph::complete(3);
        let c4 = SimpleGraph::cycle(4);
        let p = StepGraphon::constant(0.41).unwrap();
        assert!((t_step(&k2, &p).unwrap() - 0.41).abs() < 1e-15);
        let bip = StepGraphon::balanced_bipartite();
        assert_eq!(t_step(&k3, &bip).unwrap(), 0.0);
        // all 16 assignments of C4: only the two alternating ones survive
        assert!((t_step(&c4, &bip).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn from_weighted_graph_examples() {
        let g = WeightedGraph::loop_node(0.7).unwrap();
        let w = from_weighted_graph(&g);
        assert_eq!(w.q(), 1);
        assert_eq!(w.value(0, 0), 0.7);
        let k2 = SimpleGraph::complete(2).to_weighted();
        let w = from_weighted_graph(&k2);
        assert_eq!(w.q(), 2);
        assert_eq!(w.weights(), &[0.5, 0.5]);
        assert_eq!(w.value(0, 1), 1.0);
        assert_eq!(w.value(0, 0), 0.0);
    }

    #[test]
    fn stepfunction_density_matches_weighted_density_exactly() {
        let mut rng = crate::rng::root(20);
        let k3 = SimpleGraph::complete(3);
        for _ in 0..50 {
            let size = rng.gen_range(1..=5);
            let h = random_weighted(&mut rng, size);
            let w = from_weighted_graph(&h);
            let lhs = densities::t(&k3, &h).unwrap();
            let rhs = t_step(&k3, &w).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn exactness_over_all_small_test_graphs() {
        let mut rng = crate::rng::root(21);
        for _ in 0..50 {
            let size = rng.gen_range(1..=5);
            let h = random_weighted(&mut rng, size);
            let w = from_weighted_graph(&h);
            for k in 1..=4usize {
                for mask in 0u64..(1 << pair_count(k)) {
                    let f = SimpleGraph::from_edge_mask(k, mask);
                    let lhs = densities::t(&f, &h).unwrap();
                    let rhs = t_step(&f, &w).unwrap();
                    assert!(
                        (lhs - rhs).abs() <= 1e-12,
                        "k={k} mask={mask}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn t_step_multiplicative_over_disjoint_union() {
        let mut rng = crate::rng::root(22);
        for _ in 0..20 {
            let size = rng.gen_range(1..=3);
            let w = random_step(&mut rng, size);
            let f1 = SimpleGraph::from_edge_mask(3, rng.gen_range(0..8));
            let f2 = SimpleGraph::from_edge_mask(2, rng.gen_range(0..2));
            let lhs = t_step(&f1.disjoint_union(&f2), &w).unwrap();
            let rhs = t_step(&f1, &w).unwrap() * t_step(&f2, &w).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn t_mc_constant_recovers_p() {
        let k2 = SimpleGraph::complete(2);
        let w = KernelGraphon::Constant(0.37);
        let (est, err) = t_mc(&k2, &w, 2000, 7).unwrap();
        assert!((est - 0.37).abs() < 1e-12 && err < 1e-12); // every sample is exactly p
        let (est2, _) = t_mc(&k2, &w, 2000, 7).unwrap();
        assert_eq!(est, est2);
    }

    #[test]
    fn t_mc_half_graph_edge_density() {
        let k2 = SimpleGraph::complete(2);
        let w = KernelGraphon::HalfGraphLimit;
        let (est, err) = t_mc(&k2, &w, 20000, 11).unwrap();
        assert!((est - 0.25).abs() < 4.0 * err.max(1e-3), "{est} +- {err}");
    }

    #[test]
    fn t_mc_half_graph_star_densities() {
        // analytic: t(S_m) = integral of |x-1/2|^(m-1) = 2^(1-m)/m
        let w = KernelGraphon::HalfGraphLimit;
        for m in 2..=4usize {
            let star = SimpleGraph::star(m);
            let exact = 0.5f64.powi(m as i32 - 1) / m as f64;
            let (est, err) = t_mc(&star, &w, 40000, 13).unwrap();
            assert!(
                (est - exact).abs() < 5.0 * err,
                "m={m}: {est} vs {exact} (err {err})"
            );
        }
    }

    #[test]
    fn half_graph_grid_is_exact_for_k2() {
        for m in [4usize, 8, 16, 64] {
            let w = KernelGraphon::HalfGraphLimit.to_step(m).unwrap();
            let d = t_step(&SimpleGraph::complete(2), &w).unwrap();
            assert!((d - 0.25).abs() < 1e-13, "m={m}: {d}");
        }
        assert!(KernelGraphon::HalfGraphLimit.to_step(5).is_err());
    }

    #[test]
    fn t_pinned_examples() {
        let mut rng = crate::rng::root(23);
        let w = random_step(&mut rng, 3);
        let p3 = SimpleGraph::path(3);
        // no pins: equals t_step
        let v = t_pinned(&p3, &w, &PartialMap::empty()).unwrap();
        assert!((v - t_step(&p3, &w).unwrap()).abs() < 1e-13);
        // K2 with one endpoint pinned to class a: weighted degree of a
        let k2 = SimpleGraph::complete(2);
        for a in 0..3 {
            let v = t_pinned(&k2, &w, &PartialMap::new([(0, a)]).unwrap()).unwrap();
            let expect: f64 = (0..3).map(|b| w.weights()[b] * w.value(a, b)).sum();
            assert!((v - expect).abs() < 1e-13);
        }
        // all pinned: bare product over edges
        let pins = PartialMap::new([(0, 1), (1, 2), (2, 0)]).unwrap();
        let v = t_pinned(&p3, &w, &pins).unwrap();
        assert!((v - w.value(1, 2) * w.value(2, 0)).abs() < 1e-13);
        // invalid pin
        assert!(t_pinned(&k2, &w, &PartialMap::new([(0, 9)]).unwrap()).is_err());
    }

    #[test]
    fn t_pinned_integrates_back_to_t_step() {
        let mut rng = crate::rng::root(24);
        for _ in 0..10 {
            let w = random_step(&mut rng, 3);
            let f = SimpleGraph::from_edge_mask(4, rng.gen_range(0..64));
            let total: f64 = (0..3)
                .map(|c| {
                    w.weights()[c]
                        * t_pinned(&f, &w, &PartialMap::new([(1, c)]).unwrap()).unwrap()
                })
                .sum();
            assert!((total - t_step(&f, &w).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn product_graphon_examples() {
        let a = StepGraphon::constant(0.3).unwrap();
        let b = StepGraphon::constant(0.6).unwrap();
        let prod = product_graphon(&a, &b);
        assert_eq!(prod.q(), 1);
        assert!((prod.value(0, 0) - 0.18).abs() < 1e-15);
        // multiplying by the constant-1 graphon splits classes but keeps values
        let mut rng = crate::rng::root(25);
        let w = random_step(&mut rng, 2);
        let one = StepGraphon::constant(1.0).unwrap();
        let prod = product_graphon(&w, &one);
        let k3 = SimpleGraph::complete(3);
        assert!(
            (t_step(&k3, &prod).unwrap() - t_step(&k3, &w).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn product_graphon_density_identity() {
        let mut rng = crate::rng::root(26);
        let k3 = SimpleGraph::complete(3);
        for _ in 0..20 {
            let w1 = random_step(&mut rng, 2);
            let w2 = random_step(&mut rng, 2);
            let prod = product_graphon(&w1, &w2);
            let lhs = t_step(&k3, &prod).unwrap();
            let rhs = t_step(&k3, &w1).unwrap() * t_step(&k3, &w2).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn coarsen_examples() {
        let m = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let c = coarsen(&m, 2).unwrap();
        assert_eq!(c.rows(), 1);
        assert!((c.get(0, 0) - 2.5).abs() < 1e-15);
        // coarsening a constant matrix keeps the constant
        let k = Matrix::from_fn(4, 4, |_, _| 0.7);
        let c = coarsen(&k, 2).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| (c.get(i, j) - 0.7).abs() < 1e-15)));
        // two-step coarsening equals one-shot coarsening
        let mut rng = crate::rng::root(27);
        let big = Matrix::from_fn(4, 4, |_, _| rng.gen_range(0.0..1.0));
        let two_step = coarsen(&coarsen(&big, 2).unwrap(), 2).unwrap();
        let one_shot = coarsen(&big, 4).unwrap();
        assert!((two_step.get(0, 0) - one_shot.get(0, 0)).abs() < 1e-14);
        assert!(coarsen(&big, 3).is_err());
    }

    #[test]
    fn grid_midpoint_approximates_t_step() {
        let mut rng = crate::rng::root(28);
        let w = random_step(&mut rng, 3);
        let k3 = SimpleGraph::complete(3);
        let exact = t_step(&k3, &w).unwrap();
        let mut prev_err = f64::INFINITY;
        for m in [32usize, 128] {
            let grid = w.to_grid_midpoint(m).to_step(m).unwrap();
            let approx = t_step(&k3, &grid).unwrap();
            let err = (approx - exact).abs();
            assert!(err <= prev_err + 1e-12);
            assert!(err < 12.0 / m as f64, "m={m}: err {err}");
            prev_err = err;
        }
    }

    #[test]
    fn class_lookup_covers_unit_interval() {
        let mut rng = crate::rng::root(29);
        let w = random_step(&mut rng, 4);
        assert_eq!(w.class_of(0.0), 0);
        assert_eq!(w.class_of(1.0), 3);
        // boundaries are consistent: class measure matches weights
        for _ in 0..200 {
            let x: f64 = rng.gen();
            let c = w.class_of(x);
            assert!(x >= w.boundaries[c] && x <= w.boundaries[c + 1]);
        }
    }

    #[test]
    fn common_refinement_is_consistent() {
        let mut rng = crate::rng::root(30);
        let a = random_step(&mut rng, 3);
        let b = random_step(&mut rng, 2);
        let (weights, ia, ib) = common_refinement(&a, &b);
        assert!((kahan_sum(weights.iter().copied()) - 1.0).abs() < 1e-12);
        assert!(weights.len() <= 4 + 1);
        // per-class measures recombine to the original weights
        for (idx, orig) in a.weights().iter().enumerate() {
            let total: f64 = weights
                .iter()
                .zip(&ia)
                .filter(|&(_, &c)| c == idx)
                .map(|(w, _)| w)
                .sum();
            assert!((total - orig).abs() < 1e-10);
        }
        let _ = ib;
    }

    #[test]
    fn step_budget_guard() {
        let w = StepGraphon::constant(0.5).unwrap();
        let f = SimpleGraph::empty(40);
        // q = 1, always fine
        assert!(t_step(&f, &w).is_ok());
        let mut rng = crate::rng::root(31);
        let big = random_step(&mut rng, 8);
        let f12 = SimpleGraph::empty(13);
        assert!(matches!(t_step(&f12, &big), Err(Error::Budget(_))));
    }

    #[test]
    fn serde_roundtrip() {
        let w = StepGraphon::balanced_bipartite();
        let json = serde_json::to_string(&w).unwrap();
        let back: StepGraphon = serde_json::from_str(&json).unwrap();
        assert_eq!(w, back);
        // invalid weights rejected on deserialization
        let bad = r#"{"weights":[0.5,0.6],"values":[[0,1],[1,0]]}"#;
        assert!(serde_json::from_str::<StepGraphon>(bad).is_err());
    }
}
