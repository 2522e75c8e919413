//! W-random graphs, exact small-n model distributions, the random model
//! driven by the inclusion-exclusion transform of a parameter, and the
//! consistency/concentration checks those models satisfy.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::densities::{self, GraphParameter};
use crate::error::{Error, Result};
use crate::graphons::{from_weighted_graph, t_step, Graphon, StepGraphon};
use crate::graphs::{for_each_permutation, pair_count, pairs, SimpleGraph, WeightedGraph};
use crate::numeric::{kahan_sum, sample_variance, Kahan};

/// One sampled graph plus, on request, the latent uniforms that drove it.
#[derive(Clone, Debug)]
pub struct SampleRecord {
    pub graph: SimpleGraph,
    pub latents: Option<Vec<f64>>,
    pub seed: u64,
}

/// An exact probability table over labeled graphs on [n], indexed by
/// edge bitmask in pair order. Only maintained for n <= 5.
#[derive(Clone, Debug)]
pub struct ExactModel {
    n: usize,
    probs: Vec<f64>,
}

impl ExactModel {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if n > 5 {
            return Err(Error::Budget(format!(
                "exact model tables are kept for n <= 5, got {n}"
            )));
        }
        if probs.len() != 1 << pair_count(n) {
            return Err(Error::Precondition(format!(
                "table needs {} entries for n={n}, got {}",
                1 << pair_count(n),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|&&p| p < -1e-12 || !p.is_finite()) {
            return Err(Error::Precondition(format!("invalid probability {p}")));
        }
        let total = kahan_sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(ExactModel { n, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, g: &SimpleGraph) -> Result<f64> {
        if g.n() != self.n {
            return Err(Error::Precondition(format!(
                "model is over graphs on {} nodes, asked about {}",
                self.n,
                g.n()
            )));
        }
        Ok(self.probs[g.edge_mask()? as usize])
    }

    /// Expectation of t0(F, .) under this model.
    pub fn expectation_t0(&self, f: &SimpleGraph) -> Result<f64> {
        let mut acc = Kahan::new();
        for (mask, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let g = SimpleGraph::from_edge_mask(self.n, mask as u64);
            acc.add(p * densities::t0(f, &g.to_weighted())?);
        }
        Ok(acc.value())
    }

    /// A copy with probability mass `delta` moved from graph `from` to
    /// graph `to` (both by edge mask). Used to build deliberately
    /// inconsistent tables in tests and demos.
    pub fn perturbed(&self, from: u64, to: u64, delta: f64) -> Result<ExactModel> {
        let mut probs = self.probs.clone();
        let from = from as usize;
        let to = to as usize;
        if from >= probs.len() || to >= probs.len() {
            return Err(Error::Precondition("mask out of range".into()));
        }
        if probs[from] < delta {
            return Err(Error::Precondition(format!(
                "not enough mass ({}) to move {delta}",
                probs[from]
            )));
        }
        probs[from] -= delta;
        probs[to] += delta;
        ExactModel::new(self.n, probs)
    }
}

/// A random graph model: either an exact table or a W-random sampler.
#[derive(Clone, Debug)]
pub enum RandomGraphModel {
    Exact(ExactModel),
    WRandom { n: usize, step: StepGraphon },
}

impl RandomGraphModel {
    pub fn n(&self) -> usize {
        match self {
            RandomGraphModel::Exact(m) => m.n(),
            RandomGraphModel::WRandom { n, .. } => *n,
        }
    }

    pub fn sample(&self, seed: u64) -> Result<SampleRecord> {
        match self {
            RandomGraphModel::WRandom { n, step } => Ok(sample_wrandom(step, *n, seed, false)),
            RandomGraphModel::Exact(m) => {
                let mut rng = crate::rng::root(seed);
                let x: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = m.probs.len() - 1;
                for (mask, &p) in m.probs.iter().enumerate() {
                    acc += p;
                    if x < acc {
                        chosen = mask;
                        break;
                    }
                }
                Ok(SampleRecord {
                    graph: SimpleGraph::from_edge_mask(m.n, chosen as u64),
                    latents: None,
                    seed,
                })
            }
        }
    }
}

fn sample_with_rng<W: Graphon>(
    w: &W,
    n: usize,
    rng: &mut ChaCha8Rng,
    seed: u64,
    emit_latents: bool,
) -> SampleRecord {
    // latents first, in node order, then one coin per pair in pair
    // order; the draw sequence is part of the reproducibility contract
    let xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let mut edges = Vec::new();
    for (u, v) in pairs(n) {
        let p = w.eval(xs[u], xs[v]);
        if rng.gen::<f64>() < p {
            edges.push((u, v));
        }
    }
    SampleRecord {
        graph: SimpleGraph::new(n, edges).expect("pairs are valid edges"),
        latents: emit_latents.then_some(xs),
        seed,
    }
}

/// Samples a W-random graph: n i.i.d. uniform latents, then each pair
/// {i,j} becomes an edge independently with probability W(X_i, X_j).
pub fn sample_wrandom<W: Graphon>(w: &W, n: usize, seed: u64, emit_latents: bool) -> SampleRecord {
    let mut rng = crate::rng::root(seed);
    sample_with_rng(w, n, &mut rng, seed, emit_latents)
}

/// Samples from the model of a weighted graph H: bins chosen with the
/// normalized node weights, edges with the corresponding edge weights.
/// Identical in distribution (and, per seed, identical in output) to
/// sampling from the stepfunction of H.
pub fn sample_model_h(h: &WeightedGraph, n: usize, seed: u64, emit_latents: bool) -> SampleRecord {
    sample_wrandom(&from_weighted_graph(h), n, seed, emit_latents)
}

/// The exact distribution of the W-random graph on [n]: for every
/// labeled graph, the probability integrates the class assignment of
/// each node against edge/non-edge factors.
pub fn exact_distribution(w: &StepGraphon, n: usize) -> Result<ExactModel> {
    let q = w.q();
    let m = pair_count(n);
    if n > 5 {
        return Err(Error::Budget(format!(
            "exact distribution kept for n <= 5, got {n}"
        )));
    }
    let assignments = (q as f64).powi(n as i32);
    if assignments * (1u64 << m) as f64 * m.max(1) as f64 > 2e8 {
        return Err(Error::Budget(format!(
            "exact distribution over {q}^{n} assignments"
        )));
    }
    let pair_list: Vec<(usize, usize)> = pairs(n).collect();
    let mut probs = vec![0.0f64; 1 << m];
    let mut phi = vec![0usize; n];
    loop {
        let weight: f64 = phi.iter().map(|&c| w.weights()[c]).product();
        // distribution over masks for this assignment: extend pair by pair
        let mut dist = vec![0.0f64; 1 << m];
        dist[0] = weight;
        for (idx, &(u, v)) in pair_list.iter().enumerate() {
            let p = w.value(phi[u], phi[v]);
            let bit = 1usize << idx;
            for mask in (0..1 << m).rev() {
                if mask & bit == 0 {
                    let base = dist[mask];
                    if base != 0.0 {
                        dist[mask | bit] = base * p;
                        dist[mask] = base * (1.0 - p);
                    } else {
                        dist[mask | bit] = 0.0;
                    }
                }
            }
        }
        for (mask, d) in dist.iter().enumerate() {
            probs[mask] += d;
        }
        // mixed-radix increment
        let mut pos = 0;
        loop {
            if pos == n {
                return ExactModel::new(n, probs);
            }
            phi[pos] += 1;
            if phi[pos] < q {
                break;
            }
            phi[pos] = 0;
            pos += 1;
        }
    }
}

fn format_graph(g: &SimpleGraph) -> String {
    let edges: Vec<String> = g
        .edges()
        .iter()
        .map(|&(u, v)| format!("{}-{}", u + 1, v + 1))
        .collect();
    format!("n={}, edges=[{}]", g.n(), edges.join(","))
}

/// Builds the random graph model that realizes a normalized
/// multiplicative parameter: graph F on [k] gets probability equal to
/// the inclusion-exclusion transform of f at F. A transform value below
/// -tol certifies that f is not a density limit and is reported with
/// its witness graph; values in [-tol, 0) are clamped to zero and the
/// table renormalized.
pub fn model_from_parameter(f: &GraphParameter, k: usize, tol: f64) -> Result<ExactModel> {
    if !f.is_normalized() || !f.is_multiplicative() {
        return Err(Error::Precondition(format!(
            "model construction needs a declared normalized multiplicative parameter, got {:?}",
            f
        )));
    }
    if k > 5 {
        return Err(Error::Budget(format!("model tables kept for k <= 5, got {k}")));
    }
    let m = pair_count(k);
    let mut probs = Vec::with_capacity(1 << m);
    for mask in 0u64..(1 << m) {
        let graph = SimpleGraph::from_edge_mask(k, mask);
        let value = f.dagger(&graph)?;
        if value < -tol {
            return Err(Error::NegativeDagger {
                graph: format_graph(&graph),
                value,
            });
        }
        probs.push(value.max(0.0));
    }
    let total = kahan_sum(probs.iter().copied());
    if total <= 0.0 {
        return Err(Error::Precondition(
            "transformed parameter has no probability mass".into(),
        ));
    }
    for p in &mut probs {
        *p /= total;
    }
    ExactModel::new(k, probs)
}

/// Expectation identity: E t0(F, G(n,W)) over the exact distribution
/// equals t(F, W). Returns (lhs, rhs); errs beyond 1e-10.
pub fn check_expectation_identity(
    w: &StepGraphon,
    f: &SimpleGraph,
    n: usize,
) -> Result<(f64, f64)> {
    if f.n() > n {
        return Err(Error::Precondition(format!(
            "test graph on {} nodes against model on {n}",
            f.n()
        )));
    }
    let model = exact_distribution(w, n)?;
    let lhs = model.expectation_t0(f)?;
    let rhs = t_step(f, w)?;
    if (lhs - rhs).abs() > 1e-10 {
        return Err(Error::Invariant(format!(
            "expectation identity failed: {lhs} vs {rhs}"
        )));
    }
    Ok((lhs, rhs))
}

/// Deviations of an exact model from the three structural properties a
/// W-random model satisfies: relabeling invariance, deletion marginal,
/// and independence of the induced subgraphs across every split.
#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub relabel_dev: f64,
    pub deletion_dev: f64,
    pub independence_dev: f64,
}

impl ConsistencyReport {
    pub fn max_deviation(&self) -> f64 {
        self.relabel_dev
            .max(self.deletion_dev)
            .max(self.independence_dev)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation() <= tol
    }
}

/// Verifies model consistency: `m` on n nodes against `m_minus` on n-1.
pub fn check_model_consistency(m: &ExactModel, m_minus: &ExactModel) -> Result<ConsistencyReport> {
    let n = m.n();
    if n == 0 || m_minus.n() != n - 1 {
        return Err(Error::Precondition(format!(
            "need models on n and n-1 nodes, got {} and {}",
            n,
            m_minus.n()
        )));
    }
    let pair_list: Vec<(usize, usize)> = pairs(n).collect();
    let mask_count = 1usize << pair_count(n);

    // (i) invariance under every relabeling
    let mut relabel_dev = 0.0f64;
    for_each_permutation(n, |perm| {
        for mask in 0..mask_count {
            let mut image = 0usize;
            for (idx, &(u, v)) in pair_list.iter().enumerate() {
                if mask >> idx & 1 == 1 {
                    let (a, b) = (perm[u].min(perm[v]), perm[u].max(perm[v]));
                    image |= 1 << crate::graphs::pair_index(n, a, b);
                }
            }
            relabel_dev = relabel_dev.max((m.probs[mask] - m.probs[image]).abs());
        }
    });

    // (ii) deleting the last node marginalizes to the smaller model
    let reduced_index: Vec<Option<usize>> = pair_list
        .iter()
        .map(|&(u, v)| (v < n - 1).then(|| crate::graphs::pair_index(n - 1, u, v)))
        .collect();
    let mut marginal = vec![0.0f64; 1 << pair_count(n - 1)];
    for mask in 0..mask_count {
        let mut reduced = 0usize;
        for (idx, red) in reduced_index.iter().enumerate() {
            if mask >> idx & 1 == 1 {
                if let Some(r) = red {
                    reduced |= 1 << r;
                }
            }
        }
        marginal[reduced] += m.probs[mask];
    }
    let deletion_dev = marginal
        .iter()
        .zip(m_minus.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    // (iii) induced subgraphs on {0..k-1} and {k..n-1} are independent
    let mut independence_dev = 0.0f64;
    for k in 1..n {
        let left_pairs: Vec<usize> = pair_list
            .iter()
            .enumerate()
            .filter_map(|(idx, &(_, v))| (v < k).then_some(idx))
            .collect();
        let right_pairs: Vec<usize> = pair_list
            .iter()
            .enumerate()
            .filter_map(|(idx, &(u, _))| (u >= k).then_some(idx))
            .collect();
        let mut joint =
            vec![vec![0.0f64; 1 << right_pairs.len()]; 1 << left_pairs.len()];
        let mut left_marg = vec![0.0f64; 1 << left_pairs.len()];
        let mut right_marg = vec![0.0f64; 1 << right_pairs.len()];
        for mask in 0..mask_count {
            let mut a = 0usize;
            for (pos, &idx) in left_pairs.iter().enumerate() {
                if mask >> idx & 1 == 1 {
                    a |= 1 << pos;
                }
            }
            let mut b = 0usize;
            for (pos, &idx) in right_pairs.iter().enumerate() {
                if mask >> idx & 1 == 1 {
                    b |= 1 << pos;
                }
            }
            joint[a][b] += m.probs[mask];
            left_marg[a] += m.probs[mask];
            right_marg[b] += m.probs[mask];
        }
        for (a, row) in joint.iter().enumerate() {
            for (b, &j) in row.iter().enumerate() {
                independence_dev =
                    independence_dev.max((j - left_marg[a] * right_marg[b]).abs());
            }
        }
    }

    Ok(ConsistencyReport {
        relabel_dev,
        deletion_dev,
        independence_dev,
    })
}

/// Tail frequency and variance of sampled densities against the
/// closed-form concentration bounds.
#[derive(Clone, Debug)]
pub struct ConcentrationReport {
    pub empirical_tail: f64,
    pub azuma_bound: f64,
    pub variance: f64,
    pub var_bound: f64,
}

/// Samples `trials` W-random graphs and reports: the frequency of
/// |t0(F,G) - t(F,W)| > eps against the martingale tail bound
/// 2 exp(-eps^2 n / (2 k^2)), and the sample variance of t(F,G)
/// against 3 k^2 / n.
pub fn concentration_experiment(
    w: &StepGraphon,
    f: &SimpleGraph,
    n: usize,
    trials: usize,
    eps: f64,
    seed: u64,
) -> Result<ConcentrationReport> {
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let reference = t_step(f, w)?;
    let k = f.n();
    let outcomes: std::result::Result<Vec<(f64, f64)>, Error> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = crate::rng::stream(seed, trial);
            let rec = sample_with_rng(w, n, &mut rng, seed, false);
            let gw = rec.graph.to_weighted();
            let t0 = densities::t0(f, &gw)?;
            let tv = densities::t(f, &gw)?;
            Ok((t0, tv))
        })
        .collect();
    let outcomes = outcomes?;
    let exceed = outcomes
        .iter()
        .filter(|(t0, _)| (t0 - reference).abs() > eps)
        .count();
    let t_values: Vec<f64> = outcomes.iter().map(|&(_, tv)| tv).collect();
    let k2 = (k * k) as f64;
    Ok(ConcentrationReport {
        empirical_tail: exceed as f64 / trials as f64,
        azuma_bound: 2.0 * (-eps * eps * n as f64 / (2.0 * k2)).exp(),
        variance: sample_variance(&t_values),
        var_bound: 3.0 * k2 / n as f64,
    })
}
