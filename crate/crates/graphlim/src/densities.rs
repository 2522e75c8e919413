//! Exact homomorphism / injective / induced counting into weighted
//! graphs, the density normalizations t, t0, t1, and the
//! inclusion-exclusion (dagger) transform on graph parameters.

use std::collections::HashMap;
use std::sync::Arc;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::graphs::SimpleGraph;
use crate::graphs::WeightedGraph;
use crate::numeric::{elementary_symmetric, factorial, kahan_sum, Kahan};

/// A partial assignment of test-graph vertices to target indices
/// (target vertices, or stepfunction classes when used for pinning).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialMap {
    assignments: Vec<(usize, usize)>,
}

impl PartialMap {
    pub fn empty() -> Self {
        PartialMap::default()
    }

    pub fn new(assignments: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let assignments: Vec<(usize, usize)> = assignments.into_iter().collect();
        for (i, &(v, _)) in assignments.iter().enumerate() {
            if assignments[..i].iter().any(|&(u, _)| u == v) {
                return Err(Error::Precondition(format!(
                    "vertex {} pinned twice",
                    v + 1
                )));
            }
        }
        Ok(PartialMap { assignments })
    }

    pub fn assignments(&self) -> &[(usize, usize)] {
        &self.assignments
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Per-vertex pin table for a test graph on k vertices.
    pub fn pin_table(&self, k: usize, target_size: usize) -> Result<Vec<Option<usize>>> {
        let mut pins = vec![None; k];
        for &(v, c) in &self.assignments {
            if v >= k {
                return Err(Error::Precondition(format!(
                    "pinned vertex {} outside test graph on {} vertices",
                    v + 1,
                    k
                )));
            }
            if c >= target_size {
                return Err(Error::Precondition(format!(
                    "pin image {} outside target of size {}",
                    c + 1,
                    target_size
                )));
            }
            pins[v] = Some(c);
        }
        Ok(pins)
    }
}

fn enumeration_guard(k: usize, n: usize) -> Result<()> {
    if k <= 10 || (n as f64).powi(k as i32) <= 1e8 {
        Ok(())
    } else {
        Err(Error::Budget(format!(
            "map enumeration over {n}^{k} targets"
        )))
    }
}

/// Shared enumerator over maps V(F) -> V(G), iterated in mixed-radix
/// (lexicographic) order with zero-weight subtrees skipped. Pinned
/// vertices contribute edge factors but no node-weight factor.
fn map_sum(
    f: &SimpleGraph,
    g: &WeightedGraph,
    pins: &[Option<usize>],
    injective: bool,
) -> f64 {
    let k = f.n();
    let n = g.n();
    if k == 0 {
        return 1.0;
    }
    if injective && k > n {
        return 0.0;
    }
    // earlier (already assigned) neighbors of each vertex in index order
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
    let alpha = g.alpha();
    // Free tail vertex with exactly one earlier neighbor r contributes
    // sum_c alpha[c] * beta[r][c]; precompute those row sums once.
    let hoist_rowdots =
        !injective && pins[k - 1].is_none() && earlier[k - 1].len() == 1;
    let row_dots: Vec<f64> = if hoist_rowdots {
        (0..n)
            .map(|r| kahan_sum((0..n).map(|c| alpha[c] * g.beta(r, c))))
            .collect()
    } else {
        Vec::new()
    };
    let alpha_total = g.alpha_total();

    struct Ctx<'a> {
        g: &'a WeightedGraph,
        earlier: &'a [Vec<usize>],
        pins: &'a [Option<usize>],
        injective: bool,
        row_dots: &'a [f64],
        alpha_total: f64,
        k: usize,
        n: usize,
        phi: Vec<usize>,
        used: Vec<bool>,
        acc: Kahan,
    }

    // the innermost level accumulates in a flat loop; one compensated
    // add per prefix keeps the sum order-robust without per-leaf cost
    fn last_level(ctx: &mut Ctx, weight: f64) {
        let level = ctx.k - 1;
        let tail = &ctx.earlier[level];
        if let Some(c) = ctx.pins[level] {
            if ctx.injective && ctx.used[c] {
                return;
            }
            let mut w = weight;
            for &j in tail {
                w *= ctx.g.beta(ctx.phi[j], c);
            }
            if w != 0.0 {
                ctx.acc.add(w);
            }
            return;
        }
        if !ctx.injective {
            match tail.len() {
                0 => {
                    ctx.acc.add(weight * ctx.alpha_total);
                    return;
                }
                1 => {
                    ctx.acc.add(weight * ctx.row_dots[ctx.phi[tail[0]]]);
                    return;
                }
                _ => {}
            }
        }
        let mut rows: [&[f64]; 12] = [&[]; 12];
        for (slot, &j) in rows.iter_mut().zip(tail) {
            *slot = ctx.g.beta_row(ctx.phi[j]);
        }
        let rows = &rows[..tail.len().min(12)];
        let overflow = &tail[tail.len().min(12)..];
        let alpha = ctx.g.alpha();
        let mut inner = 0.0f64;
        for c in 0..ctx.n {
            if ctx.injective && ctx.used[c] {
                continue;
            }
            let mut w = alpha[c];
            for row in rows {
                w *= row[c];
                if w == 0.0 {
                    break;
                }
            }
            for &j in overflow {
                w *= ctx.g.beta(ctx.phi[j], c);
            }
            inner += w;
        }
        if inner != 0.0 {
            ctx.acc.add(weight * inner);
        }
    }

    fn visit(ctx: &mut Ctx, level: usize, c: usize, weight: f64) {
        if ctx.injective && ctx.used[c] {
            return;
        }
        let mut w = weight;
        if ctx.pins[level].is_none() {
            w *= ctx.g.alpha()[c];
        }
        for &j in &ctx.earlier[level] {
            w *= ctx.g.beta(ctx.phi[j], c);
            if w == 0.0 {
                return;
            }
        }
        if w == 0.0 {
            return;
        }
        ctx.phi[level] = c;
        if ctx.injective {
            ctx.used[c] = true;
        }
        descend(ctx, level + 1, w);
        if ctx.injective {
            ctx.used[c] = false;
        }
    }

    fn descend(ctx: &mut Ctx, level: usize, weight: f64) {
        if level == ctx.k - 1 {
            last_level(ctx, weight);
            return;
        }
        match ctx.pins[level] {
            Some(c) => visit(ctx, level, c, weight),
            None => {
                for c in 0..ctx.n {
                    visit(ctx, level, c, weight);
                }
            }
        }
    }

    let mut ctx = Ctx {
        g,
        earlier: &earlier,
        pins,
        injective,
        row_dots: &row_dots,
        alpha_total,
        k,
        n,
        phi: vec![0; k],
        used: vec![false; n],
        acc: Kahan::new(),
    };
    // pinned images occupy their targets in injective mode
    if injective {
        for pin in pins.iter().flatten() {
            ctx.used[*pin] = true;
        }
    }
    descend(&mut ctx, 0, 1.0);
    ctx.acc.value()
}

/// Weighted homomorphism function: the node/edge-weighted sum over all
/// maps V(F) -> V(G). Equals the homomorphism count when G is unweighted.
pub fn hom(f: &SimpleGraph, g: &WeightedGraph) -> Result<f64> {
    enumeration_guard(f.n(), g.n())?;
    Ok(map_sum(f, g, &vec![None; f.n()], false))
}

/// Homomorphism sum over extensions of a partial map; the pinned
/// vertices' node weights are divided out. Empty map gives `hom`.
pub fn hom_partial(f: &SimpleGraph, g: &WeightedGraph, phi: &PartialMap) -> Result<f64> {
    enumeration_guard(f.n(), g.n())?;
    let pins = phi.pin_table(f.n(), g.n())?;
    Ok(map_sum(f, g, &pins, false))
}

/// Homomorphism density: hom normalized by (total node weight)^|V(F)|.
pub fn t(f: &SimpleGraph, g: &WeightedGraph) -> Result<f64> {
    Ok(hom(f, g)? / g.alpha_total().powi(f.n() as i32))
}

/// Injective homomorphism sum.
pub fn inj(f: &SimpleGraph, g: &WeightedGraph) -> Result<f64> {
    if f.n() > g.n() {
        return Err(Error::Precondition(format!(
            "injective counting needs |V(F)| <= |V(G)|, got {} > {}",
            f.n(),
            g.n()
        )));
    }
    enumeration_guard(f.n(), g.n())?;
    Ok(map_sum(f, g, &vec![None; f.n()], true))
}

/// Normalizer for the injective and induced densities:
/// k! times the k-th elementary symmetric polynomial of the node
/// weights. For unit weights this is the falling factorial (n)_k, and
/// an edgeless test graph always has density exactly 1.
pub fn injective_normalizer(k: usize, g: &WeightedGraph) -> f64 {
    factorial(k) * elementary_symmetric(g.alpha(), k)
}

/// Injective homomorphism density.
pub fn t0(f: &SimpleGraph, g: &WeightedGraph) -> Result<f64> {
    Ok(inj(f, g)? / injective_normalizer(f.n(), g))
}

/// Induced-embedding sum: injective maps weighted by edge weights on
/// E(F) and complementary weights 1-beta on the non-edges of F.
pub fn ind(f: &SimpleGraph, g: &WeightedGraph) -> Result<f64> {
    if f.n() > g.n() {
        return Err(Error::Precondition(format!(
            "induced counting needs |V(F)| <= |V(G)|, got {} > {}",
            f.n(),
            g.n()
        )));
    }
    enumeration_guard(f.n(), g.n())?;
    // induced counting into G is plain injective counting of F against a
    // doubled target where non-edges of F look up 1 - beta; fold the
    // complement edges in by enumerating maps directly.
    let k = f.n();
    let n = g.n();
    if k == 0 {
        return Ok(1.0);
    }
    let comp = f.complement();
    let earlier_edge: Vec<Vec<usize>> = (0..k)
        .map(|v| f.edges().iter().filter_map(|&(a, b)| edge_earlier(a, b, v)).collect())
        .collect();
    let earlier_non: Vec<Vec<usize>> = (0..k)
        .map(|v| comp.edges().iter().filter_map(|&(a, b)| edge_earlier(a, b, v)).collect())
        .collect();

    fn edge_earlier(a: usize, b: usize, v: usize) -> Option<usize> {
        if b == v && a < v {
            Some(a)
        } else if a == v && b < v {
            Some(b)
        } else {
            None
        }
    }

    fn descend(
        g: &WeightedGraph,
        earlier_edge: &[Vec<usize>],
        earlier_non: &[Vec<usize>],
        phi: &mut Vec<usize>,
        used: &mut Vec<bool>,
        level: usize,
        k: usize,
        n: usize,
        weight: f64,
        acc: &mut Kahan,
    ) {
        for c in 0..n {
            if used[c] {
                continue;
            }
            let mut w = weight * g.alpha()[c];
            for &j in &earlier_edge[level] {
                w *= g.beta(phi[j], c);
            }
            for &j in &earlier_non[level] {
                w *= 1.0 - g.beta(phi[j], c);
            }
            if w == 0.0 {
                continue;
            }
            if level + 1 == k {
                acc.add(w);
            } else {
                phi[level] = c;
                used[c] = true;
                descend(g, earlier_edge, earlier_non, phi, used, level + 1, k, n, w, acc);
                used[c] = false;
            }
        }
    }

    let mut acc = Kahan::new();
    let mut phi = vec![0usize; k];
    let mut used = vec![false; n];
    descend(
        g,
        &earlier_edge,
        &earlier_non,
        &mut phi,
        &mut used,
        0,
        k,
        n,
        1.0,
        &mut acc,
    );
    Ok(acc.value())
}

/// Induced-embedding density.
pub fn t1(f: &SimpleGraph, g: &WeightedGraph) -> Result<f64> {
    Ok(ind(f, g)? / injective_normalizer(f.n(), g))
}

fn is_unweighted(g: &WeightedGraph) -> bool {
    g.alpha().iter().all(|&a| a == 1.0)
        && (0..g.n()).all(|i| {
            (0..g.n()).all(|j| {
                let b = g.beta(i, j);
                (b == 0.0 || b == 1.0) && (i != j || b == 0.0)
            })
        })
}

/// Checks the elementary bound |t - t0| <= C(k,2)/n for unweighted
/// targets. Returns (gap, bound); the comparison allows 1e-12 slack
/// because the bound is attained exactly at very small n.
pub fn hom_inj_gap_check(f: &SimpleGraph, g: &WeightedGraph) -> Result<(f64, f64)> {
    if !is_unweighted(g) {
        return Err(Error::Precondition(
            "hom/inj gap bound is stated for unweighted targets".into(),
        ));
    }
    if g.n() < f.n() {
        return Err(Error::Precondition(format!(
            "target must have at least {} nodes",
            f.n()
        )));
    }
    let k = f.n() as f64;
    let gap = (t(f, g)? - t0(f, g)?).abs();
    let bound = k * (k - 1.0) / 2.0 / g.n() as f64;
    if gap > bound + 1e-12 {
        return Err(Error::Invariant(format!(
            "hom/inj gap {gap} exceeds bound {bound}"
        )));
    }
    Ok((gap, bound))
}

type Evaluator = Arc<dyn Fn(&SimpleGraph) -> Result<f64> + Send + Sync>;

/// A memoized isomorphism-invariant graph parameter. The declared
/// normalized/multiplicative flags are assertions by the constructor,
/// not derived facts; operations that need them check the flags.
#[derive(Clone)]
pub struct GraphParameter {
    name: String,
    normalized: bool,
    multiplicative: bool,
    eval: Evaluator,
    cache: Arc<DashMap<(usize, u64), f64>>,
}

impl std::fmt::Debug for GraphParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphParameter")
            .field("name", &self.name)
            .field("normalized", &self.normalized)
            .field("multiplicative", &self.multiplicative)
            .finish()
    }
}

impl GraphParameter {
    pub fn from_fn(
        name: impl Into<String>,
        normalized: bool,
        multiplicative: bool,
        eval: impl Fn(&SimpleGraph) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        GraphParameter {
            name: name.into(),
            normalized,
            multiplicative,
            eval: Arc::new(eval),
            cache: Arc::new(DashMap::new()),
        }
    }

    /// t(., G) for a fixed weighted target.
    pub fn t_of_weighted(g: WeightedGraph) -> Self {
        GraphParameter::from_fn("t(.,G)", true, true, move |f| t(f, &g))
    }

    /// t0(., G) for a fixed weighted target (normalized, not multiplicative).
    pub fn t0_of_weighted(g: WeightedGraph) -> Self {
        GraphParameter::from_fn("t0(.,G)", true, false, move |f| t0(f, &g))
    }

    /// t1(., G) for a fixed weighted target.
    pub fn t1_of_weighted(g: WeightedGraph) -> Self {
        GraphParameter::from_fn("t1(.,G)", false, false, move |f| t1(f, &g))
    }

    /// Number of matchings (including the empty one). Normalized and
    /// multiplicative, but famously not a density limit.
    pub fn matchings() -> Self {
        GraphParameter::from_fn("matchings", true, true, |f| {
            if f.n() > 20 {
                return Err(Error::Budget("matching count needs n <= 20".into()));
            }
            Ok(count_matchings(f.edges(), 0) as f64)
        })
    }

    /// A parameter tabulated by canonical form. Evaluation fails on
    /// graphs missing from the table.
    pub fn from_table(
        name: impl Into<String>,
        table: HashMap<(usize, u64), f64>,
        normalized: bool,
        multiplicative: bool,
    ) -> Self {
        GraphParameter::from_fn(name, normalized, multiplicative, move |f| {
            let key = f.canonical_key()?;
            table.get(&key).copied().ok_or_else(|| {
                Error::Precondition(format!(
                    "parameter table has no entry for graph on {} nodes",
                    f.n()
                ))
            })
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_multiplicative(&self) -> bool {
        self.multiplicative
    }

    /// Evaluates with memoization keyed by canonical form (for graphs
    /// small enough to canonicalize; larger graphs evaluate directly).
    pub fn value(&self, f: &SimpleGraph) -> Result<f64> {
        if f.n() <= 9 {
            let key = f.canonical_key()?;
            if let Some(v) = self.cache.get(&key) {
                return Ok(*v);
            }
            let v = (self.eval)(f)?;
            self.cache.insert(key, v);
            Ok(v)
        } else {
            (self.eval)(f)
        }
    }

    /// Inclusion-exclusion over supergraphs on the same vertex set:
    /// sum of (-1)^(added edges) f(F') over F' containing F.
    pub fn dagger(&self, f: &SimpleGraph) -> Result<f64> {
        let supers = f.supergraphs_on_same_nodes()?;
        let mut acc = Kahan::new();
        for s in &supers {
            let sign = if (s.edge_count() - f.edge_count()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            acc.add(sign * self.value(s)?);
        }
        Ok(acc.value())
    }

    /// Spot check of isomorphism invariance on random relabelings.
    pub fn check_isomorphism_invariance(
        &self,
        graphs: &[SimpleGraph],
        seed: u64,
        tol: f64,
    ) -> Result<()> {
        use rand::seq::SliceRandom;
        let mut rng = crate::rng::root(seed);
        for g in graphs {
            let mut perm: Vec<usize> = (0..g.n()).collect();
            perm.shuffle(&mut rng);
            let relabeled = g.permute(&perm);
            let a = self.value(g)?;
            let b = self.value(&relabeled)?;
            if (a - b).abs() > tol {
                return Err(Error::Invariant(format!(
                    "parameter {} is not isomorphism-invariant: {a} vs {b}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn count_matchings(edges: &[(usize, usize)], used: u64) -> u64 {
    match edges.first() {
        None => 1,
        Some(&(u, v)) => {
            let rest = &edges[1..];
            let mut total = count_matchings(rest, used);
            if used >> u & 1 == 0 && used >> v & 1 == 0 {
                total += count_matchings(rest, used | 1 << u | 1 << v);
            }
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{pair_count, SimpleGraph};
    use crate::matrix::Matrix;
    use rand::Rng;

    /// Oracle: literal mixed-radix enumeration of all n^k maps with no
    /// pruning, summing alpha and beta products directly.
    fn naive_hom(f: &SimpleGraph, g: &WeightedGraph) -> f64 {
        let k = f.n();
        let n = g.n();
        if k == 0 {
            return 1.0;
        }
        let mut total = 0.0;
        let mut phi = vec![0usize; k];
        loop {
            let mut w = 1.0;
            for &c in &phi {
                w *= g.alpha()[c];
            }
            for &(u, v) in f.edges() {
                w *= g.beta(phi[u], phi[v]);
            }
            total += w;
            // increment mixed-radix counter
            let mut pos = 0;
            loop {
                if pos == k {
                    return total;
                }
                phi[pos] += 1;
                if phi[pos] < n {
                    break;
                }
                phi[pos] = 0;
                pos += 1;
            }
        }
    }

    fn naive_inj(f: &SimpleGraph, g: &WeightedGraph) -> f64 {
        let k = f.n();
        let n = g.n();
        if k == 0 {
            return 1.0;
        }
        let mut total = 0.0;
        let mut phi = vec![0usize; k];
        loop {
            let distinct = (0..k).all(|i| (0..i).all(|j| phi[i] != phi[j]));
            if distinct {
                let mut w = 1.0;
                for &c in &phi {
                    w *= g.alpha()[c];
                }
                for &(u, v) in f.edges() {
                    w *= g.beta(phi[u], phi[v]);
                }
                total += w;
            }
            let mut pos = 0;
            loop {
                if pos == k {
                    return total;
                }
                phi[pos] += 1;
                if phi[pos] < n {
                    break;
                }
                phi[pos] = 0;
                pos += 1;
            }
        }
    }

    fn naive_ind(f: &SimpleGraph, g: &WeightedGraph) -> f64 {
        let k = f.n();
        let n = g.n();
        if k == 0 {
            return 1.0;
        }
        let comp = f.complement();
        let mut total = 0.0;
        let mut phi = vec![0usize; k];
        loop {
            let distinct = (0..k).all(|i| (0..i).all(|j| phi[i] != phi[j]));
            if distinct {
                let mut w = 1.0;
                for &c in &phi {
                    w *= g.alpha()[c];
                }
                for &(u, v) in f.edges() {
                    w *= g.beta(phi[u], phi[v]);
                }
                for &(u, v) in comp.edges() {
                    w *= 1.0 - g.beta(phi[u], phi[v]);
                }
                total += w;
            }
            let mut pos = 0;
            loop {
                if pos == k {
                    return total;
                }
                phi[pos] += 1;
                if phi[pos] < n {
                    break;
                }
                phi[pos] = 0;
                pos += 1;
            }
        }
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

    fn random_simple(rng: &mut impl Rng, n: usize, p: f64) -> SimpleGraph {
        let edges = crate::graphs::pairs(n).filter(|_| rng.gen_bool(p));
        SimpleGraph::new(n, edges).unwrap()
    }

    #[test]
    fn hom_frozen_examples() {
        let k2 = SimpleGraph::complete(2);
        let k3 = SimpleGraph::complete(3);
        // oracle first: all 9 maps of K2 into K3, 6 preserve the edge
        assert_eq!(naive_hom(&k2, &k3.to_weighted()), 6.0);
        assert_eq!(hom(&k2, &k3.to_weighted()).unwrap(), 6.0);
        assert_eq!(naive_hom(&k3, &k3.to_weighted()), 6.0);
        assert_eq!(hom(&k3, &k3.to_weighted()).unwrap(), 6.0);
        // hom(K1, G) is the total node weight
        let mut rng = crate::rng::root(1);
        let g = random_weighted(&mut rng, 4);
        let lhs = hom(&SimpleGraph::complete(1), &g).unwrap();
        assert!((lhs - g.alpha_total()).abs() < 1e-12);
    }

    #[test]
    fn hom_matches_naive_oracle_on_random_inputs() {
        let mut rng = crate::rng::root(2);
        for _ in 0..60 {
            let kf = rng.gen_range(0..=4);
            let ng = rng.gen_range(1..=5);
            let f = {
                let p = 0.5;
                random_simple(&mut rng, kf, p)
            };
            let g = random_weighted(&mut rng, ng);
            let fast = hom(&f, &g).unwrap();
            let slow = naive_hom(&f, &g);
            assert!(
                (fast - slow).abs() <= 1e-12 * slow.abs().max(1.0),
                "hom mismatch: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn t_frozen_examples() {
        let k2 = SimpleGraph::complete(2);
        let k3 = SimpleGraph::complete(3);
        assert!((t(&k2, &k3.to_weighted()).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        // single node with loop weight p: t = p^|E(F)|
        let p = 0.37;
        let g = WeightedGraph::loop_node(p).unwrap();
        let c4 = SimpleGraph::cycle(4);
        assert!((t(&c4, &g).unwrap() - p.powi(4)).abs() < 1e-15);
        // edgeless test graph: density 1
        let e3 = SimpleGraph::empty(3);
        let mut rng = crate::rng::root(3);
        let h = random_weighted(&mut rng, 5);
        assert!((t(&e3, &h).unwrap() - 1.0).abs() < 1e-12);
        assert!((t0(&e3, &h).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hom_partial_examples() {
        let mut rng = crate::rng::root(4);
        let f = SimpleGraph::path(3);
        let g = random_weighted(&mut rng, 4);
        // empty pin set reduces to hom
        let full = hom_partial(&f, &g, &PartialMap::empty()).unwrap();
        assert!((full - hom(&f, &g).unwrap()).abs() < 1e-12);
        // totally pinned map: product of edge weights only
        let phi = PartialMap::new([(0, 1), (1, 2), (2, 3)]).unwrap();
        let v = hom_partial(&f, &g, &phi).unwrap();
        assert!((v - g.beta(1, 2) * g.beta(2, 3)).abs() < 1e-12);
        // K2 into K2 with one endpoint pinned: exactly one valid extension
        let k2 = SimpleGraph::complete(2);
        let pinned = PartialMap::new([(0, 0)]).unwrap();
        let v = hom_partial(&k2, &k2.to_weighted(), &pinned).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hom_partial_consistency_with_oracle() {
        // sum over images of the pinned vertex, weighted by its alpha,
        // recovers hom
        let mut rng = crate::rng::root(5);
        for _ in 0..20 {
            let f = random_simple(&mut rng, 4, 0.6);
            let g = random_weighted(&mut rng, 4);
            let total: f64 = (0..4)
                .map(|c| {
                    g.alpha()[c]
                        * hom_partial(&f, &g, &PartialMap::new([(2, c)]).unwrap()).unwrap()
                })
                .sum();
            assert!((total - hom(&f, &g).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn inj_and_t0_frozen_examples() {
        let k2 = SimpleGraph::complete(2);
        let p3 = SimpleGraph::path(3).to_weighted();
        assert_eq!(naive_inj(&k2, &p3), 4.0);
        assert_eq!(inj(&k2, &p3).unwrap(), 4.0);
        assert!((t0(&k2, &p3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let k3 = SimpleGraph::complete(3);
        assert_eq!(inj(&k3, &k3.to_weighted()).unwrap(), 6.0);
        assert!((t0(&k3, &k3.to_weighted()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inj_rejects_small_targets() {
        let k3 = SimpleGraph::complete(3);
        let k2 = SimpleGraph::complete(2).to_weighted();
        assert!(matches!(inj(&k3, &k2), Err(Error::Precondition(_))));
    }

    #[test]
    fn ind_and_t1_frozen_examples() {
        let k2 = SimpleGraph::complete(2);
        let k3 = SimpleGraph::complete(3).to_weighted();
        // complement of K2 has no edges, so ind = inj = 6
        assert_eq!(ind(&k2, &k3).unwrap(), 6.0);
        // a non-edge cannot embed induced into K3
        let e2 = SimpleGraph::empty(2);
        assert_eq!(ind(&e2, &k3).unwrap(), 0.0);
        let k2w = SimpleGraph::complete(2).to_weighted();
        assert!((t1(&k2, &k2w).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inj_ind_match_naive_oracles_on_random_inputs() {
        let mut rng = crate::rng::root(6);
        for _ in 0..40 {
            let kf = rng.gen_range(0..=4);
            let ng = rng.gen_range(kf.max(1)..=5);
            let f = random_simple(&mut rng, kf, 0.5);
            let g = random_weighted(&mut rng, ng);
            let fi = inj(&f, &g).unwrap();
            assert!((fi - naive_inj(&f, &g)).abs() < 1e-10);
            let fd = ind(&f, &g).unwrap();
            assert!((fd - naive_ind(&f, &g)).abs() < 1e-10);
        }
    }

    #[test]
    fn multiplicativity_over_disjoint_union() {
        let mut rng = crate::rng::root(7);
        for _ in 0..30 {
            let size = rng.gen_range(1..=3);
            let f1 = random_simple(&mut rng, size, 0.6);
            let size = rng.gen_range(1..=3);
            let f2 = random_simple(&mut rng, size, 0.6);
            let size = rng.gen_range(1..=6);
            let g = random_weighted(&mut rng, size);
            let lhs = t(&f1.disjoint_union(&f2), &g).unwrap();
            let rhs = t(&f1, &g).unwrap() * t(&f2, &g).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn inclusion_exclusion_inj_equals_sum_of_ind_over_supergraphs() {
        let mut rng = crate::rng::root(8);
        for _ in 0..25 {
            let kf = rng.gen_range(1..=4);
            let f = random_simple(&mut rng, kf, 0.5);
            let size = rng.gen_range(kf..=6);
            let g = random_simple(&mut rng, size, 0.5).to_weighted();
            let lhs = inj(&f, &g).unwrap();
            let mut rhs = 0.0;
            for s in f.supergraphs_on_same_nodes().unwrap() {
                rhs += ind(&s, &g).unwrap();
            }
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn t1_is_dagger_of_t0() {
        let mut rng = crate::rng::root(9);
        for _ in 0..15 {
            let kf = rng.gen_range(1..=4);
            let f = random_simple(&mut rng, kf, 0.5);
            let size = rng.gen_range(kf..=6);
            let gw = random_simple(&mut rng, size, 0.5).to_weighted();
            let param = GraphParameter::t0_of_weighted(gw.clone());
            let lhs = t1(&f, &gw).unwrap();
            let rhs = param.dagger(&f).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn dagger_inverts_supergraph_summation() {
        // tabulate arbitrary isomorphism-invariant values g on graphs
        // over [4]; define f(F) = sum_{F' >= F} g(F'); dagger recovers
        // g exactly (Moebius inversion on the edge-subset lattice).
        let mut rng = crate::rng::root(10);
        let n = 4;
        let mut table: HashMap<(usize, u64), f64> = HashMap::new();
        for mask in 0u64..(1 << pair_count(n)) {
            let key = SimpleGraph::from_edge_mask(n, mask).canonical_key().unwrap();
            table.entry(key).or_insert_with(|| rng.gen_range(-1.0..1.0));
        }
        let lookup = table.clone();
        let f_param = GraphParameter::from_fn("summed", false, false, move |f| {
            let mask = f.edge_mask()?;
            let mut total = 0.0;
            for m in 0u64..(1 << pair_count(n)) {
                if m & mask == mask {
                    let key = SimpleGraph::from_edge_mask(n, m).canonical_key()?;
                    total += lookup[&key];
                }
            }
            Ok(total)
        });
        for mask in 0u64..(1 << pair_count(n)) {
            let f = SimpleGraph::from_edge_mask(n, mask);
            let recovered = f_param.dagger(&f).unwrap();
            let expected = table[&f.canonical_key().unwrap()];
            assert!(
                (recovered - expected).abs() < 1e-10,
                "mask {mask}: {recovered} vs {expected}"
            );
        }
    }

    #[test]
    fn dagger_examples() {
        // complete graph is its only supergraph
        let p = 0.42;
        let g = WeightedGraph::loop_node(p).unwrap();
        let param = GraphParameter::t_of_weighted(g);
        let k3 = SimpleGraph::complete(3);
        assert!((param.dagger(&k3).unwrap() - param.value(&k3).unwrap()).abs() < 1e-15);
        // edgeless pair: dagger = 1 - f(K2)
        let e2 = SimpleGraph::empty(2);
        let expect = 1.0 - param.value(&SimpleGraph::complete(2)).unwrap();
        assert!((param.dagger(&e2).unwrap() - expect).abs() < 1e-12);
        // dagger values over all graphs on [k] sum to f(edgeless) = 1
        for k in 1..=4usize {
            let mut total = 0.0;
            for mask in 0u64..(1 << pair_count(k)) {
                total += param.dagger(&SimpleGraph::from_edge_mask(k, mask)).unwrap();
            }
            assert!((total - 1.0).abs() < 1e-10, "k={k}: {total}");
        }
    }

    #[test]
    fn hom_inj_gap_examples() {
        let k2 = SimpleGraph::complete(2);
        let k3 = SimpleGraph::complete(3).to_weighted();
        let (gap, bound) = hom_inj_gap_check(&k2, &k3).unwrap();
        assert!((gap - 1.0 / 3.0).abs() < 1e-15);
        assert!((bound - 1.0 / 3.0).abs() < 1e-15);
        // edgeless F: gap 0
        let e3 = SimpleGraph::empty(3);
        let (gap, _) = hom_inj_gap_check(&e3, &k3).unwrap();
        assert!(gap.abs() < 1e-15);
        // weighted target rejected
        let g = WeightedGraph::loop_node(0.5).unwrap();
        assert!(hom_inj_gap_check(&k2, &g).is_err());
    }

    #[test]
    fn hom_inj_gap_on_random_pairs() {
        let mut rng = crate::rng::root(11);
        for _ in 0..200 {
            let kf = rng.gen_range(1..=4);
            let n = rng.gen_range(kf.max(2)..=30);
            let f = random_simple(&mut rng, kf, 0.6);
            let g = random_simple(&mut rng, n, 0.4).to_weighted();
            hom_inj_gap_check(&f, &g).expect("gap bound must hold");
        }
    }

    #[test]
    fn goodman_inequality_on_random_graphs() {
        let mut rng = crate::rng::root(12);
        let k2 = SimpleGraph::complete(2);
        let k3 = SimpleGraph::complete(3);
        for _ in 0..100 {
            let n = rng.gen_range(3..=12);
            let p = rng.gen_range(0.1..0.9);
            let g = random_simple(&mut rng, n, p).to_weighted();
            let t2 = t(&k2, &g).unwrap();
            let t3 = t(&k3, &g).unwrap();
            assert!(t3 >= t2 * (2.0 * t2 - 1.0) - 1e-12);
        }
    }

    #[test]
    fn t1_sums_to_one_over_labeled_graphs() {
        let mut rng = crate::rng::root(13);
        for k in 1..=4usize {
            let g = random_simple(&mut rng, 6, 0.5).to_weighted();
            let mut total = 0.0;
            for mask in 0u64..(1 << pair_count(k)) {
                total += t1(&SimpleGraph::from_edge_mask(k, mask), &g).unwrap();
            }
            assert!((total - 1.0).abs() < 1e-10, "k={k}: {total}");
        }
    }

    #[test]
    fn matchings_count() {
        let param = GraphParameter::matchings();
        assert_eq!(param.value(&SimpleGraph::complete(1)).unwrap(), 1.0);
        assert_eq!(param.value(&SimpleGraph::complete(2)).unwrap(), 2.0);
        assert_eq!(param.value(&SimpleGraph::path(3)).unwrap(), 3.0);
        assert_eq!(param.value(&SimpleGraph::cycle(4)).unwrap(), 7.0);
    }

    #[test]
    fn parameter_cache_and_invariance() {
        let g = SimpleGraph::complete(3).to_weighted();
        let param = GraphParameter::t_of_weighted(g);
        let graphs: Vec<SimpleGraph> = (0..8)
            .map(|m| SimpleGraph::from_edge_mask(3, m))
            .collect();
        param
            .check_isomorphism_invariance(&graphs, 99, 1e-12)
            .unwrap();
        // cached value identical on repeat
        let v1 = param.value(&SimpleGraph::path(3)).unwrap();
        let v2 = param.value(&SimpleGraph::path(3)).unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn enumeration_guard_rejects_huge_jobs() {
        // the guard admits small test graphs OR small target powers;
        // both must fail for a rejection
        let f = SimpleGraph::empty(11);
        let small = random_weighted(&mut crate::rng::root(0), 5);
        assert!(hom(&f, &small).is_ok()); // 5^11 < 1e8
        let big = random_weighted(&mut crate::rng::root(0), 8);
        assert!(matches!(hom(&f, &big), Err(Error::Budget(_))));
    }
}
