//! Finite graphs: simple test graphs, weighted targets, k-labeled graphs
//! with the gluing product, and the posets arising from bipartite graphs.
//!
//! Vertices are `0..n` internally; the text formats are 1-based.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Index of the unordered pair {i,j} (i<j) in lexicographic order
/// (0,1),(0,2),...,(0,n-1),(1,2),...
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// All unordered pairs over `0..n` in `pair_index` order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// A finite simple graph on vertex set `0..n`: no loops, no multiplicities.
/// Edges are kept sorted with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimpleGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Parse(format!("loop at vertex {}", a + 1)));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n {
                return Err(Error::Parse(format!(
                    "edge ({},{}) out of range for n={}",
                    u + 1,
                    v + 1,
                    n
                )));
            }
            norm.push((u, v));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parse("duplicate edge".to_string()));
        }
        Ok(SimpleGraph { n, edges: norm })
    }

    pub fn empty(n: usize) -> Self {
        SimpleGraph { n, edges: Vec::new() }
    }

    pub fn complete(n: usize) -> Self {
        SimpleGraph {
            n,
            edges: pairs(n).collect(),
        }
    }

    /// Path on n vertices: 0-1-2-...-(n-1).
    pub fn path(n: usize) -> Self {
        SimpleGraph {
            n,
            edges: (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        }
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((0, n - 1));
        edges.sort_unstable();
        SimpleGraph { n, edges }
    }

    /// Star on n vertices centered at vertex 0.
    pub fn star(n: usize) -> Self {
        SimpleGraph {
            n,
            edges: (1..n).map(|i| (0, i)).collect(),
        }
    }

    /// The bipartite half-graph on 2h vertices: left vertex i (0..h) is
    /// adjacent to right vertex h+j (0..h) iff i <= j. Has h(h+1)/2 edges.
    pub fn half_graph(h: usize) -> Self {
        let mut edges = Vec::with_capacity(h * (h + 1) / 2);
        for i in 0..h {
            for j in i..h {
                edges.push((i, h + j));
            }
        }
        edges.sort_unstable();
        SimpleGraph { n: 2 * h, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search(&key).is_ok()
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.n]; self.n];
        for &(u, v) in &self.edges {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        adj
    }

    pub fn adjacency_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            m.set(u, v, 1.0);
            m.set(v, u, 1.0);
        }
        m
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Complement within the same vertex set. An involution.
    pub fn complement(&self) -> SimpleGraph {
        let edges = pairs(self.n)
            .filter(|&(u, v)| !self.has_edge(u, v))
            .collect();
        SimpleGraph { n: self.n, edges }
    }

    pub fn disjoint_union(&self, other: &SimpleGraph) -> SimpleGraph {
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(u, v)| (u + self.n, v + self.n)));
        SimpleGraph {
            n: self.n + other.n,
            edges,
        }
    }

    /// Relabels vertices: vertex v becomes perm[v].
    pub fn permute(&self, perm: &[usize]) -> SimpleGraph {
        debug_assert_eq!(perm.len(), self.n);
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect::<Vec<_>>();
        let mut g = SimpleGraph { n: self.n, edges };
        g.edges.sort_unstable();
        g
    }

    /// Edge set as a bitmask over `pair_index` positions. Needs n <= 11
    /// so the mask fits in 64 bits.
    pub fn edge_mask(&self) -> Result<u64> {
        if pair_count(self.n) > 64 {
            return Err(Error::Budget(format!(
                "edge bitmask needs n <= 11, got {}",
                self.n
            )));
        }
        let mut mask = 0u64;
        for &(u, v) in &self.edges {
            mask |= 1 << pair_index(self.n, u, v);
        }
        Ok(mask)
    }

    pub fn from_edge_mask(n: usize, mask: u64) -> SimpleGraph {
        let edges = pairs(n)
            .enumerate()
            .filter_map(|(idx, pair)| (mask >> idx & 1 == 1).then_some(pair))
            .collect();
        SimpleGraph { n, edges }
    }

    /// Canonical form: (n, minimum edge bitmask over all vertex
    /// relabelings). Brute force, guarded at n <= 9.
    pub fn canonical_key(&self) -> Result<(usize, u64)> {
        if self.n > 9 {
            return Err(Error::Budget(format!(
                "canonical form is brute force, needs n <= 9, got {}",
                self.n
            )));
        }
        let base = self.edge_mask()?;
        if self.n <= 1 {
            return Ok((self.n, base));
        }
        let mut best = u64::MAX;
        for_each_permutation(self.n, |perm| {
            let mut mask = 0u64;
            for &(u, v) in &self.edges {
                let (a, b) = if perm[u] < perm[v] {
                    (perm[u], perm[v])
                } else {
                    (perm[v], perm[u])
                };
                mask |= 1 << pair_index(self.n, a, b);
            }
            best = best.min(mask);
        });
        Ok((self.n, best))
    }

    pub fn is_isomorphic_to(&self, other: &SimpleGraph) -> Result<bool> {
        if self.n != other.n || self.edges.len() != other.edges.len() {
            return Ok(false);
        }
        Ok(self.canonical_key()? == other.canonical_key()?)
    }

    /// All graphs on the same vertex set containing this one, ordered
    /// lexicographically by the bitmask of added edges.
    pub fn supergraphs_on_same_nodes(&self) -> Result<Vec<SimpleGraph>> {
        let missing: Vec<(usize, usize)> =
            pairs(self.n).filter(|&(u, v)| !self.has_edge(u, v)).collect();
        if missing.len() > 20 {
            return Err(Error::Budget(format!(
                "supergraph enumeration over {} missing pairs",
                missing.len()
            )));
        }
        let mut out = Vec::with_capacity(1 << missing.len());
        for add in 0u64..(1 << missing.len()) {
            let mut edges = self.edges.clone();
            for (idx, &pair) in missing.iter().enumerate() {
                if add >> idx & 1 == 1 {
                    edges.push(pair);
                }
            }
            edges.sort_unstable();
            out.push(SimpleGraph { n: self.n, edges });
        }
        Ok(out)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for (u, &is_adj) in adj[v].iter().enumerate() {
                if is_adj && !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    /// 2-coloring by BFS over the whole graph; None if an odd cycle exists.
    /// Vertex 0 (and the least vertex of every component) goes to side 0.
    pub fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let adj = self.adjacency();
        let mut side = vec![usize::MAX; self.n];
        for start in 0..self.n {
            if side[start] != usize::MAX {
                continue;
            }
            side[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for (u, &is_adj) in adj[v].iter().enumerate() {
                    if !is_adj {
                        continue;
                    }
                    if side[u] == usize::MAX {
                        side[u] = 1 - side[v];
                        queue.push_back(u);
                    } else if side[u] == side[v] {
                        return None;
                    }
                }
            }
        }
        let left = (0..self.n).filter(|&v| side[v] == 0).collect();
        let right = (0..self.n).filter(|&v| side[v] == 1).collect();
        Some((left, right))
    }

    /// Converts to a weighted graph with unit node weights and 0/1 edge
    /// weights (no loops).
    pub fn to_weighted(&self) -> WeightedGraph {
        let beta = self.adjacency_matrix();
        WeightedGraph {
            alpha: vec![1.0; self.n],
            beta,
        }
    }
}

/// A weighted graph: node weights in (0,1], symmetric edge weights in
/// [0,1], loops allowed on the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    alpha: Vec<f64>,
    beta: Matrix,
}

impl WeightedGraph {
    pub fn new(alpha: Vec<f64>, beta: Matrix) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(Error::Parse("weighted graph needs at least one node".into()));
        }
        if beta.rows() != n || beta.cols() != n {
            return Err(Error::Parse(format!(
                "beta must be {n}x{n}, got {}x{}",
                beta.rows(),
                beta.cols()
            )));
        }
        for (i, &a) in alpha.iter().enumerate() {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Parse(format!(
                    "node weight alpha[{}] = {} outside (0,1]",
                    i + 1,
                    a
                )));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let b = beta.get(i, j);
                if !(0.0..=1.0).contains(&b) {
                    return Err(Error::Parse(format!(
                        "edge weight beta[{}][{}] = {} outside [0,1]",
                        i + 1,
                        j + 1,
                        b
                    )));
                }
                if (b - beta.get(j, i)).abs() > 1e-12 {
                    return Err(Error::Parse(format!(
                        "beta asymmetric at ({},{}): {} vs {}",
                        i + 1,
                        j + 1,
                        b,
                        beta.get(j, i)
                    )));
                }
            }
        }
        Ok(WeightedGraph { alpha, beta })
    }

    /// Single node with a loop of weight p.
    pub fn loop_node(p: f64) -> Result<Self> {
        WeightedGraph::new(vec![1.0], Matrix::from_rows(vec![vec![p]])?)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_total(&self) -> f64 {
        crate::numeric::kahan_sum(self.alpha.iter().copied())
    }

    #[inline]
    pub fn beta(&self, i: usize, j: usize) -> f64 {
        self.beta.get(i, j)
    }

    #[inline]
    pub fn beta_row(&self, i: usize) -> &[f64] {
        self.beta.row(i)
    }

    pub fn beta_matrix(&self) -> &Matrix {
        &self.beta
    }
}

/// A graph with k distinguished labeled vertices; supports the gluing
/// product that identifies equal labels and cancels duplicate edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KLabeledGraph {
    base: SimpleGraph,
    labels: Vec<usize>,
}

impl KLabeledGraph {
    pub fn new(base: SimpleGraph, labels: Vec<usize>) -> Result<Self> {
        if labels.len() > base.n() {
            return Err(Error::Precondition(format!(
                "{} labels on {} vertices",
                labels.len(),
                base.n()
            )));
        }
        for (i, &v) in labels.iter().enumerate() {
            if v >= base.n() {
                return Err(Error::Precondition(format!(
                    "label {} placed on missing vertex {}",
                    i + 1,
                    v + 1
                )));
            }
            if labels[..i].contains(&v) {
                return Err(Error::Precondition(format!(
                    "labels must be injective; vertex {} used twice",
                    v + 1
                )));
            }
        }
        Ok(KLabeledGraph { base, labels })
    }

    /// Labels vertices 0..k of `base` in order.
    pub fn with_first_labeled(base: SimpleGraph, k: usize) -> Result<Self> {
        let labels = (0..k).collect();
        KLabeledGraph::new(base, labels)
    }

    /// Fully labeled graph: every vertex carries its own label.
    pub fn fully_labeled(base: SimpleGraph) -> Self {
        let labels = (0..base.n()).collect();
        KLabeledGraph { base, labels }
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn base(&self) -> &SimpleGraph {
        &self.base
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Gluing product: disjoint union with same-labeled vertices
    /// identified and duplicate edges cancelled to a single edge.
    /// For k = 0 this is the disjoint union.
    pub fn glue(&self, other: &KLabeledGraph) -> Result<SimpleGraph> {
        if self.k() != other.k() {
            return Err(Error::Precondition(format!(
                "gluing needs equal label counts, got {} and {}",
                self.k(),
                other.k()
            )));
        }
        let n1 = self.base.n();
        // Map other's vertices: labeled ones onto self's labeled vertices,
        // unlabeled ones onto fresh indices after n1.
        let mut map = vec![usize::MAX; other.base.n()];
        for (l, &v) in other.labels.iter().enumerate() {
            map[v] = self.labels[l];
        }
        let mut next = n1;
        for v in 0..other.base.n() {
            if map[v] == usize::MAX {
                map[v] = next;
                next += 1;
            }
        }
        let mut edges: Vec<(usize, usize)> = self.base.edges.to_vec();
        for &(u, v) in other.base.edges() {
            let (a, b) = (map[u], map[v]);
            edges.push(if a < b { (a, b) } else { (b, a) });
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(SimpleGraph { n: next, edges })
    }

    /// Labeled-canonical form: labels stay fixed pointwise, unlabeled
    /// vertices may be permuted. Used to deduplicate index graphs of
    /// truncated connection matrices.
    pub fn labeled_canonical_key(&self) -> Result<(usize, usize, u64)> {
        let n = self.base.n();
        let k = self.k();
        if n > 11 {
            return Err(Error::Budget(format!(
                "labeled canonical form needs n <= 11, got {n}"
            )));
        }
        // Normalize so labels occupy vertices 0..k in label order.
        let mut position = vec![usize::MAX; n];
        for (l, &v) in self.labels.iter().enumerate() {
            position[v] = l;
        }
        let mut next = k;
        for v in 0..n {
            if position[v] == usize::MAX {
                position[v] = next;
                next += 1;
            }
        }
        let normalized = self.base.permute(&position);
        let free = n - k;
        let mut best = u64::MAX;
        for_each_permutation(free, |perm| {
            let mut full: Vec<usize> = (0..k).collect();
            full.extend(perm.iter().map(|&p| k + p));
            let mask = normalized
                .permute(&full)
                .edge_mask()
                .expect("n <= 11 checked above");
            best = best.min(mask);
        });
        Ok((n, k, best))
    }
}

/// A finite poset on ground set `0..k`, stored as its full order relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    k: usize,
    leq: Vec<bool>, // row-major k*k, leq[a*k+b] <=> a <= b
}

impl Poset {
    /// Builds from a set of strict relations `a < b`, closes under
    /// transitivity, then verifies antisymmetry.
    pub fn from_relations(k: usize, relations: &[(usize, usize)]) -> Result<Self> {
        let mut leq = vec![false; k * k];
        for a in 0..k {
            leq[a * k + a] = true;
        }
        for &(a, b) in relations {
            if a >= k || b >= k {
                return Err(Error::Precondition(format!(
                    "relation ({a},{b}) out of range for ground set {k}"
                )));
            }
            leq[a * k + b] = true;
        }
        // Warshall closure.
        for m in 0..k {
            for a in 0..k {
                if leq[a * k + m] {
                    for b in 0..k {
                        if leq[m * k + b] {
                            leq[a * k + b] = true;
                        }
                    }
                }
            }
        }
        for a in 0..k {
            for b in (a + 1)..k {
                if leq[a * k + b] && leq[b * k + a] {
                    return Err(Error::Precondition(format!(
                        "antisymmetry fails: {a} <= {b} and {b} <= {a}"
                    )));
                }
            }
        }
        Ok(Poset { k, leq })
    }

    pub fn antichain(k: usize) -> Self {
        Poset::from_relations(k, &[]).expect("empty relation is a poset")
    }

    pub fn chain(k: usize) -> Self {
        let rel: Vec<(usize, usize)> = (0..k.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Poset::from_relations(k, &rel).expect("chain is a poset")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.k + b]
    }

    /// Exact number of linear extensions, by dynamic programming over
    /// down-sets. Guarded at ground sets of size <= 12.
    pub fn count_linear_extensions(&self) -> Result<u64> {
        let k = self.k;
        if k > 12 {
            return Err(Error::Budget(format!(
                "linear extension count needs ground set <= 12, got {k}"
            )));
        }
        if k == 0 {
            return Ok(1);
        }
        // strict predecessors of each element as a bitmask
        let mut pred = vec![0u32; k];
        for b in 0..k {
            for a in 0..k {
                if a != b && self.leq(a, b) {
                    pred[b] |= 1 << a;
                }
            }
        }
        let full: u32 = (1 << k) - 1;
        let mut count = vec![0u64; 1 << k];
        count[0] = 1;
        for set in 1..=full {
            let mut total = 0u64;
            let mut rest = set;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let without = set & !(1 << v);
                // v can come last iff all its predecessors are already placed
                if pred[v] & without == pred[v] {
                    total += count[without as usize];
                }
            }
            count[set as usize] = total;
        }
        Ok(count[full as usize])
    }
}

/// The partial order a connected bipartite graph induces: u < v iff u is
/// on the side of vertex 0 (V1), v on the other side, and uv is an edge.
pub fn bipartite_poset(f: &SimpleGraph) -> Result<Poset> {
    if f.n() == 0 {
        return Err(Error::Precondition("empty graph has no bipartition".into()));
    }
    if !f.is_connected() {
        return Err(Error::Precondition(
            "bipartite poset needs a connected graph".into(),
        ));
    }
    let (left, _right) = f
        .bipartition()
        .ok_or_else(|| Error::Precondition("graph is not bipartite".into()))?;
    let on_left = {
        let mut mark = vec![false; f.n()];
        for &v in &left {
            mark[v] = true;
        }
        mark
    };
    let mut relations = Vec::new();
    for &(u, v) in f.edges() {
        if on_left[u] {
            relations.push((u, v));
        } else {
            relations.push((v, u));
        }
    }
    Poset::from_relations(f.n(), &relations)
}
