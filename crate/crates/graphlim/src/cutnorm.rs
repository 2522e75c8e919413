//! Rectangle (cut) norms of matrices and stepfunction differences, the
//! rectangular distance between weighted graphs on a common vertex set,
//! and the counting-lemma bound relating cut distance to densities.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphons::{common_refinement, t_step, StepGraphon};
use crate::graphs::{SimpleGraph, WeightedGraph};
use crate::matrix::Matrix;
use crate::numeric::kahan_sum;

/// An optimizing rectangle: row subset S, column subset T, and the
/// absolute rectangle sum they attain.
#[derive(Clone, Debug, PartialEq)]
pub struct CutWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub value: f64,
}

impl CutWitness {
    /// Recomputes |sum over S x T| directly from the matrix.
    pub fn evaluate(&self, a: &Matrix) -> f64 {
        kahan_sum(
            self.rows
                .iter()
                .flat_map(|&i| self.cols.iter().map(move |&j| a.get(i, j))),
        )
        .abs()
    }
}

fn exact_budget(r: usize, c: usize) -> Result<()> {
    if r.min(c) > 22 || (1u64 << r.min(c)) as f64 * r.max(c) as f64 > 2e9 {
        return Err(Error::Budget(format!(
            "exact cut norm of a {r}x{c} matrix (guard: smaller side <= 22)"
        )));
    }
    Ok(())
}

/// Exact cut norm: max over row/column subsets of the absolute
/// rectangle sum. Enumerates subsets of the smaller dimension in Gray
/// order, maintaining column sums; for a fixed row set the optimal
/// column set keeps one sign of column sums, evaluated for both signs.
pub fn cutnorm_exact(a: &Matrix) -> Result<CutWitness> {
    exact_budget(a.rows(), a.cols())?;
    let transposed = a.rows() > a.cols();
    let work = if transposed { a.transpose() } else { a.clone() };
    let (r, c) = (work.rows(), work.cols());

    let mut colsum = vec![0.0f64; c];
    let mut best_value = 0.0f64;
    let mut best_mask = 0u64;
    let mut best_positive = true;
    let mut mask = 0u64;
    for step in 1u64..(1u64 << r) {
        let flip = step.trailing_zeros() as usize;
        let bit = 1u64 << flip;
        mask ^= bit;
        let row = work.row(flip);
        if mask & bit != 0 {
            for (s, &v) in colsum.iter_mut().zip(row) {
                *s += v;
            }
        } else {
            for (s, &v) in colsum.iter_mut().zip(row) {
                *s -= v;
            }
        }
        let mut pos = 0.0;
        let mut neg = 0.0;
        for &s in &colsum {
            if s > 0.0 {
                pos += s;
            } else {
                neg += s;
            }
        }
        if pos > best_value {
            best_value = pos;
            best_mask = mask;
            best_positive = true;
        }
        if -neg > best_value {
            best_value = -neg;
            best_mask = mask;
            best_positive = false;
        }
    }

    // reconstruct the witness and re-evaluate it exactly
    let rows: Vec<usize> = (0..r).filter(|i| best_mask >> i & 1 == 1).collect();
    let mut cs = vec![0.0f64; c];
    for &i in &rows {
        for (s, &v) in cs.iter_mut().zip(work.row(i)) {
            *s += v;
        }
    }
    let cols: Vec<usize> = (0..c)
        .filter(|&j| {
            if best_positive {
                cs[j] > 0.0
            } else {
                cs[j] < 0.0
            }
        })
        .collect();
    let (rows, cols) = if transposed { (cols, rows) } else { (rows, cols) };
    let mut witness = CutWitness {
        rows,
        cols,
        value: 0.0,
    };
    witness.value = witness.evaluate(a);
    Ok(witness)
}

fn alternate_from(a: &Matrix, mut in_s: Vec<bool>) -> (Vec<bool>, Vec<bool>, f64) {
    let (r, c) = (a.rows(), a.cols());
    let mut in_t = vec![false; c];
    let mut best = f64::NEG_INFINITY;
    for _ in 0..200 {
        // best T for fixed S: keep the dominant sign of column sums
        let mut colsum = vec![0.0f64; c];
        for i in 0..r {
            if in_s[i] {
                for (s, &v) in colsum.iter_mut().zip(a.row(i)) {
                    *s += v;
                }
            }
        }
        let pos: f64 = colsum.iter().filter(|&&s| s > 0.0).sum();
        let neg: f64 = colsum.iter().filter(|&&s| s < 0.0).sum();
        let sign = if pos >= -neg { 1.0 } else { -1.0 };
        for (t, &s) in in_t.iter_mut().zip(&colsum) {
            *t = sign * s > 0.0;
        }
        // best S for fixed (T, sign)
        let mut value = 0.0f64;
        for i in 0..r {
            let rowsum: f64 = a
                .row(i)
                .iter()
                .zip(&in_t)
                .filter_map(|(&v, &t)| t.then_some(v))
                .sum();
            in_s[i] = sign * rowsum > 0.0;
            if in_s[i] {
                value += sign * rowsum;
            }
        }
        if value <= best + 1e-15 {
            best = best.max(value);
            break;
        }
        best = value;
    }
    (in_s, in_t, best.max(0.0))
}

/// Alternating-maximization lower bound on the cut norm from random
/// starts. The returned rectangle is feasible, so the value never
/// exceeds the exact cut norm. Deterministic per seed and independent
/// of worker count (one stream per restart; restart 0 starts from the
/// full row set).
pub fn cutnorm_heuristic(a: &Matrix, restarts: usize, seed: u64) -> CutWitness {
    let r = a.rows();
    let starts = restarts.max(1);
    let candidates: Vec<(Vec<bool>, Vec<bool>, f64)> = (0..starts as u64)
        .into_par_iter()
        .map(|restart| {
            let start = if restart == 0 {
                vec![true; r]
            } else {
                let mut rng = crate::rng::stream(seed, restart);
                (0..r).map(|_| rng.gen_bool(0.5)).collect()
            };
            alternate_from(a, start)
        })
        .collect();
    let (in_s, in_t, _) = candidates
        .into_iter()
        .max_by(|x, y| x.2.total_cmp(&y.2))
        .expect("at least one restart");
    let mut witness = CutWitness {
        rows: (0..r).filter(|&i| in_s[i]).collect(),
        cols: (0..a.cols()).filter(|&j| in_t[j]).collect(),
        value: 0.0,
    };
    witness.value = witness.evaluate(a);
    witness
}

/// Best cut found by whatever machinery fits the size: exact within the
/// guard, otherwise the heuristic lower-bound search.
pub fn cutnorm_auto(a: &Matrix, restarts: usize, seed: u64) -> CutWitness {
    match cutnorm_exact(a) {
        Ok(w) => w,
        Err(_) => cutnorm_heuristic(a, restarts, seed),
    }
}

/// Rectangular distance between two edge-weighted graphs on the same
/// vertex set: the cut norm of the weight difference, normalized by n^2.
pub fn rect_distance(g1: &WeightedGraph, g2: &WeightedGraph) -> Result<f64> {
    if g1.n() != g2.n() {
        return Err(Error::Precondition(format!(
            "rectangular distance needs equal node counts, got {} and {}",
            g1.n(),
            g2.n()
        )));
    }
    let d = g1.beta_matrix().sub(g2.beta_matrix())?;
    let witness = cutnorm_auto(&d, 32, 0x5eed);
    Ok(witness.value / (g1.n() * g1.n()) as f64)
}

/// Signed class-difference of two stepfunctions on their common
/// refinement: (class measures, difference matrix).
pub fn step_difference(a: &StepGraphon, b: &StepGraphon) -> (Vec<f64>, Matrix) {
    let (weights, ia, ib) = common_refinement(a, b);
    let q = weights.len();
    let diff = Matrix::from_fn(q, q, |i, j| a.value(ia[i], ia[j]) - b.value(ib[i], ib[j]));
    (weights, diff)
}

/// Cut norm of a signed stepfunction given by class measures and a
/// value matrix. The supremum over measurable sets is attained on
/// unions of classes (the rectangle integral is bilinear in the class
/// fractions, so an optimum sits at a 0/1 vertex); it therefore equals
/// the exact cut norm of the measure-weighted matrix.
pub fn stepnorm_matrix(weights: &[f64], diff: &Matrix) -> Result<f64> {
    let q = weights.len();
    let weighted = Matrix::from_fn(q, q, |i, j| weights[i] * weights[j] * diff.get(i, j));
    Ok(cutnorm_exact(&weighted)?.value)
}

/// Cut norm of the difference of two stepfunctions, refined internally.
pub fn stepnorm(a: &StepGraphon, b: &StepGraphon) -> Result<f64> {
    let (weights, diff) = step_difference(a, b);
    stepnorm_matrix(&weights, &diff)
}

/// Counting-lemma check: |t(F,U) - t(F,W)| <= |E(F)| * ||U - W||_cut.
/// Returns (lhs, rhs); errs if the bound fails beyond 1e-12 slack.
pub fn counting_lemma_check(
    f: &SimpleGraph,
    u: &StepGraphon,
    w: &StepGraphon,
) -> Result<(f64, f64)> {
    let lhs = (t_step(f, u)? - t_step(f, w)?).abs();
    let rhs = f.edge_count() as f64 * stepnorm(u, w)?;
    if lhs > rhs + 1e-12 {
        return Err(Error::Invariant(format!(
            "counting lemma violated: {lhs} > {rhs}"
        )));
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Oracle: brute force over every (S, T) pair.
    fn cutnorm_bruteforce(a: &Matrix) -> f64 {
        let (r, c) = (a.rows(), a.cols());
        let mut best = 0.0f64;
        for s in 0u64..(1 << r) {
            for t in 0u64..(1 << c) {
                let mut sum = 0.0;
                for i in 0..r {
                    if s >> i & 1 == 0 {
                        continue;
                    }
                    for j in 0..c {
                        if t >> j & 1 == 1 {
                            sum += a.get(i, j);
                        }
                    }
                }
                best = best.max(sum.abs());
            }
        }
        best
    }

    #[test]
    fn cutnorm_exact_frozen_examples() {
        let zero = Matrix::zeros(3, 3);
        let w = cutnorm_exact(&zero).unwrap();
        assert_eq!(w.value, 0.0);
        assert!(w.rows.is_empty() && w.cols.is_empty());

        let pm = Matrix::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert_eq!(cutnorm_bruteforce(&pm), 1.0);
        assert_eq!(cutnorm_exact(&pm).unwrap().value, 1.0);

        let ones = Matrix::from_fn(4, 4, |_, _| 1.0);
        let w = cutnorm_exact(&ones).unwrap();
        assert_eq!(w.value, 16.0);
        assert_eq!(w.rows.len(), 4);
        assert_eq!(w.cols.len(), 4);
    }

    #[test]
    fn cutnorm_exact_matches_bruteforce_on_all_pm1_3x3() {
        // every +-1 matrix up to 3x3, exhaustively
        for r in 1..=3usize {
            for c in 1..=3usize {
                for bits in 0u32..(1 << (r * c)) {
                    let a = Matrix::from_fn(r, c, |i, j| {
                        if bits >> (i * c + j) & 1 == 1 {
                            1.0
                        } else {
                            -1.0
                        }
                    });
                    let exact = cutnorm_exact(&a).unwrap();
                    let brute = cutnorm_bruteforce(&a);
                    assert_eq!(exact.value, brute, "r={r} c={c} bits={bits}");
                    assert_eq!(exact.evaluate(&a), exact.value);
                }
            }
        }
    }

    #[test]
    fn cutnorm_exact_matches_bruteforce_on_random_rectangles() {
        let mut rng = crate::rng::root(40);
        for _ in 0..50 {
            let r = rng.gen_range(1..=5);
            let c = rng.gen_range(1..=5);
            let a = Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
            let exact = cutnorm_exact(&a).unwrap().value;
            let brute = cutnorm_bruteforce(&a);
            assert!((exact - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn cutnorm_norm_axioms_on_samples() {
        let mut rng = crate::rng::root(41);
        for _ in 0..20 {
            let r = rng.gen_range(1..=4);
            let c = rng.gen_range(1..=4);
            let a = Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
            let b = Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
            let na = cutnorm_exact(&a).unwrap().value;
            let nb = cutnorm_exact(&b).unwrap().value;
            // scaling
            let scaled = Matrix::from_fn(r, c, |i, j| -2.5 * a.get(i, j));
            assert!((cutnorm_exact(&scaled).unwrap().value - 2.5 * na).abs() < 1e-12);
            // triangle inequality
            let sum = Matrix::from_fn(r, c, |i, j| a.get(i, j) + b.get(i, j));
            assert!(cutnorm_exact(&sum).unwrap().value <= na + nb + 1e-12);
            // dominated by the entrywise L1 norm
            assert!(na <= a.abs_sum() + 1e-12);
        }
        // definiteness
        let zero = Matrix::zeros(2, 3);
        assert_eq!(cutnorm_exact(&zero).unwrap().value, 0.0);
        let mut nz = Matrix::zeros(2, 3);
        nz.set(1, 2, 1e-9);
        assert!(cutnorm_exact(&nz).unwrap().value > 0.0);
    }

    #[test]
    fn heuristic_never_exceeds_exact_and_usually_matches() {
        let mut rng = crate::rng::root(42);
        let mut equal = 0usize;
        for trial in 0..100 {
            let a = Matrix::from_fn(12, 12, |_, _| {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            });
            let exact = cutnorm_exact(&a).unwrap().value;
            let heur = cutnorm_heuristic(&a, 32, trial as u64).value;
            assert!(heur <= exact + 1e-9, "heuristic exceeded exact");
            if (exact - heur).abs() < 1e-9 {
                equal += 1;
            }
        }
        assert!(equal >= 95, "heuristic matched exact only {equal}/100 times");
    }

    #[test]
    fn heuristic_frozen_examples() {
        assert_eq!(cutnorm_heuristic(&Matrix::zeros(3, 3), 8, 1).value, 0.0);
        // nonnegative rank-1: full rectangle is the alternation fixed point
        let u = [0.3, 1.2, 0.7];
        let v = [0.9, 0.1, 0.5, 1.4];
        let outer = Matrix::from_fn(3, 4, |i, j| u[i] * v[j]);
        let w = cutnorm_heuristic(&outer, 1, 0);
        let expect: f64 = u.iter().sum::<f64>() * v.iter().sum::<f64>();
        assert!((w.value - expect).abs() < 1e-12);
        assert_eq!(w.rows.len(), 3);
        assert_eq!(w.cols.len(), 4);
    }

    fn random_unweighted(rng: &mut impl Rng, n: usize, p: f64) -> WeightedGraph {
        let edges: Vec<(usize, usize)> =
            crate::graphs::pairs(n).filter(|_| rng.gen_bool(p)).collect();
        SimpleGraph::new(n, edges).unwrap().to_weighted()
    }

    fn random_step(rng: &mut impl Rng, q: usize) -> StepGraphon {
        let mut weights: Vec<f64> = (0..q).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let adjust = 1.0 - weights.iter().sum::<f64>();
        weights[q - 1] += adjust;
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

    #[test]
    fn rect_distance_examples() {
        let mut rng = crate::rng::root(43);
        let g = random_unweighted(&mut rng, 10, 0.5);
        assert_eq!(rect_distance(&g, &g).unwrap(), 0.0);

        // complete vs edgeless: the full rectangle is optimal
        for n in 2..=8usize {
            let kn = SimpleGraph::complete(n).to_weighted();
            let en = SimpleGraph::empty(n).to_weighted();
            let d = rect_distance(&kn, &en).unwrap();
            let expect = (n * (n - 1)) as f64 / (n * n) as f64;
            assert!((d - expect).abs() < 1e-12, "n={n}: {d} vs {expect}");
        }

        // two independent samples: strictly between 0 and 1, symmetric
        let a = random_unweighted(&mut rng, 16, 0.5);
        let b = random_unweighted(&mut rng, 16, 0.5);
        let dab = rect_distance(&a, &b).unwrap();
        let dba = rect_distance(&b, &a).unwrap();
        assert!(dab > 0.0 && dab < 1.0);
        assert!((dab - dba).abs() < 1e-12);

        let small = random_unweighted(&mut rng, 4, 0.5);
        assert!(rect_distance(&a, &small).is_err());
    }

    #[test]
    fn stepnorm_examples() {
        let a = StepGraphon::constant(0.8).unwrap();
        assert_eq!(stepnorm(&a, &a).unwrap(), 0.0);
        let b = StepGraphon::constant(0.3).unwrap();
        assert!((stepnorm(&a, &b).unwrap() - 0.5).abs() < 1e-12);

        // stepfunctions of two graphs on equal classes reduce to the
        // rectangular distance
        let mut rng = crate::rng::root(44);
        let g1 = random_unweighted(&mut rng, 6, 0.5);
        let g2 = random_unweighted(&mut rng, 6, 0.5);
        let w1 = crate::graphons::from_weighted_graph(&g1);
        let w2 = crate::graphons::from_weighted_graph(&g2);
        let sn = stepnorm(&w1, &w2).unwrap();
        let rd = rect_distance(&g1, &g2).unwrap();
        assert!((sn - rd).abs() < 1e-12, "{sn} vs {rd}");
    }

    #[test]
    fn counting_lemma_examples() {
        let a = StepGraphon::constant(0.8).unwrap();
        let (lhs, rhs) = counting_lemma_check(&SimpleGraph::complete(2), &a, &a).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
        // constants with K2 are tight: |p - r| <= 1 * |p - r|
        let b = StepGraphon::constant(0.3).unwrap();
        let (lhs, rhs) = counting_lemma_check(&SimpleGraph::complete(2), &a, &b).unwrap();
        assert!((lhs - 0.5).abs() < 1e-12 && (rhs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn counting_lemma_on_random_stepfunction_pairs() {
        let mut rng = crate::rng::root(45);
        let tests = [
            SimpleGraph::complete(3),
            SimpleGraph::cycle(4),
            SimpleGraph::path(4),
        ];
        for _ in 0..100 {
            let u = random_step(&mut rng, 3);
            let w = random_step(&mut rng, 3);
            for f in &tests {
                counting_lemma_check(f, &u, &w).expect("counting lemma must hold");
            }
        }
    }

    #[test]
    fn density_difference_bounded_by_rect_distance() {
        // |t(F,G) - t(F,G')| <= |E(F)| d(G,G') for same-size graphs
        let mut rng = crate::rng::root(46);
        for _ in 0..30 {
            let n = rng.gen_range(4..=16);
            let g1 = random_unweighted(&mut rng, n, 0.5);
            let g2 = random_unweighted(&mut rng, n, 0.5);
            let d = rect_distance(&g1, &g2).unwrap();
            for mask in [0b111u64, 0b1011, 0b110110] {
                let f = SimpleGraph::from_edge_mask(4, mask & 0b111111);
                let lhs = (crate::densities::t(&f, &g1).unwrap()
                    - crate::densities::t(&f, &g2).unwrap())
                .abs();
                assert!(
                    lhs <= f.edge_count() as f64 * d + 1e-12,
                    "n={n} mask={mask}: {lhs} vs {} * {d}",
                    f.edge_count()
                );
            }
        }
    }

    #[test]
    fn exact_budget_guard() {
        let big = Matrix::zeros(23, 23);
        assert!(matches!(cutnorm_exact(&big), Err(Error::Budget(_))));
        // rectangular matrices only need one small side
        let rect = Matrix::zeros(3, 40);
        assert!(cutnorm_exact(&rect).is_ok());
    }
}
