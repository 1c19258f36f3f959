//! Maximum independent set as a pessimistic bilevel program.
//!
//! For a vertex `k` (1-based) the moment system
//! `Σ τ_i = 1, Σ i τ_i = k, Σ i² τ_i = k²` has the single nonnegative
//! solution `τ = e_k`, because `Σ (i − k)² τ_i = 0`. Splitting
//! `τ_i = λ_i + λ̄_i` turns `min x·λ + (1 − x)·λ̄` into `min{x_k, 1 − x_k}`,
//! which is `≤ 0` on `[0, 1]` exactly at binary `x_k`. Dualizing that LP
//! gives a follower over `y ∈ ℝ³` (split into `y⁺, y⁻ ≥ 0`) whose feasible
//! set does not depend on `k`, and one coupling row per vertex.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instance::{BlpInstance, InstanceParts, Sense};
use crate::linprog::{solve_lp, LpOutcome, LpProblem};
use crate::numeric::{frac, int, solve_full_column_rank, zeros, Matrix, Rational};
use crate::oracle::pessimistic_evaluate;

/// Largest graph accepted by [`solve_mis_bruteforce`].
pub const MAX_BRUTEFORCE_VERTICES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Edges are 0-based pairs `(i, j)` with `i < j`, without repeats.
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(i, j) in &edges {
            if i >= j {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) must satisfy i < j"
                )));
            }
            if j >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) names a vertex outside 0..{num_vertices}"
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidGraph(format!("edge ({i}, {j}) is repeated")));
            }
        }
        Ok(Graph {
            num_vertices,
            edges,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|j| (j - 1, j)).collect()).expect("path is simple")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|j| (j - 1, j)).collect();
        if n >= 3 {
            edges.push((0, n - 1));
        }
        Graph::new(n, edges).expect("cycle is simple")
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).tuple_combinations().collect()).expect("complete graph is simple")
    }

    pub fn is_independent(&self, set: &[bool]) -> bool {
        self.edges.iter().all(|&(i, j)| !(set[i] && set[j]))
    }
}

pub fn parse_graph(bytes: &[u8]) -> Result<Graph> {
    let root: Value = serde_json::from_slice(bytes)
        .map_err(|e| Error::parse(format!("line {}", e.line()), e.to_string()))?;
    let n = root
        .get("num_vertices")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::parse("num_vertices", "expected a nonnegative integer"))?
        as usize;
    let edges = root
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("edges", "expected an array of pairs"))?
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let pair = e.as_array().filter(|p| p.len() == 2);
            let ends: Option<Vec<u64>> = pair.map(|p| p.iter().filter_map(Value::as_u64).collect());
            match ends {
                Some(v) if v.len() == 2 => Ok((v[0] as usize, v[1] as usize)),
                _ => Err(Error::parse(
                    format!("edges[{k}]"),
                    "expected a pair of vertex indices",
                )),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Graph::new(n, edges)
}

pub fn serialize_graph(g: &Graph) -> Vec<u8> {
    let edges: Vec<[usize; 2]> = g.edges.iter().map(|&(i, j)| [i, j]).collect();
    let mut out = serde_json::to_vec_pretty(&json!({
        "num_vertices": g.num_vertices,
        "edges": edges,
    }))
    .expect("json values serialize");
    out.push(b'\n');
    out
}

/// Every graph on `n` vertices up to isomorphism, in a canonical order.
pub fn nonisomorphic_graphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let mut seen: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<(usize, usize)> = (0..pairs.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| pairs[b])
            .collect();
        let canonical = perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(i, j)| (p[i].min(p[j]), p[i].max(p[j])))
                    .collect();
                e.sort_unstable();
                e
            })
            .min()
            .unwrap_or_default();
        seen.insert(canonical);
    }
    seen.into_iter()
        .map(|e| Graph::new(n, e).expect("canonical edges are simple"))
        .collect()
}

/// The moment rows for vertex `k` over `(λ, λ̄)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetSystem {
    pub k: usize,
    pub lambda_dim: usize,
    pub equality_rows: Vec<(Vec<Rational>, Rational)>,
}

impl GadgetSystem {
    /// The 3 × |V| system in `τ = λ + λ̄`.
    pub fn tau_system(&self) -> (Matrix, Vec<Rational>) {
        let n = self.lambda_dim;
        let rows = self
            .equality_rows
            .iter()
            .map(|(r, _)| r[..n].to_vec())
            .collect();
        let rhs = self.equality_rows.iter().map(|(_, b)| b.clone()).collect();
        (Matrix::from_rows(n, rows).expect("width |V|"), rhs)
    }

    /// `min x·λ + (1 − x)·λ̄` subject to the moment rows.
    pub fn lp_value(&self, x: &[Rational]) -> Result<Rational> {
        let n = self.lambda_dim;
        if x.len() != n {
            return Err(Error::dims("gadget point must have |V| entries"));
        }
        let mut obj = x.to_vec();
        obj.extend(x.iter().map(|v| Rational::one() - v));
        let mut p = LpProblem::minimize(obj);
        for (r, b) in &self.equality_rows {
            p.add_eq(r.clone(), b.clone())?;
        }
        match solve_lp(&p) {
            LpOutcome::Optimal(s) => Ok(s.value),
            _ => Err(Error::PreconditionViolated(
                "gadget LP has no optimum".into(),
            )),
        }
    }

    /// Range of each `τ_i` over the nonnegative solutions of the moment
    /// system.
    pub fn tau_ranges(&self) -> Vec<(Rational, Rational)> {
        let (m, rhs) = self.tau_system();
        let n = self.lambda_dim;
        (0..n)
            .map(|i| {
                let mut bounds = [Rational::zero(), Rational::zero()];
                for (slot, maximize) in [(0, false), (1, true)] {
                    let obj = crate::numeric::unit(n, i);
                    let mut p = if maximize {
                        LpProblem::maximize(obj)
                    } else {
                        LpProblem::minimize(obj)
                    };
                    for (r, b) in m.row_vecs().into_iter().zip(&rhs) {
                        p.add_eq(r, b.clone()).expect("width |V|");
                    }
                    bounds[slot] = solve_lp(&p)
                        .into_optimal()
                        .expect("the indicator of k solves the system")
                        .value;
                }
                let [lo, hi] = bounds;
                (lo, hi)
            })
            .collect()
    }

    /// The solution of the (consistent, overdetermined) τ-system.
    pub fn solve_tau(&self) -> Result<Vec<Rational>> {
        let (m, rhs) = self.tau_system();
        solve_full_column_rank(&m, &rhs)
    }
}

pub fn build_gadget(k: usize, num_vertices: usize) -> Result<GadgetSystem> {
    if k == 0 || k > num_vertices {
        return Err(Error::PreconditionViolated(format!(
            "vertex {k} outside 1..={num_vertices}"
        )));
    }
    let n = num_vertices;
    let row = |power: u32| -> Vec<Rational> {
        let coeffs: Vec<Rational> = (1..=n as i64).map(|i| int(i.pow(power))).collect();
        coeffs.iter().chain(coeffs.iter()).cloned().collect()
    };
    let k = k as i64;
    Ok(GadgetSystem {
        k: k as usize,
        lambda_dim: n,
        equality_rows: vec![(row(0), int(1)), (row(1), int(k)), (row(2), int(k * k))],
    })
}

/// `(1, k, k², −1, −k, −k²)`: the quadratic `y₁ + k y₂ + k² y₃` on the
/// split follower variables.
fn moment_row(k: usize) -> Vec<Rational> {
    let k = k as i64;
    let plus = [int(1), int(k), int(k * k)];
    let minus = plus.iter().map(|v| -v);
    plus.iter().cloned().chain(minus).collect()
}

/// Bound on the split follower variables used by [`reduce_mis`] with
/// `boxed`. For `x ∈ [0, 1]^V` the coupling maximum for vertex `k` is
/// attained by `q(i) = min{x_k, 1 − x_k}·(−1) + (i − k)²/2`, whose
/// coefficients are at most `max(|V|²/2, |V|)` in magnitude.
pub fn box_bound(g: &Graph) -> Rational {
    let n = g.num_vertices as i64;
    frac(n * n, 2).max(int(n)) + int(1)
}

pub fn reduce_mis(g: &Graph, boxed: bool) -> BlpInstance {
    let n = g.num_vertices;
    let nf = 6;
    let mut leader_a = Vec::new();
    let mut leader_g = Vec::new();
    let mut leader_h = Vec::new();
    for &(i, j) in &g.edges {
        let mut a = zeros(n);
        a[i] = int(1);
        a[j] = int(1);
        leader_a.push(a);
        leader_g.push(zeros(nf));
        leader_h.push(int(1));
    }
    for k in 0..n {
        leader_a.push(crate::numeric::unit(n, k));
        leader_g.push(zeros(nf));
        leader_h.push(int(1));
    }
    // max over Y(x) of −(y₁ + k y₂ + k² y₃) ≤ 0
    for k in 1..=n {
        leader_a.push(zeros(n));
        leader_g.push(moment_row(k).iter().map(|v| -v).collect());
        leader_h.push(int(0));
    }

    let mut follower_a = Vec::new();
    let mut follower_g = Vec::new();
    let mut follower_h = Vec::new();
    for k in 1..=n {
        let neg_q: Vec<Rational> = moment_row(k).iter().map(|v| -v).collect();
        // −x_k − q(k) ≤ 0
        follower_a.push(crate::numeric::unit(n, k - 1).iter().map(|v| -v).collect());
        follower_g.push(neg_q.clone());
        follower_h.push(int(0));
        // x_k − 1 − q(k) ≤ 0
        follower_a.push(crate::numeric::unit(n, k - 1));
        follower_g.push(neg_q);
        follower_h.push(int(1));
    }
    if boxed {
        let m = box_bound(g);
        for j in 0..nf {
            follower_a.push(zeros(n));
            follower_g.push(crate::numeric::unit(nf, j));
            follower_h.push(m.clone());
        }
    }
    let name = format!(
        "mis-{}v-{}e{}",
        n,
        g.edges.len(),
        if boxed { "-boxed" } else { "" }
    );
    BlpInstance::new(InstanceParts {
        name,
        sense: Sense::Pessimistic,
        n_l: n,
        n_f: nf,
        leader_a,
        leader_g,
        leader_h,
        cost_x: vec![int(-1); n],
        cost_y: zeros(nf),
        follower_a,
        follower_g,
        follower_h,
        follower_cost: zeros(nf),
    })
    .expect("reduction rows are consistent")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisResult {
    pub size: usize,
    /// Sorted 0-based vertices.
    pub witness: Vec<usize>,
}

impl MisResult {
    pub fn answers(&self, q: usize) -> bool {
        self.size >= q
    }
}

/// Exhaustive search; among maximum sets the lexicographically smallest
/// sorted vertex list wins.
pub fn solve_mis_bruteforce(g: &Graph) -> Result<MisResult> {
    let n = g.num_vertices;
    if n > MAX_BRUTEFORCE_VERTICES {
        return Err(Error::SizeGuard(format!(
            "{n} vertices exceed the brute-force limit of {MAX_BRUTEFORCE_VERTICES}"
        )));
    }
    let mut best = MisResult {
        size: 0,
        witness: Vec::new(),
    };
    for mask in 0u32..(1u32 << n) {
        let set: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if !g.is_independent(&set) {
            continue;
        }
        let witness: Vec<usize> = (0..n).filter(|&i| set[i]).collect();
        if witness.len() > best.size || (witness.len() == best.size && witness < best.witness) {
            best = MisResult {
                size: witness.len(),
                witness,
            };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionReport {
    pub binary_points: usize,
    pub fractional_points: usize,
    pub best_value: Option<Rational>,
    pub best_x: Vec<Rational>,
    pub mis_size: usize,
    pub mismatches: Vec<String>,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Largest graph accepted by [`verify_reduction`].
pub const MAX_VERIFY_VERTICES: usize = 6;

/// Pointwise check of the reduced instance: independent sets are feasible
/// with value `−|S|`, other binary points and points with one fractional
/// coordinate are infeasible, and the best binary value is `−OPT(G)`.
pub fn verify_reduction(g: &Graph, boxed: bool) -> Result<ReductionReport> {
    let n = g.num_vertices;
    if n > MAX_VERIFY_VERTICES {
        return Err(Error::SizeGuard(format!(
            "{n} vertices exceed the verification limit of {MAX_VERIFY_VERTICES}"
        )));
    }
    let inst = reduce_mis(g, boxed);
    let mis = solve_mis_bruteforce(g)?;
    let mut mismatches = Vec::new();
    let mut best: Option<(Rational, Vec<Rational>)> = None;
    for mask in 0u32..(1u32 << n) {
        let set: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let x: Vec<Rational> = set.iter().map(|&b| int(i64::from(b))).collect();
        let e = pessimistic_evaluate(&inst, &x)?;
        let independent = g.is_independent(&set);
        let expected = -int(set.iter().filter(|&&b| b).count() as i64);
        if e.feasible != independent {
            mismatches.push(format!(
                "binary point {} reported feasible = {}",
                crate::numeric::format_vec(&x),
                e.feasible
            ));
        }
        if e.feasible && e.value != expected {
            mismatches.push(format!(
                "binary point {} has value {}",
                crate::numeric::format_vec(&x),
                e.value
            ));
        }
        if e.feasible && best.as_ref().is_none_or(|(v, _)| e.value < *v) {
            best = Some((e.value, x));
        }
    }
    let mut fractional = 0;
    for k in 0..n {
        for f in [frac(1, 4), frac(1, 2), frac(3, 4)] {
            let mut x = zeros(n);
            x[k] = f;
            fractional += 1;
            let e = pessimistic_evaluate(&inst, &x)?;
            if e.feasible {
                mismatches.push(format!(
                    "fractional point {} accepted",
                    crate::numeric::format_vec(&x)
                ));
            }
        }
    }
    let best_value = best.as_ref().map(|(v, _)| v.clone());
    if best_value != Some(-int(mis.size as i64)) {
        mismatches.push(format!(
            "best binary value {:?} does not match independence number {}",
            best_value.as_ref().map(ToString::to_string),
            mis.size
        ));
    }
    Ok(ReductionReport {
        binary_points: 1 << n,
        fractional_points: fractional,
        best_x: best.map(|(_, x)| x).unwrap_or_default(),
        best_value,
        mis_size: mis.size,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{coupling_view, validate_a1, A1Status};

    #[test]
    fn graph_validation() {
        assert!(Graph::new(2, vec![(1, 0)]).is_err());
        assert!(Graph::new(2, vec![(0, 2)]).is_err());
        assert!(Graph::new(3, vec![(0, 1), (0, 1)]).is_err());
        let g = Graph::cycle(5);
        assert_eq!(parse_graph(&serialize_graph(&g)).unwrap(), g);
        assert!(parse_graph(br#"{"num_vertices": 2, "edges": [[0]]}"#).is_err());
    }

    #[test]
    fn graph_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| nonisomorphic_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11]);
    }

    #[test]
    fn gadget_two_vertices() {
        let g = build_gadget(1, 2).unwrap();
        assert_eq!(g.solve_tau().unwrap(), vec![int(1), int(0)]);
        assert_eq!(g.lp_value(&[frac(1, 2), int(0)]).unwrap(), frac(1, 2));
        assert_eq!(g.lp_value(&[int(1), frac(1, 3)]).unwrap(), int(0));
        assert_eq!(g.lp_value(&[int(0), frac(1, 3)]).unwrap(), int(0));
        assert!(build_gadget(0, 2).is_err());
        assert!(build_gadget(3, 2).is_err());
    }

    #[test]
    fn single_edge_dimensions() {
        let g = Graph::path(2);
        let inst = reduce_mis(&g, false);
        assert_eq!((inst.n_l, inst.n_f, inst.m_f()), (2, 6, 4));
        let view = coupling_view(&inst);
        assert_eq!(view.coupling_rows.len(), 2);
        assert_eq!(view.pure_rows.len(), 3);
        assert_eq!(validate_a1(&inst).a1_status, A1Status::Relaxed);
        assert!(!validate_a1(&inst).follower_recession_trivial);
    }

    #[test]
    fn boxed_instance_satisfies_a1() {
        let g = Graph::path(3);
        let inst = reduce_mis(&g, true);
        assert_eq!(validate_a1(&inst).a1_status, A1Status::Satisfied);
        assert!(verify_reduction(&g, true).unwrap().passed());
    }

    #[test]
    fn brute_force_values() {
        assert_eq!(solve_mis_bruteforce(&Graph::path(2)).unwrap().size, 1);
        let p3 = solve_mis_bruteforce(&Graph::path(3)).unwrap();
        assert_eq!(p3.size, 2);
        assert_eq!(p3.witness, vec![0, 2]);
        assert_eq!(solve_mis_bruteforce(&Graph::cycle(5)).unwrap().size, 2);
        assert!(p3.answers(2) && !p3.answers(3));
        assert!(solve_mis_bruteforce(&Graph::path(21)).is_err());
    }

    #[test]
    fn single_vertex_pointwise() {
        let inst = reduce_mis(&Graph::path(1), false);
        let e = pessimistic_evaluate(&inst, &[int(1)]).unwrap();
        assert!(e.feasible);
        assert_eq!(e.value, int(-1));
        assert!(!pessimistic_evaluate(&inst, &[frac(1, 2)]).unwrap().feasible);
    }

    #[test]
    fn small_round_trips() {
        let edge = verify_reduction(&Graph::path(2), false).unwrap();
        assert!(edge.passed(), "{:?}", edge.mismatches);
        assert_eq!(edge.best_value, Some(int(-1)));
        let p3 = verify_reduction(&Graph::path(3), false).unwrap();
        assert!(p3.passed(), "{:?}", p3.mismatches);
        assert_eq!(p3.best_x, vec![int(1), int(0), int(1)]);
        let tri = verify_reduction(&Graph::complete(3), false).unwrap();
        assert_eq!(tri.best_value, Some(int(-1)));
    }
}
