//! Reference procedures that share no algorithmic shortcut with the main
//! solvers: KKT complementarity enumeration, pointwise pessimistic
//! evaluation, candidate sweeps and an exact one-dimensional sweep.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::enumerate_vertices;
use crate::instance::{coupling_view, require_a1, BlpInstance};
use crate::linprog::{solve_lp, thread_solve_count, LpOutcome, LpProblem};
use crate::numeric::{dot, frac, int, lex_cmp, zeros, Rational};
use crate::optimistic::{improves, OptimisticResult, SolveOptions};
use crate::pessimistic::{PessimisticCounts, PessimisticResult};
use crate::solution::SolveStatus;
use crate::valuefn::{eval_phi_direct, follower_response, reaction_max};

/// Largest `n_f + m_f` accepted by [`optimistic_oracle`].
pub const MAX_PATTERN_BITS: usize = 12;

/// Largest point count accepted by [`pessimistic_1d_sweep`].
pub const MAX_SWEEP_POINTS: usize = 100_000;

/// Optimistic optimum by enumerating the follower's complementarity
/// patterns: per follower row either the slack or the multiplier is zero,
/// per follower variable either the variable or its reduced cost is zero.
pub fn optimistic_oracle(inst: &BlpInstance, opts: &SolveOptions) -> Result<OptimisticResult> {
    let (nl, nf, mf) = (inst.n_l, inst.n_f, inst.m_f());
    if nf + mf > MAX_PATTERN_BITS {
        return Err(Error::SizeGuard(format!(
            "{} complementarity bits exceed the limit of {MAX_PATTERN_BITS}",
            nf + mf
        )));
    }
    require_a1(inst, opts.force)?;
    let width = nl + nf + mf;
    let mut objective = inst.cost_x.clone();
    objective.extend_from_slice(&inst.cost_y);
    objective.extend(zeros(mf));
    let mut base = LpProblem::minimize(objective);
    let primal_row = |a: &[Rational], g: &[Rational]| {
        let mut r = a.to_vec();
        r.extend_from_slice(g);
        r.extend(zeros(mf));
        r
    };
    for i in 0..inst.m_l() {
        base.add_le(
            primal_row(inst.leader_a.row(i), inst.leader_g.row(i)),
            inst.leader_h[i].clone(),
        )?;
    }
    for i in 0..mf {
        base.add_le(
            primal_row(inst.follower_a.row(i), inst.follower_g.row(i)),
            inst.follower_h[i].clone(),
        )?;
    }
    // reduced costs d_f + G_f^T λ ≥ 0
    let reduced_cost_row = |j: usize| {
        let mut r = zeros(nl + nf);
        r.extend((0..mf).map(|i| inst.follower_g.row(i)[j].clone()));
        r
    };
    for j in 0..nf {
        base.add_ge(reduced_cost_row(j), -inst.follower_cost[j].clone())?;
    }

    let mut best: Option<OptimisticResult> = None;
    let mut lp_count = 0;
    for pattern in 0u32..(1u32 << (nf + mf)) {
        let mut p = base.clone();
        for i in 0..mf {
            if pattern >> i & 1 == 1 {
                p.add_ge(
                    primal_row(inst.follower_a.row(i), inst.follower_g.row(i)),
                    inst.follower_h[i].clone(),
                )?;
            } else {
                let mut r = zeros(width);
                r[nl + nf + i] = Rational::one();
                p.add_eq(r, Rational::zero())?;
            }
        }
        for j in 0..nf {
            if pattern >> (mf + j) & 1 == 1 {
                let mut r = zeros(width);
                r[nl + j] = Rational::one();
                p.add_eq(r, Rational::zero())?;
            } else {
                p.add_eq(reduced_cost_row(j), -inst.follower_cost[j].clone())?;
            }
        }
        lp_count += 1;
        match solve_lp(&p) {
            LpOutcome::Optimal(s) => {
                let x = s.primal[..nl].to_vec();
                let better = improves(
                    &s.value,
                    &x,
                    best.as_ref()
                        .map(|b| (b.value.as_ref().unwrap(), b.x.as_slice())),
                );
                if better {
                    best = Some(OptimisticResult {
                        status: SolveStatus::Optimal,
                        value: Some(s.value),
                        x,
                        y: s.primal[nl..nl + nf].to_vec(),
                        winning_piece: None,
                        lp_count: 0,
                        note: Some(format!("complementarity pattern {pattern}")),
                    });
                }
            }
            LpOutcome::Infeasible { .. } => {}
            LpOutcome::Unbounded { .. } => return Err(Error::UnboundedSubproblem),
        }
    }
    Ok(match best {
        Some(mut r) => {
            r.lp_count = lp_count;
            r
        }
        None => OptimisticResult::infeasible(lp_count),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PessimisticEval {
    pub feasible: bool,
    /// `c_l·x` plus the worst follower term, reported even when infeasible.
    pub value: Rational,
    pub phi: Rational,
}

/// Pessimistic feasibility and objective at one leader decision.
pub fn pessimistic_evaluate(inst: &BlpInstance, x: &[Rational]) -> Result<PessimisticEval> {
    let phi = eval_phi_direct(inst, x)?;
    let view = coupling_view(inst);
    let mut feasible = view
        .pure_rows
        .iter()
        .all(|&i| dot(inst.leader_a.row(i), x) <= inst.leader_h[i]);
    for k in 0..view.coupling_rows.len() {
        let row = view.row(inst, k);
        let worst = reaction_max(inst, x, row.g)?;
        if dot(row.a, x) + worst > *row.h {
            feasible = false;
        }
    }
    let mut value = dot(&inst.cost_x, x);
    if !crate::numeric::is_zero_vec(&inst.cost_y) {
        value += reaction_max(inst, x, &inst.cost_y)?;
    }
    Ok(PessimisticEval {
        feasible,
        value,
        phi,
    })
}

/// Vertices of `X̃`, the supplied solver points and `samples` seeded random
/// convex combinations of the vertices; sorted and duplicate-free.
pub fn pessimistic_candidates(
    inst: &BlpInstance,
    solver_points: &[Vec<Rational>],
    seed: u64,
    samples: usize,
) -> Vec<Vec<Rational>> {
    let vertices = enumerate_vertices(&inst.leader_polyhedron());
    if vertices.is_empty() {
        return Vec::new();
    }
    let mut out: BTreeSet<Vec<Rational>> = vertices.iter().cloned().collect();
    out.extend(solver_points.iter().cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let weights: Vec<i64> = vertices.iter().map(|_| rng.gen_range(0..=8)).collect();
        let total: i64 = weights.iter().sum();
        if total == 0 {
            continue;
        }
        let mut p = zeros(inst.n_l);
        for (v, &w) in vertices.iter().zip(&weights) {
            let s = frac(w, total);
            for (pj, vj) in p.iter_mut().zip(v) {
                *pj += &s * vj;
            }
        }
        out.insert(p);
    }
    out.into_iter().collect()
}

/// `x ↦ slope·x + intercept`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Line {
    slope: Rational,
    intercept: Rational,
}

impl Line {
    fn at(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }

    fn negated(&self) -> Line {
        Line {
            slope: -self.slope.clone(),
            intercept: -self.intercept.clone(),
        }
    }
}

/// Breakpoints inside `(l, r)` of a convex piecewise-linear function given
/// by an oracle that returns a supporting line at each point.
fn breakpoints_convex<F>(
    l: &Rational,
    r: &Rational,
    line_l: &Line,
    line_r: &Line,
    oracle: &mut F,
    out: &mut Vec<Rational>,
) -> Result<()>
where
    F: FnMut(&Rational) -> Result<Line>,
{
    if line_l == line_r || line_l.slope == line_r.slope {
        return Ok(());
    }
    let x = (&line_r.intercept - &line_l.intercept) / (&line_l.slope - &line_r.slope);
    if x <= *l || x >= *r {
        return Ok(());
    }
    out.push(x.clone());
    if out.len() > MAX_SWEEP_POINTS {
        return Err(Error::SizeGuard(format!(
            "more than {MAX_SWEEP_POINTS} breakpoints"
        )));
    }
    let line_x = oracle(&x)?;
    if line_x.at(&x) == line_l.at(&x) {
        return Ok(());
    }
    breakpoints_convex(l, &x, line_l, &line_x, oracle, out)?;
    breakpoints_convex(&x, r, &line_x, line_r, oracle, out)
}

fn convex_breaks<F>(
    l: &Rational,
    r: &Rational,
    oracle: &mut F,
    out: &mut Vec<Rational>,
) -> Result<()>
where
    F: FnMut(&Rational) -> Result<Line>,
{
    if l >= r {
        return Ok(());
    }
    let line_l = oracle(l)?;
    let line_r = oracle(r)?;
    breakpoints_convex(l, r, &line_l, &line_r, oracle, out)
}

/// Supporting line of φ at `x` from the follower's dual multipliers.
fn phi_line(inst: &BlpInstance, x: &Rational) -> Result<Line> {
    let p = inst.follower_lp(std::slice::from_ref(x), false, inst.follower_cost.clone());
    let s = match solve_lp(&p) {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible { .. } => return Err(Error::InfeasibleAt),
        LpOutcome::Unbounded { .. } => return Err(Error::UnboundedBelow),
    };
    // value = (h − A x)·u with u ≤ 0
    let a: Vec<Rational> = (0..inst.m_f())
        .map(|i| inst.follower_a.row(i)[0].clone())
        .collect();
    Ok(Line {
        slope: -dot(&a, &s.dual),
        intercept: dot(&inst.follower_h, &s.dual),
    })
}

/// Upper line at `x` of `max objective·y` over `{y ∈ Y(x) : d_f·y ≤ φ}`
/// where φ follows the affine form `phi` on the current interval.
fn reaction_line(
    inst: &BlpInstance,
    phi: &Line,
    objective: &[Rational],
    x: &Rational,
) -> Result<Line> {
    let mut p = inst.follower_lp(std::slice::from_ref(x), true, objective.to_vec());
    p.add_le(inst.follower_cost.clone(), phi.at(x))?;
    let s = match solve_lp(&p) {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible { .. } => return Err(Error::InfeasibleAt),
        LpOutcome::Unbounded { .. } => return Err(Error::UnboundedAbove),
    };
    let mf = inst.m_f();
    let mut slope = phi.slope.clone() * &s.dual[mf];
    let mut intercept = phi.intercept.clone() * &s.dual[mf];
    for i in 0..mf {
        slope -= &inst.follower_a.row(i)[0] * &s.dual[i];
        intercept += &inst.follower_h[i] * &s.dual[i];
    }
    Ok(Line { slope, intercept })
}

fn sorted_unique(mut v: Vec<Rational>) -> Vec<Rational> {
    v.sort();
    v.dedup();
    v
}

/// Exact pessimistic optimum for one leader variable.
///
/// On every φ-interval the worst-case coupling terms are concave and
/// piecewise linear; their breakpoints and the zero crossings of every
/// coupling slack split `X̃` into intervals on which feasibility is constant
/// and the objective is affine. Evaluating every split point and interval
/// midpoint therefore finds the optimum whenever it is attained.
pub fn pessimistic_1d_sweep(inst: &BlpInstance, opts: &SolveOptions) -> Result<PessimisticResult> {
    if inst.n_l != 1 {
        return Err(Error::PreconditionViolated(format!(
            "the sweep needs one leader variable, found {}",
            inst.n_l
        )));
    }
    require_a1(inst, opts.force)?;
    let start = thread_solve_count();
    let x_set = inst.leader_polyhedron();
    let bound = |maximize: bool| match solve_lp(&x_set.lp(maximize, vec![int(1)])) {
        LpOutcome::Optimal(s) => Ok(Some(s.value)),
        LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded { .. } => Err(Error::UnboundedSubproblem),
    };
    let (Some(a), Some(b)) = (bound(false)?, bound(true)?) else {
        return Ok(sweep_result(None, start));
    };

    let mut phi_points = vec![a.clone(), b.clone()];
    convex_breaks(
        &a,
        &b,
        &mut |x: &Rational| phi_line(inst, x),
        &mut phi_points,
    )?;
    let phi_points = sorted_unique(phi_points);

    let view = coupling_view(inst);
    let mut points = phi_points.clone();
    for w in phi_points.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let mid = (p + q) / int(2);
        let phi_here = phi_line(inst, &mid)?;
        let mut objectives: Vec<SweepObjective> = (0..view.coupling_rows.len())
            .map(|k| {
                let row = view.row(inst, k);
                (row.g.to_vec(), Some((row.a[0].clone(), row.h.clone())))
            })
            .collect();
        if !crate::numeric::is_zero_vec(&inst.cost_y) {
            objectives.push((inst.cost_y.clone(), None));
        }
        for (g, slack) in objectives {
            // concave: run the convex search on the negation
            let mut local = vec![p.clone(), q.clone()];
            let mut neg_oracle =
                |x: &Rational| reaction_line(inst, &phi_here, &g, x).map(|l| l.negated());
            convex_breaks(p, q, &mut neg_oracle, &mut local)?;
            let local = sorted_unique(local);
            if let Some((a_coef, h)) = slack {
                // slack h − a x − m(x) is affine between consecutive points
                for s in local.windows(2) {
                    let (u, v) = (&s[0], &s[1]);
                    let su = &h - &a_coef * u - reaction_max(inst, std::slice::from_ref(u), &g)?;
                    let sv = &h - &a_coef * v - reaction_max(inst, std::slice::from_ref(v), &g)?;
                    if su != sv {
                        let root = u + (v - u) * &su / (&su - &sv);
                        if root > *u && root < *v {
                            points.push(root);
                        }
                    }
                }
            }
            points.extend(local);
            if points.len() > MAX_SWEEP_POINTS {
                return Err(Error::SizeGuard(format!(
                    "more than {MAX_SWEEP_POINTS} breakpoints"
                )));
            }
        }
    }
    let points = sorted_unique(points);
    let mut all = points.clone();
    all.extend(points.windows(2).map(|w| (&w[0] + &w[1]) / int(2)));
    let all = sorted_unique(all);

    let mut best: Option<(Rational, Rational)> = None;
    for x in all {
        let e = pessimistic_evaluate(inst, std::slice::from_ref(&x))?;
        if e.feasible && best.as_ref().is_none_or(|(v, _)| e.value < *v) {
            best = Some((e.value, x));
        }
    }
    Ok(sweep_result(best, start))
}

fn sweep_result(best: Option<(Rational, Rational)>, start: u64) -> PessimisticResult {
    let counts = PessimisticCounts {
        lp_solves: (thread_solve_count() - start) as usize,
        ..Default::default()
    };
    let (status, value, x) = match best {
        Some((v, x)) => (SolveStatus::Optimal, Some(v), vec![x]),
        None => (SolveStatus::Infeasible, None, Vec::new()),
    };
    PessimisticResult {
        status,
        value,
        x,
        cell_sign_vector: None,
        piece_index: None,
        bases: Vec::new(),
        verified_pointwise: status == SolveStatus::Optimal,
        counts,
        mode: None,
        subproblem_points: Vec::new(),
        note: Some("one-dimensional breakpoint sweep".into()),
    }
}

/// A reaction-set objective and, for coupling rows, the `(a, h)` of
/// `a x + g·y ≤ h`.
type SweepObjective = (Vec<Rational>, Option<(Rational, Rational)>);

/// Best pointwise-verified candidate from [`pessimistic_candidates`].
pub fn best_verified_candidate(
    inst: &BlpInstance,
    candidates: &[Vec<Rational>],
) -> Result<Option<(Rational, Vec<Rational>)>> {
    let mut best: Option<(Rational, Vec<Rational>)> = None;
    for x in candidates {
        let e = match pessimistic_evaluate(inst, x) {
            Ok(e) => e,
            Err(Error::InfeasibleAt) => continue,
            Err(e) => return Err(e),
        };
        let better = best
            .as_ref()
            .is_none_or(|(v, bx)| e.value < *v || (e.value == *v && lex_cmp(x, bx).is_lt()));
        if e.feasible && better {
            best = Some((e.value, x.clone()));
        }
    }
    Ok(best)
}

/// Follower response at `x` used as a witness in solution files.
pub fn follower_witness(inst: &BlpInstance, x: &[Rational]) -> Option<Vec<Rational>> {
    follower_response(inst, x).ok().map(|(_, y)| y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixture_t1, fixture_t2};
    use crate::numeric::Matrix;

    #[test]
    fn kkt_oracle_on_t1() {
        let r = optimistic_oracle(&fixture_t1(), &SolveOptions::default()).unwrap();
        assert_eq!(r.value, Some(int(0)));
        assert_eq!(r.x, vec![int(0)]);
        assert_eq!(r.lp_count, 4);
    }

    #[test]
    fn pattern_count() {
        let mut inst = fixture_t1();
        inst.follower_a = Matrix::from_i64(&[&[-1], &[0]]);
        inst.follower_g = Matrix::from_i64(&[&[1], &[1]]);
        inst.follower_h = vec![int(0), int(1)];
        let r = optimistic_oracle(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.lp_count, 8);
    }

    #[test]
    fn kkt_oracle_infeasible_leader_set() {
        let mut inst = fixture_t1();
        inst.leader_h = vec![int(-1)];
        let r = optimistic_oracle(&inst, &SolveOptions { force: true }).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn t2_pointwise() {
        let t2 = fixture_t2();
        let e = pessimistic_evaluate(&t2, &[frac(1, 4)]).unwrap();
        assert!(e.feasible);
        assert_eq!(e.value, frac(-1, 4));
        assert!(!pessimistic_evaluate(&t2, &[frac(3, 4)]).unwrap().feasible);
        let e = pessimistic_evaluate(&t2, &[frac(1, 2)]).unwrap();
        assert!(e.feasible);
        assert_eq!(e.value, frac(-1, 2));
    }

    #[test]
    fn t2_sweep() {
        let r = pessimistic_1d_sweep(&fixture_t2(), &SolveOptions::default()).unwrap();
        assert_eq!(r.value, Some(frac(-1, 2)));
        assert_eq!(r.x, vec![frac(1, 2)]);
    }

    #[test]
    fn sweep_without_coupling() {
        let mut inst = fixture_t2();
        inst.leader_a = Matrix::from_i64(&[&[1]]);
        inst.leader_g = Matrix::from_i64(&[&[0]]);
        inst.leader_h = vec![int(1)];
        let r = pessimistic_1d_sweep(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.value, Some(int(-1)));
    }

    #[test]
    fn sweep_infeasible_coupling() {
        let mut inst = fixture_t2();
        inst.leader_h[1] = int(-10);
        let r = pessimistic_1d_sweep(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn candidates_for_t2() {
        let t2 = fixture_t2();
        let c = pessimistic_candidates(&t2, &[vec![frac(1, 2)]], 7, 5);
        for p in [int(0), frac(1, 2), int(1)] {
            assert!(c.contains(&vec![p]));
        }
        assert_eq!(c, pessimistic_candidates(&t2, &[vec![frac(1, 2)]], 7, 5));
        let mut empty = t2.clone();
        empty.leader_h[0] = int(-1);
        assert!(pessimistic_candidates(&empty, &[], 7, 5).is_empty());
    }

    #[test]
    fn extra_coupling_row_never_helps() {
        let t2 = fixture_t2();
        let mut tighter = t2.clone();
        tighter.leader_a = Matrix::from_i64(&[&[1], &[0], &[1]]);
        tighter.leader_g = Matrix::from_i64(&[&[0], &[1], &[1]]);
        tighter.leader_h = vec![int(1), frac(1, 2), frac(1, 2)];
        for x in [int(0), frac(1, 8), frac(1, 4), frac(1, 2), int(1)] {
            let before = pessimistic_evaluate(&t2, std::slice::from_ref(&x))
                .unwrap()
                .feasible;
            let after = pessimistic_evaluate(&tighter, &[x]).unwrap().feasible;
            assert!(before || !after);
        }
    }
}
