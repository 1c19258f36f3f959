//! Two sign patterns of the leader's follower cost that avoid the general
//! machinery. Both results hold for either tie-breaking sense.
//!
//! * `d_l = d_f` (min-min): leader and follower agree on `y`, so the joint
//!   LP over the high-point relaxation is exact.
//! * `d_l = −d_f` (min-max): the leader pays `c_l·x − φ(x)`, a concave
//!   function, whose minimum over the polytope `X̃` sits at a vertex.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::enumerate_vertices;
use crate::instance::{coupling_view, BlpInstance};
use crate::linprog::{solve_lp, LpOutcome};
use crate::numeric::{dot, Rational};
use crate::optimistic::OptimisticResult;
use crate::solution::SolveStatus;
use crate::valuefn::follower_response;

fn require_no_coupling(inst: &BlpInstance) -> Result<()> {
    if !coupling_view(inst).coupling_rows.is_empty() {
        return Err(Error::PreconditionViolated(
            "leader rows must not involve the follower".into(),
        ));
    }
    Ok(())
}

pub fn is_minmin(inst: &BlpInstance) -> bool {
    inst.cost_y == inst.follower_cost && coupling_view(inst).coupling_rows.is_empty()
}

pub fn is_minmax(inst: &BlpInstance) -> bool {
    inst.cost_y
        .iter()
        .zip(&inst.follower_cost)
        .all(|(a, b)| (a + b).is_zero())
        && coupling_view(inst).coupling_rows.is_empty()
}

pub fn solve_minmin(inst: &BlpInstance) -> Result<OptimisticResult> {
    if inst.cost_y != inst.follower_cost {
        return Err(Error::PreconditionViolated("d_l must equal d_f".into()));
    }
    require_no_coupling(inst)?;
    let mut objective = inst.cost_x.clone();
    objective.extend_from_slice(&inst.cost_y);
    match solve_lp(&inst.high_point_lp(false, objective)) {
        LpOutcome::Optimal(s) => Ok(OptimisticResult {
            status: SolveStatus::Optimal,
            value: Some(s.value),
            x: s.primal[..inst.n_l].to_vec(),
            y: s.primal[inst.n_l..].to_vec(),
            winning_piece: None,
            lp_count: 1,
            note: Some("min-min: one LP, valid for both senses".into()),
        }),
        LpOutcome::Infeasible { .. } => Ok(OptimisticResult::infeasible(1)),
        LpOutcome::Unbounded { .. } => Err(Error::UnboundedSubproblem),
    }
}

pub fn solve_minmax(inst: &BlpInstance) -> Result<OptimisticResult> {
    if !inst
        .cost_y
        .iter()
        .zip(&inst.follower_cost)
        .all(|(a, b)| (a + b).is_zero())
    {
        return Err(Error::PreconditionViolated("d_l must equal −d_f".into()));
    }
    require_no_coupling(inst)?;
    let vertices = enumerate_vertices(&inst.leader_polyhedron());
    if vertices.is_empty() {
        if inst.leader_polyhedron().is_empty() {
            return Ok(OptimisticResult::infeasible(0));
        }
        return Err(Error::NoVertices);
    }
    let mut best: Option<(Rational, Vec<Rational>, Vec<Rational>)> = None;
    let mut evaluated = 0;
    // vertices arrive in lexicographic order, so the first minimum wins ties
    for x in vertices {
        evaluated += 1;
        let (phi, y) = match follower_response(inst, &x) {
            Ok(r) => r,
            Err(Error::InfeasibleAt) => continue,
            Err(e) => return Err(e),
        };
        let value = dot(&inst.cost_x, &x) - phi;
        if best.as_ref().is_none_or(|(v, _, _)| value < *v) {
            best = Some((value, x, y));
        }
    }
    Ok(match best {
        Some((value, x, y)) => OptimisticResult {
            status: SolveStatus::Optimal,
            value: Some(value),
            x,
            y,
            winning_piece: None,
            lp_count: evaluated,
            note: Some(
                "min-max: concave objective minimized over the vertices of the leader set".into(),
            ),
        },
        None => OptimisticResult::infeasible(evaluated),
    })
}

/// `c_l·x − φ(x)` where φ is evaluated directly.
pub fn minmax_objective(inst: &BlpInstance, x: &[Rational]) -> Result<Rational> {
    let (phi, _) = follower_response(inst, x)?;
    Ok(dot(&inst.cost_x, x) - phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixture_t1;
    use crate::numeric::{frac, int, Matrix};
    use crate::optimistic::{solve_optimistic, SolveOptions};
    use crate::valuefn::build_pwl;

    fn minmin_fixture() -> BlpInstance {
        let mut inst = fixture_t1();
        inst.cost_y = vec![int(-1)];
        inst
    }

    #[test]
    fn minmin_value() {
        let inst = minmin_fixture();
        assert!(is_minmin(&inst));
        let r = solve_minmin(&inst).unwrap();
        assert_eq!(r.value, Some(int(0)));
        let pwl = build_pwl(&inst).unwrap();
        let o = solve_optimistic(&inst, &pwl, &SolveOptions::default()).unwrap();
        assert_eq!(o.value, r.value);
    }

    #[test]
    fn minmin_zero_costs() {
        let mut inst = minmin_fixture();
        inst.cost_y = vec![int(0)];
        inst.follower_cost = vec![int(0)];
        inst.cost_x = vec![int(-2)];
        assert_eq!(solve_minmin(&inst).unwrap().value, Some(int(-2)));
    }

    #[test]
    fn minmax_value() {
        let mut inst = fixture_t1();
        inst.cost_x = vec![frac(1, 2)];
        assert!(is_minmax(&inst));
        let r = solve_minmax(&inst).unwrap();
        assert_eq!(r.value, Some(int(0)));
        assert_eq!(r.x, vec![int(0)]);
        inst.cost_x = vec![int(0)];
        let r = solve_minmax(&inst).unwrap();
        assert_eq!(r.value, Some(int(0)));
        assert_eq!(r.x, vec![int(0)]);
    }

    #[test]
    fn minmax_single_point() {
        let mut inst = fixture_t1();
        inst.cost_x = vec![int(3)];
        // 1/3 ≤ x ≤ 1/3
        inst.leader_a = Matrix::from_i64(&[&[3], &[-3]]);
        inst.leader_g = Matrix::from_i64(&[&[0], &[0]]);
        inst.leader_h = vec![int(1), int(-1)];
        let r = solve_minmax(&inst).unwrap();
        assert_eq!(r.value, Some(int(1) + frac(1, 3)));
    }

    #[test]
    fn preconditions_checked() {
        let mut inst = fixture_t1();
        inst.cost_y = vec![int(2)];
        assert!(matches!(
            solve_minmin(&inst),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            solve_minmax(&inst),
            Err(Error::PreconditionViolated(_))
        ));
        let t2 = crate::instance::fixture_t2();
        assert!(matches!(
            solve_minmin(&t2),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
