//! The follower's value function `φ(x) = min { d_f·y : y ∈ Y(x) }`.
//!
//! By LP duality `φ(x) = max { (A_f x − h_f)·λ : λ ∈ Λ }` with
//! `Λ = {λ ≥ 0 : −G_f^T λ ≤ d_f}`. Λ sits in the nonnegative orthant, so
//! whenever the maximum is finite it is attained at a vertex, and `φ` is the
//! maximum of the affine pieces generated by `ext(Λ)`.

use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::geometry::{enumerate_vertices, HPolyhedron};
use crate::instance::BlpInstance;
use crate::linprog::{solve_lp, LpOutcome, LpProblem};
use crate::numeric::{dot, format_rational, Matrix, Rational};

/// `Λ = {λ ≥ 0 : −G_f^T λ ≤ d_f}` in dimension `m_f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualPolytope {
    pub polyhedron: HPolyhedron,
}

impl DualPolytope {
    pub fn of(inst: &BlpInstance) -> Self {
        let gt = inst.follower_g.transpose();
        let rows: Vec<Vec<Rational>> = (0..gt.rows())
            .map(|j| gt.row(j).iter().map(|v| -v).collect())
            .collect();
        let a = Matrix::from_rows(inst.m_f(), rows).expect("G_f^T has m_f columns");
        let polyhedron = HPolyhedron::new(a, inst.follower_cost.clone(), vec![true; inst.m_f()])
            .expect("shape consistent");
        DualPolytope { polyhedron }
    }

    pub fn vertices(&self) -> Vec<Vec<Rational>> {
        enumerate_vertices(&self.polyhedron)
    }
}

/// The affine function `x ↦ slope·x + offset`, generated by `lambda`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub slope: Vec<Rational>,
    pub offset: Rational,
    pub lambda: Vec<Rational>,
}

impl Piece {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.slope, x) + &self.offset
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.slope.iter().map(format_rational).collect();
        parts.push(format_rational(&self.offset));
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwlConvexFunction {
    pub pieces: Vec<Piece>,
}

impl PwlConvexFunction {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.eval(x))
            .max()
            .expect("a value function has at least one piece")
    }

    /// Indices of pieces attaining the maximum at `x`.
    pub fn active_pieces(&self, x: &[Rational]) -> Vec<usize> {
        let v = self.eval(x);
        (0..self.pieces.len())
            .filter(|&i| self.pieces[i].eval(x) == v)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

fn check_leader_point(inst: &BlpInstance, x: &[Rational]) -> Result<()> {
    if x.len() != inst.n_l {
        return Err(Error::dims(format!(
            "leader point has {} entries, expected {}",
            x.len(),
            inst.n_l
        )));
    }
    if x.iter().any(|v| v.is_negative()) {
        return Err(Error::PreconditionViolated(
            "leader point must be nonnegative".into(),
        ));
    }
    Ok(())
}

/// `φ(x)` and a follower optimum attaining it.
pub fn follower_response(inst: &BlpInstance, x: &[Rational]) -> Result<(Rational, Vec<Rational>)> {
    check_leader_point(inst, x)?;
    match solve_lp(&inst.follower_lp(x, false, inst.follower_cost.clone())) {
        LpOutcome::Optimal(s) => Ok((s.value, s.primal)),
        LpOutcome::Infeasible { .. } => Err(Error::InfeasibleAt),
        LpOutcome::Unbounded { .. } => Err(Error::UnboundedBelow),
    }
}

pub fn eval_phi_direct(inst: &BlpInstance, x: &[Rational]) -> Result<Rational> {
    follower_response(inst, x).map(|(v, _)| v)
}

/// One piece per distinct affine form generated by a vertex of Λ, in the
/// lexicographic order of the generating vertices.
pub fn build_pwl(inst: &BlpInstance) -> Result<PwlConvexFunction> {
    let dual = DualPolytope::of(inst);
    if dual.polyhedron.is_empty() {
        return Err(Error::EmptyDual);
    }
    let at = inst.follower_a.transpose();
    let mut pieces: Vec<Piece> = Vec::new();
    for lambda in dual.vertices() {
        let slope = at.mul_vec(&lambda).expect("λ has m_f entries");
        let offset = -dot(&inst.follower_h, &lambda);
        if !pieces
            .iter()
            .any(|p| p.slope == slope && p.offset == offset)
        {
            pieces.push(Piece {
                slope,
                offset,
                lambda,
            });
        }
    }
    if pieces.is_empty() {
        // Λ is nonempty and pointed, so this cannot happen.
        return Err(Error::NoVertices);
    }
    Ok(PwlConvexFunction { pieces })
}

/// `C(n_f + m_f, m_f)`, the bound on the number of pieces.
pub fn piece_bound(inst: &BlpInstance) -> u128 {
    binomial(inst.n_f + inst.m_f(), inst.m_f())
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `max objective·y` over the reaction set `R(x)` and a maximizer.
///
/// `R(x)` is written as `{y ∈ Y(x) : d_f·y ≤ φ(x)}`.
pub fn reaction_argmax(
    inst: &BlpInstance,
    x: &[Rational],
    objective: &[Rational],
) -> Result<(Rational, Vec<Rational>)> {
    reaction_argmax_with(inst, x, objective, false)
}

pub fn reaction_max(
    inst: &BlpInstance,
    x: &[Rational],
    objective: &[Rational],
) -> Result<Rational> {
    reaction_argmax(inst, x, objective).map(|(v, _)| v)
}

/// Same maximum with `R(x)` written as `{y ∈ Y(x) : d_f·y = φ(x)}`.
pub fn reaction_max_eq(
    inst: &BlpInstance,
    x: &[Rational],
    objective: &[Rational],
) -> Result<Rational> {
    reaction_argmax_with(inst, x, objective, true).map(|(v, _)| v)
}

fn reaction_argmax_with(
    inst: &BlpInstance,
    x: &[Rational],
    objective: &[Rational],
    equality: bool,
) -> Result<(Rational, Vec<Rational>)> {
    if objective.len() != inst.n_f {
        return Err(Error::dims("reaction objective must have n_f entries"));
    }
    let phi = eval_phi_direct(inst, x)?;
    let mut p: LpProblem = inst.follower_lp(x, true, objective.to_vec());
    let cost = inst.follower_cost.clone();
    if equality {
        p.add_eq(cost, phi)?;
    } else {
        p.add_le(cost, phi)?;
    }
    match solve_lp(&p) {
        LpOutcome::Optimal(s) => Ok((s.value, s.primal)),
        LpOutcome::Unbounded { .. } => Err(Error::UnboundedAbove),
        // φ(x) is attained, so R(x) is nonempty.
        LpOutcome::Infeasible { .. } => Err(Error::InfeasibleAt),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixture_t1, fixture_t2, InstanceParts, Sense};
    use crate::numeric::{frac, int};
    use num_traits::Zero;

    fn abs_instance() -> BlpInstance {
        // min y s.t. y ≥ x, y ≥ −x, with x free of sign via x ≥ 0 in the
        // model; the negative side is probed through the pieces directly.
        BlpInstance::new(InstanceParts {
            name: "abs".into(),
            sense: Sense::Optimistic,
            n_l: 1,
            n_f: 1,
            leader_a: vec![],
            leader_g: vec![],
            leader_h: vec![],
            cost_x: vec![int(0)],
            cost_y: vec![int(0)],
            follower_a: vec![vec![int(1)], vec![int(-1)]],
            follower_g: vec![vec![int(-1)], vec![int(-1)]],
            follower_h: vec![int(0), int(0)],
            follower_cost: vec![int(1)],
        })
        .unwrap()
    }

    #[test]
    fn t1_direct_value() {
        assert_eq!(
            eval_phi_direct(&fixture_t1(), &[frac(1, 2)]).unwrap(),
            frac(-1, 2)
        );
        assert!(matches!(
            eval_phi_direct(&fixture_t1(), &[int(-1)]),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn t2_value_is_zero() {
        for x in [int(0), frac(1, 3), int(1)] {
            assert_eq!(eval_phi_direct(&fixture_t2(), &[x]).unwrap(), int(0));
        }
    }

    #[test]
    fn t1_single_piece() {
        let pwl = build_pwl(&fixture_t1()).unwrap();
        assert_eq!(pwl.len(), 1);
        assert_eq!(pwl.pieces[0].slope, vec![int(-1)]);
        assert_eq!(pwl.pieces[0].offset, int(0));
        assert_eq!(pwl.pieces[0].lambda, vec![int(1)]);
        assert_eq!(pwl.pieces[0].to_string(), "(-1, 0)");
    }

    #[test]
    fn absolute_value_pieces() {
        let inst = abs_instance();
        let pwl = build_pwl(&inst).unwrap();
        // ext(Λ) = {0, e1, e2}: the zero piece is dominated but kept
        assert_eq!(pwl.len(), 3);
        for x in [-1, 0, 2] {
            assert_eq!(pwl.eval(&[int(x)]), int(x.abs()));
        }
        for x in [0, 2] {
            assert_eq!(eval_phi_direct(&inst, &[int(x)]).unwrap(), int(x));
        }
        assert!(pwl.len() as u128 <= piece_bound(&inst));
    }

    #[test]
    fn zero_cost_gives_zero_piece() {
        let pwl = build_pwl(&fixture_t2()).unwrap();
        assert_eq!(pwl.len(), 1);
        assert!(crate::numeric::is_zero_vec(&pwl.pieces[0].slope));
        assert!(pwl.pieces[0].offset.is_zero());
    }

    #[test]
    fn empty_dual_reported() {
        let mut inst = fixture_t1();
        // only −y ≤ 0 with cost −y: unbounded follower
        inst.follower_g = Matrix::from_i64(&[&[-1]]);
        assert_eq!(build_pwl(&inst), Err(Error::EmptyDual));
        assert_eq!(
            eval_phi_direct(&inst, &[int(0)]),
            Err(Error::UnboundedBelow)
        );
    }

    #[test]
    fn reaction_maxima() {
        let t2 = fixture_t2();
        assert_eq!(
            reaction_max(&t2, &[frac(3, 4)], &[int(1)]).unwrap(),
            frac(3, 4)
        );
        let t1 = fixture_t1();
        assert_eq!(
            reaction_max(&t1, &[frac(1, 2)], &[int(1)]).unwrap(),
            frac(1, 2)
        );
        assert_eq!(reaction_max(&t1, &[frac(1, 2)], &[int(0)]).unwrap(), int(0));
        assert_eq!(
            reaction_max_eq(&t2, &[frac(3, 4)], &[int(1)]).unwrap(),
            frac(3, 4)
        );
    }

    #[test]
    fn infeasible_follower() {
        let mut inst = fixture_t1();
        // y ≤ x − 1 has no y ≥ 0 when x = 0
        inst.follower_h = vec![int(-1)];
        assert_eq!(eval_phi_direct(&inst, &[int(0)]), Err(Error::InfeasibleAt));
        assert_eq!(
            reaction_max(&inst, &[int(0)], &[int(1)]),
            Err(Error::InfeasibleAt)
        );
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(3, 1), 3);
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(0, 0), 1);
    }
}
