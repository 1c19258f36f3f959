//! Optimistic solver: one LP per value-function piece.
//!
//! For piece `i` the leader solves
//!
//! ```text
//! min c_l·x + d_l·y  s.t.  leader rows, follower rows, x, y ≥ 0,
//!                          d_f·y ≤ slope_i·x + offset_i
//! ```
//!
//! Since `piece_i ≤ φ` and `d_f·y ≥ φ(x)` on `Y(x)`, every feasible point has
//! `d_f·y = φ(x)`, and the union over pieces is exactly the optimistic
//! feasible region.

use crate::error::{Error, Result};
use crate::instance::{require_a1, BlpInstance};
use crate::linprog::{solve_lp, LpOutcome, LpProblem};
use crate::numeric::{lex_cmp, Rational};
use crate::solution::{Certificate, SolutionFile, SolveStats, SolveStatus};
use crate::valuefn::PwlConvexFunction;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Run even when A1 is not satisfied.
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimisticResult {
    pub status: SolveStatus,
    pub value: Option<Rational>,
    pub x: Vec<Rational>,
    pub y: Vec<Rational>,
    pub winning_piece: Option<usize>,
    pub lp_count: usize,
    pub note: Option<String>,
}

impl OptimisticResult {
    pub(crate) fn infeasible(lp_count: usize) -> Self {
        OptimisticResult {
            status: SolveStatus::Infeasible,
            value: None,
            x: Vec::new(),
            y: Vec::new(),
            winning_piece: None,
            lp_count,
            note: None,
        }
    }

    /// Solution file for this result; `pieces` is the number of value
    /// function pieces the method looked at.
    pub fn to_solution(&self, method: &str, pieces: usize) -> SolutionFile {
        let optimal = self.status == SolveStatus::Optimal;
        SolutionFile {
            status: self.status,
            value: self.value.clone(),
            x: self.x.clone(),
            y_witness: optimal.then(|| self.y.clone()),
            certificate: optimal.then(|| Certificate {
                method: method.to_string(),
                piece_index: self.winning_piece,
                cell_sign_vector: None,
                bases: Vec::new(),
            }),
            stats: SolveStats {
                lp_solves: self.lp_count,
                cells: 0,
                pieces,
            },
        }
    }
}

/// LP over `(x, y) ≥ 0` with every leader row and every follower row,
/// minimizing the leader objective.
pub(crate) fn joint_lp(inst: &BlpInstance) -> LpProblem {
    let mut objective = inst.cost_x.clone();
    objective.extend_from_slice(&inst.cost_y);
    let mut p = LpProblem::minimize(objective);
    let rows = (0..inst.m_l())
        .map(|i| {
            (
                inst.leader_a.row(i),
                inst.leader_g.row(i),
                &inst.leader_h[i],
            )
        })
        .chain((0..inst.m_f()).map(|i| {
            (
                inst.follower_a.row(i),
                inst.follower_g.row(i),
                &inst.follower_h[i],
            )
        }));
    for (a, g, h) in rows {
        let mut r = a.to_vec();
        r.extend_from_slice(g);
        p.add_le(r, h.clone()).expect("width n_l + n_f");
    }
    p
}

/// A candidate is better when its value is smaller, or equal with a
/// lexicographically smaller leader point.
pub(crate) fn improves(
    value: &Rational,
    x: &[Rational],
    best: Option<(&Rational, &[Rational])>,
) -> bool {
    match best {
        None => true,
        Some((bv, bx)) => value < bv || (value == bv && lex_cmp(x, bx).is_lt()),
    }
}

pub fn solve_optimistic(
    inst: &BlpInstance,
    pwl: &PwlConvexFunction,
    opts: &SolveOptions,
) -> Result<OptimisticResult> {
    require_a1(inst, opts.force)?;
    let (nl, nf) = (inst.n_l, inst.n_f);
    let base = joint_lp(inst);
    let mut best: Option<OptimisticResult> = None;
    let mut lp_count = 0;
    for (i, piece) in pwl.pieces.iter().enumerate() {
        let mut p = base.clone();
        let mut row: Vec<Rational> = piece.slope.iter().map(|v| -v).collect();
        row.extend_from_slice(&inst.follower_cost);
        p.add_le(row, piece.offset.clone())?;
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
                        winning_piece: Some(i),
                        lp_count: 0,
                        note: None,
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
