//! Exact two-phase simplex over rationals.
//!
//! Pivoting follows the least-index rule for both the entering and the
//! leaving variable, so the method never cycles and every input has exactly
//! one possible output. Every optimal outcome carries a dual vector whose
//! objective equals the primal objective; the equality is re-checked on
//! each solve and any violation is counted in a process-wide tally (see
//! [`duality_violations`]).

use std::cell::Cell;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numeric::{dot, Matrix, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    sense: ObjectiveSense,
    objective: Vec<Rational>,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    relations: Vec<Relation>,
    bounds: Vec<VarBound>,
}

impl LpProblem {
    /// An empty problem over `objective.len()` nonnegative variables.
    pub fn new(sense: ObjectiveSense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LpProblem {
            sense,
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
            relations: Vec::new(),
            bounds: vec![VarBound::NonNegative; n],
        }
    }

    pub fn minimize(objective: Vec<Rational>) -> Self {
        Self::new(ObjectiveSense::Minimize, objective)
    }

    pub fn maximize(objective: Vec<Rational>) -> Self {
        Self::new(ObjectiveSense::Maximize, objective)
    }

    /// Full constructor with shape validation.
    pub fn from_parts(
        sense: ObjectiveSense,
        objective: Vec<Rational>,
        matrix: &Matrix,
        rhs: Vec<Rational>,
        relations: Vec<Relation>,
        bounds: Vec<VarBound>,
    ) -> Result<Self> {
        let n = objective.len();
        if matrix.cols() != n {
            return Err(Error::dims(format!(
                "constraint matrix has {} columns but the objective has {n} entries",
                matrix.cols()
            )));
        }
        if rhs.len() != matrix.rows() || relations.len() != matrix.rows() {
            return Err(Error::dims(
                "rhs and relation counts must equal the row count",
            ));
        }
        if bounds.len() != n {
            return Err(Error::dims("one bound per variable is required"));
        }
        Ok(LpProblem {
            sense,
            objective,
            rows: matrix.row_vecs(),
            rhs,
            relations,
            bounds,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn sense(&self) -> ObjectiveSense {
        self.sense
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn row(&self, i: usize) -> (&[Rational], Relation, &Rational) {
        (&self.rows[i], self.relations[i], &self.rhs[i])
    }

    pub fn bound(&self, j: usize) -> VarBound {
        self.bounds[j]
    }

    pub fn set_free(&mut self, j: usize) {
        self.bounds[j] = VarBound::Free;
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, rel: Relation, rhs: Rational) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::dims(format!(
                "row {} has {} coefficients, expected {}",
                self.rows.len(),
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.rows.push(coeffs);
        self.relations.push(rel);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn add_le(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> Result<()> {
        self.add_row(coeffs, Relation::Le, rhs)
    }

    pub fn add_ge(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> Result<()> {
        self.add_row(coeffs, Relation::Ge, rhs)
    }

    pub fn add_eq(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> Result<()> {
        self.add_row(coeffs, Relation::Eq, rhs)
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    /// Exact primal feasibility of `x`.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let bounds_ok = self
            .bounds
            .iter()
            .zip(x)
            .all(|(b, v)| *b == VarBound::Free || !v.is_negative());
        bounds_ok
            && self.rows.iter().enumerate().all(|(i, row)| {
                let lhs = dot(row, x);
                match self.relations[i] {
                    Relation::Le => lhs <= self.rhs[i],
                    Relation::Eq => lhs == self.rhs[i],
                    Relation::Ge => lhs >= self.rhs[i],
                }
            })
    }

    /// Exact dual feasibility of row multipliers `u` for this problem, using
    /// the sign convention of [`LpSolution::dual`].
    pub fn is_dual_feasible(&self, u: &[Rational]) -> bool {
        if u.len() != self.num_rows() {
            return false;
        }
        // For a minimization, u ≤ 0 on ≤ rows and u ≥ 0 on ≥ rows; the
        // maximization convention is the mirror image.
        let flip = self.sense == ObjectiveSense::Maximize;
        let signs_ok = self.relations.iter().zip(u).all(|(rel, v)| {
            let v = if flip { -v.clone() } else { v.clone() };
            match rel {
                Relation::Le => !v.is_positive(),
                Relation::Ge => !v.is_negative(),
                Relation::Eq => true,
            }
        });
        signs_ok
            && (0..self.num_vars()).all(|j| {
                let col: Rational = self
                    .rows
                    .iter()
                    .zip(u)
                    .filter(|(r, _)| !r[j].is_zero())
                    .map(|(r, v)| &r[j] * v)
                    .sum();
                let reduced = &self.objective[j] - col;
                let reduced = if flip { -reduced } else { reduced };
                match self.bounds[j] {
                    VarBound::Free => reduced.is_zero(),
                    VarBound::NonNegative => !reduced.is_negative(),
                }
            })
    }

    pub fn dual_value(&self, u: &[Rational]) -> Rational {
        dot(&self.rhs, u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    pub primal: Vec<Rational>,
    /// Row multipliers with `rhs · dual == value`. For a minimization they
    /// are ≤ 0 on `≤` rows and ≥ 0 on `≥` rows; signs flip for a
    /// maximization.
    pub dual: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// `farkas` combines the rows into a contradiction: it has the sign
    /// pattern of a minimization dual, `farkas·A` is ≤ 0 on nonnegative
    /// columns and 0 on free ones, and `farkas·rhs > 0`.
    Infeasible {
        farkas: Vec<Rational>,
    },
    /// `point + s·ray` is feasible for all `s ≥ 0` and improves the
    /// objective without bound.
    Unbounded {
        point: Vec<Rational>,
        ray: Vec<Rational>,
    },
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible { .. })
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, LpOutcome::Unbounded { .. })
    }
}

static OPTIMAL_SOLVES: AtomicU64 = AtomicU64::new(0);
static DUALITY_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

thread_local! {
    static THREAD_SOLVES: Cell<u64> = const { Cell::new(0) };
}

/// Number of optimal outcomes produced in this process.
pub fn optimal_solves() -> u64 {
    OPTIMAL_SOLVES.load(Ordering::Relaxed)
}

/// Number of optimal outcomes whose primal and dual objectives differed.
pub fn duality_violations() -> u64 {
    DUALITY_VIOLATIONS.load(Ordering::Relaxed)
}

/// LP solves performed on the calling thread so far.
pub fn thread_solve_count() -> u64 {
    THREAD_SOLVES.with(Cell::get)
}

/// Solves `p` exactly.
pub fn solve_lp(p: &LpProblem) -> LpOutcome {
    THREAD_SOLVES.with(|c| c.set(c.get() + 1));
    let outcome = Simplex::new(p).run();
    if let LpOutcome::Optimal(sol) = &outcome {
        OPTIMAL_SOLVES.fetch_add(1, Ordering::Relaxed);
        if p.dual_value(&sol.dual) != sol.value {
            DUALITY_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
        }
    }
    outcome
}

/// Standard-form tableau `A x = b, x ≥ 0, b ≥ 0` with a unit column per row.
struct Simplex<'a> {
    problem: &'a LpProblem,
    /// Column of the positive (resp. negative) part of each original variable.
    pos_col: Vec<usize>,
    neg_col: Vec<Option<usize>>,
    /// Row sign applied to make the right-hand side nonnegative.
    row_sign: Vec<bool>,
    /// Column that was the unit vector of each row at the start.
    unit_col: Vec<usize>,
    is_artificial: Vec<bool>,
    ncols: usize,
    /// rows × (ncols + 1); the last entry is the right-hand side.
    tab: Vec<Vec<Rational>>,
    /// Reduced costs, with `-objective` in the last slot.
    obj: Vec<Rational>,
    basis: Vec<usize>,
}

enum Phase {
    Optimal,
    Unbounded(usize),
}

impl<'a> Simplex<'a> {
    fn new(p: &'a LpProblem) -> Self {
        let n = p.num_vars();
        let m = p.num_rows();
        let mut pos_col = Vec::with_capacity(n);
        let mut neg_col = Vec::with_capacity(n);
        let mut ncols = 0;
        for j in 0..n {
            pos_col.push(ncols);
            ncols += 1;
            if p.bounds[j] == VarBound::Free {
                neg_col.push(Some(ncols));
                ncols += 1;
            } else {
                neg_col.push(None);
            }
        }
        let mut slack_col = Vec::with_capacity(m);
        for rel in &p.relations {
            if *rel == Relation::Eq {
                slack_col.push(None);
            } else {
                slack_col.push(Some(ncols));
                ncols += 1;
            }
        }
        let row_sign: Vec<bool> = p.rhs.iter().map(|b| b.is_negative()).collect();
        let mut unit_col = vec![0; m];
        let mut n_art = 0;
        for i in 0..m {
            let slack_positive = match p.relations[i] {
                Relation::Le => !row_sign[i],
                Relation::Ge => row_sign[i],
                Relation::Eq => false,
            };
            if slack_positive {
                unit_col[i] = slack_col[i].expect("inequality row has a slack");
            } else {
                unit_col[i] = ncols + n_art;
                n_art += 1;
            }
        }
        let total = ncols + n_art;
        let mut is_artificial = vec![false; total];
        for flag in is_artificial.iter_mut().skip(ncols) {
            *flag = true;
        }
        let mut tab = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = vec![Rational::zero(); total + 1];
            for j in 0..n {
                let a = &p.rows[i][j];
                if a.is_zero() {
                    continue;
                }
                row[pos_col[j]] = a.clone();
                if let Some(c) = neg_col[j] {
                    row[c] = -a.clone();
                }
            }
            if let Some(c) = slack_col[i] {
                row[c] = if p.relations[i] == Relation::Le {
                    Rational::one()
                } else {
                    -Rational::one()
                };
            }
            row[total] = p.rhs[i].clone();
            if row_sign[i] {
                for v in row.iter_mut() {
                    if !v.is_zero() {
                        *v = -v.clone();
                    }
                }
            }
            if is_artificial[unit_col[i]] {
                row[unit_col[i]] = Rational::one();
            }
            tab.push(row);
        }
        Simplex {
            problem: p,
            pos_col,
            neg_col,
            row_sign,
            basis: unit_col.clone(),
            unit_col,
            is_artificial,
            ncols: total,
            tab,
            obj: vec![Rational::zero(); total + 1],
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.ncols + 1;
        let piv = self.tab[r][c].clone();
        if !piv.is_one() {
            for v in self.tab[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &piv;
                }
            }
        }
        let support: Vec<usize> = (0..w).filter(|&j| !self.tab[r][j].is_zero()).collect();
        let pivot_row = self.tab[r].clone();
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &support {
                row[j] -= &f * &pivot_row[j];
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &support {
                self.obj[j] -= &f * &pivot_row[j];
            }
        }
        self.basis[r] = c;
    }

    fn iterate(&mut self, allow_artificial: bool) -> Phase {
        let rhs = self.ncols;
        loop {
            let entering = (0..self.ncols).find(|&j| {
                (allow_artificial || !self.is_artificial[j]) && self.obj[j].is_negative()
            });
            let Some(c) = entering else {
                return Phase::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.tab.len() {
                let a = &self.tab[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.tab[i][rhs] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Phase::Unbounded(c),
            }
        }
    }

    fn set_costs(&mut self, costs: &[Rational]) {
        let w = self.ncols + 1;
        self.obj = costs.to_vec();
        self.obj.push(Rational::zero());
        for i in 0..self.tab.len() {
            let cb = costs[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..w {
                if !self.tab[i][j].is_zero() {
                    let d = &cb * &self.tab[i][j];
                    self.obj[j] -= d;
                }
            }
        }
    }

    /// Row multipliers `c_B B⁻¹` of the standardized rows, read off the
    /// reduced costs of the initial unit columns.
    fn standard_duals(&self, costs: &[Rational]) -> Vec<Rational> {
        self.unit_col
            .iter()
            .map(|&c| &costs[c] - &self.obj[c])
            .collect()
    }

    fn std_point(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            v[b] = self.tab[i][self.ncols].clone();
        }
        v
    }

    fn to_original(&self, std: &[Rational]) -> Vec<Rational> {
        (0..self.problem.num_vars())
            .map(|j| {
                let p = std[self.pos_col[j]].clone();
                match self.neg_col[j] {
                    Some(c) => p - &std[c],
                    None => p,
                }
            })
            .collect()
    }

    fn unsign(&self, y: Vec<Rational>) -> Vec<Rational> {
        y.into_iter()
            .zip(&self.row_sign)
            .map(|(v, &flip)| if flip { -v } else { v })
            .collect()
    }

    fn run(mut self) -> LpOutcome {
        let p = self.problem;
        let m = self.tab.len();

        // Phase 1: minimize the sum of artificial variables.
        if self.is_artificial.iter().any(|&a| a) {
            let phase1: Vec<Rational> = self
                .is_artificial
                .iter()
                .map(|&a| if a { Rational::one() } else { Rational::zero() })
                .collect();
            self.set_costs(&phase1);
            match self.iterate(true) {
                Phase::Optimal => {}
                Phase::Unbounded(_) => unreachable!("phase one is bounded below by zero"),
            }
            let infeasibility = -self.obj[self.ncols].clone();
            if infeasibility.is_positive() {
                let y = self.standard_duals(&phase1);
                return LpOutcome::Infeasible {
                    farkas: self.unsign(y),
                };
            }
            for r in 0..m {
                if !self.is_artificial[self.basis[r]] {
                    continue;
                }
                if let Some(c) =
                    (0..self.ncols).find(|&j| !self.is_artificial[j] && !self.tab[r][j].is_zero())
                {
                    self.pivot(r, c);
                }
            }
        }

        // Phase 2 works on the minimization form.
        let maximize = p.sense == ObjectiveSense::Maximize;
        let mut costs = vec![Rational::zero(); self.ncols];
        for j in 0..p.num_vars() {
            let c = if maximize {
                -p.objective[j].clone()
            } else {
                p.objective[j].clone()
            };
            if let Some(nc) = self.neg_col[j] {
                costs[nc] = -c.clone();
            }
            costs[self.pos_col[j]] = c;
        }
        self.set_costs(&costs);
        match self.iterate(false) {
            Phase::Unbounded(c) => {
                let point = self.to_original(&self.std_point());
                let mut dir = vec![Rational::zero(); self.ncols];
                dir[c] = Rational::one();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.tab[i][c].is_zero() {
                        dir[b] = -self.tab[i][c].clone();
                    }
                }
                LpOutcome::Unbounded {
                    point,
                    ray: self.to_original(&dir),
                }
            }
            Phase::Optimal => {
                let primal = self.to_original(&self.std_point());
                let mut dual = self.unsign(self.standard_duals(&costs));
                if maximize {
                    for v in dual.iter_mut() {
                        *v = -v.clone();
                    }
                }
                LpOutcome::Optimal(LpSolution {
                    value: p.objective_value(&primal),
                    primal,
                    dual,
                })
            }
        }
    }
}

/// True when the closed polyhedron described by `p`'s rows is nonempty.
pub fn is_feasible(p: &LpProblem) -> bool {
    let mut q = p.clone();
    q.objective = vec![Rational::zero(); p.num_vars()];
    q.sense = ObjectiveSense::Minimize;
    !solve_lp(&q).is_infeasible()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{frac, int};

    fn check_certificates(p: &LpProblem, out: &LpOutcome) {
        match out {
            LpOutcome::Optimal(s) => {
                assert!(p.is_feasible(&s.primal));
                assert!(p.is_dual_feasible(&s.dual));
                assert_eq!(p.dual_value(&s.dual), s.value);
            }
            LpOutcome::Infeasible { farkas } => {
                let mut as_min = p.clone();
                as_min.sense = ObjectiveSense::Minimize;
                as_min.objective = vec![Rational::zero(); p.num_vars()];
                assert!(as_min.is_dual_feasible(farkas));
                assert!(p.dual_value(farkas).is_positive());
            }
            LpOutcome::Unbounded { point, ray } => {
                assert!(p.is_feasible(point));
                let moved: Vec<Rational> =
                    point.iter().zip(ray).map(|(a, b)| a + b * int(7)).collect();
                assert!(p.is_feasible(&moved));
                let gain = dot(&p.objective, ray);
                match p.sense {
                    ObjectiveSense::Minimize => assert!(gain.is_negative()),
                    ObjectiveSense::Maximize => assert!(gain.is_positive()),
                }
            }
        }
    }

    #[test]
    fn simple_min() {
        let mut p = LpProblem::minimize(vec![int(-1), int(-1)]);
        p.add_le(vec![int(1), int(1)], int(1)).unwrap();
        let out = solve_lp(&p);
        check_certificates(&p, &out);
        assert_eq!(out.optimal().unwrap().value, int(-1));
    }

    #[test]
    fn infeasible_row() {
        let mut p = LpProblem::minimize(vec![int(0)]);
        p.add_le(vec![int(1)], int(-1)).unwrap();
        let out = solve_lp(&p);
        assert!(out.is_infeasible());
        check_certificates(&p, &out);
    }

    #[test]
    fn dual_of_follower_value_function() {
        // max -x·λ s.t. -λ ≤ -1, λ ≥ 0 at x = 1/2.
        let x = frac(1, 2);
        let mut p = LpProblem::maximize(vec![-x]);
        p.add_le(vec![int(-1)], int(-1)).unwrap();
        let out = solve_lp(&p);
        check_certificates(&p, &out);
        let s = out.optimal().unwrap();
        assert_eq!(s.value, frac(-1, 2));
        assert_eq!(s.primal, vec![int(1)]);

        // Primal side: min -y s.t. y ≤ 1/2, y ≥ 0.
        let mut q = LpProblem::minimize(vec![int(-1)]);
        q.add_le(vec![int(1)], frac(1, 2)).unwrap();
        assert_eq!(solve_lp(&q).optimal().unwrap().value, frac(-1, 2));
    }

    #[test]
    fn unbounded_with_ray() {
        let mut p = LpProblem::maximize(vec![int(1), int(0)]);
        p.add_le(vec![int(1), int(-1)], int(1)).unwrap();
        let out = solve_lp(&p);
        assert!(out.is_unbounded());
        check_certificates(&p, &out);
    }

    #[test]
    fn unbounded_region_finite_objective() {
        // y free region but objective bounded: max -y1 s.t. y1 - y2 ≥ 0.
        let mut p = LpProblem::maximize(vec![int(-1), int(0)]);
        p.add_ge(vec![int(1), int(-1)], int(0)).unwrap();
        let out = solve_lp(&p);
        check_certificates(&p, &out);
        assert_eq!(out.optimal().unwrap().value, int(0));
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x1 + 2 x2, x1 free, x1 + x2 = 3, x1 - x2 ≥ -5, x2 ≤ 10
        let mut p = LpProblem::minimize(vec![int(1), int(2)]);
        p.set_free(0);
        p.add_eq(vec![int(1), int(1)], int(3)).unwrap();
        p.add_ge(vec![int(1), int(-1)], int(-5)).unwrap();
        p.add_le(vec![int(0), int(1)], int(10)).unwrap();
        let out = solve_lp(&p);
        check_certificates(&p, &out);
        let s = out.optimal().unwrap();
        assert_eq!(s.primal, vec![int(3), int(0)]);
        assert_eq!(s.value, int(3));
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LpProblem::minimize(vec![int(1), int(1)]);
        p.add_eq(vec![int(1), int(1)], int(2)).unwrap();
        p.add_eq(vec![int(2), int(2)], int(4)).unwrap();
        p.add_ge(vec![int(1), int(0)], frac(1, 2)).unwrap();
        let out = solve_lp(&p);
        check_certificates(&p, &out);
        assert_eq!(out.optimal().unwrap().value, int(2));
    }

    #[test]
    fn free_infeasible_certificate() {
        let mut p = LpProblem::minimize(vec![int(0), int(0)]);
        p.set_free(0);
        p.set_free(1);
        p.add_ge(vec![int(1), int(1)], int(2)).unwrap();
        p.add_le(vec![int(1), int(1)], int(1)).unwrap();
        let out = solve_lp(&p);
        assert!(out.is_infeasible());
        check_certificates(&p, &out);
    }

    #[test]
    fn wrong_arity_row_is_rejected() {
        let mut p = LpProblem::minimize(vec![int(1), int(1)]);
        assert!(matches!(
            p.add_le(vec![int(1)], int(0)),
            Err(Error::DimensionMismatch(_))
        ));
        let m = Matrix::from_i64(&[&[1, 2, 3]]);
        assert!(LpProblem::from_parts(
            ObjectiveSense::Minimize,
            vec![int(1), int(1)],
            &m,
            vec![int(0)],
            vec![Relation::Le],
            vec![VarBound::NonNegative; 2],
        )
        .is_err());
    }

    #[test]
    fn degenerate_cycling_candidate_terminates() {
        // Beale's classic cycling example under the textbook rule.
        let mut p = LpProblem::minimize(vec![frac(-3, 4), int(150), frac(-1, 50), int(6)]);
        p.add_le(vec![frac(1, 4), int(-60), frac(-1, 25), int(9)], int(0))
            .unwrap();
        p.add_le(vec![frac(1, 2), int(-90), frac(-1, 50), int(3)], int(0))
            .unwrap();
        p.add_le(vec![int(0), int(0), int(1), int(0)], int(1))
            .unwrap();
        let out = solve_lp(&p);
        check_certificates(&p, &out);
        assert_eq!(out.optimal().unwrap().value, frac(-1, 20));
    }
}
