//! Polyhedra in fixed dimension: vertex enumeration, candidate bases and
//! cells of hyperplane arrangements.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linprog::{solve_lp, LpProblem};
use crate::numeric::{dot, solve_square_system, unit, Matrix, Rational};

/// `{x : A x ≤ b, x_j ≥ 0 for every flagged j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HPolyhedron {
    a: Matrix,
    b: Vec<Rational>,
    nonneg: Vec<bool>,
}

impl HPolyhedron {
    pub fn new(a: Matrix, b: Vec<Rational>, nonneg: Vec<bool>) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::dims(format!(
                "polyhedron has {} rows but {} right-hand sides",
                a.rows(),
                b.len()
            )));
        }
        if nonneg.len() != a.cols() {
            return Err(Error::dims("one nonnegativity flag per variable"));
        }
        Ok(HPolyhedron { a, b, nonneg })
    }

    /// Axis-aligned box `lower ≤ x ≤ upper` with free variables.
    pub fn boxed(lower: &[Rational], upper: &[Rational]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::dims("box bounds differ in length"));
        }
        let n = lower.len();
        let mut rows = Vec::with_capacity(2 * n);
        let mut rhs = Vec::with_capacity(2 * n);
        for i in 0..n {
            rows.push(unit(n, i));
            rhs.push(upper[i].clone());
            rows.push(unit(n, i).into_iter().map(|v| -v).collect());
            rhs.push(-lower[i].clone());
        }
        HPolyhedron::new(Matrix::from_rows(n, rows)?, rhs, vec![false; n])
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.b
    }

    pub fn nonneg(&self) -> &[bool] {
        &self.nonneg
    }

    /// Every inequality `a·x ≤ b`, explicit rows first, then `-x_j ≤ 0` for
    /// the flagged variables in index order.
    pub fn constraint_rows(&self) -> Vec<(Vec<Rational>, Rational)> {
        let n = self.dim();
        let mut out: Vec<(Vec<Rational>, Rational)> = (0..self.a.rows())
            .map(|i| (self.a.row(i).to_vec(), self.b[i].clone()))
            .collect();
        for j in (0..n).filter(|&j| self.nonneg[j]) {
            let mut r = vec![Rational::zero(); n];
            r[j] = -Rational::one();
            out.push((r, Rational::zero()));
        }
        out
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim() && self.constraint_rows().iter().all(|(a, b)| dot(a, x) <= *b)
    }

    /// Appends the rows of `other` (same dimension), keeping the union of
    /// nonnegativity flags.
    pub fn intersect(&self, other: &HPolyhedron) -> Result<HPolyhedron> {
        if self.dim() != other.dim() {
            return Err(Error::dims("intersecting polyhedra of different dimension"));
        }
        let mut rows = self.a.row_vecs();
        rows.extend(other.a.row_vecs());
        let mut b = self.b.clone();
        b.extend(other.b.iter().cloned());
        let nonneg = self
            .nonneg
            .iter()
            .zip(&other.nonneg)
            .map(|(a, b)| *a || *b)
            .collect();
        HPolyhedron::new(Matrix::from_rows(self.dim(), rows)?, b, nonneg)
    }

    /// LP over this polyhedron with the given objective; variables are
    /// free unless flagged.
    pub fn lp(&self, maximize: bool, objective: Vec<Rational>) -> LpProblem {
        let mut p = if maximize {
            LpProblem::maximize(objective)
        } else {
            LpProblem::minimize(objective)
        };
        for j in 0..self.dim() {
            if !self.nonneg[j] {
                p.set_free(j);
            }
        }
        for i in 0..self.a.rows() {
            p.add_le(self.a.row(i).to_vec(), self.b[i].clone())
                .expect("row width equals dimension");
        }
        p
    }

    pub fn is_empty(&self) -> bool {
        solve_lp(&self.lp(false, vec![Rational::zero(); self.dim()])).is_infeasible()
    }
}

/// All extreme points of `p`, each once, in lexicographic order.
///
/// Every `dim`-subset of the constraint rows is tried as an active set; a
/// nonsingular subset whose solution satisfies the remaining rows is a
/// vertex.
pub fn enumerate_vertices(p: &HPolyhedron) -> Vec<Vec<Rational>> {
    let n = p.dim();
    let rows = p.constraint_rows();
    let mut found = BTreeSet::new();
    for subset in (0..rows.len()).combinations(n) {
        let m = Matrix::from_rows(n, subset.iter().map(|&i| rows[i].0.clone()).collect())
            .expect("rows have the ambient width");
        let r: Vec<Rational> = subset.iter().map(|&i| rows[i].1.clone()).collect();
        let Ok(v) = solve_square_system(&m, &r) else {
            continue;
        };
        if rows.iter().all(|(a, b)| dot(a, &v) <= *b) {
            found.insert(v);
        }
    }
    found.into_iter().collect()
}

/// An active set of `dim` constraints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis {
    pub indices: Vec<usize>,
    pub required_index: Option<usize>,
}

/// Every `dim`-subset of `constraints` that contains `required` (when set)
/// and whose stacked rows form a nonsingular matrix, lexicographically.
pub fn enumerate_candidate_bases(
    constraints: &[Vec<Rational>],
    dim: usize,
    required: Option<usize>,
) -> Result<Vec<Basis>> {
    if let Some(r) = required {
        if r >= constraints.len() {
            return Err(Error::dims(format!(
                "required index {r} out of range for {} constraints",
                constraints.len()
            )));
        }
        if dim == 0 {
            return Ok(Vec::new());
        }
    }
    if constraints.iter().any(|c| c.len() != dim) {
        return Err(Error::dims("constraint rows must have the ambient width"));
    }
    let others: Vec<usize> = (0..constraints.len())
        .filter(|&i| Some(i) != required)
        .collect();
    let pick = dim - usize::from(required.is_some());
    let mut out = Vec::new();
    for combo in others.into_iter().combinations(pick) {
        let mut idx = combo;
        if let Some(r) = required {
            idx.push(r);
            idx.sort_unstable();
        }
        let m = Matrix::from_rows(dim, idx.iter().map(|&i| constraints[i].clone()).collect())?;
        if !m.determinant()?.is_zero() {
            out.push(Basis {
                indices: idx,
                required_index: required,
            });
        }
    }
    out.sort();
    Ok(out)
}

/// `{z : normal·z = offset}` with the first nonzero normal entry scaled to 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperplane {
    normal: Vec<Rational>,
    offset: Rational,
}

impl Hyperplane {
    /// `None` when the normal vector is zero.
    pub fn new(normal: Vec<Rational>, offset: Rational) -> Option<Self> {
        let lead = normal.iter().find(|v| !v.is_zero())?.clone();
        let normal = normal.iter().map(|v| v / &lead).collect();
        Some(Hyperplane {
            normal,
            offset: offset / lead,
        })
    }

    pub fn normal(&self) -> &[Rational] {
        &self.normal
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    /// `normal·z − offset`.
    pub fn eval(&self, z: &[Rational]) -> Rational {
        dot(&self.normal, z) - &self.offset
    }

    pub fn side(&self, z: &[Rational]) -> Sign {
        Sign::of(&self.eval(z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Zero,
    Plus,
}

impl Sign {
    pub fn of(v: &Rational) -> Sign {
        if v.is_negative() {
            Sign::Minus
        } else if v.is_positive() {
            Sign::Plus
        } else {
            Sign::Zero
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Zero => '0',
            Sign::Plus => '+',
        }
    }
}

pub fn sign_string(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.symbol()).collect()
}

/// A relatively open region of an arrangement restricted to a box.
///
/// Full-dimensional cells have only `Minus`/`Plus` signs; faces returned by
/// [`enumerate_faces`] may carry `Zero`.
#[derive(Clone, PartialEq, Eq)]
pub struct ArrangementCell {
    pub sign_vector: Vec<Sign>,
    pub interior_point: Vec<Rational>,
    pub closure: HPolyhedron,
}

impl fmt::Debug for ArrangementCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArrangementCell")
            .field("sign_vector", &sign_string(&self.sign_vector))
            .field(
                "interior_point",
                &crate::numeric::format_vec(&self.interior_point),
            )
            .finish()
    }
}

/// Canonical, duplicate-free, sorted copy of `hs`. Cell sign vectors refer
/// to this order.
pub fn dedup_hyperplanes(hs: &[Hyperplane]) -> Vec<Hyperplane> {
    hs.iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub fn cell_contains(cell: &ArrangementCell, point: &[Rational]) -> bool {
    cell.closure.contains(point)
}

/// Full-dimensional cells of the arrangement of `hs` inside `bounding_box`.
///
/// Sign vectors are taken with respect to [`dedup_hyperplanes`]`(hs)` and the
/// result is sorted by sign vector (`-` before `+`).
pub fn enumerate_cells(
    hs: &[Hyperplane],
    dim: usize,
    bounding_box: &HPolyhedron,
) -> Result<Vec<ArrangementCell>> {
    Arrangement::new(hs, dim, bounding_box)?.search(false)
}

/// Every relatively open face (cells included) of the arrangement inside
/// the box, sorted by sign vector.
pub fn enumerate_faces(
    hs: &[Hyperplane],
    dim: usize,
    bounding_box: &HPolyhedron,
) -> Result<Vec<ArrangementCell>> {
    Arrangement::new(hs, dim, bounding_box)?.search(true)
}

struct Arrangement<'a> {
    hs: Vec<Hyperplane>,
    dim: usize,
    bbox: &'a HPolyhedron,
    box_rows: Vec<(Vec<Rational>, Rational)>,
}

impl<'a> Arrangement<'a> {
    fn new(hs: &[Hyperplane], dim: usize, bbox: &'a HPolyhedron) -> Result<Self> {
        if bbox.dim() != dim || hs.iter().any(|h| h.normal.len() != dim) {
            return Err(Error::dims(
                "arrangement objects must share the ambient dimension",
            ));
        }
        Ok(Arrangement {
            hs: dedup_hyperplanes(hs),
            dim,
            bbox,
            box_rows: bbox.constraint_rows(),
        })
    }

    /// A point strictly inside the box and strictly on the prescribed side
    /// of every decided hyperplane (exactly on it for `Zero`), found by
    /// maximizing a common slack ε.
    fn relative_interior(&self, signs: &[Sign]) -> Option<Vec<Rational>> {
        let n = self.dim;
        let mut obj = vec![Rational::zero(); n + 1];
        obj[n] = Rational::one();
        let mut lp = LpProblem::maximize(obj);
        for j in 0..n {
            lp.set_free(j);
        }
        let with_eps = |a: &[Rational]| {
            let mut r = a.to_vec();
            r.push(Rational::one());
            r
        };
        for (h, s) in self.hs.iter().zip(signs) {
            match s {
                Sign::Minus => lp.add_le(with_eps(&h.normal), h.offset.clone()),
                Sign::Plus => {
                    let neg: Vec<Rational> = h.normal.iter().map(|v| -v).collect();
                    lp.add_le(with_eps(&neg), -h.offset.clone())
                }
                Sign::Zero => {
                    let mut r = h.normal.clone();
                    r.push(Rational::zero());
                    lp.add_eq(r, h.offset.clone())
                }
            }
            .expect("width checked");
        }
        for (a, b) in &self.box_rows {
            lp.add_le(with_eps(a), b.clone()).expect("width checked");
        }
        lp.add_le(unit(n + 1, n), Rational::one())
            .expect("width checked");
        let sol = solve_lp(&lp).into_optimal()?;
        if sol.value.is_positive() {
            let mut z = sol.primal;
            z.truncate(n);
            Some(z)
        } else {
            None
        }
    }

    fn closure(&self, signs: &[Sign]) -> HPolyhedron {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (h, s) in self.hs.iter().zip(signs) {
            let neg: Vec<Rational> = h.normal.iter().map(|v| -v).collect();
            if matches!(s, Sign::Minus | Sign::Zero) {
                rows.push(h.normal.clone());
                rhs.push(h.offset.clone());
            }
            if matches!(s, Sign::Plus | Sign::Zero) {
                rows.push(neg);
                rhs.push(-h.offset.clone());
            }
        }
        for (a, b) in self.bbox.constraint_rows() {
            rows.push(a);
            rhs.push(b);
        }
        HPolyhedron::new(
            Matrix::from_rows(self.dim, rows).expect("width checked"),
            rhs,
            vec![false; self.dim],
        )
        .expect("shape checked")
    }

    fn search(&self, faces: bool) -> Result<Vec<ArrangementCell>> {
        let mut out = Vec::new();
        if let Some(p) = self.relative_interior(&[]) {
            let mut signs = Vec::with_capacity(self.hs.len());
            self.descend(faces, &mut signs, p, &mut out);
        }
        out.sort_by(|a, b| a.sign_vector.cmp(&b.sign_vector));
        Ok(out)
    }

    fn descend(
        &self,
        faces: bool,
        signs: &mut Vec<Sign>,
        point: Vec<Rational>,
        out: &mut Vec<ArrangementCell>,
    ) {
        let depth = signs.len();
        if depth == self.hs.len() {
            out.push(ArrangementCell {
                sign_vector: signs.clone(),
                interior_point: point,
                closure: self.closure(signs),
            });
            return;
        }
        let here = self.hs[depth].side(&point);
        let choices: &[Sign] = if faces {
            &[Sign::Minus, Sign::Zero, Sign::Plus]
        } else {
            &[Sign::Minus, Sign::Plus]
        };
        for &s in choices {
            signs.push(s);
            let next = if s == here {
                Some(point.clone())
            } else {
                self.relative_interior(signs)
            };
            if let Some(p) = next {
                self.descend(faces, signs, p, out);
            }
            signs.pop();
        }
    }
}
