//! Bilevel instance data, coupling-row partition, A1 validation and the
//! JSON instance format.
//!
//! An instance is
//!
//! ```text
//! min_x  c_l·x + d_l·y*
//!   s.t. x ≥ 0,  A_l x + G_l y* ≤ h_l
//!        y* ∈ argmin { d_f·y : y ≥ 0, A_f x + G_f y ≤ h_f }
//! ```
//!
//! together with a tie-breaking sense (optimistic or pessimistic).

use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{enumerate_vertices, HPolyhedron};
use crate::linprog::{solve_lp, LpOutcome, LpProblem};
use crate::numeric::{dot, format_rational, frac, int, parse_rational, Matrix, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Optimistic,
    Pessimistic,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Optimistic => "optimistic",
            Sense::Pessimistic => "pessimistic",
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlpInstance {
    pub name: String,
    pub sense: Sense,
    pub n_l: usize,
    pub n_f: usize,
    pub leader_a: Matrix,
    pub leader_g: Matrix,
    pub leader_h: Vec<Rational>,
    pub cost_x: Vec<Rational>,
    pub cost_y: Vec<Rational>,
    pub follower_a: Matrix,
    pub follower_g: Matrix,
    pub follower_h: Vec<Rational>,
    pub follower_cost: Vec<Rational>,
}

/// Leader and follower rows, as plain data, used to build an instance.
#[derive(Debug, Clone)]
pub struct InstanceParts {
    pub name: String,
    pub sense: Sense,
    pub n_l: usize,
    pub n_f: usize,
    pub leader_a: Vec<Vec<Rational>>,
    pub leader_g: Vec<Vec<Rational>>,
    pub leader_h: Vec<Rational>,
    pub cost_x: Vec<Rational>,
    pub cost_y: Vec<Rational>,
    pub follower_a: Vec<Vec<Rational>>,
    pub follower_g: Vec<Vec<Rational>>,
    pub follower_h: Vec<Rational>,
    pub follower_cost: Vec<Rational>,
}

impl BlpInstance {
    pub fn new(parts: InstanceParts) -> Result<Self> {
        let inst = BlpInstance {
            name: parts.name,
            sense: parts.sense,
            n_l: parts.n_l,
            n_f: parts.n_f,
            leader_a: Matrix::from_rows(parts.n_l, parts.leader_a)?,
            leader_g: Matrix::from_rows(parts.n_f, parts.leader_g)?,
            leader_h: parts.leader_h,
            cost_x: parts.cost_x,
            cost_y: parts.cost_y,
            follower_a: Matrix::from_rows(parts.n_l, parts.follower_a)?,
            follower_g: Matrix::from_rows(parts.n_f, parts.follower_g)?,
            follower_h: parts.follower_h,
            follower_cost: parts.follower_cost,
        };
        inst.check_dims()?;
        Ok(inst)
    }

    pub fn check_dims(&self) -> Result<()> {
        let ml = self.leader_a.rows();
        let mf = self.follower_a.rows();
        let checks = [
            (self.leader_a.cols() == self.n_l, "leader A width"),
            (self.leader_g.cols() == self.n_f, "leader G width"),
            (self.leader_g.rows() == ml, "leader G row count"),
            (self.leader_h.len() == ml, "leader h length"),
            (self.cost_x.len() == self.n_l, "leader cost_x length"),
            (self.cost_y.len() == self.n_f, "leader cost_y length"),
            (self.follower_a.cols() == self.n_l, "follower A width"),
            (self.follower_g.cols() == self.n_f, "follower G width"),
            (self.follower_g.rows() == mf, "follower G row count"),
            (self.follower_h.len() == mf, "follower h length"),
            (self.follower_cost.len() == self.n_f, "follower cost length"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::dims(format!("inconsistent {what}")));
            }
        }
        Ok(())
    }

    pub fn m_l(&self) -> usize {
        self.leader_a.rows()
    }

    pub fn m_f(&self) -> usize {
        self.follower_a.rows()
    }

    /// `h_f − A_f x`.
    pub fn follower_rhs(&self, x: &[Rational]) -> Vec<Rational> {
        let ax = self.follower_a.mul_vec(x).expect("x has n_l entries");
        self.follower_h.iter().zip(ax).map(|(h, a)| h - a).collect()
    }

    /// `{x ≥ 0 : Ã_l x ≤ h̃_l}` built from the rows without follower terms.
    pub fn leader_polyhedron(&self) -> HPolyhedron {
        let view = coupling_view(self);
        let rows = view
            .pure_rows
            .iter()
            .map(|&i| self.leader_a.row(i).to_vec())
            .collect();
        let rhs = view
            .pure_rows
            .iter()
            .map(|&i| self.leader_h[i].clone())
            .collect();
        HPolyhedron::new(
            Matrix::from_rows(self.n_l, rows).expect("leader rows have width n_l"),
            rhs,
            vec![true; self.n_l],
        )
        .expect("shape consistent")
    }

    /// LP over `Y(x)` (variables `y ≥ 0`) with the given sense and objective.
    pub fn follower_lp(
        &self,
        x: &[Rational],
        maximize: bool,
        objective: Vec<Rational>,
    ) -> LpProblem {
        let mut p = if maximize {
            LpProblem::maximize(objective)
        } else {
            LpProblem::minimize(objective)
        };
        let rhs = self.follower_rhs(x);
        for (i, r) in rhs.into_iter().enumerate() {
            p.add_le(self.follower_g.row(i).to_vec(), r)
                .expect("follower rows have width n_f");
        }
        p
    }

    /// Joint LP over `(x, y) ≥ 0` with the pure leader rows and the follower
    /// rows (the high-point relaxation without coupling rows).
    pub fn high_point_lp(&self, maximize: bool, objective: Vec<Rational>) -> LpProblem {
        let (nl, nf) = (self.n_l, self.n_f);
        let mut p = if maximize {
            LpProblem::maximize(objective)
        } else {
            LpProblem::minimize(objective)
        };
        for i in coupling_view(self).pure_rows {
            let mut r = self.leader_a.row(i).to_vec();
            r.extend(std::iter::repeat_n(Rational::zero(), nf));
            p.add_le(r, self.leader_h[i].clone())
                .expect("width n_l + n_f");
        }
        for i in 0..self.m_f() {
            let mut r = self.follower_a.row(i).to_vec();
            r.extend_from_slice(self.follower_g.row(i));
            p.add_le(r, self.follower_h[i].clone())
                .expect("width n_l + n_f");
        }
        debug_assert_eq!(p.num_vars(), nl + nf);
        p
    }

    /// All leader rows (coupling included) at the pair `(x, y)`.
    pub fn leader_rows_hold(&self, x: &[Rational], y: &[Rational]) -> bool {
        (0..self.m_l()).all(|i| {
            dot(self.leader_a.row(i), x) + dot(self.leader_g.row(i), y) <= self.leader_h[i]
        })
    }

    pub fn follower_feasible(&self, x: &[Rational], y: &[Rational]) -> bool {
        y.iter().all(|v| !v.is_negative())
            && self
                .follower_rhs(x)
                .iter()
                .enumerate()
                .all(|(i, r)| dot(self.follower_g.row(i), y) <= *r)
    }

    pub fn leader_objective(&self, x: &[Rational], y: &[Rational]) -> Rational {
        dot(&self.cost_x, x) + dot(&self.cost_y, y)
    }
}

/// Partition of the leader rows by whether they involve the follower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingView {
    pub pure_rows: Vec<usize>,
    pub coupling_rows: Vec<usize>,
}

pub struct CouplingRow<'a> {
    pub a: &'a [Rational],
    pub g: &'a [Rational],
    pub h: &'a Rational,
}

impl CouplingView {
    pub fn row<'a>(&self, inst: &'a BlpInstance, k: usize) -> CouplingRow<'a> {
        let i = self.coupling_rows[k];
        CouplingRow {
            a: inst.leader_a.row(i),
            g: inst.leader_g.row(i),
            h: &inst.leader_h[i],
        }
    }
}

pub fn coupling_view(inst: &BlpInstance) -> CouplingView {
    let (coupling_rows, pure_rows) =
        (0..inst.m_l()).partition(|&i| inst.leader_g.row(i).iter().any(|v| !v.is_zero()));
    CouplingView {
        pure_rows,
        coupling_rows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A1Status {
    Satisfied,
    /// Only boundedness fails.
    Relaxed,
    /// A feasible set is empty.
    Violated,
}

impl A1Status {
    pub fn as_str(self) -> &'static str {
        match self {
            A1Status::Satisfied => "satisfied",
            A1Status::Relaxed => "relaxed",
            A1Status::Violated => "violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub leader_set_nonempty: bool,
    pub leader_set_bounded: bool,
    pub follower_recession_trivial: bool,
    pub follower_nonempty_on_leader_vertices: bool,
    pub a1_status: A1Status,
    pub notes: Vec<String>,
}

/// Checks A1 on `X̃` (the leader rows without follower terms).
///
/// Follower nonemptiness is checked at the vertices of `X̃` only: the set of
/// leader decisions with `Y(x) ≠ ∅` is a projection of a polyhedron, hence
/// convex, so it contains the bounded polytope `X̃` once it contains its
/// vertices.
pub fn validate_a1(inst: &BlpInstance) -> ValidationReport {
    let mut notes = Vec::new();
    let leader = inst.leader_polyhedron();
    let leader_set_nonempty = !leader.is_empty();
    if !leader_set_nonempty {
        notes.push("leader set X̃ is empty".to_string());
    }

    let mut leader_set_bounded = true;
    if leader_set_nonempty {
        for j in 0..inst.n_l {
            let mut obj = vec![Rational::zero(); inst.n_l];
            obj[j] = int(1);
            if solve_lp(&leader.lp(true, obj)).is_unbounded() {
                leader_set_bounded = false;
                notes.push(format!("leader variable x{j} is unbounded on X̃"));
            }
        }
    }

    let follower_recession_trivial = {
        let mut p = LpProblem::maximize(vec![int(1); inst.n_f]);
        for i in 0..inst.m_f() {
            p.add_le(inst.follower_g.row(i).to_vec(), Rational::zero())
                .expect("width n_f");
        }
        p.add_le(vec![int(1); inst.n_f], int(1)).expect("width n_f");
        match solve_lp(&p) {
            LpOutcome::Optimal(s) => s.value.is_zero(),
            _ => false,
        }
    };
    if !follower_recession_trivial {
        notes.push("follower set has a recession direction: Y(x) is unbounded".to_string());
    }

    let mut follower_nonempty_on_leader_vertices = leader_set_nonempty;
    if leader_set_nonempty {
        let vertices = enumerate_vertices(&leader);
        if vertices.is_empty() {
            follower_nonempty_on_leader_vertices = false;
            notes.push("X̃ has no vertex".to_string());
        }
        for v in &vertices {
            let p = inst.follower_lp(v, false, vec![Rational::zero(); inst.n_f]);
            if solve_lp(&p).is_infeasible() {
                follower_nonempty_on_leader_vertices = false;
                notes.push(format!(
                    "Y(x) is empty at leader vertex ({})",
                    crate::numeric::format_vec(v)
                ));
                break;
            }
        }
        if !leader_set_bounded {
            notes.push("follower nonemptiness checked at vertices of an unbounded X̃ only".into());
        }
    }

    let a1_status = if !leader_set_nonempty || !follower_nonempty_on_leader_vertices {
        A1Status::Violated
    } else if leader_set_bounded && follower_recession_trivial {
        A1Status::Satisfied
    } else {
        A1Status::Relaxed
    };
    ValidationReport {
        leader_set_nonempty,
        leader_set_bounded,
        follower_recession_trivial,
        follower_nonempty_on_leader_vertices,
        a1_status,
        notes,
    }
}

pub(crate) fn require_a1(inst: &BlpInstance, force: bool) -> Result<()> {
    if force {
        return Ok(());
    }
    let report = validate_a1(inst);
    if report.a1_status != A1Status::Satisfied {
        return Err(Error::RelaxedA1Refused(report.a1_status.as_str().into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON format

pub fn rational_to_json(r: &Rational) -> Value {
    if r.is_integer() {
        if let Ok(v) = i64::try_from(r.numer().clone()) {
            return json!(v);
        }
    }
    Value::String(format_rational(r))
}

pub fn rational_from_json(v: &Value, location: &str) -> Result<Rational> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(int(i)),
            None => Err(Error::parse(location, format!("{n} is not an integer"))),
        },
        Value::String(s) => parse_rational(s)
            .map_err(|_| Error::parse(location, format!("{s:?} is not a rational literal"))),
        other => Err(Error::parse(
            location,
            format!("expected a number, found {other}"),
        )),
    }
}

fn vector_from_json(v: Option<&Value>, len: usize, location: &str) -> Result<Vec<Rational>> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(location, "expected an array"))?;
    if arr.len() != len {
        return Err(Error::parse(
            location,
            format!("expected {len} entries, found {}", arr.len()),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(j, x)| rational_from_json(x, &format!("{location}[{j}]")))
        .collect()
}

fn matrix_from_json(v: Option<&Value>, cols: usize, location: &str) -> Result<Vec<Vec<Rational>>> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(location, "expected an array of rows"))?;
    arr.iter()
        .enumerate()
        .map(|(i, row)| vector_from_json(Some(row), cols, &format!("{location} row {i}")))
        .collect()
}

pub fn parse_instance(bytes: &[u8]) -> Result<BlpInstance> {
    let root: Value = serde_json::from_slice(bytes)
        .map_err(|e| Error::parse(format!("line {}", e.line()), e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::parse("top level", "expected an object"))?;
    let name = match obj.get("name") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::parse("name", "expected a string")),
    };
    let sense = match obj.get("sense").and_then(Value::as_str) {
        Some("optimistic") => Sense::Optimistic,
        Some("pessimistic") => Sense::Pessimistic,
        _ => {
            return Err(Error::parse(
                "sense",
                "expected \"optimistic\" or \"pessimistic\"",
            ))
        }
    };
    let count = |key: &str| -> Result<usize> {
        obj.get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| Error::parse(key, "expected a nonnegative integer"))
    };
    let n_l = count("num_leader_vars")?;
    let n_f = count("num_follower_vars")?;
    let section = |key: &str| -> Result<&Map<String, Value>> {
        obj.get(key)
            .and_then(Value::as_object)
            .ok_or_else(|| Error::parse(key, "expected an object"))
    };
    let leader = section("leader")?;
    let follower = section("follower")?;

    let leader_a = matrix_from_json(leader.get("A"), n_l, "leader.A")?;
    let leader_g = matrix_from_json(leader.get("G"), n_f, "leader.G")?;
    let m_l = leader_a.len();
    if leader_g.len() != m_l {
        return Err(Error::parse(
            "leader.G",
            format!("expected {m_l} rows, found {}", leader_g.len()),
        ));
    }
    let leader_h = vector_from_json(leader.get("h"), m_l, "leader.h")?;
    let cost_x = vector_from_json(leader.get("cost_x"), n_l, "leader.cost_x")?;
    let cost_y = vector_from_json(leader.get("cost_y"), n_f, "leader.cost_y")?;

    let follower_a = matrix_from_json(follower.get("A"), n_l, "follower.A")?;
    let follower_g = matrix_from_json(follower.get("G"), n_f, "follower.G")?;
    let m_f = follower_a.len();
    if follower_g.len() != m_f {
        return Err(Error::parse(
            "follower.G",
            format!("expected {m_f} rows, found {}", follower_g.len()),
        ));
    }
    let follower_h = vector_from_json(follower.get("h"), m_f, "follower.h")?;
    let follower_cost = vector_from_json(follower.get("cost"), n_f, "follower.cost")?;

    BlpInstance::new(InstanceParts {
        name,
        sense,
        n_l,
        n_f,
        leader_a,
        leader_g,
        leader_h,
        cost_x,
        cost_y,
        follower_a,
        follower_g,
        follower_h,
        follower_cost,
    })
}

fn vec_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational_to_json).collect())
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| vec_json(m.row(i))).collect())
}

pub fn instance_to_json(inst: &BlpInstance) -> Value {
    json!({
        "name": inst.name,
        "sense": inst.sense.as_str(),
        "num_leader_vars": inst.n_l,
        "num_follower_vars": inst.n_f,
        "leader": {
            "A": matrix_json(&inst.leader_a),
            "G": matrix_json(&inst.leader_g),
            "h": vec_json(&inst.leader_h),
            "cost_x": vec_json(&inst.cost_x),
            "cost_y": vec_json(&inst.cost_y),
        },
        "follower": {
            "A": matrix_json(&inst.follower_a),
            "G": matrix_json(&inst.follower_g),
            "h": vec_json(&inst.follower_h),
            "cost": vec_json(&inst.follower_cost),
        },
    })
}

pub fn serialize_instance(inst: &BlpInstance) -> Vec<u8> {
    let mut out =
        serde_json::to_vec_pretty(&instance_to_json(inst)).expect("json values serialize");
    out.push(b'\n');
    out
}

// ---------------------------------------------------------------------------
// Fixtures

fn r(v: i64) -> Vec<Rational> {
    vec![int(v)]
}

/// `X̃ = [0, 1]`, follower `min −y s.t. y ≤ x`, leader cost `x + y`.
pub fn fixture_t1() -> BlpInstance {
    BlpInstance::new(InstanceParts {
        name: "T1".into(),
        sense: Sense::Optimistic,
        n_l: 1,
        n_f: 1,
        leader_a: vec![r(1)],
        leader_g: vec![r(0)],
        leader_h: r(1),
        cost_x: r(1),
        cost_y: r(1),
        follower_a: vec![r(-1)],
        follower_g: vec![r(1)],
        follower_h: r(0),
        follower_cost: r(-1),
    })
    .expect("fixture is well formed")
}

/// Same feasible sets as T1 with an indifferent follower, leader cost `−x`
/// and the coupling row `y* ≤ 1/2`.
pub fn fixture_t2() -> BlpInstance {
    BlpInstance::new(InstanceParts {
        name: "T2".into(),
        sense: Sense::Pessimistic,
        n_l: 1,
        n_f: 1,
        leader_a: vec![r(1), r(0)],
        leader_g: vec![r(0), r(1)],
        leader_h: vec![int(1), frac(1, 2)],
        cost_x: r(-1),
        cost_y: r(0),
        follower_a: vec![r(-1)],
        follower_g: vec![r(1)],
        follower_h: r(0),
        follower_cost: r(0),
    })
    .expect("fixture is well formed")
}
