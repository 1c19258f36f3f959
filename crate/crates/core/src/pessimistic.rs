//! Pessimistic solver over a hyperplane arrangement in a lifted space.
//!
//! The leader's decision enters the follower only through `w = A_f x`, and
//! the follower's optimal face is `R̃(w, t) = {v ≥ 0 : G_f v ≤ h_f − w,
//! d_f·v = t}` at `t = φ(x)`. Each candidate basis `B` (containing the
//! value-equality row) gives a vertex `v^B(z) = M_B⁻¹ r_B(z)` that is affine
//! in the lifted point `z`. The set of bases whose vertex is feasible is
//! constant on every cell of the arrangement formed by their feasibility
//! hyperplanes, so within a cell the coupling rows become finitely many
//! linear constraints. Each (cell, piece) pair is one LP; the winning point is
//! re-checked pointwise before it is returned.
//!
//! In `xt` mode the lifted point is `(x, t)` instead of `(w, t)`, which is
//! the smaller space when `n_l < m_f`.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{
    enumerate_candidate_bases, enumerate_cells, enumerate_faces, sign_string, ArrangementCell,
    Basis, HPolyhedron, Hyperplane,
};
use crate::instance::{coupling_view, require_a1, BlpInstance, CouplingView, InstanceParts};
use crate::linprog::{solve_lp, thread_solve_count, LpOutcome, LpProblem};
use crate::numeric::{dot, int, lex_cmp, unit, zeros, Matrix, Rational};
use crate::oracle::pessimistic_evaluate;
use crate::solution::{Certificate, SolutionFile, SolveStats, SolveStatus};
use crate::valuefn::{build_pwl, reaction_argmax, PwlConvexFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiftedMode {
    /// `z = (w, t)` with `w = A_f x`.
    Wt,
    /// `z = (x, t)`.
    Xt,
}

impl LiftedMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LiftedMode::Wt => "wt",
            LiftedMode::Xt => "xt",
        }
    }

    /// The mode with the smaller lifted dimension, `wt` on ties.
    pub fn auto(inst: &BlpInstance) -> Self {
        if inst.n_l < inst.m_f() {
            LiftedMode::Xt
        } else {
            LiftedMode::Wt
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PessimisticOptions {
    pub force: bool,
    pub space: Option<LiftedMode>,
    pub strict_faces: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedSpace {
    pub mode: LiftedMode,
    pub dim: usize,
    pub bounding_box: HPolyhedron,
}

impl LiftedSpace {
    /// Index of `t` in a lifted point.
    pub fn t_index(&self) -> usize {
        self.dim - 1
    }

    /// The lifted point of a leader decision with value `t`.
    pub fn lift(&self, inst: &BlpInstance, x: &[Rational], t: Rational) -> Vec<Rational> {
        let mut z = match self.mode {
            LiftedMode::Wt => inst.follower_a.mul_vec(x).expect("x has n_l entries"),
            LiftedMode::Xt => x.to_vec(),
        };
        z.push(t);
        z
    }
}

/// One row `a·v ≤ rhs·z + rhs_const` of `R̃(z)`; row 0 is the equality
/// `d_f·v = t` when `d_f ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedRow {
    pub a: Vec<Rational>,
    pub rhs: Vec<Rational>,
    pub rhs_const: Rational,
}

impl LiftedRow {
    pub fn eval_rhs(&self, z: &[Rational]) -> Rational {
        dot(&self.rhs, z) + &self.rhs_const
    }
}

/// `v^B(z) = coeff_matrix·z + offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMap {
    pub basis: Basis,
    pub coeff_matrix: Matrix,
    pub offset: Vec<Rational>,
}

impl VertexMap {
    pub fn eval(&self, z: &[Rational]) -> Vec<Rational> {
        let cz = self.coeff_matrix.mul_vec(z).expect("lifted dimension");
        cz.into_iter()
            .zip(&self.offset)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// `normal·z ≤ offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisInequality {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl BasisInequality {
    pub fn holds(&self, z: &[Rational]) -> bool {
        dot(&self.normal, z) <= self.offset
    }
}

/// Rows of `R̃(z)` for the chosen mode.
pub fn lifted_rows(inst: &BlpInstance, mode: LiftedMode) -> Vec<LiftedRow> {
    let nf = inst.n_f;
    let dim = lifted_dim(inst, mode);
    let mut rows = Vec::new();
    if !crate::numeric::is_zero_vec(&inst.follower_cost) {
        rows.push(LiftedRow {
            a: inst.follower_cost.clone(),
            rhs: unit(dim, dim - 1),
            rhs_const: Rational::zero(),
        });
    }
    for j in 0..nf {
        rows.push(LiftedRow {
            a: unit(nf, j).iter().map(|v| -v).collect(),
            rhs: zeros(dim),
            rhs_const: Rational::zero(),
        });
    }
    for i in 0..inst.m_f() {
        let mut rhs: Vec<Rational> = match mode {
            LiftedMode::Wt => unit(inst.m_f(), i),
            LiftedMode::Xt => inst.follower_a.row(i).to_vec(),
        }
        .iter()
        .map(|v| -v)
        .collect();
        rhs.push(Rational::zero());
        rows.push(LiftedRow {
            a: inst.follower_g.row(i).to_vec(),
            rhs,
            rhs_const: inst.follower_h[i].clone(),
        });
    }
    rows
}

pub fn lifted_dim(inst: &BlpInstance, mode: LiftedMode) -> usize {
    match mode {
        LiftedMode::Wt => inst.m_f() + 1,
        LiftedMode::Xt => inst.n_l + 1,
    }
}

/// Vertex maps of every candidate basis of `rows`.
pub fn vertex_maps(inst: &BlpInstance, rows: &[LiftedRow], dim: usize) -> Result<Vec<VertexMap>> {
    let nf = inst.n_f;
    let required = (!crate::numeric::is_zero_vec(&inst.follower_cost)).then_some(0);
    let coeffs: Vec<Vec<Rational>> = rows.iter().map(|r| r.a.clone()).collect();
    let bases = enumerate_candidate_bases(&coeffs, nf, required)?;
    let mut maps = Vec::with_capacity(bases.len());
    for basis in bases {
        let m = Matrix::from_rows(
            nf,
            basis.indices.iter().map(|&k| rows[k].a.clone()).collect(),
        )?;
        let inv = m.inverse()?;
        let r = Matrix::from_rows(
            dim,
            basis.indices.iter().map(|&k| rows[k].rhs.clone()).collect(),
        )?;
        let s: Vec<Rational> = basis
            .indices
            .iter()
            .map(|&k| rows[k].rhs_const.clone())
            .collect();
        maps.push(VertexMap {
            coeff_matrix: inv.mul(&r)?,
            offset: inv.mul_vec(&s)?,
            basis,
        });
    }
    Ok(maps)
}

/// Feasibility of `v^B(z)` for the rows outside `B`, as inequalities in `z`.
///
/// Rows that hold for every `z` are dropped; `None` means some row fails for
/// every `z`, so the basis is never feasible.
pub fn basis_inequalities(rows: &[LiftedRow], map: &VertexMap) -> Option<Vec<BasisInequality>> {
    let mut out = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        if map.basis.indices.contains(&k) {
            continue;
        }
        // a·(C z + c) ≤ rhs·z + s
        let ac = map
            .coeff_matrix
            .transpose()
            .mul_vec(&row.a)
            .expect("n_f entries");
        let normal: Vec<Rational> = ac.iter().zip(&row.rhs).map(|(p, q)| p - q).collect();
        let offset = &row.rhs_const - dot(&row.a, &map.offset);
        if normal.iter().all(Zero::is_zero) {
            if offset.is_negative() {
                return None;
            }
            continue;
        }
        out.push(BasisInequality { normal, offset });
    }
    Some(out)
}

/// Canonical, deduplicated feasibility hyperplanes of all bases.
pub fn build_hyperplanes(
    inst: &BlpInstance,
    space: &LiftedSpace,
    maps: &[VertexMap],
) -> Vec<Hyperplane> {
    let rows = lifted_rows(inst, space.mode);
    let hs: Vec<Hyperplane> = maps
        .iter()
        .filter_map(|m| basis_inequalities(&rows, m))
        .flatten()
        .filter_map(|q| Hyperplane::new(q.normal, q.offset))
        .collect();
    crate::geometry::dedup_hyperplanes(&hs)
}

/// Coordinatewise bounds of the lifted point over the high-point relaxation,
/// widened by 1. `None` when the relaxation is infeasible.
pub fn bounding_box(inst: &BlpInstance, mode: LiftedMode) -> Result<Option<HPolyhedron>> {
    let (nl, nf) = (inst.n_l, inst.n_f);
    let mut forms: Vec<Vec<Rational>> = Vec::new();
    match mode {
        LiftedMode::Wt => {
            for i in 0..inst.m_f() {
                let mut f = inst.follower_a.row(i).to_vec();
                f.extend(zeros(nf));
                forms.push(f);
            }
        }
        LiftedMode::Xt => {
            for j in 0..nl {
                forms.push(unit(nl + nf, j));
            }
        }
    }
    let mut t_form = zeros(nl);
    t_form.extend_from_slice(&inst.follower_cost);
    forms.push(t_form);

    let mut lower = Vec::with_capacity(forms.len());
    let mut upper = Vec::with_capacity(forms.len());
    for f in forms {
        let mut bounds = [Rational::zero(), Rational::zero()];
        for (slot, maximize) in [(0, false), (1, true)] {
            match solve_lp(&inst.high_point_lp(maximize, f.clone())) {
                LpOutcome::Optimal(s) => bounds[slot] = s.value,
                LpOutcome::Infeasible { .. } => return Ok(None),
                LpOutcome::Unbounded { .. } => return Err(Error::UnboundedSubproblem),
            }
        }
        let [lo, hi] = bounds;
        lower.push(lo - Rational::one());
        upper.push(hi + Rational::one());
    }
    HPolyhedron::boxed(&lower, &upper).map(Some)
}

/// The arrangement, its regions and the bases feasible on each region.
#[derive(Debug, Clone)]
pub struct PessimisticModel {
    pub space: LiftedSpace,
    pub rows: Vec<LiftedRow>,
    pub maps: Vec<VertexMap>,
    /// Per map; `None` for bases that are never feasible.
    pub inequalities: Vec<Option<Vec<BasisInequality>>>,
    /// Hyperplane count before deduplication.
    pub raw_hyperplanes: usize,
    pub hyperplanes: Vec<Hyperplane>,
    /// Full-dimensional cells, or every face in strict mode.
    pub regions: Vec<ArrangementCell>,
    /// Indices into `maps` of the bases feasible on each region.
    pub region_bases: Vec<Vec<usize>>,
}

impl PessimisticModel {
    /// `None` when the high-point relaxation is infeasible.
    pub fn build(inst: &BlpInstance, mode: LiftedMode, strict_faces: bool) -> Result<Option<Self>> {
        let Some(bbox) = bounding_box(inst, mode)? else {
            return Ok(None);
        };
        let dim = lifted_dim(inst, mode);
        let space = LiftedSpace {
            mode,
            dim,
            bounding_box: bbox,
        };
        let rows = lifted_rows(inst, mode);
        let maps = vertex_maps(inst, &rows, dim)?;
        let inequalities: Vec<_> = maps.iter().map(|m| basis_inequalities(&rows, m)).collect();
        let raw: Vec<Hyperplane> = inequalities
            .iter()
            .flatten()
            .flatten()
            .filter_map(|q| Hyperplane::new(q.normal.clone(), q.offset.clone()))
            .collect();
        let hyperplanes = crate::geometry::dedup_hyperplanes(&raw);
        let regions = if strict_faces {
            enumerate_faces(&hyperplanes, dim, &space.bounding_box)?
        } else {
            enumerate_cells(&hyperplanes, dim, &space.bounding_box)?
        };
        let region_bases = regions
            .iter()
            .map(|c| feasible_bases(&inequalities, &c.interior_point))
            .collect();
        Ok(Some(PessimisticModel {
            space,
            rows,
            maps,
            inequalities,
            raw_hyperplanes: raw.len(),
            hyperplanes,
            regions,
            region_bases,
        }))
    }

    /// Bases whose vertex is feasible at `z`.
    pub fn bases_at(&self, z: &[Rational]) -> Vec<usize> {
        feasible_bases(&self.inequalities, z)
    }
}

fn feasible_bases(inequalities: &[Option<Vec<BasisInequality>>], z: &[Rational]) -> Vec<usize> {
    inequalities
        .iter()
        .enumerate()
        .filter(|(_, q)| q.as_ref().is_some_and(|q| q.iter().all(|r| r.holds(z))))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PessimisticCounts {
    pub cells: usize,
    pub bases: usize,
    pub lp_solves: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PessimisticResult {
    pub status: SolveStatus,
    pub value: Option<Rational>,
    pub x: Vec<Rational>,
    pub cell_sign_vector: Option<String>,
    pub piece_index: Option<usize>,
    /// Basis index sets feasible on the winning region.
    pub bases: Vec<Vec<usize>>,
    pub verified_pointwise: bool,
    pub counts: PessimisticCounts,
    pub mode: Option<LiftedMode>,
    /// Leader parts of every feasible subproblem optimum, in candidate order.
    pub subproblem_points: Vec<Vec<Rational>>,
    pub note: Option<String>,
}

impl PessimisticResult {
    fn infeasible(counts: PessimisticCounts, mode: Option<LiftedMode>) -> Self {
        PessimisticResult {
            status: SolveStatus::Infeasible,
            value: None,
            x: Vec::new(),
            cell_sign_vector: None,
            piece_index: None,
            bases: Vec::new(),
            verified_pointwise: false,
            counts,
            mode,
            subproblem_points: Vec::new(),
            note: None,
        }
    }

    /// Solution file for this result. The witness is a worst-case follower
    /// response at `x`.
    pub fn to_solution(&self, inst: &BlpInstance, method: &str, pieces: usize) -> SolutionFile {
        let optimal = self.status == SolveStatus::Optimal;
        SolutionFile {
            status: self.status,
            value: self.value.clone(),
            x: self.x.clone(),
            y_witness: if optimal {
                reaction_argmax(inst, &self.x, &inst.cost_y)
                    .ok()
                    .map(|(_, y)| y)
            } else {
                None
            },
            certificate: optimal.then(|| Certificate {
                method: method.to_string(),
                piece_index: self.piece_index,
                cell_sign_vector: self.cell_sign_vector.clone(),
                bases: self.bases.clone(),
            }),
            stats: SolveStats {
                lp_solves: self.counts.lp_solves,
                cells: self.counts.cells,
                pieces,
            },
        }
    }
}

/// Moves `d_l·y*` into a coupling row `d_l·y* ≤ θ` with a new leader
/// variable θ paying the objective. θ's range comes from the high-point
/// relaxation; when it can be negative, θ is split into `θ⁺ − θ⁻`.
pub fn normalize_epigraph(inst: &BlpInstance) -> Result<BlpInstance> {
    if crate::numeric::is_zero_vec(&inst.cost_y) {
        return Ok(inst.clone());
    }
    let (lo, hi) = epigraph_bounds(inst)?;
    let split = lo.is_negative();
    let extra = if split { 2 } else { 1 };
    let n_l = inst.n_l + extra;
    let theta_coeffs = |sign: i64| -> Vec<Rational> {
        if split {
            vec![int(sign), int(-sign)]
        } else {
            vec![int(sign)]
        }
    };
    let widen = |row: &[Rational], tail: Vec<Rational>| -> Vec<Rational> {
        let mut r = row.to_vec();
        r.extend(tail);
        r
    };

    let mut leader_a: Vec<Vec<Rational>> = (0..inst.m_l())
        .map(|i| widen(inst.leader_a.row(i), zeros(extra)))
        .collect();
    let mut leader_g = inst.leader_g.row_vecs();
    let mut leader_h = inst.leader_h.clone();
    let no_y = zeros(inst.n_f);
    // lo ≤ θ ≤ hi
    leader_a.push(widen(&zeros(inst.n_l), theta_coeffs(1)));
    leader_g.push(no_y.clone());
    leader_h.push(hi.clone());
    leader_a.push(widen(&zeros(inst.n_l), theta_coeffs(-1)));
    leader_g.push(no_y.clone());
    leader_h.push(-lo.clone());
    if split {
        // keep each part bounded
        leader_a.push(widen(&zeros(inst.n_l), vec![int(1), int(0)]));
        leader_g.push(no_y.clone());
        leader_h.push(hi.clone().max(Rational::zero()));
        leader_a.push(widen(&zeros(inst.n_l), vec![int(0), int(1)]));
        leader_g.push(no_y.clone());
        leader_h.push(-lo.clone());
    }
    // d_l·y* − θ ≤ 0
    leader_a.push(widen(&zeros(inst.n_l), theta_coeffs(-1)));
    leader_g.push(inst.cost_y.clone());
    leader_h.push(Rational::zero());

    let mut cost_x = inst.cost_x.clone();
    cost_x.extend(theta_coeffs(1));
    BlpInstance::new(InstanceParts {
        name: inst.name.clone(),
        sense: inst.sense,
        n_l,
        n_f: inst.n_f,
        leader_a,
        leader_g,
        leader_h,
        cost_x,
        cost_y: zeros(inst.n_f),
        follower_a: (0..inst.m_f())
            .map(|i| widen(inst.follower_a.row(i), zeros(extra)))
            .collect(),
        follower_g: inst.follower_g.row_vecs(),
        follower_h: inst.follower_h.clone(),
        follower_cost: inst.follower_cost.clone(),
    })
}

/// Range of `d_l·y` over the high-point relaxation.
pub fn epigraph_bounds(inst: &BlpInstance) -> Result<(Rational, Rational)> {
    let mut obj = zeros(inst.n_l);
    obj.extend_from_slice(&inst.cost_y);
    let mut out = [Rational::zero(), Rational::zero()];
    for (slot, maximize) in [(0, false), (1, true)] {
        match solve_lp(&inst.high_point_lp(maximize, obj.clone())) {
            LpOutcome::Optimal(s) => out[slot] = s.value,
            LpOutcome::Unbounded { .. } => return Err(Error::UnboundedEpigraph),
            // Nothing is feasible; any range works.
            LpOutcome::Infeasible { .. } => {}
        }
    }
    let [lo, hi] = out;
    Ok((lo, hi))
}

struct Candidate {
    value: Rational,
    region: usize,
    piece: usize,
    x: Vec<Rational>,
}

impl Candidate {
    fn order(&self, other: &Candidate) -> Ordering {
        self.value
            .cmp(&other.value)
            .then(self.region.cmp(&other.region))
            .then(self.piece.cmp(&other.piece))
            .then_with(|| lex_cmp(&self.x, &other.x))
    }
}

/// Columns of a subproblem: `x`, then `w` (wt mode only), then `t`.
struct Columns {
    nl: usize,
    mode: LiftedMode,
    dim: usize,
}

impl Columns {
    fn count(&self) -> usize {
        match self.mode {
            LiftedMode::Wt => self.nl + self.dim,
            LiftedMode::Xt => self.nl + 1,
        }
    }

    fn t(&self) -> usize {
        self.count() - 1
    }

    /// A row `x_part·x + z_part·z` in subproblem columns.
    fn row(&self, x_part: &[Rational], z_part: &[Rational]) -> Vec<Rational> {
        let mut r = zeros(self.count());
        for (j, v) in x_part.iter().enumerate() {
            r[j] += v;
        }
        match self.mode {
            LiftedMode::Wt => {
                for (k, v) in z_part.iter().enumerate() {
                    r[self.nl + k] += v;
                }
            }
            LiftedMode::Xt => {
                for (k, v) in z_part[..self.nl].iter().enumerate() {
                    r[k] += v;
                }
                r[self.nl] += &z_part[self.nl];
            }
        }
        r
    }
}

/// Subproblem LP shared by every piece of one region.
fn region_lp(
    inst: &BlpInstance,
    view: &CouplingView,
    pwl: &PwlConvexFunction,
    model: &PessimisticModel,
    region: usize,
) -> Result<LpProblem> {
    let cols = Columns {
        nl: inst.n_l,
        mode: model.space.mode,
        dim: model.space.dim,
    };
    let mut p = LpProblem::minimize({
        let mut c = inst.cost_x.clone();
        c.extend(zeros(cols.count() - inst.n_l));
        c
    });
    for j in inst.n_l..cols.count() {
        p.set_free(j);
    }
    let no_z = zeros(model.space.dim);
    for &i in &view.pure_rows {
        p.add_le(
            cols.row(inst.leader_a.row(i), &no_z),
            inst.leader_h[i].clone(),
        )?;
    }
    if cols.mode == LiftedMode::Wt {
        for i in 0..inst.m_f() {
            let neg: Vec<Rational> = inst.follower_a.row(i).iter().map(|v| -v).collect();
            p.add_eq(cols.row(&neg, &unit(model.space.dim, i)), Rational::zero())?;
        }
    }
    for (a, b) in model.regions[region].closure.constraint_rows() {
        p.add_le(cols.row(&zeros(inst.n_l), &a), b)?;
    }
    // every piece lies below t
    for piece in &pwl.pieces {
        let mut r = cols.row(&piece.slope, &no_z);
        r[cols.t()] -= Rational::one();
        p.add_le(r, -piece.offset.clone())?;
    }
    for &b in &model.region_bases[region] {
        let map = &model.maps[b];
        for k in 0..view.coupling_rows.len() {
            let row = view.row(inst, k);
            // g·(C z + c) + a·x ≤ h
            let gc = map.coeff_matrix.transpose().mul_vec(row.g)?;
            p.add_le(cols.row(row.a, &gc), row.h - dot(row.g, &map.offset))?;
        }
    }
    Ok(p)
}

pub fn solve_pessimistic(
    inst: &BlpInstance,
    opts: &PessimisticOptions,
) -> Result<PessimisticResult> {
    require_a1(inst, opts.force)?;
    let start = thread_solve_count();
    let normalized = normalize_epigraph(inst)?;
    let mut result = solve_normalized(&normalized, opts)?;
    for p in &mut result.subproblem_points {
        p.truncate(inst.n_l);
    }
    if result.status == SolveStatus::Optimal && normalized.n_l != inst.n_l {
        result.x.truncate(inst.n_l);
        let eval = pessimistic_evaluate(inst, &result.x)?;
        if !eval.feasible {
            return Err(Error::NoVerifiedCandidate);
        }
        result.value = Some(eval.value);
    }
    result.counts.lp_solves = (thread_solve_count() - start) as usize;
    Ok(result)
}

fn solve_normalized(inst: &BlpInstance, opts: &PessimisticOptions) -> Result<PessimisticResult> {
    let view = coupling_view(inst);
    let mode = opts.space.unwrap_or_else(|| LiftedMode::auto(inst));
    let pwl = build_pwl(inst)?;

    if view.coupling_rows.is_empty() {
        return solve_coupling_free(inst);
    }
    let cells = solve_regions(inst, &view, &pwl, mode, opts.strict_faces)?;
    if opts.strict_faces || cells.status != RegionOutcome::NeedsFaces {
        return cells.into_result();
    }
    // The cell LPs relax the problem on cell boundaries, where more bases
    // can be feasible. Their minimum is a lower bound, so a verified first
    // candidate is optimal; otherwise the faces decide.
    let mut faces = solve_regions(inst, &view, &pwl, mode, true)?;
    faces.counts.cells += cells.counts.cells;
    faces.note = Some("cell candidates failed pointwise verification; solved over faces".into());
    faces.into_result()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RegionOutcome {
    Verified,
    Infeasible,
    NeedsFaces,
    Unverified,
}

struct RegionSearch {
    status: RegionOutcome,
    result: PessimisticResult,
    counts: PessimisticCounts,
    note: Option<String>,
}

impl RegionSearch {
    fn into_result(self) -> Result<PessimisticResult> {
        match self.status {
            RegionOutcome::Unverified | RegionOutcome::NeedsFaces => {
                Err(Error::NoVerifiedCandidate)
            }
            _ => {
                let mut r = self.result;
                r.counts = self.counts;
                r.note = self.note;
                Ok(r)
            }
        }
    }
}

/// One LP per (region, piece), then pointwise verification in candidate
/// order. Over cells only the first candidate is trusted; over faces the
/// first verified candidate wins.
fn solve_regions(
    inst: &BlpInstance,
    view: &CouplingView,
    pwl: &PwlConvexFunction,
    mode: LiftedMode,
    faces: bool,
) -> Result<RegionSearch> {
    let Some(model) = PessimisticModel::build(inst, mode, faces)? else {
        let counts = PessimisticCounts::default();
        return Ok(RegionSearch {
            status: RegionOutcome::Infeasible,
            result: PessimisticResult::infeasible(counts, Some(mode)),
            counts,
            note: None,
        });
    };
    let counts = PessimisticCounts {
        cells: model.regions.len(),
        bases: model.maps.len(),
        lp_solves: 0,
    };

    let mut candidates: Vec<Candidate> = Vec::new();
    for region in 0..model.regions.len() {
        // On a relatively open face an empty basis set means R̃ is empty
        // there; boundary points belong to lower faces.
        if faces && model.region_bases[region].is_empty() {
            continue;
        }
        let base = region_lp(inst, view, pwl, &model, region)?;
        let t_col = base.num_vars() - 1;
        for (i, piece) in pwl.pieces.iter().enumerate() {
            let mut p = base.clone();
            let mut r: Vec<Rational> = piece.slope.iter().map(|v| -v).collect();
            r.extend(zeros(base.num_vars() - inst.n_l));
            r[t_col] = Rational::one();
            p.add_le(r, piece.offset.clone())?;
            match solve_lp(&p) {
                LpOutcome::Optimal(s) => candidates.push(Candidate {
                    value: s.value,
                    region,
                    piece: i,
                    x: s.primal[..inst.n_l].to_vec(),
                }),
                LpOutcome::Infeasible { .. } => {}
                LpOutcome::Unbounded { .. } => return Err(Error::UnboundedSubproblem),
            }
        }
    }
    candidates.sort_by(Candidate::order);
    let subproblem_points: Vec<Vec<Rational>> = candidates.iter().map(|c| c.x.clone()).collect();
    let mut infeasible = PessimisticResult::infeasible(counts, Some(mode));
    infeasible.subproblem_points = subproblem_points.clone();
    let fallback = if candidates.is_empty() {
        RegionOutcome::Infeasible
    } else if faces {
        RegionOutcome::Unverified
    } else {
        RegionOutcome::NeedsFaces
    };

    let tried = if faces {
        candidates.len()
    } else {
        candidates.len().min(1)
    };
    for c in &candidates[..tried] {
        let ok = match pessimistic_evaluate(inst, &c.x) {
            Ok(e) => e.feasible && e.value == c.value,
            Err(_) => false,
        };
        if ok {
            let region = &model.regions[c.region];
            return Ok(RegionSearch {
                status: RegionOutcome::Verified,
                result: PessimisticResult {
                    status: SolveStatus::Optimal,
                    value: Some(c.value.clone()),
                    x: c.x.clone(),
                    cell_sign_vector: Some(sign_string(&region.sign_vector)),
                    piece_index: Some(c.piece),
                    bases: model.region_bases[c.region]
                        .iter()
                        .map(|&b| model.maps[b].basis.indices.clone())
                        .collect(),
                    verified_pointwise: true,
                    counts,
                    mode: Some(mode),
                    subproblem_points,
                    note: None,
                },
                counts,
                note: None,
            });
        }
    }
    Ok(RegionSearch {
        status: fallback,
        result: infeasible,
        counts,
        note: None,
    })
}

/// Without coupling rows the follower's choice is irrelevant and the leader
/// minimizes over `X̃` directly.
fn solve_coupling_free(inst: &BlpInstance) -> Result<PessimisticResult> {
    let x_set = inst.leader_polyhedron();
    let counts = PessimisticCounts::default();
    match solve_lp(&x_set.lp(false, inst.cost_x.clone())) {
        LpOutcome::Optimal(s) => {
            let eval = pessimistic_evaluate(inst, &s.primal)?;
            if !eval.feasible || eval.value != s.value {
                return Err(Error::NoVerifiedCandidate);
            }
            Ok(PessimisticResult {
                status: SolveStatus::Optimal,
                value: Some(s.value),
                subproblem_points: vec![s.primal.clone()],
                x: s.primal,
                cell_sign_vector: None,
                piece_index: None,
                bases: Vec::new(),
                verified_pointwise: true,
                counts,
                mode: None,
                note: Some("no coupling rows: single LP over the leader set".into()),
            })
        }
        LpOutcome::Infeasible { .. } => Ok(PessimisticResult::infeasible(counts, None)),
        LpOutcome::Unbounded { .. } => Err(Error::UnboundedSubproblem),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixture_t1, fixture_t2};
    use crate::numeric::frac;
    use crate::valuefn::binomial;

    #[test]
    fn t2_optimum() {
        for strict_faces in [false, true] {
            for space in [LiftedMode::Wt, LiftedMode::Xt] {
                let opts = PessimisticOptions {
                    space: Some(space),
                    strict_faces,
                    ..Default::default()
                };
                let r = solve_pessimistic(&fixture_t2(), &opts).unwrap();
                assert_eq!(r.status, SolveStatus::Optimal);
                assert_eq!(
                    r.value,
                    Some(frac(-1, 2)),
                    "{space:?} strict={strict_faces}"
                );
                assert_eq!(r.x, vec![frac(1, 2)]);
                assert!(r.verified_pointwise);
            }
        }
    }

    #[test]
    fn t2_bases_and_hyperplanes() {
        let inst = fixture_t2();
        let model = PessimisticModel::build(&inst, LiftedMode::Wt, false)
            .unwrap()
            .unwrap();
        // d_f = 0: no equality row, bases are single rows of {−v ≤ 0, v ≤ −w}
        assert_eq!(model.rows.len(), 2);
        assert_eq!(model.maps.len(), 2);
        assert!(model.raw_hyperplanes <= (inst.m_f() + 1) * model.maps.len());
        assert!(!model.hyperplanes.is_empty());
    }

    #[test]
    fn basis_count_bound() {
        // n_f = 2, m_f = 1 with d_f ≠ 0
        let mut inst = fixture_t1();
        inst.n_f = 2;
        inst.leader_g = Matrix::from_i64(&[&[0, 0]]);
        inst.cost_y = vec![int(0), int(0)];
        inst.follower_g = Matrix::from_i64(&[&[1, 1]]);
        inst.follower_cost = vec![int(-1), int(-2)];
        inst.check_dims().unwrap();
        let rows = lifted_rows(&inst, LiftedMode::Wt);
        let maps = vertex_maps(&inst, &rows, 2).unwrap();
        assert!(maps.len() as u128 <= binomial(inst.n_f + inst.m_f(), inst.n_f - 1));
        let space = LiftedSpace {
            mode: LiftedMode::Wt,
            dim: 2,
            bounding_box: bounding_box(&inst, LiftedMode::Wt).unwrap().unwrap(),
        };
        let hs = build_hyperplanes(&inst, &space, &maps);
        assert!(hs.len() <= (inst.m_f() + 1) * maps.len());
    }

    #[test]
    fn vertex_maps_solve_their_systems() {
        let inst = fixture_t1();
        let rows = lifted_rows(&inst, LiftedMode::Wt);
        let maps = vertex_maps(&inst, &rows, 2).unwrap();
        let z = vec![frac(-1, 3), frac(-1, 5)];
        for m in &maps {
            let v = m.eval(&z);
            for &k in &m.basis.indices {
                assert_eq!(dot(&rows[k].a, &v), rows[k].eval_rhs(&z));
            }
        }
    }

    #[test]
    fn coupling_free_is_one_lp() {
        let mut inst = fixture_t2();
        inst.leader_a = Matrix::from_i64(&[&[1]]);
        inst.leader_g = Matrix::from_i64(&[&[0]]);
        inst.leader_h = vec![int(1)];
        let r = solve_pessimistic(&inst, &PessimisticOptions::default()).unwrap();
        assert_eq!(r.value, Some(int(-1)));
        assert_eq!(r.x, vec![int(1)]);
    }

    #[test]
    fn epigraph_of_t2_with_leader_cost_on_y() {
        let mut inst = fixture_t2();
        inst.cost_y = vec![int(1)];
        assert_eq!(epigraph_bounds(&inst).unwrap(), (int(0), int(1)));
        let ext = normalize_epigraph(&inst).unwrap();
        assert_eq!(ext.n_l, 2);
        assert!(crate::numeric::is_zero_vec(&ext.cost_y));
        assert_eq!(coupling_view(&ext).coupling_rows.len(), 2);
        assert_eq!(normalize_epigraph(&fixture_t2()).unwrap(), fixture_t2());
        // −x + max_{y ≤ x} y = 0 on the whole feasible range
        let r = solve_pessimistic(&inst, &PessimisticOptions::default()).unwrap();
        assert_eq!(r.value, Some(int(0)));
        let eval = pessimistic_evaluate(&inst, &r.x).unwrap();
        assert_eq!(Some(eval.value), r.value);
    }

    #[test]
    fn cell_bases_match_direct_evaluation() {
        let inst = fixture_t2();
        let model = PessimisticModel::build(&inst, LiftedMode::Wt, false)
            .unwrap()
            .unwrap();
        for (k, c) in model.regions.iter().enumerate() {
            assert_eq!(model.bases_at(&c.interior_point), model.region_bases[k]);
        }
    }
}
