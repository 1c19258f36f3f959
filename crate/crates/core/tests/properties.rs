use blp_core::geometry::{enumerate_cells, enumerate_vertices, HPolyhedron, Hyperplane, Sign};
use blp_core::instance::{validate_a1, A1Status, BlpInstance, InstanceParts, Sense};
use blp_core::linprog::{solve_lp, LpOutcome, LpProblem, Relation};
use blp_core::numeric::{determinant, dot, frac, int, solve_square_system, Matrix, Rational};
use blp_core::specialcase::minmax_objective;
use blp_core::valuefn::{build_pwl, eval_phi_direct, reaction_max, reaction_max_eq};
use blp_core::Error;
use itertools::Itertools;
use num_traits::Zero;
use proptest::prelude::*;

fn small() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=2).prop_map(|(p, q)| frac(p, q))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(proptest::collection::vec(small(), cols), rows)
        .prop_map(move |r| Matrix::from_rows(cols, r).unwrap())
}

fn square() -> impl Strategy<Value = Matrix> {
    (1usize..=4).prop_flat_map(|n| matrix(n, n))
}

fn vector(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(small(), n)
}

/// Instances with a bounded leader box `x ≤ 2`, a bounding follower row and
/// no coupling rows.
fn instance() -> impl Strategy<Value = BlpInstance> {
    (1usize..=2, 1usize..=2, 1usize..=2).prop_flat_map(|(nl, nf, mf)| {
        (
            matrix(mf, nl),
            matrix(mf, nf),
            proptest::collection::vec(0i64..=4, mf),
            vector(nf),
            vector(nl),
            vector(nf),
        )
            .prop_map(move |(fa, fg, fh, df, cl, dl)| {
                let mut follower_a = fa.row_vecs();
                let mut follower_g = fg.row_vecs();
                let mut follower_h: Vec<Rational> = fh.into_iter().map(int).collect();
                follower_a.push(vec![int(0); nl]);
                follower_g.push(vec![int(1); nf]);
                follower_h.push(int(6));
                BlpInstance::new(InstanceParts {
                    name: "prop".into(),
                    sense: Sense::Optimistic,
                    n_l: nl,
                    n_f: nf,
                    leader_a: (0..nl).map(|j| blp_core::numeric::unit(nl, j)).collect(),
                    leader_g: vec![vec![int(0); nf]; nl],
                    leader_h: vec![int(2); nl],
                    cost_x: cl,
                    cost_y: dl,
                    follower_a,
                    follower_g,
                    follower_h,
                    follower_cost: df,
                })
                .unwrap()
            })
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec((0i64..=8).prop_map(|p| frac(p, 4)), n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn square_solve_round_trips(m in square(), seed in vector(4)) {
        let r = &seed[..m.rows()];
        match solve_square_system(&m, r) {
            Ok(x) => {
                prop_assert_eq!(m.mul_vec(&x).unwrap(), r.to_vec());
                prop_assert!(!determinant(&m).unwrap().is_zero());
            }
            Err(Error::Singular) => prop_assert!(determinant(&m).unwrap().is_zero()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn lp_strong_duality_and_slackness(
        a in matrix(3, 3),
        b in proptest::collection::vec(0i64..=5, 3),
        c in vector(3),
        maximize in any::<bool>(),
    ) {
        let mut p = if maximize { LpProblem::maximize(c.clone()) } else { LpProblem::minimize(c.clone()) };
        for (row, rhs) in a.row_vecs().into_iter().zip(&b) {
            p.add_le(row, int(*rhs)).unwrap();
        }
        p.add_le(vec![int(1); 3], int(10)).unwrap();
        if let LpOutcome::Optimal(s) = solve_lp(&p) {
            prop_assert!(p.is_feasible(&s.primal));
            prop_assert!(p.is_dual_feasible(&s.dual));
            prop_assert_eq!(p.dual_value(&s.dual), s.value.clone());
            prop_assert_eq!(dot(&c, &s.primal), s.value);
            for i in 0..p.num_rows() {
                let (row, rel, rhs) = p.row(i);
                prop_assert_eq!(rel, Relation::Le);
                let slack = rhs - dot(row, &s.primal);
                prop_assert!(slack.is_zero() || s.dual[i].is_zero());
            }
        } else {
            prop_assert!(false, "bounded nonempty LP must be optimal");
        }
    }

    #[test]
    fn vertices_are_feasible_and_tight(a in matrix(3, 2), b in proptest::collection::vec(0i64..=4, 3)) {
        let mut rows = a.row_vecs();
        rows.push(vec![int(1), int(1)]);
        let mut rhs: Vec<Rational> = b.into_iter().map(int).collect();
        rhs.push(int(5));
        let p = HPolyhedron::new(Matrix::from_rows(2, rows).unwrap(), rhs, vec![true, true]).unwrap();
        let vs = enumerate_vertices(&p);
        prop_assert!(!vs.is_empty());
        prop_assert!(vs.windows(2).all(|w| w[0] < w[1]));
        for v in &vs {
            prop_assert!(p.contains(v));
            let tight = p
                .constraint_rows()
                .into_iter()
                .filter(|(r, h)| dot(r, v) == *h)
                .map(|(r, _)| r)
                .collect::<Vec<_>>();
            let rank_two = tight.iter().tuple_combinations().any(|(r, s)| {
                !(&r[0] * &s[1] - &r[1] * &s[0]).is_zero()
            });
            prop_assert!(rank_two, "vertex {:?} is not a basic point", v);
        }
    }

    #[test]
    fn cells_match_grid_signs(
        hs in proptest::collection::vec((vector(2), small()), 1..=4),
    ) {
        let hyperplanes: Vec<Hyperplane> =
            hs.into_iter().filter_map(|(n, o)| Hyperplane::new(n, o)).collect();
        let bbox = HPolyhedron::boxed(&[int(-3), int(-3)], &[int(3), int(3)]).unwrap();
        let cells = enumerate_cells(&hyperplanes, 2, &bbox).unwrap();
        let sorted = blp_core::geometry::dedup_hyperplanes(&hyperplanes);
        for c in &cells {
            prop_assert!(c.sign_vector.iter().all(|s| *s != Sign::Zero));
            let signs: Vec<Sign> = sorted.iter().map(|h| h.side(&c.interior_point)).collect();
            prop_assert_eq!(&signs, &c.sign_vector);
            prop_assert!(bbox.contains(&c.interior_point));
        }
        // every grid point of the box lies in some cell closure
        for gx in -6..=6 {
            for gy in -6..=6 {
                let z = vec![frac(gx, 2), frac(gy, 2)];
                prop_assert!(cells.iter().any(|c| c.closure.contains(&z)));
            }
        }
    }

    #[test]
    fn phi_is_max_of_pieces(inst in instance(), xs in proptest::collection::vec(point(2), 4)) {
        let pwl = match build_pwl(&inst) {
            Ok(p) => p,
            Err(Error::EmptyDual) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for x in &xs {
            let x = &x[..inst.n_l];
            match eval_phi_direct(&inst, x) {
                Ok(phi) => prop_assert_eq!(pwl.eval(x), phi),
                Err(Error::InfeasibleAt) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn phi_is_convex(inst in instance(), x in point(2), z in point(2)) {
        let (x, z) = (&x[..inst.n_l], &z[..inst.n_l]);
        let mid: Vec<Rational> = x.iter().zip(z).map(|(a, b)| (a + b) / int(2)).collect();
        if let (Ok(a), Ok(b), Ok(m)) =
            (eval_phi_direct(&inst, x), eval_phi_direct(&inst, z), eval_phi_direct(&inst, &mid))
        {
            prop_assert!(m * int(2) <= a + b);
        }
    }

    #[test]
    fn reaction_forms_agree(inst in instance(), x in point(2), obj in vector(2)) {
        let x = &x[..inst.n_l];
        let obj = &obj[..inst.n_f];
        let le = reaction_max(&inst, x, obj);
        let eq = reaction_max_eq(&inst, x, obj);
        match (le, eq) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            (a, b) => prop_assert!(false, "forms disagree: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn minmax_objective_is_concave(inst in instance(), x in point(2), z in point(2)) {
        let mut inst = inst;
        inst.cost_y = inst.follower_cost.iter().map(|v| -v).collect();
        let (x, z) = (&x[..inst.n_l], &z[..inst.n_l]);
        let mid: Vec<Rational> = x.iter().zip(z).map(|(a, b)| (a + b) / int(2)).collect();
        if let (Ok(a), Ok(b), Ok(m)) =
            (minmax_objective(&inst, x), minmax_objective(&inst, z), minmax_objective(&inst, &mid))
        {
            prop_assert!(m * int(2) >= a + b);
        }
    }

    #[test]
    fn bounded_instances_validate(inst in instance()) {
        let report = validate_a1(&inst);
        prop_assert_ne!(report.a1_status, A1Status::Relaxed);
    }
}
