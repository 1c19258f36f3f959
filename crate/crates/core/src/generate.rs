//! Seeded random instances that satisfy A1.
//!
//! Each level gets one row with positive coefficients, which bounds `X̃`
//! and makes the follower's recession cone trivial. Draws that still fail
//! A1 (an empty follower set at some leader vertex) are re-rolled from the
//! same random stream, so a seed always yields the same instance.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{validate_a1, A1Status, BlpInstance, InstanceParts, Sense};
use crate::numeric::{frac, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    RandomOptimistic,
    RandomPessimistic,
    /// `d_l = d_f`, no coupling rows.
    MinMin,
    /// `d_l = −d_f`, no coupling rows.
    MinMax,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::RandomOptimistic => "random-optimistic",
            Family::RandomPessimistic => "random-pessimistic",
            Family::MinMin => "minmin",
            Family::MinMax => "minmax",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Family::RandomOptimistic,
            Family::RandomPessimistic,
            Family::MinMin,
            Family::MinMax,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or_else(|| Error::parse("family", format!("unknown family {s:?}")))
    }
}

/// Variable counts and total row counts (bounding rows included).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub nl: usize,
    pub nf: usize,
    pub ml: usize,
    pub mf: usize,
}

pub const MAX_ATTEMPTS: usize = 1000;

/// Rational in `[−5, 5]` with denominator 1 or 2.
fn entry(rng: &mut ChaCha8Rng) -> Rational {
    if rng.gen_bool(0.75) {
        int(rng.gen_range(-5..=5))
    } else {
        frac(rng.gen_range(-10..=10), 2)
    }
}

fn positive(rng: &mut ChaCha8Rng) -> Rational {
    int(rng.gen_range(1..=5))
}

fn nonnegative(rng: &mut ChaCha8Rng) -> Rational {
    if rng.gen_bool(0.75) {
        int(rng.gen_range(0..=5))
    } else {
        frac(rng.gen_range(0..=10), 2)
    }
}

fn row(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| entry(rng)).collect()
}

fn draw(rng: &mut ChaCha8Rng, family: Family, p: GenParams, name: String) -> Result<BlpInstance> {
    let GenParams { nl, nf, ml, mf } = p;
    let coupling_allowed = matches!(family, Family::RandomOptimistic | Family::RandomPessimistic);

    let mut leader_a = vec![(0..nl).map(|_| positive(rng)).collect::<Vec<_>>()];
    let mut leader_g = vec![vec![int(0); nf]];
    let mut leader_h = vec![positive(rng)];
    for _ in 1..ml {
        leader_a.push(row(rng, nl));
        let coupling = coupling_allowed && rng.gen_bool(0.6);
        leader_g.push(if coupling {
            row(rng, nf)
        } else {
            vec![int(0); nf]
        });
        leader_h.push(nonnegative(rng));
    }

    let mut follower_a = Vec::with_capacity(mf);
    let mut follower_g = Vec::with_capacity(mf);
    let mut follower_h = Vec::with_capacity(mf);
    for k in 0..mf {
        follower_a.push(row(rng, nl));
        if k + 1 == mf {
            follower_g.push((0..nf).map(|_| positive(rng)).collect());
        } else {
            follower_g.push(row(rng, nf));
        }
        follower_h.push(nonnegative(rng));
    }

    let mut follower_cost = row(rng, nf);
    if family == Family::RandomPessimistic {
        // zero entries create ties in the follower's response
        for c in follower_cost.iter_mut() {
            if rng.gen_bool(0.5) {
                *c = int(0);
            }
        }
    }
    let cost_x = row(rng, nl);
    let cost_y = match family {
        Family::MinMin => follower_cost.clone(),
        Family::MinMax => follower_cost.iter().map(|v| -v).collect(),
        Family::RandomPessimistic if rng.gen_bool(0.5) => vec![int(0); nf],
        _ => row(rng, nf),
    };
    let sense = match family {
        Family::RandomPessimistic => Sense::Pessimistic,
        _ => Sense::Optimistic,
    };
    BlpInstance::new(InstanceParts {
        name,
        sense,
        n_l: nl,
        n_f: nf,
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

/// Deterministic A1-satisfying instance for `seed`.
pub fn generate(family: Family, seed: u64, params: GenParams) -> Result<BlpInstance> {
    if params.nl == 0 || params.nf == 0 || params.ml == 0 || params.mf == 0 {
        return Err(Error::PreconditionViolated(
            "generated instances need at least one variable and row per level".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = format!("{family}-{seed}");
    for _ in 0..MAX_ATTEMPTS {
        let inst = draw(&mut rng, family, params, name.clone())?;
        if validate_a1(&inst).a1_status == A1Status::Satisfied {
            return Ok(inst);
        }
    }
    Err(Error::PreconditionViolated(format!(
        "no A1-satisfying draw within {MAX_ATTEMPTS} attempts"
    )))
}
