use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blp_core::generate::{generate, Family, GenParams};
use blp_core::instance::{
    parse_instance, serialize_instance, validate_a1, A1Status, BlpInstance, Sense,
};
use blp_core::numeric::{dot, format_rational, format_vec, parse_rational, Rational};
use blp_core::optimistic::{solve_optimistic, SolveOptions};
use blp_core::oracle::{optimistic_oracle, pessimistic_1d_sweep, pessimistic_evaluate};
use blp_core::pessimistic::{solve_pessimistic, LiftedMode, PessimisticOptions};
use blp_core::reduction::{
    parse_graph, reduce_mis, solve_mis_bruteforce, verify_reduction, MAX_VERIFY_VERTICES,
};
use blp_core::solution::{SolutionFile, SolveStatus};
use blp_core::specialcase::{is_minmax, is_minmin, solve_minmax, solve_minmin};
use blp_core::valuefn::{build_pwl, eval_phi_direct, piece_bound};
use blp_core::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "blp",
    version,
    about = "Exact solvers for bilevel linear programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check assumption A1 on an instance
    Validate { instance: PathBuf },
    /// Solve an instance and write a solution file
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long, value_enum)]
        space: Option<Space>,
        /// Also search lower-dimensional faces of the arrangement
        #[arg(long)]
        strict_faces: bool,
        /// Run even if A1 does not hold
        #[arg(long)]
        force: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Inspect the follower's value function
    ValueFn {
        instance: PathBuf,
        /// List every piece
        #[arg(long)]
        pieces: bool,
        /// Evaluate at a comma-separated point, e.g. "1/2,0"
        #[arg(long)]
        at: Option<String>,
    },
    /// Build the pessimistic instance encoding maximum independent set
    ReduceMis {
        graph: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Bound the follower variables so that the instance satisfies A1
        #[arg(long = "box")]
        boxed: bool,
    },
    /// Maximum independent set by exhaustive search
    Mis {
        graph: PathBuf,
        /// Answer whether an independent set of this size exists
        #[arg(long)]
        q: Option<usize>,
    },
    /// Verify a solution file against an instance
    Check {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Generate a seeded random instance
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        nl: usize,
        #[arg(long)]
        nf: usize,
        #[arg(long)]
        ml: usize,
        #[arg(long)]
        mf: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Thm1,
    Thm2,
    Minmax,
    Minmin,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Wt,
    Xt,
}

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_UNBOUNDED: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;

/// A diagnostic for standard error and the exit code that goes with it.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::BadRational(_)
            | Error::DimensionMismatch(_)
            | Error::InvalidGraph(_)
            | Error::Singular
            | Error::Inconsistent => EXIT_INPUT,
            Error::UnboundedBelow
            | Error::UnboundedAbove
            | Error::UnboundedEpigraph
            | Error::UnboundedSubproblem
            | Error::EmptyDual
            | Error::RelaxedA1Refused(_) => EXIT_UNBOUNDED,
            Error::InfeasibleAt | Error::NoVerifiedCandidate => EXIT_INFEASIBLE,
            Error::PreconditionViolated(_) | Error::NoVertices | Error::SizeGuard(_) => {
                EXIT_PRECONDITION
            }
        };
        Failure::new(code, e.to_string())
    }
}

type CliResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::new(EXIT_INPUT, e.to_string())),
    }
}

fn print_json(v: &Value) -> Result<(), Failure> {
    let mut out = serde_json::to_vec_pretty(v).expect("json values serialize");
    out.push(b'\n');
    write_output(None, &out)
}

fn load_instance(path: &Path) -> Result<BlpInstance, Failure> {
    Ok(parse_instance(&read(path)?)?)
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
    }
}

fn validate(path: &Path) -> CliResult {
    let inst = load_instance(path)?;
    let r = validate_a1(&inst);
    print_json(&json!({
        "a1_status": r.a1_status.as_str(),
        "leader_set_nonempty": r.leader_set_nonempty,
        "leader_set_bounded": r.leader_set_bounded,
        "follower_recession_trivial": r.follower_recession_trivial,
        "follower_nonempty_on_leader_vertices": r.follower_nonempty_on_leader_vertices,
        "notes": r.notes,
    }))?;
    if r.a1_status != A1Status::Satisfied {
        eprintln!("A1 is {}", r.a1_status.as_str());
        return Ok(EXIT_UNBOUNDED);
    }
    Ok(0)
}

struct SolveArgs {
    method: Method,
    space: Option<Space>,
    strict_faces: bool,
    force: bool,
}

fn solve_instance(inst: &BlpInstance, args: &SolveArgs) -> Result<SolutionFile, Failure> {
    if !args.force {
        let status = validate_a1(inst).a1_status;
        if status != A1Status::Satisfied {
            return Err(Error::RelaxedA1Refused(status.as_str().into()).into());
        }
    }
    let method = match args.method {
        Method::Auto if is_minmin(inst) => Method::Minmin,
        Method::Auto if is_minmax(inst) => Method::Minmax,
        Method::Auto => match inst.sense {
            Sense::Optimistic => Method::Thm1,
            Sense::Pessimistic => Method::Thm2,
        },
        m => m,
    };
    let opts = SolveOptions { force: args.force };
    let file = match method {
        Method::Minmin => solve_minmin(inst)?.to_solution("minmin", 0),
        Method::Minmax => solve_minmax(inst)?.to_solution("minmax", 0),
        Method::Thm1 => {
            let pwl = build_pwl(inst)?;
            solve_optimistic(inst, &pwl, &opts)?.to_solution("thm1", pwl.len())
        }
        Method::Thm2 => {
            let popts = PessimisticOptions {
                force: args.force,
                space: args.space.map(|s| match s {
                    Space::Wt => LiftedMode::Wt,
                    Space::Xt => LiftedMode::Xt,
                }),
                strict_faces: args.strict_faces,
            };
            let r = solve_pessimistic(inst, &popts)?;
            r.to_solution(inst, "thm2", build_pwl(inst)?.len())
        }
        Method::Oracle => match inst.sense {
            Sense::Optimistic => optimistic_oracle(inst, &opts)?.to_solution("oracle", 0),
            Sense::Pessimistic => pessimistic_1d_sweep(inst, &opts)?.to_solution(inst, "oracle", 0),
        },
        Method::Auto => unreachable!("auto is resolved above"),
    };
    Ok(file)
}

fn solve(path: &Path, args: SolveArgs, output: Option<&Path>) -> CliResult {
    let inst = load_instance(path)?;
    let file = solve_instance(&inst, &args)?;
    write_output(output, &file.to_bytes())?;
    Ok(status_code(file.status))
}

fn parse_point(s: &str) -> Result<Vec<Rational>, Failure> {
    s.split(',')
        .map(|t| parse_rational(t.trim()).map_err(Failure::from))
        .collect()
}

fn value_fn(path: &Path, pieces: bool, at: Option<&str>) -> CliResult {
    let inst = load_instance(path)?;
    let pwl = build_pwl(&inst)?;
    let mut out = json!({
        "num_pieces": pwl.len(),
        "piece_bound": piece_bound(&inst).to_string(),
    });
    if pieces {
        out["pieces"] = pwl
            .pieces
            .iter()
            .map(|p| {
                json!({
                    "slope": p.slope.iter().map(format_rational).collect::<Vec<_>>(),
                    "offset": format_rational(&p.offset),
                    "lambda": p.lambda.iter().map(format_rational).collect::<Vec<_>>(),
                })
            })
            .collect();
    }
    if let Some(at) = at {
        let x = parse_point(at)?;
        if x.len() != inst.n_l {
            return Err(Failure::new(
                EXIT_INPUT,
                format!("--at needs {} coordinates", inst.n_l),
            ));
        }
        let phi = eval_phi_direct(&inst, &x)?;
        out["at"] = json!({
            "x": x.iter().map(format_rational).collect::<Vec<_>>(),
            "phi": format_rational(&phi),
            "active_pieces": pwl.active_pieces(&x),
        });
    }
    print_json(&out)?;
    Ok(0)
}

fn reduce(path: &Path, output: &Path, boxed: bool) -> CliResult {
    let g = parse_graph(&read(path)?)?;
    let inst = reduce_mis(&g, boxed);
    if boxed {
        if g.num_vertices() <= MAX_VERIFY_VERTICES {
            let report = verify_reduction(&g, true)?;
            if !report.passed() {
                return Err(Failure::new(
                    EXIT_PRECONDITION,
                    format!(
                        "boxed reduction failed verification: {}",
                        report.mismatches.join("; ")
                    ),
                ));
            }
        } else {
            eprintln!("boxed reduction not re-verified: more than {MAX_VERIFY_VERTICES} vertices");
        }
    }
    write_output(Some(output), &serialize_instance(&inst))?;
    Ok(0)
}

fn mis(path: &Path, q: Option<usize>) -> CliResult {
    let g = parse_graph(&read(path)?)?;
    let r = solve_mis_bruteforce(&g)?;
    let mut text = String::new();
    if let Some(q) = q {
        text.push_str(if r.answers(q) { "yes\n" } else { "no\n" });
    }
    let witness: Vec<String> = r.witness.iter().map(ToString::to_string).collect();
    text.push_str(&format!("size {}\nwitness {}\n", r.size, witness.join(" ")));
    write_output(None, text.as_bytes())?;
    Ok(0)
}

/// Problems with an optimal solution file, or an empty list if it checks.
fn check_optimal(inst: &BlpInstance, file: &SolutionFile) -> Result<Vec<String>, Failure> {
    let mut problems = Vec::new();
    let Some(value) = &file.value else {
        return Ok(vec!["optimal solution without a value".into()]);
    };
    if file.x.len() != inst.n_l {
        return Ok(vec![format!(
            "x has {} entries, expected {}",
            file.x.len(),
            inst.n_l
        )]);
    }
    if file.x.iter().any(|v| v < &Rational::default()) {
        problems.push("x has a negative entry".into());
    }
    match inst.sense {
        Sense::Pessimistic => {
            let e = pessimistic_evaluate(inst, &file.x)?;
            if !e.feasible {
                problems.push(format!(
                    "{} is not pessimistic-feasible",
                    format_vec(&file.x)
                ));
            } else if &e.value != value {
                problems.push(format!(
                    "objective is {} but the file claims {value}",
                    e.value
                ));
            }
        }
        Sense::Optimistic => {
            let Some(y) = &file.y_witness else {
                return Ok(vec!["optimistic solution without a follower witness".into()]);
            };
            if y.len() != inst.n_f {
                return Ok(vec![format!(
                    "y has {} entries, expected {}",
                    y.len(),
                    inst.n_f
                )]);
            }
            if !inst.follower_feasible(&file.x, y) {
                problems.push("witness is not feasible for the follower".into());
            } else if dot(&inst.follower_cost, y) != eval_phi_direct(inst, &file.x)? {
                problems.push("witness is not a follower optimum".into());
            }
            if !inst.leader_rows_hold(&file.x, y) {
                problems.push("leader rows are violated".into());
            }
            let obj = inst.leader_objective(&file.x, y);
            if &obj != value {
                problems.push(format!("objective is {obj} but the file claims {value}"));
            }
        }
    }
    Ok(problems)
}

fn check(inst_path: &Path, sol_path: &Path) -> CliResult {
    let inst = load_instance(inst_path)?;
    let file = SolutionFile::parse(&read(sol_path)?)?;
    let problems = match file.status {
        SolveStatus::Optimal => check_optimal(&inst, &file)?,
        SolveStatus::Infeasible => {
            // an infeasibility claim is checked by solving again
            let args = SolveArgs {
                method: Method::Auto,
                space: None,
                strict_faces: false,
                force: true,
            };
            match solve_instance(&inst, &args)?.status {
                SolveStatus::Infeasible => Vec::new(),
                SolveStatus::Optimal => vec!["the instance has a feasible solution".into()],
            }
        }
    };
    if problems.is_empty() {
        write_output(None, b"ok\n")?;
        Ok(0)
    } else {
        for p in &problems {
            eprintln!("check failed: {p}");
        }
        write_output(None, b"failed\n")?;
        Ok(EXIT_INFEASIBLE)
    }
}

fn gen(family: &str, seed: u64, params: GenParams, output: &Path) -> CliResult {
    let family: Family = family.parse()?;
    let inst = generate(family, seed, params)?;
    write_output(Some(output), &serialize_instance(&inst))?;
    Ok(0)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate { instance } => validate(&instance),
        Command::Solve {
            instance,
            method,
            space,
            strict_faces,
            force,
            output,
        } => solve(
            &instance,
            SolveArgs {
                method,
                space,
                strict_faces,
                force,
            },
            output.as_deref(),
        ),
        Command::ValueFn {
            instance,
            pieces,
            at,
        } => value_fn(&instance, pieces, at.as_deref()),
        Command::ReduceMis {
            graph,
            output,
            boxed,
        } => reduce(&graph, &output, boxed),
        Command::Mis { graph, q } => mis(&graph, q),
        Command::Check { instance, solution } => check(&instance, &solution),
        Command::Gen {
            family,
            seed,
            nl,
            nf,
            ml,
            mf,
            output,
        } => gen(&family, seed, GenParams { nl, nf, ml, mf }, &output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
