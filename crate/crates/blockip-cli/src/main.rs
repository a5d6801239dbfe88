//! `blockip`: solve, generate, transform and inspect block-structured integer programs.
//!
//! Exit codes: 0 answered, 1 internal failure or oracle disagreement, 2 input
//! error, 3 resource limit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blockip::cone::{cone_constants, weyl_dual, DEFAULT_FACET_CAP};
use blockip::graver::graver_basis;
use blockip::instance::{format_instance, format_nfold_solution, format_twostage_witness, format_vector, parse_instance, Instance};
use blockip::model::{NFoldProgram, TwoStageProgram};
use blockip::nfold::{solve_nfold, NFoldOptions, NFoldOutcome};
use blockip::oracles::{solve_nfold_bf, solve_twostage_bf, BoxVerdict};
use blockip::polyhedral::construct_q;
use blockip::reductions::{gen_3sat, gen_random_cnf, gen_random_fourblock, gen_random_nfold, gen_random_twostage, gen_subset_sum, shrink_4block, RandomParams};
use blockip::twostage::{normalize_twostage, solve_twostage_direct, solve_twostage_residue, TwoStageOptions, TwoStageVerdict, DEFAULT_BUDGET};
use blockip::{Error, IntMat, IntVec, VectorSet};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Environment variable holding the default `--budget`.
const BUDGET_VAR: &str = "BLOCKIP_BUDGET";

#[derive(Parser)]
#[command(name = "blockip", version, about = "Exact solvers for two-stage and n-fold integer programs")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide or optimize a program.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Write a generated instance.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Rewrite an instance.
    #[command(subcommand)]
    Transform(TransformCommand),
    /// Print the cone and Graver data of each brick matrix.
    Analyze {
        file: PathBuf,
        /// Also print the Graver basis of every brick matrix.
        #[arg(long)]
        graver: bool,
        /// Also print the polyhedral certificate of residue zero.
        #[arg(long)]
        certificate: bool,
    },
    /// Cross-check the solver against exhaustive search in a box.
    Check {
        file: PathBuf,
        /// Bound on every variable in the exhaustive search.
        #[arg(long)]
        oracle_box: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Residue,
    Direct,
}

#[derive(Subcommand)]
enum SolveCommand {
    /// Feasibility of a two-stage program.
    TwoStage {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "residue")]
        engine: Engine,
        /// Print a witness after the verdict.
        #[arg(long)]
        solution: bool,
        /// Residue budget; defaults to $BLOCKIP_BUDGET.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Optimum of an n-fold program.
    Nfold {
        file: PathBuf,
        /// Initial decomposition threshold.
        #[arg(long, default_value_t = 4)]
        xi: u64,
        /// Print an optimal solution after the value.
        #[arg(long)]
        solution: bool,
        /// Branch-and-bound node budget; defaults to $BLOCKIP_BUDGET.
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Two-stage encoding of a random 3-CNF formula.
    Sat3 {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// n-fold encoding of subset sum; either `--items` or `--count` with `--max`.
    SubsetSum {
        /// Comma-separated item sizes.
        #[arg(long, value_delimiter = ',')]
        items: Vec<u64>,
        /// Number of random items.
        #[arg(long)]
        count: Option<usize>,
        /// Largest random item.
        #[arg(long, default_value_t = 20)]
        max: u64,
        /// Target; a random subset sum when omitted.
        #[arg(long)]
        target: Option<u64>,
        /// Comma-separated costs, one per item.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        costs: Vec<i64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random program with a planted solution.
    Random {
        #[arg(value_enum)]
        kind: RandomKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        globals: usize,
        #[arg(long, default_value_t = 2)]
        locals: usize,
        #[arg(long, default_value_t = 1)]
        rows: usize,
        #[arg(long, default_value_t = 1)]
        link_rows: usize,
        #[arg(long, default_value_t = 3)]
        bricks: usize,
        #[arg(long, default_value_t = 3)]
        delta: i64,
        #[arg(long, default_value_t = 10)]
        coupling: i64,
        /// Change one right-hand side entry so the planted solution no longer fits.
        #[arg(long)]
        perturb: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RandomKind {
    TwoStage,
    Nfold,
    Fourblock,
}

#[derive(Subcommand)]
enum TransformCommand {
    /// Rewrite a uniform 4-block program with all coupling entries in {-1, 0, 1}.
    #[command(name = "shrink-4block")]
    Shrink4block { input: PathBuf, output: PathBuf },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceLimit(_) => 3,
            Error::Internal(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write_out(output: Option<&Path>, text: String) -> Result<(String, u8), Failure> {
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            Ok((String::new(), 0))
        }
        None => Ok((text, 0)),
    }
}

fn budget(flag: Option<u64>, fallback: u64) -> Result<u64, Failure> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| input_error(format!("{BUDGET_VAR} must be a nonnegative integer, found `{v}`"))),
        Err(_) => Ok(fallback),
    }
}

fn two_stage(inst: Instance) -> Result<TwoStageProgram, Failure> {
    match inst {
        Instance::TwoStage(p) => Ok(p),
        _ => Err(input_error("expected a TWOSTAGE instance")),
    }
}

fn nfold(inst: Instance) -> Result<NFoldProgram, Failure> {
    match inst {
        Instance::NFold(p) => Ok(p),
        _ => Err(input_error("expected an NFOLD instance")),
    }
}

fn run(command: Command) -> Result<(String, u8), Failure> {
    match command {
        Command::Solve(SolveCommand::TwoStage {
            file,
            engine,
            solution,
            budget: b,
        }) => {
            let p = two_stage(read(&file)?)?;
            let opts = TwoStageOptions {
                budget: budget(b, DEFAULT_BUDGET)?,
                ..TwoStageOptions::default()
            };
            let verdict = match engine {
                Engine::Residue => solve_twostage_residue(&p, &opts)?,
                Engine::Direct => solve_twostage_direct(&p, &opts)?,
            };
            match verdict {
                TwoStageVerdict::Feasible(w) => {
                    let mut out = "FEASIBLE\n".to_string();
                    if solution {
                        out.push_str(&format_twostage_witness(&w));
                    }
                    Ok((out, 0))
                }
                TwoStageVerdict::Infeasible => Ok(("INFEASIBLE\n".into(), 0)),
                TwoStageVerdict::ResourceLimit(m) => Err(Error::ResourceLimit(m).into()),
            }
        }
        Command::Solve(SolveCommand::Nfold {
            file,
            xi,
            solution,
            budget: b,
        }) => {
            let p = nfold(read(&file)?)?;
            let mut opts = NFoldOptions {
                xi0: xi.max(1),
                ..NFoldOptions::default()
            };
            let nodes = budget(b, opts.mip.node_limit as u64)?;
            opts.mip.node_limit = usize::try_from(nodes).unwrap_or(usize::MAX);
            match solve_nfold(&p, &opts)? {
                NFoldOutcome::Optimum { value, solution: s } => {
                    let mut out = format!("OPTIMUM {value}\n");
                    if solution {
                        out.push_str(&format_nfold_solution(&s));
                    }
                    Ok((out, 0))
                }
                NFoldOutcome::Infeasible => Ok(("INFEASIBLE\n".into(), 0)),
                NFoldOutcome::Unbounded => Ok(("UNBOUNDED\n".into(), 0)),
                NFoldOutcome::ResourceLimit(m) => Err(Error::ResourceLimit(m).into()),
            }
        }
        Command::Gen(g) => generate(g),
        Command::Transform(TransformCommand::Shrink4block { input, output }) => {
            let Instance::FourBlock(p) = read(&input)? else {
                return Err(input_error("expected a FOURBLOCK instance"));
            };
            let q = shrink_4block(&p)?;
            write_out(Some(&output), format_instance(&Instance::FourBlock(q)))
        }
        Command::Analyze {
            file,
            graver,
            certificate,
        } => analyze(read(&file)?, graver, certificate).map(|s| (s, 0)),
        Command::Check { file, oracle_box } => check(read(&file)?, oracle_box),
    }
}

fn generate(g: GenCommand) -> Result<(String, u8), Failure> {
    match g {
        GenCommand::Sat3 {
            vars,
            clauses,
            seed,
            output,
        } => {
            if vars < 3 {
                return Err(input_error("a 3-CNF formula needs at least 3 variables"));
            }
            let f = gen_random_cnf(vars, clauses, seed);
            let mut text = String::from("# 3-CNF:");
            for c in &f.clauses {
                let _ = write!(text, " ({} {} {})", c[0], c[1], c[2]);
            }
            text.push('\n');
            text.push_str(&format_instance(&Instance::TwoStage(gen_3sat(&f))));
            write_out(output.as_deref(), text)
        }
        GenCommand::SubsetSum {
            mut items,
            count,
            max,
            target,
            costs,
            seed,
            output,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if let Some(n) = count {
                if !items.is_empty() {
                    return Err(input_error("give either --items or --count"));
                }
                items = (0..n).map(|_| rng.gen_range(1..=max.max(1))).collect();
            }
            if items.is_empty() {
                return Err(input_error("no items: give --items or --count"));
            }
            let t = target.unwrap_or_else(|| items.iter().filter(|_| rng.gen_bool(0.5)).sum());
            let costs = (!costs.is_empty()).then_some(costs.as_slice());
            let p = gen_subset_sum(&items, t, costs)?;
            let list: Vec<String> = items.iter().map(u64::to_string).collect();
            let text = format!("# items {} target {t}\n{}", list.join(","), format_instance(&Instance::NFold(p)));
            write_out(output.as_deref(), text)
        }
        GenCommand::Random {
            kind,
            seed,
            globals,
            locals,
            rows,
            link_rows,
            bricks,
            delta,
            coupling,
            perturb,
            output,
        } => {
            let params = RandomParams {
                globals,
                locals,
                rows,
                link_rows,
                bricks,
                delta,
                coupling,
                ..RandomParams::default()
            };
            let inst = match kind {
                RandomKind::TwoStage => Instance::TwoStage(gen_random_twostage(&params, seed, perturb).0),
                RandomKind::Nfold => Instance::NFold(gen_random_nfold(&params, seed, perturb).0),
                RandomKind::Fourblock => Instance::FourBlock(gen_random_fourblock(&params, seed, perturb).0),
            };
            write_out(output.as_deref(), format_instance(&inst))
        }
    }
}

fn write_matrix(out: &mut String, m: &IntMat) {
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(BigInt::to_string).collect();
        let _ = writeln!(out, "  {}", line.join(" "));
    }
}

fn write_set(out: &mut String, kw: &str, s: &VectorSet) {
    for v in s.vectors() {
        out.push_str("  ");
        out.push_str(&format_vector(kw, v));
    }
}

fn analyze(inst: Instance, graver: bool, certificate: bool) -> Result<String, Failure> {
    let matrices: Vec<IntMat> = match &inst {
        Instance::TwoStage(p) => normalize_twostage(p).types.into_iter().map(|t| t.d).collect(),
        Instance::NFold(p) => {
            let mut ds: Vec<IntMat> = Vec::new();
            for b in &p.bricks {
                if !ds.iter().any(|d| d.rows() == b.d.rows()) {
                    ds.push(b.d.clone());
                }
            }
            ds
        }
        Instance::FourBlock(p) => {
            let mut ds: Vec<IntMat> = Vec::new();
            for g in &p.groups {
                if !ds.iter().any(|d| d.rows() == g.d.rows()) {
                    ds.push(g.d.clone());
                }
            }
            ds
        }
    };
    let mut out = String::new();
    for (i, d) in matrices.iter().enumerate() {
        let _ = writeln!(out, "MATRIX {i}");
        write_matrix(&mut out, d);
        let gens = VectorSet::from_columns(d);
        let dual = weyl_dual(&gens);
        let _ = writeln!(out, "FACETS {}", dual.facets.len());
        write_set(&mut out, "f", &dual.facets);
        match cone_constants(&dual, DEFAULT_FACET_CAP) {
            Ok(k) => {
                let _ = writeln!(out, "CONSTANTS L {} M {} MHAT {} K {} B {}", k.l, k.m, k.mhat, k.k, k.b);
            }
            Err(e) if e.is_resource_limit() => {
                let _ = writeln!(out, "CONSTANTS skipped: {e}");
            }
            Err(e) => return Err(e.into()),
        }
        if graver {
            let g = graver_basis(d, &Default::default())?;
            let _ = writeln!(out, "GRAVER {}", g.elements.len());
            for e in &g.elements {
                out.push_str("  ");
                out.push_str(&format_vector("g", e.entries()));
            }
        }
        if certificate {
            let zero = IntVec::zeros(d.row_index().clone());
            let cert = match construct_q(&gens, &zero, &Default::default()) {
                Ok(c) => c,
                Err(e) if e.is_resource_limit() => {
                    let _ = writeln!(out, "CERTIFICATE skipped: {e}");
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let _ = writeln!(
                out,
                "CERTIFICATE modulus {} family {} closure {} inequalities {}",
                cert.modulus,
                cert.family.len(),
                cert.closure.len(),
                cert.inequalities.len()
            );
            for (a, rhs) in &cert.inequalities {
                let mut line = format_vector("q", a.entries());
                line.pop();
                let _ = writeln!(out, "  {line} >= {rhs}");
            }
        }
    }
    Ok(out)
}

fn check(inst: Instance, oracle_box: u64) -> Result<(String, u8), Failure> {
    match inst {
        Instance::TwoStage(p) => {
            let opts = TwoStageOptions {
                budget: budget(None, DEFAULT_BUDGET)?,
                ..TwoStageOptions::default()
            };
            // The direct engine answers when the residue count is out of reach.
            let solver = match solve_twostage_residue(&p, &opts) {
                Ok(TwoStageVerdict::ResourceLimit(_)) => solve_twostage_direct(&p, &opts)?,
                Err(e) if e.is_resource_limit() => solve_twostage_direct(&p, &opts)?,
                other => other?,
            };
            let oracle = solve_twostage_bf(&p, oracle_box, oracle_box)?;
            let in_box = |w: &blockip::model::TwoStageWitness| {
                let b = BigInt::from(oracle_box);
                w.u.entries().iter().chain(w.v.iter().flat_map(|v| v.entries().iter())).all(|x| *x <= b)
            };
            let (name, agree) = match (&solver, &oracle) {
                (TwoStageVerdict::Feasible(_), BoxVerdict::Feasible(_)) => ("FEASIBLE", true),
                (TwoStageVerdict::Feasible(w), BoxVerdict::Infeasible) => ("FEASIBLE", !in_box(w)),
                (TwoStageVerdict::Infeasible, BoxVerdict::Feasible(_)) => ("INFEASIBLE", false),
                (TwoStageVerdict::Infeasible, BoxVerdict::Infeasible) => ("INFEASIBLE", true),
                (TwoStageVerdict::ResourceLimit(m), _) => return Err(Error::ResourceLimit(m.clone()).into()),
            };
            let oracle_name = match oracle {
                BoxVerdict::Feasible(_) => "FEASIBLE",
                BoxVerdict::Infeasible => "INFEASIBLE",
            };
            report(name, oracle_name, agree)
        }
        Instance::NFold(p) => {
            let solver = solve_nfold(&p, &NFoldOptions::default())?;
            let oracle = solve_nfold_bf(&p, oracle_box)?;
            let b = BigInt::from(oracle_box);
            let (name, agree) = match (&solver, &oracle) {
                (NFoldOutcome::Optimum { value, solution }, BoxVerdict::Feasible((v, _))) => {
                    let fits = solution.bricks.iter().flatten().all(|(y, _)| y.entries().iter().all(|x| *x <= b));
                    // The box optimum can only be worse than the true optimum.
                    (format!("OPTIMUM {value}"), value <= v && (!fits || value == v))
                }
                (NFoldOutcome::Optimum { value, solution }, BoxVerdict::Infeasible) => {
                    let fits = solution.bricks.iter().flatten().all(|(y, _)| y.entries().iter().all(|x| *x <= b));
                    (format!("OPTIMUM {value}"), !fits)
                }
                (NFoldOutcome::Infeasible, o) => ("INFEASIBLE".to_string(), matches!(o, BoxVerdict::Infeasible)),
                (NFoldOutcome::Unbounded, _) => ("UNBOUNDED".to_string(), true),
                (NFoldOutcome::ResourceLimit(m), _) => return Err(Error::ResourceLimit(m.clone()).into()),
            };
            let oracle_name = match oracle {
                BoxVerdict::Feasible((v, _)) => format!("OPTIMUM {v}"),
                BoxVerdict::Infeasible => "INFEASIBLE".to_string(),
            };
            report(&name, &oracle_name, agree)
        }
        Instance::FourBlock(_) => Err(input_error("4-block programs have no solver to check")),
    }
}

fn report(solver: &str, oracle: &str, agree: bool) -> Result<(String, u8), Failure> {
    let out = format!("solver: {solver}\noracle (box-bounded): {oracle}\n{}\n", if agree { "AGREE" } else { "DISAGREE" });
    Ok((out, if agree { 0 } else { 1 }))
}
