use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use closedform::bench::{run_bench, BenchConfig};
use closedform::parse::parse_expr_with;
use closedform::problem::{read_problem, PdeProblem};
use closedform::verify::{check_equivalence, verify_with, Equivalence, VerifyContext};
use closedform::{export_solution, solve, Expr, SearchConfig, ZeroVerdict};

const GRAMMAR_HELP: &str = "\
usage:
  closedform solve <problem> [--budget N] [--max-insertions M] [--seed S] [--out file.json] [--no-timing]
  closedform verify <problem> --candidate \"<expr>\"
  closedform bench <dir> [--report out.csv] [--json out.json] [--seed S] [--no-timing]
  closedform equiv <problem> --a \"<expr>\" --b \"<expr>\"

expressions: + - * / ^, unary -, parentheses, exp log sin cos sqrt;
  ^ binds tightest and is right-associative; identifiers are letters.
exit codes: 0 success, 2 failure, 1 usage error";

#[derive(Parser)]
#[command(name = "closedform", version, about = "Closed-form PDE solutions by staged subtree insertion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a closed-form solution.
    Solve {
        problem: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        max_insertions: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the solution record here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall time as 0 so output is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Check a candidate against the PDE and initial condition.
    Verify {
        problem: PathBuf,
        #[arg(long)]
        candidate: String,
    },
    /// Solve every *.prob file in a directory.
    Bench {
        dir: PathBuf,
        /// CSV report path; printed to stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_timing: bool,
    },
    /// Decide whether two solution families coincide.
    Equiv {
        problem: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

enum Outcome {
    Success,
    Failure,
    Usage(String),
}

fn load(path: &Path) -> Result<PdeProblem, Outcome> {
    read_problem(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        Outcome::Failure
    })
}

fn expression(problem: &PdeProblem, text: &str) -> Result<Expr, Outcome> {
    parse_expr_with(text, &problem.plain_context()).map_err(|e| Outcome::Usage(format!("cannot parse `{text}`: {e}")))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Outcome> {
    std::fs::write(path, bytes).map_err(|e| {
        eprintln!("cannot write {}: {e}", path.display());
        Outcome::Failure
    })
}

fn run(cmd: Command) -> Result<Outcome, Outcome> {
    match cmd {
        Command::Solve { problem, budget, max_insertions, seed, out, no_timing } => {
            let p = load(&problem)?;
            let mut cfg = SearchConfig::for_problem(&p);
            cfg.seed = seed;
            cfg.record_timing = !no_timing;
            if let Some(b) = budget {
                if b == 0 {
                    return Err(Outcome::Usage("--budget must be positive".into()));
                }
                cfg.budget = b;
            }
            if let Some(m) = max_insertions {
                if m == 0 {
                    return Err(Outcome::Usage("--max-insertions must be at least 1".into()));
                }
                cfg.max_insertions = m;
            }
            match solve(&p, &cfg) {
                Ok(rec) => {
                    println!("solution: {}", rec.expression);
                    for f in &rec.free_params {
                        match &f.reference {
                            Some(r) => println!("  free {} (reference {r})", f.name),
                            None => println!("  free {}", f.name),
                        }
                    }
                    for (k, v) in &rec.resolved_params {
                        println!("  resolved {k} = {v}");
                    }
                    println!("candidates: {}", rec.stats.candidates_evaluated);
                    let json = export_solution(&rec);
                    match out {
                        Some(path) => write(&path, &json)?,
                        None => print!("{}", String::from_utf8_lossy(&json)),
                    }
                    Ok(Outcome::Success)
                }
                Err(e) => {
                    println!("no solution: {e}");
                    Ok(Outcome::Failure)
                }
            }
        }
        Command::Verify { problem, candidate } => {
            let p = load(&problem)?;
            let e = expression(&p, &candidate)?;
            let ctx = VerifyContext { refs: p.ref_values.clone(), full_report: true, ..VerifyContext::default() };
            let r = verify_with(&p, &e, &ctx);
            println!("candidate: {}", r.candidate);
            if let Some(err) = &r.error {
                println!("error: {err}");
            }
            println!("residual: {}", r.residual_simplified);
            match &r.pde_verdict {
                ZeroVerdict::WitnessNonzero { point, value } => {
                    let at: Vec<String> = point.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
                    println!("pde: witness-nonzero (value {value:.6e} at {})", at.join(", "));
                }
                v => println!("pde: {}", v.label()),
            }
            for (k, v) in &r.resolved {
                println!("resolved {k} = {v}");
            }
            println!("ic: {}", if r.ic_pass { "pass" } else { "fail" });
            println!("fitness: {}", r.fitness());
            Ok(if r.passed() { Outcome::Success } else { Outcome::Failure })
        }
        Command::Bench { dir, report, json, seed, no_timing } => {
            let cfg = BenchConfig { seed, record_timing: !no_timing, ..BenchConfig::default() };
            let rep = run_bench(&dir, &cfg).map_err(|e| {
                eprintln!("{e}");
                Outcome::Failure
            })?;
            let csv = rep.to_csv().map_err(|e| {
                eprintln!("{e}");
                Outcome::Failure
            })?;
            match report {
                Some(path) => {
                    write(&path, &csv)?;
                    for r in &rep.rows {
                        println!("{:<20} {:<10} {}", r.name, r.status.as_str(), r.solution);
                    }
                }
                None => print!("{}", String::from_utf8_lossy(&csv)),
            }
            if let Some(path) = json {
                write(&path, &rep.to_json())?;
            }
            let s = &rep.summary;
            eprintln!("{} recovered, {} equivalent, {} failed", s.recovered, s.equivalent, s.failed);
            Ok(if rep.any_failed() { Outcome::Failure } else { Outcome::Success })
        }
        Command::Equiv { problem, a, b } => {
            let p = load(&problem)?;
            let ea = expression(&p, &a)?;
            let eb = expression(&p, &b)?;
            match check_equivalence(&ea, &eb, &p.coefficients) {
                Equivalence::Equivalent(map) => {
                    println!("equivalent");
                    for (k, v) in &map {
                        println!("  {k} = {v}");
                    }
                    Ok(Outcome::Success)
                }
                Equivalence::Distinct => {
                    println!("distinct");
                    Ok(Outcome::Failure)
                }
                Equivalence::Undecided => {
                    println!("undecided");
                    Ok(Outcome::Failure)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", e.kind());
            eprintln!("{GRAMMAR_HELP}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command).unwrap_or_else(|o| o) {
        Outcome::Success => ExitCode::SUCCESS,
        Outcome::Failure => ExitCode::from(2),
        Outcome::Usage(msg) => {
            eprintln!("{msg}");
            eprintln!("{GRAMMAR_HELP}");
            ExitCode::from(1)
        }
    }
}
