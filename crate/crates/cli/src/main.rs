use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

mod examples;
mod report;
mod spec;
mod tasks;

use report::RunReport;
use spec::{Diagnostic, ProblemSpec, Severity};

const EXIT_SCHEMA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "monodromy-cli", version, about = "Monodromy and cocycle computations for Fuchsian systems, driven by JSON specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a problem specification and write its report.
    Run {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        /// Report destination (stdout when omitted).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Directory for sampled CSV tables.
        #[arg(long, value_name = "DIR")]
        csv: Option<PathBuf>,
        /// Overrides `numerics.tol`.
        #[arg(long)]
        tol: Option<f64>,
        /// Overrides `numerics.K`.
        #[arg(long, value_name = "K")]
        order: Option<usize>,
        /// Worker threads for independent sweep entries.
        #[arg(long, value_name = "N", default_value_t = 1)]
        jobs: usize,
    },
    /// Schema and semantic checks without numerics; prints the diagnostics as JSON.
    Validate {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
    },
    /// Write the worked example specifications into a directory.
    Examples {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            spec,
            out,
            csv,
            tol,
            order,
            jobs,
        } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let mut problem = match spec::parse(&text) {
                Ok(p) => p,
                Err(e) => return Ok(schema_failure(vec![schema_diagnostic(&e)])),
            };
            if let Some(t) = tol {
                problem.numerics.tol = t;
            }
            if let Some(k) = order {
                problem.numerics.order = k;
            }
            let errors: Vec<Diagnostic> = problem.check().into_iter().filter(|d| d.severity == Severity::Error).collect();
            if !errors.is_empty() {
                return Ok(schema_failure(errors));
            }
            run(&problem, out, csv, jobs)
        }
        Command::Validate { spec } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let diags = match spec::parse(&text) {
                Ok(p) => p.check(),
                Err(e) => vec![schema_diagnostic(&e)],
            };
            println!("{}", serde_json::to_string_pretty(&diags)?);
            let failed = diags.iter().any(|d| d.severity == Severity::Error);
            Ok(if failed { ExitCode::from(EXIT_SCHEMA) } else { ExitCode::SUCCESS })
        }
        Command::Examples { out } => {
            std::fs::create_dir_all(&out)?;
            for (name, value) in examples::all() {
                let path = out.join(format!("{name}.json"));
                std::fs::write(&path, serde_json::to_string_pretty(&value)? + "\n")?;
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn schema_diagnostic(e: &spec::SchemaError) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        pointer: e.pointer.clone(),
        message: e.message.clone(),
    }
}

fn schema_failure(diags: Vec<Diagnostic>) -> ExitCode {
    let body = json!({ "error": "schema", "diagnostics": diags });
    eprintln!("{}", serde_json::to_string_pretty(&body).expect("diagnostics serialize"));
    ExitCode::from(EXIT_SCHEMA)
}

fn run(problem: &ProblemSpec, out: Option<PathBuf>, csv: Option<PathBuf>, jobs: usize) -> anyhow::Result<ExitCode> {
    let outcome = with_jobs(jobs, || tasks::run(problem))?;
    match outcome {
        Ok(output) => {
            let report = RunReport::new(problem, output.results, output.diagnostics);
            match out {
                Some(path) => std::fs::write(&path, report.to_json()).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{}", report.to_json()),
            }
            if let Some(dir) = csv {
                for table in &output.tables {
                    table.write_to(&dir).with_context(|| format!("writing {}.csv", table.name))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(f) => {
            let body = json!({
                "error": "numeric",
                "module": f.module,
                "operation": f.operation,
                "message": f.error.to_string(),
                "partial": f.partial,
            });
            eprintln!("{}", serde_json::to_string_pretty(&body)?);
            Ok(ExitCode::from(EXIT_NUMERIC))
        }
    }
}

#[cfg(feature = "parallel")]
fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<T>(jobs: usize, f: impl FnOnce() -> T) -> anyhow::Result<T> {
    if jobs > 1 {
        eprintln!("warning: built without the `parallel` feature; --jobs {jobs} runs sequentially");
    }
    Ok(f())
}
