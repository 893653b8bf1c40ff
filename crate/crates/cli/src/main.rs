use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mixfem::linalg::{write_matrix_market, write_vector};
use mixfem::study::{run_poisson_lm, run_stokes_brinkman, SolverKind, SolverOptions, StudyConfig, StudyResult};
use mixfem::Error;

#[derive(Parser, Debug)]
#[command(name = "mixfem", version, about = "Mixed-dimensional finite element convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a convergence study and print the error table.
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Problem {
    /// Poisson with an interface value imposed by a Lagrange multiplier.
    PoissonLm,
    /// Stokes–Brinkman with a multiplier-imposed inlet velocity.
    StokesBrinkman,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Solver {
    Direct,
    Cg,
    Minres,
    Gmres,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    problem: Problem,
    /// Spatial dimension (Stokes–Brinkman is 2D only).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Comma-separated list of subdivisions per axis.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    resolutions: Vec<usize>,
    /// Polynomial degree (pressure order for Stokes–Brinkman).
    #[arg(long, default_value_t = 1)]
    degree: usize,
    #[arg(long, value_enum, default_value_t = Solver::Direct)]
    solver: Solver,
    /// Relative residual tolerance of the iterative solvers.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    maxit: usize,
    /// Overrides the estimated quadrature degree of every integral.
    #[arg(long)]
    quadrature_degree: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the finest monolithic matrix (Matrix Market) and its
    /// right-hand side (`<path>.rhs`).
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    /// Write the finest primary field as CSV.
    #[arg(long)]
    export_solution: Option<PathBuf>,
}

fn config(args: &RunArgs) -> StudyConfig {
    let mut cfg = StudyConfig {
        dim: args.dim,
        resolutions: args.resolutions.clone(),
        degree: args.degree,
        solver: SolverOptions {
            kind: match args.solver {
                Solver::Direct => SolverKind::Direct,
                Solver::Cg => SolverKind::Cg,
                Solver::Minres => SolverKind::Minres,
                Solver::Gmres => SolverKind::Gmres,
            },
            tol: args.tol,
            maxit: args.maxit,
        },
        keep_finest: args.dump_matrix.is_some() || args.export_solution.is_some(),
        ..Default::default()
    };
    cfg.assembly.quadrature_degree = args.quadrature_degree;
    cfg
}

fn write_outputs(result: &StudyResult, args: &RunArgs) -> mixfem::Result<()> {
    let Some(finest) = &result.finest else { return Ok(()) };
    if let Some(path) = &args.dump_matrix {
        write_matrix_market(&finest.matrix, path)?;
        write_vector(&finest.rhs, rhs_path(path))?;
    }
    if let Some(path) = &args.export_solution {
        finest.fields[0].1.export_csv(path)?;
    }
    Ok(())
}

fn rhs_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".rhs");
    PathBuf::from(s)
}

/// Bad input reaching the library is a usage error; everything else is a
/// numerical or I/O failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resolution { source, .. } | Error::Block { source, .. } => exit_code(source),
        Error::InvalidArgument(_) | Error::UnsupportedElement(_) | Error::UnsupportedDegree { .. } | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn run(args: &RunArgs) -> mixfem::Result<String> {
    let cfg = config(args);
    let result = match args.problem {
        Problem::PoissonLm => run_poisson_lm(&cfg)?,
        Problem::StokesBrinkman => run_stokes_brinkman(&cfg)?,
    };
    write_outputs(&result, args)?;
    match args.format {
        Format::Csv => Ok(result.to_csv()),
        Format::Json => Ok(result.to_json()? + "\n"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    match run(&args) {
        Ok(table) => {
            print!("{table}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
