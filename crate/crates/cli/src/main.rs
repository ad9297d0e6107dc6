use clap::{Parser, Subcommand, ValueEnum};
use jetmech_cli::{corpus, report, CliError, JobConfig, Outcome, RunOptions};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "jetmech",
    version,
    about = "Higher-order Lagrangian mechanics and Hamilton-Jacobi checks"
)]
struct Cli {
    /// Job config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report.txt, report.json and trajectory.csv.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sampling seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Residual tolerance; overrides the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Energy function, momenta, Euler-Lagrange equations, implicit system, Hamiltonian.
    Derive,
    /// Integrate the implicit system with fixed-step RK4.
    Simulate,
    /// Hamilton-Jacobi residuals for a potential or one-form.
    HjCheck,
    /// Symmetry and integrability criteria and the resulting solution for affine Lagrangians.
    HjSolveAffine,
    /// The built-in example corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusCmd,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusCmd {
    /// Run entries and compare with their expected outcomes.
    Run {
        /// Only entries whose id contains this string; an empty string selects none.
        #[arg(long)]
        filter: Option<String>,
    },
    /// List entries.
    List {
        #[arg(long)]
        filter: Option<String>,
    },
}

fn load(path: Option<&Path>) -> Result<JobConfig, CliError> {
    let path = path.ok_or_else(|| CliError::config("--config is required for this command"))?;
    JobConfig::load(path)
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let run = RunOptions {
        seed: cli.seed,
        tol: cli.tol,
    };
    let cfg = || load(cli.config.as_deref());
    match &cli.command {
        Cmd::Derive => jetmech_cli::derive(&cfg()?, run),
        Cmd::Simulate => jetmech_cli::simulate(&cfg()?, run),
        Cmd::HjCheck => jetmech_cli::hj_check(&cfg()?, run),
        Cmd::HjSolveAffine => jetmech_cli::hj_solve_affine(&cfg()?, run),
        Cmd::Corpus {
            action: CorpusCmd::Run { filter },
        } => Ok(corpus::run(filter.as_deref(), run)),
        Cmd::Corpus {
            action: CorpusCmd::List { filter },
        } => Ok(corpus::list(filter.as_deref())),
    }
}

fn write_out(dir: &Path, out: &Outcome) -> Result<(), CliError> {
    let io =
        |e: std::io::Error| CliError::new(4, format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("report.txt"), report::to_text(&out.report)).map_err(io)?;
    std::fs::write(dir.join("report.json"), report::to_json(&out.report)).map_err(io)?;
    if let Some(csv) = &out.csv {
        std::fs::write(dir.join("trajectory.csv"), csv).map_err(io)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|out| {
        if let Some(dir) = &cli.out {
            write_out(dir, &out)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            let text = match cli.format {
                Format::Text => report::to_text(&out.report),
                Format::Json => report::to_json(&out.report),
            };
            print!("{text}");
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
