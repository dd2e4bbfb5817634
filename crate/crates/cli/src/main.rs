use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use cuboid_cli::artifacts::{Stage, Workspace};
use cuboid_cli::error::{CliError, EXIT_CLAIM_FAILED, EXIT_ERROR, EXIT_PASS};
use cuboid_cli::pipeline::Pipeline;
use cuboid_cli::report::{Claim, ReportFormat};

/// Exact verification of the node, curve, lattice and symmetry data of the
/// cuboid surface.
#[derive(Parser)]
#[command(name = "cuboid", version)]
struct Args {
    /// Directory holding the cached artifacts.
    #[arg(long, global = true, default_value = "cuboid-work")]
    workspace: PathBuf,
    /// Compute missing upstream artifacts instead of failing.
    #[arg(long, global = true)]
    build: bool,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Nodes and curves, with their fields of definition.
    Catalog,
    /// The intersection matrix of the catalog.
    Gram,
    /// Picard lattice and canonical class.
    Lattice,
    /// Automorphisms and the combined symmetry group.
    Group,
    /// Fixed space of a Sylow 2-subgroup on the lattice mod 2.
    FixedSpace,
    /// First Galois cohomology of the lattice.
    Cohomology,
    /// Candidate curve classes of low degree.
    Classify,
    /// Check every claim against the cached artifacts and write the report.
    VerifyAll,
}

impl Command {
    fn stage(&self) -> Option<Stage> {
        Some(match self {
            Command::Catalog => Stage::Catalog,
            Command::Gram => Stage::Gram,
            Command::Lattice => Stage::Lattice,
            Command::Group => Stage::Group,
            Command::FixedSpace => Stage::FixedSpace,
            Command::Cohomology => Stage::Cohomology,
            Command::Classify => Stage::Classify,
            Command::VerifyAll => return None,
        })
    }
}

fn print_claims(claims: &[Claim], format: Format) {
    match format {
        Format::Text => claims.iter().for_each(|c| println!("{}", c.line())),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(claims).expect("claims serialize")
        ),
    }
}

fn run(args: &Args) -> Result<bool, CliError> {
    if let Some(jobs) = args.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    let pipeline = Pipeline::new(Workspace::open(&args.workspace)?, args.build);
    let start = Instant::now();
    let pass = match args.command.stage() {
        Some(stage) => {
            let out = pipeline.run_stage(stage)?;
            out.notes.iter().for_each(|n| eprintln!("{n}"));
            print_claims(&out.claims, args.format);
            out.claims.iter().all(|c| c.pass)
        }
        None => {
            let (report, notes) = pipeline.verify_all()?;
            notes.iter().for_each(|n| eprintln!("{n}"));
            let format = match args.format {
                Format::Text => ReportFormat::Text,
                Format::Json => ReportFormat::Json,
            };
            print!("{}", report.export(format));
            report.pass
        }
    };
    eprintln!("done in {:.1?}", start.elapsed());
    Ok(pass)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CLAIM_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
