use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kstab::cli::{self, Command, JobConfig, Options, Pipeline};

#[derive(Parser)]
#[command(name = "kstab", version, about = "Weighted K-stability invariants of toric manifolds and admissible P^1-bundles")]
struct Args {
    /// JSON job configuration; `-` reads standard input.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write the tabular sweep (scan, abreu, df, pbundle curves) as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pipeline: Option<PipelineArg>,
    /// Quadrature order.
    #[arg(long, global = true, value_name = "N")]
    order: Option<usize>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Include wall time in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    /// Multiply Futaki-type values by (2 pi)^dim.
    #[arg(long, global = true)]
    torus_factor: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum PipelineArg {
    Float,
    Exact,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Weighted slope c.
    Slope,
    /// Extremal affine function w_ext.
    Wext,
    /// Futaki invariant of a convex PL function.
    Futaki,
    /// Scan simple PL functions for destabilizers.
    Scan,
    /// Weighted scalar curvature of the Guillemin potential.
    Abreu,
    /// Donaldson-Futaki invariant from lattice sums.
    Df,
    /// Admissible projective line bundles.
    Pbundle {
        #[command(subcommand)]
        command: PbundleCmd,
    },
}

#[derive(Subcommand)]
enum PbundleCmd {
    /// Extremal profile Theta and (A1, A2).
    Solve,
    /// F(z0) at the given points.
    Futaki {
        /// Comma-separated rationals in (-1, 1); defaults to the 99-point grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z0: Option<Vec<String>>,
    },
    /// Profile, positivity verdict and Futaki curve.
    Report,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::from(cli::EXIT_OK as u8),
        Err((code, msg)) => {
            eprintln!("kstab: {msg}");
            ExitCode::from(code as u8)
        }
    }
}

fn run(args: Args) -> Result<(), (i32, String)> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| (cli::EXIT_VALIDATION, format!("--threads: {e}")))?;
    }
    let text = match &args.config {
        None => "{}".to_string(),
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| (cli::EXIT_VALIDATION, format!("reading standard input: {e}")))?;
            s
        }
        Some(p) => fs::read_to_string(p).map_err(|e| (cli::EXIT_VALIDATION, format!("{}: {e}", p.display())))?,
    };
    let fail = |e: kstab::Error| (cli::exit_code(&e), format!("{} error: {e}", e.module()));
    let config = JobConfig::from_json(&text).map_err(fail)?;
    let (command, z0) = match args.command {
        Cmd::Slope => (Command::Slope, None),
        Cmd::Wext => (Command::Wext, None),
        Cmd::Futaki => (Command::Futaki, None),
        Cmd::Scan => (Command::Scan, None),
        Cmd::Abreu => (Command::Abreu, None),
        Cmd::Df => (Command::Df, None),
        Cmd::Pbundle { command } => match command {
            PbundleCmd::Solve => (Command::PbundleSolve, None),
            PbundleCmd::Futaki { z0 } => (Command::PbundleFutaki, z0),
            PbundleCmd::Report => (Command::PbundleReport, None),
        },
    };
    let opts = Options {
        pipeline: args.pipeline.map(|p| match p {
            PipelineArg::Float => Pipeline::Float,
            PipelineArg::Exact => Pipeline::Exact,
            PipelineArg::Both => Pipeline::Both,
        }),
        order: args.order,
        z0,
        torus_factor: args.torus_factor,
        timing: args.timing,
    };
    let report = cli::run(command, &config, &opts).map_err(fail)?;
    let io = |path: &PathBuf, e: std::io::Error| (cli::EXIT_COMPUTATION, format!("{}: {e}", path.display()));
    if let Some(path) = &args.csv {
        let table = report.table.clone().unwrap_or_default();
        let text = table.to_csv().map_err(|e| (cli::EXIT_COMPUTATION, e.to_string()))?;
        fs::write(path, text).map_err(|e| io(path, e))?;
    }
    let json = report.to_json();
    match &args.out {
        Some(path) => fs::write(path, json).map_err(|e| io(path, e))?,
        None => print!("{json}"),
    }
    Ok(())
}
