use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use ldv_cli::{case_list, compare, run, RunConfig};

#[derive(Parser)]
#[command(name = "ldv", version, about = "BGK solver with local discrete velocity grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file.
    Run {
        config: PathBuf,
        /// Output directory (default: `out/<config name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; overrides the config (1 runs serially).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Relative errors of profile `a` against reference `b`.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Fail (exit code 1) when an L-infinity error exceeds this.
        #[arg(long)]
        linf: Option<f64>,
    },
    /// List the built-in cases.
    CaseList,
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, out, workers } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if workers.is_some() {
                cfg.workers = workers;
            }
            let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
            let out = out.unwrap_or_else(|| PathBuf::from("out").join(stem));
            let s = run(&cfg, &out)?;
            println!(
                "{} steps to t = {} in {:.3} s; max drift {:.2e} {:.2e} {:.2e}; min f {:.3e}; max nodes {}",
                s.steps,
                s.final_time,
                s.wall_seconds,
                s.max_drift[0],
                s.max_drift[1],
                s.max_drift[2],
                s.min_value,
                s.max_nodes
            );
            for p in &s.profiles {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::Compare { a, b, linf } => {
            let (report, pass) = compare(&a, &b, linf)?;
            print!("{report}");
            Ok(pass)
        }
        Command::CaseList => {
            print!("{}", case_list());
            Ok(true)
        }
    }
}
