use std::path::PathBuf;
use std::process::ExitCode;

use adiabatic_wkb::harness::{self, RunConfig, SCENARIOS};
use clap::{Parser, Subcommand};

const RUN_HELP: &str = "\
Config file (JSON):
  system            {mass = 1, hbar = 1, energy, potential}
  system.potential  {\"type\": \"constant\", \"value\"} | {\"type\": \"linear\", \"a\", \"b\"}
                    | {\"type\": \"harmonic\", \"omega\"} | {\"type\": \"quartic\", \"g\"}
                    | {\"type\": \"tabulated\", \"x\": [..], \"v\": [..]}
  grid              {x_start, x_end, count}
  methods           subset of oracle, wkb, wkb-adiabatic, cubic, cubic-basis, roots, farfield
  alpha             gauge parameter of the 3x3 system (default -0.5)
  epsilon           adiabatic bookkeeping parameter (default 1.0)
  order             0..=2; default 1 for wkb-adiabatic, 0 for cubic methods
  x_ref             WKB normalisation/matching point (default x_start)
  anchor            cubic-WKB matching point, snapped to the grid (default x_ref)
  init              {psi: [re, im] = [1, 0], dpsi: [re, im] = [0, 0]} at x_start
  exclusion_radius  distance from turning points left out of WKB errors (default 0)
  output_dir        used when --out-dir is not given (default ./out)

Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure.";

#[derive(Parser)]
#[command(
    name = "adiabatic-wkb",
    version,
    about = "WKB and cubic-WKB wave functions from adiabatic expansions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the methods listed in a JSON config
    #[command(after_help = RUN_HELP)]
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Reproduce one of the canned comparisons
    Scenario {
        #[arg(value_parser = SCENARIOS)]
        name: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out_dir } => RunConfig::load(&config).and_then(|cfg| {
            let dir = out_dir
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            harness::run(&cfg)?.write(&dir)
        }),
        Command::Scenario { name, out_dir } => harness::scenario(&name).and_then(|out| {
            out.write(&out_dir.unwrap_or_else(|| PathBuf::from("out").join(&name)))
        }),
    };
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
