use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sgdlab::diagnostics::{check_c1_continuity, verify_smoothness};
use sgdlab::harness::{self, emit, RunOptions, VerdictStatus};
use sgdlab::{Error, RngStream};

#[derive(Parser)]
#[command(name = "sgdlab", version, about = "Run and check stochastic optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a named reproduction from the catalog.
    Repro {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List the named reproductions.
    List,
    /// Parse a config and certify its instance without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn read_config(path: &PathBuf) -> Result<harness::ExperimentSpec, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    harness::parse_config(&text)
}

fn print_verdicts<'a>(verdicts: impl Iterator<Item = (&'a String, &'a harness::Verdict)>) {
    for (k, v) in verdicts {
        let tag = match v.status {
            VerdictStatus::Pass => "PASS",
            VerdictStatus::Fail => "FAIL",
            VerdictStatus::Skip => "SKIP",
        };
        println!("{tag} {k}: {}", v.message);
    }
}

fn dispatch(command: Command) -> Result<bool, Error> {
    match command {
        Command::Run { config, out, workers } => {
            let spec = read_config(&config)?;
            let result = harness::run_experiment_with(&spec, RunOptions { workers })?;
            for p in emit::emit_experiment(&result, &out)? {
                println!("wrote {}", p.display());
            }
            print_verdicts(result.verdicts.iter());
            Ok(result.passed())
        }
        Command::Repro { name, out, workers } => {
            let repro = harness::find_reproduction(&name)?;
            let result = harness::run_reproduction(&repro, RunOptions { workers })?;
            for p in emit::emit_reproduction(&result, &out)? {
                println!("wrote {}", p.display());
            }
            print_verdicts(result.verdicts.iter());
            Ok(result.passed())
        }
        Command::List => {
            for r in harness::list_reproductions() {
                println!("{}\n  {}\n  expected: {}", r.name, r.description, r.expected);
            }
            Ok(true)
        }
        Command::Validate { config } => {
            let spec = read_config(&config)?;
            let built = harness::build_instance(&spec)?;
            let inst = &built.instance;
            let mut rng = RngStream::new(0, 0);
            let ratio = verify_smoothness(inst, 1000, &mut rng)?;
            let mut ok = ratio <= 1.0 + 1e-6;
            println!("instance {}: smoothness ratio {ratio:.12}", inst.id());
            if inst.piecewise().is_some() {
                let c1 = check_c1_continuity(inst, 1e-9)?;
                println!("C1 continuity at tol 1e-9: {}", if c1.pass { "pass" } else { "fail" });
                ok &= c1.pass;
            }
            if !ok {
                return Err(Error::Contract(format!("instance {} failed certification", inst.id())));
            }
            println!("ok");
            Ok(true)
        }
    }
}
