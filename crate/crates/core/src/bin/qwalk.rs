use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qwalk::runner::{self, RunOptions, EXIT_ERROR, EXIT_INVALID};
use qwalk::verify::{self, Suite};

/// Quantum walk simulator and weak-limit diagnostics.
#[derive(Parser)]
#[command(name = "qwalk", version)]
struct Cli {
    /// Worker threads; defaults to RAYON_NUM_THREADS or all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Exit with status 3 if the run produced warnings.
        #[arg(long)]
        strict: bool,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks: lattice, plancherel, birkhoff or all.
    Verify { suite: Suite },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} threads: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    }
    let code = match cli.command {
        Command::Run { config, strict, out } => runner::run_file(
            &config,
            &RunOptions {
                strict,
                out,
                base_dir: None,
            },
        ),
        Command::Verify { suite } => {
            let mut failed = 0;
            for id in suite.criteria() {
                let v = verify::criterion(*id);
                println!("{v}");
                failed += usize::from(!v.passed);
            }
            if failed == 0 {
                0
            } else {
                eprintln!("{failed} criteria failed");
                EXIT_ERROR
            }
        }
    };
    ExitCode::from(code as u8)
}
