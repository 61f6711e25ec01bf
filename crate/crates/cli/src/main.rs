use std::path::PathBuf;
use std::process::ExitCode;

use avcausal_cli::output::{output_root, OUT_ENV};
use avcausal_cli::{figure_config, run_config, run_path, run_sweep, CliError, ScenarioConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "avcausal", version, about = "Run audiovisual causal-inference network scenarios")]
struct Cli {
    /// Output root (overrides the AVCAUSAL_OUT environment variable).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config file.
    Run { config: PathBuf },
    /// Run the bundled config for a figure (fig2 .. fig12).
    Figure {
        id: String,
        /// Print the bundled config instead of running it.
        #[arg(long)]
        show: bool,
    },
    /// Run a config over key=value overrides (comma-separated values form a
    /// cartesian product).
    Sweep { config: PathBuf, overrides: Vec<String> },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = cli.out.unwrap_or_else(output_root);
    let result = match cli.command {
        Command::Run { config } => run_path(&config, &root).map(|(dir, out)| report(&dir, &out.warnings)),
        Command::Figure { id, show: true } => figure_config(&id).and_then(|cfg| {
            println!("{}", toml::to_string(&cfg).map_err(|e| CliError::Output(e.to_string()))?);
            Ok(())
        }),
        Command::Figure { id, show: false } => {
            figure_config(&id).and_then(|cfg| run_config(&cfg, &root)).map(|(dir, out)| report(&dir, &out.warnings))
        }
        Command::Sweep { config, overrides } => ScenarioConfig::load(&config)
            .and_then(|cfg| run_sweep(&cfg, &overrides, &root))
            .map(|dir| println!("wrote {}", dir.display())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Io(_)) {
                eprintln!("(output root is set by --out or {OUT_ENV})");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report(dir: &std::path::Path, warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {}", dir.display());
}
