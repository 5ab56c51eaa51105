use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use streamsec::cli::{self, Format, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "streamsec", version, about = "Simulate timed-stream protocol components and check secrecy")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and report leaks and aborts.
    Run {
        /// honest, attack, fixed-honest, fixed-attack, or a scenario file
        scenario: String,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        /// Atom label overrides, one `name = label` per line
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Check every wire of a scenario for matching ports and types.
    CheckInterfaces {
        scenario: String,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Print the adversary's analysed knowledge at time unit `t`.
    Knowledge {
        scenario: String,
        t: u64,
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = match args.command {
        Command::Run { scenario, horizon, format, params } => {
            let format = match format {
                FormatArg::Text => Format::Text,
                FormatArg::Structured => Format::Structured,
            };
            cli::cmd_run(&scenario, horizon, format, params.as_deref())
        }
        Command::CheckInterfaces { scenario, params } => cli::cmd_check_interfaces(&scenario, params.as_deref()),
        Command::Knowledge { scenario, t, params } => cli::cmd_knowledge(&scenario, t, params.as_deref()),
    };
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}
