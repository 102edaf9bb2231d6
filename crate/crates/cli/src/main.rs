use clap::{Parser, Subcommand};
use hybridem_cli::app::{self, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hybridem", version, about = "2D TM hybrid SIE-FEM scattering solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a scene config.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; overrides the config.
        #[arg(long)]
        threads: Option<usize>,
        /// Cross-check against the oracles and exit 4 on mismatch.
        #[arg(long)]
        self_check: bool,
    },
    /// Write the mesh of a scene config.
    Mesh {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, threads, self_check } => app::run(&config, &out, &RunOptions { threads, self_check }),
        Command::Mesh { config, out } => app::mesh(&config, &out),
    };
    match result {
        Ok(report) => {
            for (name, ok) in &report.checks {
                println!("{} {name}", if *ok { "ok  " } else { "FAIL" });
            }
            for f in &report.files {
                println!("wrote {f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
