mod args;
mod commands;
mod error;
mod table;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use error::{CliError, Result};

fn run(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {threads} threads: {e}")))?;
    }

    let table = match &cli.command {
        Command::Bounds(a) => commands::bounds(a)?,
        Command::Sweep(a) => commands::sweep_cmd(a)?,
        Command::Baselines(a) => commands::baselines(a)?,
        Command::Simulate(a) => commands::simulate(a)?,
        Command::BinaryExample(a) => commands::binary_example(a)?,
    };

    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    match cli.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => table.write_json(&mut out)?,
    }
    out.flush()?;

    if !table.any_feasible() {
        return Err(CliError::Infeasible("no row of the output is feasible".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("isac-fbl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
