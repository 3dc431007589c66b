use clap::Parser;
use infty_cli::{run, Cli, CliError, Format};
use std::process::ExitCode;

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("INFTY_THREADS") else { return Ok(()) };
    let n: usize = text.trim().parse().map_err(|_| CliError::Usage(format!("INFTY_THREADS=`{text}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| run(&cli)).and_then(|report| {
        let text = match cli.format {
            Format::Json => report.to_json(),
            Format::Csv => report.to_csv().map_err(|e| CliError::Io(e.to_string()))?,
        };
        match &cli.output {
            Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        Ok(report.pass)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
