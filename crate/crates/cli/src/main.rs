use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use featmask::harness::{
    export_report, export_traces, report_markdown, run_experiment, ExperimentConfig, ReportFormat,
};
use featmask::Error;

#[derive(Parser)]
#[command(name = "featmask", version, about = "Binary feature mask selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Generate the 300 × 100 synthetic dataset and run every method on it with boosted trees.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Report format; both are written when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Where per-run selection traces go. Defaults to `<out>/traces`.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

fn execute(config: &ExperimentConfig, out: &Path, output: &OutputArgs) -> Result<(), Error> {
    let report = run_experiment(config)?;
    let formats = match output.format {
        Some(Format::Csv) => vec![ReportFormat::Csv],
        Some(Format::Markdown) => vec![ReportFormat::Markdown],
        None => vec![ReportFormat::Csv, ReportFormat::Markdown],
    };
    export_report(&report, out, &formats).map_err(|e| e.in_stage("export"))?;
    if !report.traces.is_empty() {
        let dir = output.trace_dir.clone().unwrap_or_else(|| out.join("traces"));
        export_traces(&report.traces, &dir).map_err(|e| e.in_stage("export"))?;
    }
    print!("{}", report_markdown(&report));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run { config, out, output } => ExperimentConfig::from_file(config).and_then(|mut c| {
            if let Some(out) = out {
                c.output_dir = out.clone();
            }
            execute(&c, &c.output_dir, output)
        }),
        Command::Synth { seed, out, output } => execute(&ExperimentConfig::synthetic(*seed), out, output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
