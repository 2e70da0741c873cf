use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use larex_cli::{diff_files, run, RunOptions};

#[derive(Debug, Parser)]
#[command(name = "larex", version, about = "Layout analysis for scanned early printed books")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment every page of a book directory and write PageXML.
    Run {
        /// Directory of page images (subdirectories are books of their own).
        #[arg(long)]
        books: PathBuf,
        /// Profile document (larex-profile.json format).
        #[arg(long)]
        profile: PathBuf,
        /// Output directory for the XML files.
        #[arg(long)]
        out: PathBuf,
        /// Also write `<stem>.lines.xml` with text lines.
        #[arg(long)]
        lines: bool,
        /// Replay `<stem>.edits.json` logs found beside the images.
        #[arg(long)]
        apply_edits: bool,
        /// Exit with status 1 when any page fails.
        #[arg(long)]
        strict: bool,
        /// Pages processed in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Per-type precision and recall of a prediction against ground truth.
    Diff {
        ground_truth: PathBuf,
        predicted: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Run {
            books,
            profile,
            out,
            lines,
            apply_edits,
            strict,
            jobs,
            json,
        } => {
            let opts = RunOptions {
                books,
                profile,
                out,
                lines,
                apply_edits,
                strict,
                jobs,
            };
            let summary = run(&opts).context("batch run failed")?;
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&summary)?)?;
            } else {
                write!(stdout, "{}", summary.render())?;
            }
            Ok(ExitCode::from(summary.exit_code(strict) as u8))
        }
        Command::Diff {
            ground_truth,
            predicted,
            json,
        } => {
            let report = diff_files(&ground_truth, &predicted)?;
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                write!(stdout, "{}", report.render())?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
