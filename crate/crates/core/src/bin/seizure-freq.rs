use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use seizure_freq::commands::{
    cmd_convert, cmd_evaluate, cmd_expand, cmd_fill, cmd_generate, cmd_stats, cmd_verify, ClientSpec, CommandError,
    GenerateArgs, Scheme, VerifyArgs,
};
use seizure_freq::config::RunConfig;
use seizure_freq::OutputFormat;

/// Seizure-frequency label tooling: template expansion, synthetic letter
/// generation and verification, and evaluation.
#[derive(Parser)]
#[command(name = "seizure-freq", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand description templates into (description, label) pairs.
    Expand {
        #[arg(long)]
        templates: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draft placeholder letters from base letters and description pairs.
    Generate {
        #[arg(long)]
        bases: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out_drafts: PathBuf,
        #[arg(long)]
        out_identities: PathBuf,
        /// Use the offline scripted client.
        #[arg(long)]
        mock: bool,
        #[arg(long)]
        concurrency: Option<usize>,
    },
    /// Replace placeholders in drafts with their synthetic identities.
    Fill {
        #[arg(long)]
        drafts: PathBuf,
        #[arg(long)]
        identities: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Screen letters by re-inferring their labels; keep exact matches.
    Verify {
        #[arg(long)]
        letters: PathBuf,
        #[arg(long)]
        exemplars: Option<PathBuf>,
        /// Retained letters.
        #[arg(long)]
        out: PathBuf,
        /// Per-record pass history.
        #[arg(long)]
        outcomes: Option<PathBuf>,
        /// LaTeX table of discards per pass.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        mock: bool,
        #[arg(long)]
        concurrency: Option<usize>,
    },
    /// Score predictions against gold labels.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// purist, pragmatic or both.
        #[arg(long, default_value = "both")]
        scheme: Scheme,
        /// Format for predictions that do not declare one
        /// (x_per_month, pragmatic, label, cot).
        #[arg(long)]
        format: Option<OutputFormat>,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Class distribution of one or more label files.
    Stats {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Render labelled records as predictions in a given output format.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        format: OutputFormat,
        #[arg(long)]
        out: PathBuf,
    },
}

fn client_spec(mock: bool, cfg: &RunConfig) -> Result<ClientSpec, CommandError> {
    if mock {
        return Ok(ClientSpec::Mock(cfg.mock));
    }
    cfg.client
        .clone()
        .map(ClientSpec::Http)
        .ok_or_else(|| CommandError::Usage("no [client] section in the config; pass --mock for the offline client".into()))
}

fn report_failures<T: serde::Serialize>(failures: &[T]) {
    for f in failures {
        eprintln!("failed: {}", serde_json::to_string(f).unwrap_or_default());
    }
}

fn run(cli: Cli) -> Result<(), CommandError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| CommandError::Usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Expand { templates, out } => {
            let r = cmd_expand(&templates, &out)?;
            println!(
                "{} pairs from {} templates ({} duplicate descriptions dropped)",
                r.pairs, r.templates, r.duplicates
            );
        }
        Command::Generate {
            bases,
            pairs,
            out_drafts,
            out_identities,
            mock,
            concurrency,
        } => {
            let spec = client_spec(mock, &cfg)?;
            let args = GenerateArgs {
                bases: &bases,
                pairs: &pairs,
                out_drafts: &out_drafts,
                out_identities: &out_identities,
                seed: cfg.seed,
                concurrency: concurrency.unwrap_or(cfg.screening.concurrency),
                retry: cfg.retry,
            };
            let r = cmd_generate(&args, &spec)?;
            report_failures(&r.failures);
            println!("{} drafts, {} failures, {} requests", r.drafts, r.failures.len(), r.requests);
            if r.client_down() {
                return Err(client_down());
            }
        }
        Command::Fill { drafts, identities, out } => {
            let r = cmd_fill(&drafts, &identities, &out)?;
            report_failures(&r.failures);
            println!("{} letters, {} failures", r.letters, r.failures.len());
            if !r.failures.is_empty() {
                return Err(CommandError::Data(format!("{} records could not be filled", r.failures.len())));
            }
        }
        Command::Verify {
            letters,
            exemplars,
            out,
            outcomes,
            table,
            mock,
            concurrency,
        } => {
            let spec = client_spec(mock, &cfg)?;
            let mut screening = cfg.screening();
            if let Some(n) = concurrency {
                screening.concurrency = n;
            }
            let args = VerifyArgs {
                letters: &letters,
                exemplars: exemplars.as_deref(),
                out_retained: &out,
                out_outcomes: outcomes.as_deref(),
                out_table: table.as_deref(),
                screening,
            };
            let r = cmd_verify(&args, &spec)?;
            report_failures(&r.failures);
            print!("{}", r.table);
            if r.client_down() {
                return Err(client_down());
            }
        }
        Command::Evaluate {
            gold,
            predictions,
            scheme,
            format,
            out,
        } => {
            let r = cmd_evaluate(&gold, &predictions, scheme, format, &cfg.normalization, out.as_deref())?;
            print!("{}", r.render());
        }
        Command::Stats { files } => print!("{}", cmd_stats(&files, &cfg.normalization)?),
        Command::Convert { input, format, out } => {
            let n = cmd_convert(&input, format, &cfg.normalization, &out)?;
            println!("{n} records written to {}", display(&out));
        }
    }
    Ok(())
}

fn client_down() -> CommandError {
    CommandError::Client(seizure_freq::pipeline::ClientError::Transport(
        "every request failed; see the failures above".into(),
    ))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
