use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use heapguard::report::{self, Summary};
use heapguard::xcheck::{self, Suite, XcheckConfig};
use heapguard::{parse_domains, parse_mutant, CliError, RunConfig};
use hg_guard::Format;

#[derive(Parser)]
#[command(name = "heapguard", version, about = "Polymorphic information-flow guards for heap-manipulating methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Heap domain: deep, shal, dumb or all.
    #[arg(long, default_value = "deep")]
    domain: String,
    /// JSON file of method summaries for calls.
    #[arg(long)]
    stubs: Option<PathBuf>,
    /// Analyze calls without a summary under the worst-case effect.
    #[arg(long)]
    assume_worst: bool,
    /// Per-method timeout in seconds.
    #[arg(long, default_value_t = 300)]
    timeout: u64,
    /// Cap on live diagram nodes per method.
    #[arg(long)]
    node_cap: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn config(&self, inputs: Vec<PathBuf>) -> Result<RunConfig, CliError> {
        Ok(RunConfig {
            inputs,
            domains: parse_domains(&self.domain)?,
            stubs: self.stubs.clone(),
            timeout: Duration::from_secs(self.timeout),
            node_cap: self.node_cap,
            assume_worst: self.assume_worst,
            jobs: self.jobs,
            seed: self.seed,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Infer one guard per method and domain.
    Analyze {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// text, json or dnf.
        #[arg(long, default_value = "text")]
        format: Format,
        /// Also write method,domain,refcount,statebits,millis,class rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Encode every method and check its SCFG without solving.
    Validate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an oracle suite against the domains and inferred guards.
    Xcheck {
        /// inductive, abstraction or ni.
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value = "deep")]
        domain: String,
        #[arg(long)]
        refs: Option<usize>,
        /// Methods for the ni suite; a generated corpus otherwise.
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        /// Seeded transformer bug to check against.
        #[arg(long, default_value = "none")]
        mutant: String,
        /// Statement budget per run of the ni suite.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// text or json.
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Summarize documents written by `analyze --format json`.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// text or json.
        #[arg(long, default_value = "text")]
        format: Format,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn write(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Analyze { inputs, common, format, csv } => {
            let records = heapguard::analyze(&common.config(inputs)?)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report::document(&records)).expect("serializable")),
                Format::Text | Format::Dnf => {
                    for r in &records {
                        println!("{}", if format == Format::Text { r.text() } else { r.dnf_text() });
                    }
                    eprint!("{}", Summary::of(&records).text());
                }
            }
            if let Some(p) = csv {
                write(&p, &report::csv(&records))?;
            }
            Ok(0)
        }
        Command::Validate { inputs, common } => {
            let vs = heapguard::validate::validate(&common.config(inputs)?)?;
            for v in &vs {
                println!("{}", v.text());
            }
            Ok(if vs.iter().all(|v| v.report.is_ok()) { 0 } else { 1 })
        }
        Command::Xcheck { suite, domain, refs, program, trials, mutant, budget, seed, jobs, format } => {
            let cfg = XcheckConfig {
                suite,
                domains: parse_domains(&domain)?,
                refs,
                trials,
                mutant: parse_mutant(&mutant)?,
                program,
                budget,
                seed,
                jobs: jobs.max(1),
            };
            let outcomes = xcheck::xcheck(&cfg)?;
            if format == Format::Json {
                let all: Vec<_> = outcomes.iter().map(|o| o.json.clone()).collect();
                println!("{}", serde_json::to_string_pretty(&all).expect("serializable"));
            } else {
                for o in &outcomes {
                    println!("{}", o.line);
                }
            }
            Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 })
        }
        Command::Report { inputs, format, csv } => {
            let mut records = Vec::new();
            for p in &inputs {
                let name = p.display().to_string();
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io { path: name.clone(), source })?;
                let doc: serde_json::Value =
                    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{name}: not JSON: {e}")))?;
                records.extend(
                    report::records_of(&doc).ok_or_else(|| CliError::Usage(format!("{name}: not an analyze document")))?,
                );
            }
            let summary = Summary::of(&records);
            if format == Format::Json {
                println!("{}", serde_json::to_string_pretty(&summary.to_json()).expect("serializable"));
            } else {
                print!("{}", summary.text());
            }
            if let Some(p) = csv {
                write(&p, &report::csv(&records))?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("heapguard: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
