use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use coincidence_cli::output::write_outputs;
use coincidence_cli::{report, run_scan, run_suite, run_verify, Budget, Document, ExperimentConfig, Outcome, Preset, Record, Scan, Suite};

/// Environment variable capping the worker thread count.
const THREADS_VAR: &str = "COINLAB_THREADS";

#[derive(Parser)]
#[command(name = "coinlab", version, about = "Coincidence arrangements in massive free field theory: checks and scans")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite; exits 1 when a check fails.
    Verify { suite: Suite },
    /// Run a parameter scan and write its CSV table.
    Scan { scan: Scan },
    /// Run every suite and every scan into one document.
    Suite,
    /// Aggregate the JSON documents of a directory into markdown.
    Report {
        /// Directory of result documents (defaults to the output directory).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Markdown file to write (defaults to report.md in the input directory).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Parameter preset used when no config file is given.
    #[arg(long, global = true, value_enum, conflicts_with = "config")]
    preset: Option<Preset>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Wall-clock budget in seconds.
    #[arg(long, global = true)]
    budget: Option<f64>,
    /// Skip truncation-error refinements.
    #[arg(long, global = true)]
    no_eta: bool,
    /// Energy bound E.
    #[arg(long = "E", global = true)]
    energy: Option<f64>,
    /// Number of slots N.
    #[arg(long = "N", global = true)]
    slots: Option<usize>,
    #[arg(long, global = true)]
    mass: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Time window of the damping function.
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    lengths: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long, global = true)]
    samples: Option<usize>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::preset(self.preset.unwrap_or_default()),
        };
        c.seed = self.seed.or(c.seed);
        if let Some(out) = &self.out {
            c.output = out.clone();
        }
        c.budget_seconds = self.budget.or(c.budget_seconds);
        c.measure_eta &= !self.no_eta;
        c.model.energy = self.energy.unwrap_or(c.model.energy);
        c.model.mass = self.mass.unwrap_or(c.model.mass);
        c.scan.slots = self.slots.unwrap_or(c.scan.slots);
        c.verify.beta = self.beta.unwrap_or(c.verify.beta);
        c.verify.delta = self.delta.unwrap_or(c.verify.delta);
        c.scan.samples = self.samples.unwrap_or(c.scan.samples);
        for (value, target) in [
            (&self.deltas, &mut c.scan.deltas),
            (&self.lambdas, &mut c.scan.lambdas),
            (&self.lengths, &mut c.scan.lengths),
            (&self.radii, &mut c.scan.radii),
        ] {
            if let Some(v) = value {
                *target = v.clone();
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let n: usize = value
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_VAR}={value} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn summarize(record: &Record) {
    match record {
        Record::Verify(v) => {
            let failed = v.checks.iter().filter(|c| !c.passed).count();
            let status = if v.passed { "pass" } else { "FAIL" };
            println!("verify {:<13} {status}  {} checks, {failed} failed", v.suite, v.checks.len());
        }
        Record::Scan(s) => {
            let values: Vec<String> = s.points.iter().map(|p| format!("{:.3e}", p.estimate.value)).collect();
            println!("scan   {:<13} {} = {}", s.experiment, s.parameter, values.join(", "));
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let config = match cli.overrides.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(ExitCode::from(2));
        }
    };
    if let Command::Report { input, output } = &cli.command {
        let dir = input.clone().unwrap_or_else(|| config.output.clone());
        let docs = report::collect(&dir)?;
        let path = output.clone().unwrap_or_else(|| dir.join("report.md"));
        std::fs::write(&path, report::render(&docs)).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        return Ok(ExitCode::SUCCESS);
    }

    let budget = Budget::new(config.budget_seconds);
    let (command, stem, outcome): (String, String, Outcome) = match &cli.command {
        Command::Verify { suite } => (
            format!("verify {}", suite.name()),
            format!("verify-{}", suite.name()),
            run_verify(*suite, &config, &budget)?,
        ),
        Command::Scan { scan } => (
            format!("scan {}", scan.name()),
            format!("scan-{}", scan.name()),
            run_scan(*scan, &config, &budget)?,
        ),
        Command::Suite => ("suite".to_string(), "suite".to_string(), run_suite(&config, &budget, |_| {})?),
        Command::Report { .. } => unreachable!("handled above"),
    };
    outcome.records.iter().for_each(summarize);
    let doc = Document::new(&command, &config, outcome.records, outcome.partial);
    for path in write_outputs(&config.output, &stem, &doc)? {
        println!("wrote {}", path.display());
    }
    if doc.partial {
        eprintln!("time budget of {:?} s exceeded; results are partial", config.budget_seconds.unwrap_or_default());
        return Ok(ExitCode::from(3));
    }
    Ok(if doc.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
