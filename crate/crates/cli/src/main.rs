//! `chanent`: relative entropies, entropies and resource measures of quantum
//! channels from the command line.
//!
//! Exit codes: 0 success, 2 validation failure, 3 a checked value disagrees
//! with its reference, 4 parse or I/O error.

mod channel_file;
mod commands;
mod report;
mod reproduce;

use std::process::ExitCode;
use std::time::Instant;

use chanent_core::divergence::DivergenceKind;
use chanent_core::properties::{CLOSED_FORM_SLACK, OPTIMIZER_SLACK, WITNESS_MARGIN};
use chanent_core::resource::{CoherenceConfig, FreeScope, FreeSetKind};
use chanent_core::OptimizerConfig;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use commands::EntanglementBound;
use report::RunReport;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Validation(String),
    /// Some checked values fall outside their references.
    Mismatch(usize),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Mismatch(_) => 3,
            CliError::Parse(_) | CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Mismatch(n) => write!(f, "{n} checked value(s) disagree with their reference"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Set {
    D,
    C,
    Dc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scope {
    Channels,
    Measurements,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundArg {
    Lower,
    Upper,
}

/// Channel files are JSON `{name, dim_in, dim_out, kraus}`; `bundled:<name>`
/// selects a shipped channel (n0, identity2, depolarizing2, dephasing2,
/// bellprep, plusminus-measurement).
#[derive(Debug, Parser)]
#[command(name = "chanent", version, about = "Relative entropies and resource measures of quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Seed of every random start and sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Random restarts of each search.
    #[arg(long, global = true, default_value_t = 64)]
    restarts: usize,

    /// Step tolerance of the searches; for `validate`, the trace-preservation tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Adds the wall-clock runtime to the report (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,

    /// Prints every default and exits.
    #[arg(long, global = true)]
    show_config: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Loads a channel file and checks shapes and trace preservation.
    Validate { channel: String },
    /// Divergence of a channel from a reference channel or from the depolarizing channel.
    Divergence {
        /// dA, dPhi, dAB, sA, sPhi or sAB.
        kind: DivergenceKind,
        channel: String,
        #[arg(required_unless_present = "depolarizing", conflicts_with = "depolarizing")]
        reference: Option<String>,
        #[arg(long)]
        depolarizing: bool,
    },
    /// Channel entropy, `log2 d_out` minus the divergence from the depolarizing channel.
    Entropy { kind: DivergenceKind, channel: String },
    /// Relative entropy of coherence against a free set.
    Coherence {
        #[arg(long, value_enum)]
        set: Set,
        channel: String,
        /// Free channels searched; defaults to `measurements` for files flagged as measurements.
        #[arg(long, value_enum)]
        scope: Option<Scope>,
    },
    /// Bounds on the relative entropy of entanglement across an inferred bipartition.
    Entanglement {
        #[arg(long, value_enum)]
        bound: BoundArg,
        channel: String,
    },
    /// Property grid of the six divergences on seeded random instances.
    Properties {
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Worked examples with expected and computed values.
    ReproducePaper,
}

#[derive(Serialize)]
struct ShownConfig {
    seed: u64,
    restarts: usize,
    optimizer: OptimizerShown,
    coherence_outer: OptimizerShown,
    coherence_inner: OptimizerShown,
    coherence_rounds: usize,
    validation_tol: f64,
    properties_samples: usize,
    closed_form_slack: f64,
    optimizer_slack: f64,
    witness_margin: f64,
}

#[derive(Serialize)]
struct OptimizerShown {
    restarts: usize,
    max_iters: usize,
    step_tolerance: f64,
    structured_starts: bool,
    initial_step: f64,
}

impl From<&OptimizerConfig> for OptimizerShown {
    fn from(c: &OptimizerConfig) -> Self {
        Self {
            restarts: c.restarts,
            max_iters: c.max_iters,
            step_tolerance: c.step_tolerance,
            structured_starts: c.structured_starts,
            initial_step: c.initial_step,
        }
    }
}

fn show_config(cfg: &OptimizerConfig, format: Format) -> String {
    let coh = CoherenceConfig::from_final(cfg);
    let shown = ShownConfig {
        seed: cfg.seed,
        restarts: cfg.restarts,
        optimizer: cfg.into(),
        coherence_outer: (&coh.outer).into(),
        coherence_inner: (&coh.inner).into(),
        coherence_rounds: coh.rounds,
        validation_tol: chanent_core::channels::TP_TOL,
        properties_samples: 50,
        closed_form_slack: CLOSED_FORM_SLACK,
        optimizer_slack: OPTIMIZER_SLACK,
        witness_margin: WITNESS_MARGIN,
    };
    let json = serde_json::to_string_pretty(&shown).expect("config serializes");
    match format {
        Format::Json => json,
        // flatten the JSON into `key = value` lines
        Format::Text => {
            let value: serde_json::Value = serde_json::from_str(&json).expect("round trip");
            let mut out = String::new();
            flatten("", &value, &mut out);
            out.trim_end().to_string()
        }
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut String) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        other => *out += &format!("{prefix} = {other}\n"),
    }
}

fn run(cli: &Cli, cfg: &OptimizerConfig, report: &mut RunReport) -> Result<(), CliError> {
    let Some(command) = &cli.command else {
        return Err(CliError::Parse("no command given; see --help".into()));
    };
    match command {
        Command::Validate { channel } => {
            commands::validate(report, channel, cli.tol.unwrap_or(chanent_core::channels::TP_TOL))
        }
        Command::Divergence { kind, channel, reference, .. } => {
            commands::divergence(report, *kind, channel, reference.as_deref(), cfg)
        }
        Command::Entropy { kind, channel } => commands::entropy(report, *kind, channel, cfg),
        Command::Coherence { set, channel, scope } => {
            let set = match set {
                Set::D => FreeSetKind::DetectionIncoherent,
                Set::C => FreeSetKind::CreationIncoherent,
                Set::Dc => FreeSetKind::DetectionCreationIncoherent,
            };
            let scope = scope.map(|s| match s {
                Scope::Channels => FreeScope::Channels,
                Scope::Measurements => FreeScope::Measurements,
            });
            commands::coherence(report, set, channel, scope, cfg)
        }
        Command::Entanglement { bound, channel } => {
            let which = match bound {
                BoundArg::Lower => EntanglementBound::Lower,
                BoundArg::Upper => EntanglementBound::Upper,
            };
            commands::entanglement(report, which, channel, cfg)
        }
        Command::Properties { samples } => commands::properties(report, cli.seed, *samples),
        Command::ReproducePaper => reproduce::run(report, cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let mut cfg = OptimizerConfig::default().with_seed(cli.seed).with_restarts(cli.restarts);
    if let (Some(tol), false) = (cli.tol, matches!(cli.command, Some(Command::Validate { .. }))) {
        cfg.step_tolerance = tol;
    }
    if cli.show_config {
        println!("{}", show_config(&cfg, cli.format));
        return ExitCode::SUCCESS;
    }

    let command = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let mut report = RunReport::new(command, cli.seed);
    let start = Instant::now();
    let mut outcome = run(&cli, &cfg, &mut report);
    if cli.timing {
        report.runtime_ms = Some(start.elapsed().as_millis() as u64);
    }
    if outcome.is_ok() && report.failures() > 0 {
        outcome = Err(CliError::Mismatch(report.failures()));
    }
    if !report.results.is_empty() || outcome.is_ok() {
        match cli.format {
            Format::Text => print!("{}", report.to_text()),
            Format::Json => println!("{}", report.to_json()),
        }
    }
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chanent: {e}");
            ExitCode::from(e.code())
        }
    }
}
