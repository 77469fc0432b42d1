//! `dapkit` command-line entry point.

mod commands;
mod output;
mod recipes;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dapkit::DapError;
use serde::Serialize;

use output::Format;

/// Usage errors (unknown subcommand or flag) exit with 2, as clap does.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }

    pub fn io(e: impl std::fmt::Display) -> Self {
        Self::new("io", e.to_string())
    }

    pub fn file(path: &Path, e: std::io::Error) -> Self {
        Self::new("io", format!("{}: {e}", path.display()))
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", message)
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            "usage" => EXIT_USAGE,
            "domain" => 3,
            "parse" => 4,
            "field" => 5,
            "resource" => 6,
            "rank" => 7,
            "structural" => 8,
            "lookup" => 9,
            "truncation" => 10,
            "consistency" => 11,
            "io" => 12,
            _ => 1,
        }
    }
}

impl From<DapError> for CliError {
    fn from(e: DapError) -> Self {
        Self::new(e.kind(), e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dapkit", version, about = "Donor-acceptor pair modeling toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Materials database; the bundled example is used when absent.
    #[arg(long, global = true, env = "DAPKIT_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output file; a `<out>.manifest.json` sidecar is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for grid evaluations.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Donor-acceptor shells of a host lattice.
    Shells(commands::ShellsArgs),
    /// ZPL energies of the first shells of a pair.
    ZplSeries(commands::ZplSeriesArgs),
    /// Slope and intercept of a ZPL series against r_b/R.
    ZplFit(commands::ZplFitArgs),
    /// Photoluminescence lineshape from a vibronic model file.
    PlSpectrum(commands::PlSpectrumArgs),
    /// Dipole change between ground and excited charge snapshots.
    Dipole(commands::DipoleArgs),
    /// Quadratic fit of ZPL shift against applied field.
    StarkFit(commands::StarkFitArgs),
    /// Side-by-side dipole coupling and NV spin-spin reference against distance.
    InteractionMap(commands::InteractionMapArgs),
    /// Radiative lifetime.
    Lifetime(commands::LifetimeArgs),
    /// Charge transition levels from total-energy records.
    Ctl(commands::CtlArgs),
    /// Regenerate the data behind a figure or table from bundled inputs.
    Reproduce(recipes::ReproduceArgs),
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Shells(_) => "shells".into(),
            Command::ZplSeries(_) => "zpl-series".into(),
            Command::ZplFit(_) => "zpl-fit".into(),
            Command::PlSpectrum(_) => "pl-spectrum".into(),
            Command::Dipole(_) => "dipole".into(),
            Command::StarkFit(_) => "stark-fit".into(),
            Command::InteractionMap(_) => "interaction-map".into(),
            Command::Lifetime(_) => "lifetime".into(),
            Command::Ctl(_) => "ctl".into(),
            Command::Reproduce(r) => format!("reproduce {}", r.recipe.name()),
        }
    }
}

/// What a subcommand hands back for emission.
pub struct Run {
    pub output: output::Output,
    /// Values resolved from files or defaults rather than flags.
    pub resolved: serde_json::Map<String, serde_json::Value>,
    pub inputs: Vec<output::Input>,
}

impl Run {
    pub fn new(output: output::Output) -> Self {
        Self { output, resolved: serde_json::Map::new(), inputs: Vec::new() }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new("resource", e.to_string()))?;
    }
    let ctx = commands::Context::load(&cli.global)?;
    let mut run = match &cli.command {
        Command::Shells(a) => commands::shells(&ctx, a)?,
        Command::ZplSeries(a) => commands::zpl_series(&ctx, a)?,
        Command::ZplFit(a) => commands::zpl_fit(&ctx, a)?,
        Command::PlSpectrum(a) => commands::pl_spectrum(&ctx, a)?,
        Command::Dipole(a) => commands::dipole(a)?,
        Command::StarkFit(a) => commands::stark_fit(a)?,
        Command::InteractionMap(a) => commands::interaction_map(a)?,
        Command::Lifetime(a) => commands::lifetime(&ctx, a)?,
        Command::Ctl(a) => commands::ctl(&ctx, a)?,
        Command::Reproduce(a) => recipes::reproduce(&ctx, a)?,
    };
    let format = cli.global.format.unwrap_or_else(|| run.output.default_format());
    let payload = run.output.render(format)?;

    let mut inputs = vec![ctx.database_input()];
    inputs.append(&mut run.inputs);
    let args = serde_json::to_value(&cli.command).expect("arguments serialize");
    let args = args.as_object().and_then(|o| o.values().next().cloned()).unwrap_or_default();
    let parameters = serde_json::json!({
        "arguments": args,
        "global": cli.global,
        "resolved": run.resolved,
    });
    let manifest = output::manifest(&cli.command.name(), parameters, &inputs);
    output::emit(&payload, cli.global.out.as_deref(), &manifest)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.message.replace('\n', " ");
            eprintln!("error: kind={} msg={msg:?}", e.kind);
            ExitCode::from(e.exit_code())
        }
    }
}
