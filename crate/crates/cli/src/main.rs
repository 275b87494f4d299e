//! `dyadic`: configuration-driven front end for the verification and simulation
//! workflows of the `dyadic` crate.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Command, Lemma, RunError};
use config::{parse_override, Effective, Ini};
use output::{emit, render_csv, render_json, Format, Header};

#[derive(Parser)]
#[command(name = "dyadic", version, about = "Littlewood-Paley checks and quintic NLS simulations on periodic grids")]
struct Cli {
    /// INI configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the command's random ensemble or initial data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Override a configuration value, `section.key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lebesgue, Besov and Triebel-Lizorkin norms of a field.
    Norms,
    /// Littlewood-Paley projection of a field.
    Project,
    /// Free Schrödinger evolution of a field.
    Evolve,
    /// Quintic NLS run; writes the decay trace.
    Simulate,
    /// Nonlinear decay plateau against the paired linear run.
    Decay,
    /// Scattering state, Cauchy table and remainder rate.
    Scatter,
    /// Wave operator by Picard iteration.
    Waveop,
    /// Ensemble checks of the harmonic-analysis inequalities.
    Verify {
        #[arg(value_enum)]
        lemma: Lemma,
    },
}

impl Cmd {
    fn command(&self) -> Command {
        match self {
            Cmd::Norms => Command::Norms,
            Cmd::Project => Command::Project,
            Cmd::Evolve => Command::Evolve,
            Cmd::Simulate => Command::Simulate,
            Cmd::Decay => Command::Decay,
            Cmd::Scatter => Command::Scatter,
            Cmd::Waveop => Command::Waveop,
            Cmd::Verify { lemma } => Command::Verify(*lemma),
        }
    }
}

fn run(cli: &Cli) -> Result<bool, RunError> {
    let command = cli.command.command();
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let ini = Ini::parse(&text)?;
    let mut overrides = cli.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    if let Some(seed) = cli.seed {
        overrides.push((command.seed_section().into(), "seed".into(), seed.to_string()));
    }
    if let Some(out) = &cli.out {
        overrides.push(("output".into(), "path".into(), out.display().to_string()));
    }
    if let Some(f) = cli.format {
        let name = match f {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        overrides.push(("output".into(), "format".into(), name.into()));
    }
    let eff = Effective::resolve(&command.schema(), &ini, &overrides)?;
    let format = Format::parse(eff.str("output", "format"))
        .ok_or_else(|| RunError::Config(format!("[output] format: expected csv or json, got '{}'", eff.str("output", "format"))))?;
    let seed: u64 = eff.get(command.seed_section(), "seed")?;
    let snapshot_path = eff.sections()["output"].contains_key("snapshot").then(|| eff.path("output", "snapshot")).flatten();

    let outcome = command.run(&eff)?;
    let header = Header::new(&command.name(), seed, outcome.grid.clone(), &eff);
    let bytes = match format {
        Format::Json => render_json(&header, &outcome.report),
        Format::Csv => render_csv(&header, &eff, &outcome.table),
    };
    emit(eff.path("output", "path").as_deref(), &bytes)?;
    if let (Some(path), Some(field)) = (snapshot_path, &outcome.snapshot) {
        let mut buf = Vec::new();
        dyadic::grid::io::write_snapshot(&mut buf, field)?;
        output::atomic_write(&path, &buf)?;
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed; see the report verdict");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
