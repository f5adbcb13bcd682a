use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nporder::features::BUILTIN_NAMES;
use nporder::{
    builtin_dryer_table, builtin_system, builtin_systems, compare_all, discrepancy_table,
    fit_model, load_dataset, load_feature_system, DependentVariable, FeatureSystem,
    TypologyDataset,
};

mod render;

#[derive(Parser)]
#[command(name = "nporder", version, about = "Poisson regression over noun-phrase word-order counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one feature system and print its weight table.
    Fit {
        /// Built-in system name or path to a feature-system CSV.
        #[arg(long)]
        system: String,
        #[command(flatten)]
        common: Common,
    },
    /// Fit several systems and rank them by log-likelihood.
    Compare {
        /// Systems to compare (repeatable); defaults to all built-ins.
        #[arg(long)]
        system: Vec<String>,
        /// Add AIC and BIC columns.
        #[arg(long)]
        aic_bic: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Per-order observed and predicted counts with signed chi-squared.
    Discrepancy {
        #[arg(long)]
        system: String,
        #[command(flatten)]
        common: Common,
    },
    /// Write the built-in dataset or a feature system as CSV.
    Export {
        #[command(subcommand)]
        what: ExportTarget,
        /// Write to this file instead of standard output.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExportTarget {
    Dataset,
    System { name: String },
}

#[derive(Args)]
struct Common {
    /// `builtin` or a path to a dataset CSV.
    #[arg(long, default_value = "builtin")]
    dataset: String,
    #[arg(long, value_enum, default_value_t = Dv::Adjusted)]
    dv: Dv,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Decimal places for text and csv output.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dv {
    Adjusted,
    Genera,
}

impl From<Dv> for DependentVariable {
    fn from(dv: Dv) -> Self {
        match dv {
            Dv::Adjusted => DependentVariable::AdjustedFrequency,
            Dv::Genera => DependentVariable::GeneraCount,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// A failure with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl fmt::Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }

    fn numerical(message: impl fmt::Display) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<nporder::Error> for Failure {
    fn from(e: nporder::Error) -> Self {
        if e.is_numerical() {
            Failure::numerical(e)
        } else {
            Failure::input(e)
        }
    }
}

fn resolve_system(arg: &str) -> Result<FeatureSystem, Failure> {
    if let Some(fs) = builtin_system(arg) {
        return Ok(fs);
    }
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(load_feature_system(path)?);
    }
    Err(Failure::input(format!(
        "unknown system `{arg}`; built-in systems are {}, or give a path to a CSV file",
        BUILTIN_NAMES.join(", ")
    )))
}

fn resolve_dataset(arg: &str) -> Result<TypologyDataset, Failure> {
    if arg == "builtin" {
        Ok(builtin_dryer_table())
    } else {
        Ok(load_dataset(arg)?)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Failure::input(format!("cannot write output: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Fit { system, common } => {
            let fs = resolve_system(&system)?;
            let ds = resolve_dataset(&common.dataset)?;
            let mf = fit_model(&fs, &ds, common.dv.into())?;
            if !mf.fit.converged {
                return Err(Failure::numerical(format!(
                    "fit of {} did not converge in {} iterations",
                    fs.name(),
                    mf.fit.iterations
                )));
            }
            let text = render::fit(&mf, common.format, common.precision as usize);
            emit(common.out.as_deref(), &text)
        }
        Command::Compare {
            system,
            aic_bic,
            common,
        } => {
            let systems = if system.is_empty() {
                builtin_systems()
            } else {
                system
                    .iter()
                    .map(|s| resolve_system(s))
                    .collect::<Result<_, _>>()?
            };
            let ds = resolve_dataset(&common.dataset)?;
            let report = compare_all(&systems, &ds, common.dv.into());
            let text = render::compare(&report, common.format, common.precision as usize, aic_bic);
            emit(common.out.as_deref(), &text)
        }
        Command::Discrepancy { system, common } => {
            let fs = resolve_system(&system)?;
            let ds = resolve_dataset(&common.dataset)?;
            let dv = common.dv.into();
            let mf = fit_model(&fs, &ds, dv)?;
            if !mf.fit.converged {
                return Err(Failure::numerical(format!("fit of {} did not converge", fs.name())));
            }
            let rows = discrepancy_table(&mf, &ds, dv)?;
            let text = render::discrepancy(&mf, rows, common.format, common.precision as usize);
            emit(common.out.as_deref(), &text)
        }
        Command::Export { what, out } => {
            let text = match what {
                ExportTarget::Dataset => builtin_dryer_table().to_csv(),
                ExportTarget::System { name } => resolve_system(&name)?.to_csv(),
            };
            emit(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
