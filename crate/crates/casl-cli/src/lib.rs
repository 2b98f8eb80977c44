//! Command-line front end over the engine: load workspace files, run one
//! analysis, and render it as a table, JSON, or CSV.
//!
//! The whole CLI funnels through [`run`], which never touches the process:
//! it returns the exit code and both output streams, so tests drive it as a
//! plain function. Exit codes are part of the interface: 0 means the
//! analysis ran (and passed, where a verdict applies), 1 means it ran and
//! failed its check, 2 means the inputs were unusable. Identical inputs and
//! flags produce byte-identical output.

mod commands;
mod corpus;
mod render;

use std::ffi::OsString;
use std::io::IsTerminal;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use casl_core::abstraction::AggregatorKind;
use casl_core::dsl::LoweredWorkspace;

use commands::{AmbiguityArgs, ConsistencyArgs, ConsistencyModeArg, InterveneArgs, QuotientArgs};
use corpus::Corpus;
use render::Format;

// ── Public surface ───────────────────────────────────────────────────────────

/// Everything one invocation produced, ready for the process boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Run one invocation. `argv` includes the program name, exactly as
/// `std::env::args_os` provides it.
pub fn run<I, T>(argv: I) -> RenderedReport
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let text = err.render().to_string();
            return if err.exit_code() == 0 {
                RenderedReport {
                    exit_code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                RenderedReport {
                    exit_code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };

    let style = std::io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none();
    dispatch(cli.command, style)
}

// ── Argument grammar ─────────────────────────────────────────────────────────

#[derive(Parser)]
#[command(
    name = "casl",
    version,
    about = "Exact analyses of finite causal models, their abstractions, and audit designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Workspace file to load; repeat to combine several.
    #[arg(long = "file", value_name = "PATH")]
    files: Vec<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Default, clap::ValueEnum)]
enum AggregatorArg {
    /// Mean weighted by each realization's observational mass.
    #[default]
    Mean,
    /// Unweighted mean over realizations.
    Uniform,
    /// Smallest realization value.
    Min,
    /// Largest realization value.
    Max,
}

impl AggregatorArg {
    fn kind(self) -> AggregatorKind {
        match self {
            AggregatorArg::Mean => AggregatorKind::PopulationWeightedMean,
            AggregatorArg::Uniform => AggregatorKind::UniformMean,
            AggregatorArg::Min => AggregatorKind::Min,
            AggregatorArg::Max => AggregatorKind::Max,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and resolve workspace files, listing what they declare.
    Validate {
        /// Workspace files (same as --file).
        #[arg(value_name = "PATH")]
        paths: Vec<PathBuf>,

        #[command(flatten)]
        common: CommonArgs,
    },

    /// Interventional distribution of one model, exact or sampled.
    Intervene {
        #[command(flatten)]
        common: CommonArgs,

        /// Model declaration to query.
        #[arg(long, value_name = "NAME")]
        model: String,

        /// Force VAR=VALUE before evaluating; repeatable.
        #[arg(long = "do", value_name = "VAR=VALUE")]
        set: Vec<String>,

        /// Estimate by Monte Carlo with this many samples instead of
        /// enumerating exactly.
        #[arg(long, value_name = "N")]
        sample: Option<u64>,

        /// Seed for the sampler.
        #[arg(long, value_name = "SEED", default_value_t = 0)]
        seed: u64,

        /// Cap on exact enumeration of joint exogenous states.
        #[arg(long, value_name = "N")]
        cap: Option<u64>,
    },

    /// Check an alignment's interventional consistency.
    Consistency {
        #[command(flatten)]
        common: CommonArgs,

        /// Alignment declaration to check.
        #[arg(long, value_name = "NAME")]
        alignment: String,

        /// What counts as agreement.
        #[arg(long, value_enum, default_value_t = ConsistencyModeArg::Exact)]
        mode: ConsistencyModeArg,

        /// Distance threshold (tv mode) or effect tolerance (effects mode),
        /// as p/q.
        #[arg(long, value_name = "P/Q")]
        epsilon: Option<String>,

        /// High outcome variable, for effects mode.
        #[arg(long, value_name = "VAR")]
        outcome: Option<String>,

        /// Outcome value, for effects mode.
        #[arg(long, value_name = "VALUE")]
        value: Option<String>,

        /// Minimum fraction of realization pairs within tolerance, for
        /// effects mode (default 1).
        #[arg(long, value_name = "P/Q")]
        fraction: Option<String>,
    },

    /// Per-realization outcome probabilities of one high intervention.
    Ambiguity {
        #[command(flatten)]
        common: CommonArgs,

        /// Alignment declaration to query.
        #[arg(long, value_name = "NAME")]
        alignment: String,

        /// High intervention VAR=VALUE; repeatable.
        #[arg(long = "do", value_name = "VAR=VALUE")]
        set: Vec<String>,

        /// High outcome variable.
        #[arg(long, value_name = "VAR")]
        outcome: String,

        /// Outcome value whose probability is reported.
        #[arg(long, value_name = "VALUE")]
        value: String,

        /// How the per-realization probabilities are combined.
        #[arg(long, value_enum, default_value_t)]
        aggregator: AggregatorArg,
    },

    /// Run a declared audit study and judge whether its contrast measures
    /// the protected-attribute effect.
    Audit {
        #[command(flatten)]
        common: CommonArgs,

        /// Audit declaration to run.
        #[arg(long, value_name = "NAME")]
        audit: String,
    },

    /// Contrast one attribute effect under two rival classifications of the
    /// same population.
    Norms {
        #[command(flatten)]
        common: CommonArgs,

        /// Comparison declaration to run.
        #[arg(long, value_name = "NAME")]
        compare: String,
    },

    /// Build the aggregated high model a clustering induces on a low model.
    Quotient {
        #[command(flatten)]
        common: CommonArgs,

        /// Low model to collapse; defaults to the shape's declared low
        /// model.
        #[arg(long, value_name = "NAME")]
        model: Option<String>,

        /// Alignment declaration whose clusters and drops define the shape.
        #[arg(long, value_name = "NAME")]
        shape: String,

        /// How each realization's rows are combined into one table.
        #[arg(long, value_enum, default_value_t)]
        aggregator: AggregatorArg,
    },
}

// ── Dispatch ─────────────────────────────────────────────────────────────────

struct Loaded {
    workspace: LoweredWorkspace,
    files: Vec<String>,
    warnings: Vec<String>,
}

/// Load and resolve the given files, or produce the error report that ends
/// the run.
fn load(paths: &[PathBuf]) -> Result<Loaded, RenderedReport> {
    let corpus = Corpus::load(paths).map_err(|message| RenderedReport {
        exit_code: 2,
        stdout: String::new(),
        stderr: format!("error: {message}\n"),
    })?;

    let (workspace, diagnostics, errors) = corpus.analyze();
    match workspace {
        Some(workspace) if errors == 0 => Ok(Loaded {
            workspace,
            files: corpus.paths(),
            warnings: diagnostics,
        }),
        _ => {
            let mut stderr = String::new();
            for line in &diagnostics {
                stderr.push_str(line);
                stderr.push('\n');
            }
            Err(RenderedReport {
                exit_code: 2,
                stdout: String::new(),
                stderr,
            })
        }
    }
}

fn finish(result: commands::CommandResult, format: Format, warnings: &[String]) -> RenderedReport {
    let mut stderr = String::new();
    for warning in warnings {
        stderr.push_str(warning);
        stderr.push('\n');
    }
    match result {
        Ok((exit_code, payload)) => RenderedReport {
            exit_code,
            stdout: payload.render(format),
            stderr,
        },
        Err(message) => {
            stderr.push_str("error: ");
            stderr.push_str(&message);
            stderr.push('\n');
            RenderedReport {
                exit_code: 2,
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn dispatch(command: Command, style: bool) -> RenderedReport {
    match command {
        Command::Validate { paths, common } => {
            let mut files = paths;
            files.extend(common.files.iter().cloned());
            let loaded = match load(&files) {
                Ok(loaded) => loaded,
                Err(report) => return report,
            };
            let result = commands::validate(
                &loaded.workspace,
                &loaded.files,
                loaded.warnings.len(),
                style,
            );
            finish(result, common.format, &loaded.warnings)
        }

        Command::Intervene {
            common,
            model,
            set,
            sample,
            seed,
            cap,
        } => {
            let loaded = match load(&common.files) {
                Ok(loaded) => loaded,
                Err(report) => return report,
            };
            let args = InterveneArgs {
                model,
                interventions: set,
                sample,
                seed,
                cap,
            };
            let result = commands::intervene(&loaded.workspace, &args, style);
            finish(result, common.format, &loaded.warnings)
        }

        Command::Consistency {
            common,
            alignment,
            mode,
            epsilon,
            outcome,
            value,
            fraction,
        } => {
            let loaded = match load(&common.files) {
                Ok(loaded) => loaded,
                Err(report) => return report,
            };
            let args = ConsistencyArgs {
                alignment,
                mode,
                epsilon,
                outcome,
                value,
                fraction,
            };
            let result = commands::consistency(&loaded.workspace, &args, style);
            finish(result, common.format, &loaded.warnings)
        }

        Command::Ambiguity {
            common,
            alignment,
            set,
            outcome,
            value,
            aggregator,
        } => {
            let loaded = match load(&common.files) {
                Ok(loaded) => loaded,
                Err(report) => return report,
            };
            let args = AmbiguityArgs {
                alignment,
                interventions: set,
                outcome,
                value,
                aggregator: aggregator.kind(),
            };
            let result = commands::ambiguity(&loaded.workspace, &args, style);
            finish(result, common.format, &loaded.warnings)
        }

        Command::Audit { common, audit } => {
            let loaded = match load(&common.files) {
                Ok(loaded) => loaded,
                Err(report) => return report,
            };
            let result = commands::audit(&loaded.workspace, &audit, style);
            finish(result, common.format, &loaded.warnings)
        }

        Command::Norms { common, compare } => {
            let loaded = match load(&common.files) {
                Ok(loaded) => loaded,
                Err(report) => return report,
            };
            let result = commands::norms(&loaded.workspace, &compare, style);
            finish(result, common.format, &loaded.warnings)
        }

        Command::Quotient {
            common,
            model,
            shape,
            aggregator,
        } => {
            let loaded = match load(&common.files) {
                Ok(loaded) => loaded,
                Err(report) => return report,
            };
            let args = QuotientArgs {
                model,
                shape,
                aggregator: aggregator.kind(),
            };
            let result = commands::quotient(&loaded.workspace, &args, style);
            finish(result, common.format, &loaded.warnings)
        }
    }
}
