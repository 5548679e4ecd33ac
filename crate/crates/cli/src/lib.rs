//! Command-line front end of `levyfit`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use commands::{
    Curve, CurveArgs, DataOverrides, FitOverrides, PotentialArgs, ResidualArgs, SimulateOverrides,
};
pub use error::{CliError, CliResult, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL, EXIT_OK};

#[derive(Debug, Parser)]
#[command(
    name = "levyfit",
    version,
    about = "Fit stochastic differential equations driven by stable noise"
)]
pub struct Cli {
    /// worker threads for likelihood evaluation
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DataFlags {
    /// data CSV, replacing the one named in the config
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// sampling step for files without a t column
    #[arg(long = "delta-t")]
    pub delta_t: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path and write series.csv and metadata.json
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "delta-t")]
        delta_t: Option<f64>,
        /// fix alpha of every coordinate
        #[arg(long)]
        alpha: Option<f64>,
        /// fix beta of every coordinate
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Fit a model and write report.json, report.txt, residuals.csv and fitted_model.json
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        data: DataFlags,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// hold alpha of every coordinate at this value
        #[arg(long)]
        alpha: Option<f64>,
        /// hold beta of every coordinate at this value
        #[arg(long)]
        beta: Option<f64>,
        /// number of equidistant spline knots
        #[arg(long)]
        knots: Option<usize>,
    },
    /// Tabulate the stable density
    Pdf(CurveFlags),
    /// Tabulate the stable distribution function
    Cdf(CurveFlags),
    /// Residuals of a series under a model
    Residuals {
        #[arg(long)]
        config: Option<PathBuf>,
        /// model JSON, such as fitted_model.json from a fit
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        data: DataFlags,
        /// output CSV; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Effective potential -ln p(x) of one column
    Potential {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        data: DataFlags,
        /// one-based column
        #[arg(long, default_value_t = 1)]
        column: usize,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long)]
        bandwidth: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lower: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        upper: Option<f64>,
        /// output CSV; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a saved fit report
    Report {
        /// report.json written by fit
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct CurveFlags {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub location: f64,
    /// single abscissa; otherwise a grid from --from to --to
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// output CSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl From<CurveFlags> for CurveArgs {
    fn from(f: CurveFlags) -> Self {
        CurveArgs {
            alpha: f.alpha,
            beta: f.beta,
            gamma: f.gamma,
            location: f.location,
            x: f.x,
            from: f.from,
            to: f.to,
            points: f.points,
            out: f.out,
        }
    }
}

impl From<DataFlags> for DataOverrides {
    fn from(f: DataFlags) -> Self {
        DataOverrides {
            data: f.data,
            delta_t: f.delta_t,
        }
    }
}

/// Execute a parsed command line and return its exit code.
pub fn execute(cli: Cli) -> CliResult<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot start thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            delta_t,
            alpha,
            beta,
        } => commands::simulate(
            &config,
            &SimulateOverrides {
                seed,
                out,
                delta_t,
                alpha,
                beta,
            },
        ),
        Command::Fit {
            config,
            data,
            seed,
            out,
            alpha,
            beta,
            knots,
        } => commands::fit(
            &config,
            &FitOverrides {
                data: data.into(),
                seed,
                out,
                alpha,
                beta,
                knots,
            },
        ),
        Command::Pdf(f) => commands::curve(Curve::Pdf, &f.into()),
        Command::Cdf(f) => commands::curve(Curve::Cdf, &f.into()),
        Command::Residuals {
            config,
            model,
            data,
            out,
        } => commands::residuals(&ResidualArgs {
            config,
            model,
            data: data.into(),
            out,
        }),
        Command::Potential {
            config,
            data,
            column,
            grid,
            bandwidth,
            lower,
            upper,
            out,
        } => commands::potential(&PotentialArgs {
            config,
            data: data.into(),
            column,
            grid,
            bandwidth,
            lower,
            upper,
            out,
        }),
        Command::Report { input, json } => commands::report(&input, json),
    }
}

/// Parse `args`, run, report failures on stderr and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
