//! `loadrule`: generate data, inspect the special-day calendar, fit models,
//! forecast, backtest and report.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "loadrule", version, about = "Rule-based seasonal load forecasting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the load series comes from.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Load CSV with header `date,slot,load_mw`.
    #[arg(long, value_name = "CSV")]
    pub data: Option<PathBuf>,
    /// Synthetic-data config (TOML); the series is generated in memory.
    #[arg(long, value_name = "TOML")]
    pub synth_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[command(flatten)]
    pub source: Source,
    /// Special-day roster (`date,name,role` lines); the built-in French roster otherwise.
    #[arg(long, value_name = "FILE")]
    pub calendar: Option<PathBuf>,
    /// Fill isolated single-period gaps in `--data` by linear interpolation.
    #[arg(long)]
    pub interpolate_gaps: bool,
    /// Top-level seed; overrides the synthetic config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic series with its calendar audit and weekday profiles.
    GenData {
        #[arg(long, value_name = "TOML")]
        synth_config: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        calendar: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Dates whose intraday profiles are tabulated side by side.
        #[arg(long, value_delimiter = ',', value_name = "DATE,...")]
        compare: Vec<NaiveDate>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify a year's special days and show the corresponding past days.
    InspectCalendar {
        #[arg(long)]
        year: i32,
        /// First day of history available to the rule; default 1 January eight years earlier.
        #[arg(long)]
        history_start: Option<NaiveDate>,
        #[arg(long, value_name = "FILE")]
        calendar: Option<PathBuf>,
        #[arg(long, default_value_t = 48)]
        periods_per_day: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate a model on the data up to `--train-end`.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: String,
        /// `p,q,P1,Q1,P2,Q2,annualDepth`
        #[arg(long)]
        orders: Option<String>,
        #[arg(long)]
        train_end: NaiveDate,
        #[arg(long)]
        out: PathBuf,
    },
    /// Forecast from the end of `--origin` with a fitted parameter document.
    Forecast {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_name = "TOML")]
        params: PathBuf,
        /// Last observed day; forecasts start at its following period.
        #[arg(long)]
        origin: NaiveDate,
        #[arg(long)]
        horizon: Option<usize>,
        /// Monte Carlo paths for density forecasts (0 = point forecasts only).
        #[arg(long, default_value_t = 0)]
        sims: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit each model and run a rolling-origin evaluation.
    Backtest {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        model: Vec<String>,
        #[arg(long)]
        orders: Option<String>,
        #[arg(long)]
        train_end: NaiveDate,
        /// Default: the day after `--train-end`.
        #[arg(long)]
        eval_start: Option<NaiveDate>,
        /// Default: the last day of data.
        #[arg(long)]
        eval_end: Option<NaiveDate>,
        /// Default: one day of periods.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 0)]
        sims: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy tables, CRPS and Diebold-Mariano tests from backtest runs.
    Report {
        /// Run files (`run-*.json`) or backtest output directories.
        #[arg(long, required = true, num_args = 1..)]
        run: Vec<PathBuf>,
        #[arg(long, value_name = "FILE")]
        calendar: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData {
            synth_config,
            calendar,
            seed,
            compare,
            out,
        } => commands::gen_data(synth_config, calendar, seed, compare, &out),
        Command::InspectCalendar {
            year,
            history_start,
            calendar,
            periods_per_day,
            out,
        } => commands::inspect_calendar(year, history_start, calendar, periods_per_day, out.as_deref()),
        Command::Fit {
            data,
            model,
            orders,
            train_end,
            out,
        } => commands::fit(&data, &model, orders.as_deref(), train_end, &out),
        Command::Forecast {
            data,
            params,
            origin,
            horizon,
            sims,
            out,
        } => commands::forecast(&data, &params, origin, horizon, sims, &out),
        Command::Backtest {
            data,
            model,
            orders,
            train_end,
            eval_start,
            eval_end,
            horizon,
            sims,
            out,
        } => commands::backtest(
            &data,
            &model,
            orders.as_deref(),
            commands::Window {
                train_end,
                eval_start,
                eval_end,
                horizon,
            },
            sims,
            &out,
        ),
        Command::Report { run, calendar, out } => commands::report(&run, calendar, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
