use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate};
use serde::{Deserialize, Serialize};
use serde_json::json;

use loadrule::calendar::{classify_days, HolidayCalendar, SeasonalGrid};
use loadrule::data::{compare_profiles, generate_synthetic, load_csv, weekday_profiles, write_csv, CsvOptions, LoadSeries, SynthConfig};
use loadrule::eval::{build_report, records_csv, rolling_backtest, BacktestRun, EvalWindow, Slice};
use loadrule::forecast::DensitySpec;
use loadrule::params_doc::ParamDocument;
use loadrule::pipeline::{Experiment, FittedModel, ModelKind, ModelSpec};
use loadrule::rng::derive_seed;
use loadrule::rules::{build_lag_plan, AnnualLagPlan};
use loadrule::sarma::SarmaOrders;

use crate::output::{config_hash, sha256_hex, Artifacts};
use crate::DataArgs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{field}: {msg}")]
    Usage { field: &'static str, msg: String },
    #[error(transparent)]
    Core(#[from] loadrule::Error),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage { .. } => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(field: &'static str, msg: impl Into<String>) -> CliError {
    CliError::Usage { field, msg: msg.into() }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_file(path)?).map_err(|e| CliError::File {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })
}

/// Loaded calendar plus a description for the manifest.
fn load_calendar(path: Option<&Path>, first_year: i32, last_year: i32) -> Result<(HolidayCalendar, serde_json::Value)> {
    match path {
        Some(p) => {
            let text = read_text(p)?;
            let cal = HolidayCalendar::parse(&text)?;
            Ok((cal, json!({"file": p, "sha256": sha256_hex(text.as_bytes())})))
        }
        None => Ok((
            HolidayCalendar::french(first_year, last_year)?,
            json!({"builtin": "french", "years": [first_year, last_year]}),
        )),
    }
}

struct Loaded {
    series: LoadSeries,
    calendar: HolidayCalendar,
    seed: u64,
    config: serde_json::Value,
}

fn load_synth_config(path: Option<&Path>, seed: Option<u64>) -> Result<SynthConfig> {
    let mut cfg = match path {
        Some(p) => SynthConfig::from_toml(&read_text(p)?)?,
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_data(args: &DataArgs) -> Result<Loaded> {
    if let Some(path) = &args.source.data {
        let bytes = read_file(path)?;
        let series = load_csv(
            path,
            &CsvOptions {
                periods_per_day: None,
                interpolate_single_gaps: args.interpolate_gaps,
            },
        )?;
        let (first, last) = series.years();
        let (calendar, cal_info) = load_calendar(args.calendar.as_deref(), first, last + 1)?;
        log::info!(
            "loaded {} periods ({} per day) from {} to {}",
            series.len(),
            series.periods_per_day(),
            series.start(),
            series.end()
        );
        let seed = args.seed.unwrap_or(1);
        let config = json!({
            "data": {"file": path, "sha256": sha256_hex(&bytes), "interpolate_gaps": args.interpolate_gaps},
            "calendar": cal_info,
            "seed": seed,
        });
        Ok(Loaded {
            series,
            calendar,
            seed,
            config,
        })
    } else {
        let cfg = load_synth_config(args.source.synth_config.as_deref(), args.seed)?;
        let (calendar, cal_info) = load_calendar(args.calendar.as_deref(), cfg.start.year(), cfg.end().year() + 1)?;
        let series = generate_synthetic(&cfg, &calendar)?;
        log::info!("generated {} synthetic periods with seed {}", series.len(), cfg.seed);
        let config = json!({
            "synth": cfg,
            "calendar": cal_info,
            "seed": cfg.seed,
        });
        Ok(Loaded {
            series,
            calendar,
            seed: cfg.seed,
            config,
        })
    }
}

/// Logs every fallback in `from..=to` and returns them as CSV.
fn fallbacks_csv(plan: &AnnualLagPlan, from: NaiveDate, to: NaiveDate) -> String {
    let mut out = String::from("date,category,past_date,rationale\n");
    for e in plan.fallbacks().filter(|e| e.date >= from && e.date <= to) {
        let category = e.category.map(|c| c.to_string()).unwrap_or_default();
        log::warn!("special-day rule fallback on {} ({category}): {}", e.date, e.rationale);
        out.push_str(&format!(
            "{},{category},{},{}\n",
            e.date,
            e.past_date,
            e.rationale.to_string().replace(',', ";")
        ));
    }
    out
}

fn weekday_profiles_csv(series: &LoadSeries, profiles: &[Vec<f64>; 7]) -> String {
    let mut out = String::from("slot,time,mon,tue,wed,thu,fri,sat,sun\n");
    for s in 0..series.periods_per_day() {
        out.push_str(&format!("{s},{}", series.grid().slot_label(s)));
        for p in profiles {
            out.push_str(&format!(",{:.3}", p[s]));
        }
        out.push('\n');
    }
    out
}

fn finish(artifacts: Artifacts, out: &Path, command: &str, config: &serde_json::Value) -> Result<()> {
    let files = artifacts.commit(out, command, config)?;
    log::info!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}

pub fn gen_data(
    synth_config: Option<PathBuf>,
    calendar: Option<PathBuf>,
    seed: Option<u64>,
    compare: Vec<NaiveDate>,
    out: &Path,
) -> Result<()> {
    let cfg = load_synth_config(synth_config.as_deref(), seed)?;
    let (cal, cal_info) = load_calendar(calendar.as_deref(), cfg.start.year(), cfg.end().year() + 1)?;
    let series = generate_synthetic(&cfg, &cal)?;
    let span = classify_days(&cal, series.start(), series.end())?;
    let plan = build_lag_plan(&span, series.start());

    let mut artifacts = Artifacts::default();
    let mut csv = Vec::new();
    write_csv(&series, &mut csv)?;
    artifacts.add("series.csv", csv);
    artifacts.add("synth_config.toml", cfg.to_toml()?);
    artifacts.add("calendar.txt", cal.to_config_string());
    artifacts.add("lag_plan.csv", plan.to_csv(series.periods_per_day(), series.start(), series.end()));
    artifacts.add("rule_fallbacks.csv", fallbacks_csv(&plan, series.start(), series.end()));
    let profiles = weekday_profiles(&series, Some(&span))?;
    artifacts.add("weekday_profiles.csv", weekday_profiles_csv(&series, &profiles));
    if !compare.is_empty() {
        for d in &compare {
            if *d < series.start() || *d > series.end() {
                return Err(usage("--compare", format!("{d} is outside the generated {}..{}", series.start(), series.end())));
            }
        }
        artifacts.add("profile_comparison.csv", compare_profiles(&series, &compare)?.to_csv());
    }
    let config = json!({"synth": cfg, "calendar": cal_info, "compare": compare});
    println!(
        "generated {} days x {} periods, {} special days",
        series.n_days(),
        series.periods_per_day(),
        span.special_days().count()
    );
    finish(artifacts, out, "gen-data", &config)
}

pub fn inspect_calendar(
    year: i32,
    history_start: Option<NaiveDate>,
    calendar: Option<PathBuf>,
    periods_per_day: usize,
    out: Option<&Path>,
) -> Result<()> {
    if periods_per_day == 0 {
        return Err(usage("--periods-per-day", "must be at least 1"));
    }
    let first = NaiveDate::from_ymd_opt(year, 1, 1).ok_or_else(|| usage("--year", format!("{year} is not a valid year")))?;
    let last = NaiveDate::from_ymd_opt(year, 12, 31).expect("valid date");
    let history_start = match history_start {
        Some(d) if d >= first => return Err(usage("--history-start", format!("{d} must be earlier than {first}"))),
        Some(d) => d,
        None => NaiveDate::from_ymd_opt(year - 8, 1, 1).ok_or_else(|| usage("--year", "too early"))?,
    };
    let (cal, cal_info) = load_calendar(calendar.as_deref(), history_start.year(), year)?;
    let span = classify_days(&cal, history_start, last)?;
    let plan = build_lag_plan(&span, history_start);
    let table = plan.to_csv(periods_per_day, first, last);
    let fallbacks = fallbacks_csv(&plan, first, last);
    print!("{table}");
    if let Some(dir) = out {
        let mut artifacts = Artifacts::default();
        artifacts.add("lag_plan.csv", table);
        artifacts.add("rule_fallbacks.csv", fallbacks);
        let config = json!({
            "year": year,
            "history_start": history_start,
            "periods_per_day": periods_per_day,
            "calendar": cal_info,
        });
        finish(artifacts, dir, "inspect-calendar", &config)?;
    }
    Ok(())
}

fn parse_model(s: &str) -> Result<ModelKind> {
    s.parse().map_err(|e: loadrule::Error| usage("--model", e.to_string()))
}

fn model_spec(orders: Option<&str>) -> Result<ModelSpec> {
    let mut spec = ModelSpec::default();
    if let Some(o) = orders {
        spec.orders = o
            .parse::<SarmaOrders>()
            .map_err(|e| usage("--orders", e.to_string()))?;
    }
    Ok(spec)
}

fn train_periods(exp: &Experiment, train_end: NaiveDate) -> Result<usize> {
    if train_end < exp.series.start() {
        return Err(usage("--train-end", format!("{train_end} is before the first day of data {}", exp.series.start())));
    }
    exp.periods_through(train_end)
        .map_err(|_| usage("--train-end", format!("{train_end} is after the last day of data {}", exp.series.end())))
}

pub fn fit(data: &DataArgs, model: &str, orders: Option<&str>, train_end: NaiveDate, out: &Path) -> Result<()> {
    let kind = parse_model(model)?;
    let spec = model_spec(orders)?;
    let loaded = load_data(data)?;
    let exp = Experiment::new(loaded.series, &loaded.calendar)?;
    let n_train = train_periods(&exp, train_end)?;
    let fitted = exp.fit(kind, &spec, n_train)?;

    let mut artifacts = Artifacts::default();
    artifacts.add("params.toml", fitted.document.to_text()?);
    artifacts.add("rule_fallbacks.csv", fallbacks_csv(&exp.plan, exp.series.start(), train_end));
    if kind == ModelKind::SarmaxAbc {
        let table = exp.indicators(&spec.indicators)?;
        artifacts.add("indicators.csv", table.to_csv());
        artifacts.add("indicator_report.txt", table.report(&exp.span));
    }
    let config = json!({
        "input": loaded.config,
        "model": kind.id(),
        "orders": spec.orders.to_string(),
        "train_end": train_end,
    });
    match fitted.log_likelihood {
        Some(ll) => println!("{}: fitted on {n_train} periods, log-likelihood {ll:.3}", kind.id()),
        None => println!("{}: no parameters to estimate", kind.id()),
    }
    finish(artifacts, out, "fit", &config)
}

/// Linear-interpolation quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn forecast(
    data: &DataArgs,
    params: &Path,
    origin: NaiveDate,
    horizon: Option<usize>,
    sims: usize,
    out: &Path,
) -> Result<()> {
    let text = read_text(params)?;
    let doc = ParamDocument::from_text(&text)?;
    let model = FittedModel::from_document(&doc)?;
    let loaded = load_data(data)?;
    let exp = Experiment::new(loaded.series, &loaded.calendar)?;
    let grid = *exp.series.grid();
    let horizon = horizon.unwrap_or(grid.periods_per_day);
    if horizon == 0 {
        return Err(usage("--horizon", "must be at least 1"));
    }
    if origin < exp.series.start() {
        return Err(usage("--origin", format!("{origin} is before the first day of data")));
    }
    let origin_t = exp
        .periods_through(origin)
        .map_err(|_| usage("--origin", format!("{origin} is after the last day of data {}", exp.series.end())))?
        - 1;
    let forecaster = exp.forecaster(&model, &ModelSpec::default())?;
    let density = (sims > 0).then(|| DensitySpec {
        n_sims: sims,
        seed: derive_seed(loaded.seed, &format!("forecast/{}", model.kind.id())),
    });
    let set = forecaster.forecast(origin_t, horizon, density.as_ref())?;
    if sims > 0 && set.ensemble.is_none() {
        log::warn!("{} has no density forecasts; --sims ignored", model.kind.id());
    }

    let values = exp.series.values();
    let mut csv = String::from("target,date,slot,forecast,actual");
    if set.ensemble.is_some() {
        csv.push_str(",mean,p05,p25,p50,p75,p95");
    }
    csv.push('\n');
    let n_periods = values.len() + exp.periods_per_day() * loadrule::pipeline::LOOKAHEAD_DAYS as usize;
    for h in 1..=set.horizon() {
        let t = set.target(h);
        let (date, slot) = grid.period_to_date(loadrule::calendar::PeriodIndex(t), n_periods)?;
        let actual = values.get(t).map(|v| v.to_string()).unwrap_or_default();
        csv.push_str(&format!("{t},{date},{slot},{},{actual}", set.points[h - 1]));
        if let Some(ens) = &set.ensemble {
            let mut draws = ens[h - 1].clone();
            draws.sort_by(f64::total_cmp);
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            csv.push_str(&format!(",{mean}"));
            for q in [0.05, 0.25, 0.5, 0.75, 0.95] {
                csv.push_str(&format!(",{}", quantile(&draws, q)));
            }
        }
        csv.push('\n');
    }
    let mut artifacts = Artifacts::default();
    artifacts.add("forecast.csv", csv);
    let config = json!({
        "input": loaded.config,
        "params": {"file": params, "sha256": sha256_hex(text.as_bytes())},
        "origin": origin,
        "horizon": horizon,
        "sims": sims,
    });
    println!("{}: {horizon} periods after {origin}", model.kind.id());
    finish(artifacts, out, "forecast", &config)
}

pub struct Window {
    pub train_end: NaiveDate,
    pub eval_start: Option<NaiveDate>,
    pub eval_end: Option<NaiveDate>,
    pub horizon: Option<usize>,
}

/// Serialized backtest run with the grid needed to interpret its indices.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunFile {
    pub periods_per_day: usize,
    pub series_start: NaiveDate,
    pub n_periods: usize,
    pub config_hash: String,
    pub run: BacktestRun,
}

pub fn backtest(
    data: &DataArgs,
    models: &[String],
    orders: Option<&str>,
    window: Window,
    sims: usize,
    out: &Path,
) -> Result<()> {
    let kinds = models.iter().map(|m| parse_model(m)).collect::<Result<Vec<_>>>()?;
    let spec = model_spec(orders)?;
    let eval_start = window.eval_start.unwrap_or(window.train_end + Days::new(1));
    if eval_start <= window.train_end {
        return Err(usage("--eval-start", "must be later than --train-end"));
    }
    if let Some(end) = window.eval_end {
        if end < eval_start {
            return Err(usage("--eval-end", "must not be earlier than --eval-start"));
        }
    }
    if window.horizon == Some(0) {
        return Err(usage("--horizon", "must be at least 1"));
    }

    let loaded = load_data(data)?;
    let exp = Experiment::new(loaded.series, &loaded.calendar)?;
    let grid = *exp.series.grid();
    let m1 = grid.periods_per_day;
    let n_train = train_periods(&exp, window.train_end)?;
    let eval_end = window.eval_end.unwrap_or(exp.series.end());
    if eval_end > exp.series.end() {
        return Err(usage("--eval-end", format!("{eval_end} is after the last day of data {}", exp.series.end())));
    }
    if eval_start > eval_end {
        return Err(usage("--eval-start", format!("{eval_start} leaves no data to evaluate")));
    }
    let first = grid.day_of_date(eval_start)? * m1;
    let last = exp.periods_through(eval_end)? - 1;
    let eval_window = EvalWindow::new(first, last)?;
    let horizon = window.horizon.unwrap_or(m1);

    let config = json!({
        "input": loaded.config,
        "models": kinds.iter().map(|k| k.id()).collect::<Vec<_>>(),
        "orders": spec.orders.to_string(),
        "train_end": window.train_end,
        "eval_start": eval_start,
        "eval_end": eval_end,
        "horizon": horizon,
        "sims": sims,
    });
    let hash = config_hash(&config)?;

    let mut artifacts = Artifacts::default();
    artifacts.add("rule_fallbacks.csv", fallbacks_csv(&exp.plan, exp.series.start(), eval_end));
    for kind in &kinds {
        let id = kind.id();
        log::info!("{id}: fitting on {n_train} periods");
        let fitted = exp.fit(*kind, &spec, n_train)?;
        let forecaster = exp.forecaster(&fitted, &spec)?;
        let density = (sims > 0).then(|| DensitySpec {
            n_sims: sims,
            seed: derive_seed(loaded.seed, &format!("density/{id}")),
        });
        log::info!("{id}: forecasting {} target periods", eval_window.len());
        let run = rolling_backtest(forecaster.as_ref(), exp.series.values(), eval_window, horizon, density.as_ref())?;
        let mean_ape = run.records.iter().map(|r| (r.error() / r.actual).abs()).sum::<f64>() / run.records.len().max(1) as f64;
        println!(
            "{id}: {} forecasts, {} omitted, {} failed, overall MAPE {:.3}%",
            run.records.len(),
            run.omitted,
            run.failed,
            100.0 * mean_ape
        );
        artifacts.add(format!("params-{id}.toml"), fitted.document.to_text()?);
        artifacts.add(format!("records-{id}.csv"), records_csv(&run, &grid));
        let file = RunFile {
            periods_per_day: m1,
            series_start: grid.series_start,
            n_periods: exp.series.len(),
            config_hash: hash.clone(),
            run,
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        artifacts.add(format!("run-{id}.json"), text);
    }
    finish(artifacts, out, "backtest", &config)
}

/// Run files named directly or found as `run-*.json` inside directories.
fn collect_run_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|source| CliError::File { path: p.clone(), source })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("run-") && n.ends_with(".json"))
                })
                .collect();
            if found.is_empty() {
                return Err(usage("--run", format!("no run-*.json files in {}", p.display())));
            }
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

pub fn report(runs: &[PathBuf], calendar: Option<PathBuf>, out: &Path) -> Result<()> {
    let files = collect_run_files(runs)?;
    let mut loaded: Vec<RunFile> = Vec::with_capacity(files.len());
    let mut inputs = Vec::new();
    for f in &files {
        let text = read_text(f)?;
        let run: RunFile = serde_json::from_str(&text).map_err(|e| CliError::File {
            path: f.clone(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })?;
        inputs.push(json!({"file": f, "sha256": sha256_hex(text.as_bytes())}));
        loaded.push(run);
    }
    let head = &loaded[0];
    for r in &loaded[1..] {
        if r.periods_per_day != head.periods_per_day || r.series_start != head.series_start {
            return Err(loadrule::Error::Config(format!(
                "run {} uses a {}-period grid from {}, run {} a {}-period grid from {}",
                r.run.model, r.periods_per_day, r.series_start, head.run.model, head.periods_per_day, head.series_start
            ))
            .into());
        }
    }
    let grid = SeasonalGrid::new(head.periods_per_day, head.series_start)?;
    let n_periods = loaded.iter().map(|r| r.n_periods).max().unwrap_or(0);
    let last_day = grid.date_of_day(n_periods.div_ceil(grid.periods_per_day).saturating_sub(1));
    let (cal, cal_info) = load_calendar(calendar.as_deref(), grid.series_start.year(), last_day.year() + 1)?;
    let span = classify_days(&cal, grid.series_start, last_day)?;
    let runs: Vec<BacktestRun> = loaded.into_iter().map(|r| r.run).collect();
    let report = build_report(&runs, &span, &grid)?;

    println!("special-day MAPE (%) by forecast lead time");
    print!("{:<18}", "model");
    for b in 0..report.n_buckets() {
        print!("{:>9}", loadrule::eval::bucket_label(b));
    }
    println!();
    for run in &runs {
        print!("{:<18}", run.model);
        for b in 0..report.n_buckets() {
            match report.bucket_mape(&run.model, b, Slice::SpecialOnly) {
                Some(m) => print!("{m:>9.2}"),
                None => print!("{:>9}", "-"),
            }
        }
        println!();
    }

    let mut artifacts = Artifacts::default();
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    artifacts.add("report.json", text);
    artifacts.add("buckets.csv", report.buckets_csv());
    artifacts.add("time_of_day.csv", report.time_of_day_csv());
    artifacts.add("special_days.csv", report.special_days_csv());
    artifacts.add("crps.csv", report.crps_csv());
    artifacts.add("dm.csv", report.dm_csv());
    let config = json!({"runs": inputs, "calendar": cal_info});
    finish(artifacts, out, "report", &config)
}
