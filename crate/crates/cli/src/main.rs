use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use regrisk::benchmarks::{coin_equivalent, ide, rss_with, BinomialRisk, Ide, RssOptions};
use regrisk::data::moments_from_csv;
use regrisk::error_models::finite_difference_mismatch;
use regrisk::eta::{build_eta_table_with, build_monte_carlo_table, build_quadrature_table, DEFAULT_TOL};
use regrisk::mc::{estimate_risk_with, SimConfig, XDist};
use regrisk::risk::{expand, Aggregates, MomentSummary, XPreset};
use regrisk::scalar::{parse_rational, rational_to_f64, Rational};
use regrisk::{ErrorModel, EtaTable, Execution, RiskExpansion};

mod source;

use source::{CsvOptions, MomentSource};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error(transparent)]
    Lib(#[from] regrisk::Error),
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Lib(e) if e.is_config() => 2,
            _ => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "regrisk", version, about = "Second-order risk of regression MLE and sample-size indicators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run everything on one thread
    #[arg(long, global = true)]
    sequential: bool,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expansion coefficients and ED at one or more n
    Risk(RiskArgs),
    /// Indicator of the difficulty of estimation
    Ide(IndicatorArgs),
    /// Sample size matching a fair-coin benchmark
    Rss(RssArgs),
    /// Coin-toss experiment size as hard as the regression at a given n
    CoinEquiv(CoinArgs),
    /// Whitened moment aggregates of a CSV table
    Moments(MomentsArgs),
    /// Error-model moment table
    Eta {
        #[command(subcommand)]
        command: EtaCommand,
    },
    /// Check an error model: derivatives, table identities, closed form vs quadrature
    Validate(ValidateArgs),
    /// ED of the regression at n = (p + 2) k next to the coin benchmark at k
    Series(SeriesArgs),
    /// Regenerate one of the indicator tables
    Table(TableArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// normal, t:<nu>, skew-normal:<b> or custom:<file>
    #[arg(long, default_value = "normal")]
    error: String,
    /// Quadrature tolerance for tables without a closed form
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ExpansionArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    source: MomentSource,
    #[command(flatten)]
    csv: CsvOptions,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    alpha: String,
}

#[derive(Args, Debug)]
struct RiskArgs {
    #[command(flatten)]
    x: ExpansionArgs,
    /// A sample size or a range lo:hi[:step]
    #[arg(long)]
    n: Option<String>,
    /// Also estimate the exact risk by simulation at each n (preset x only)
    #[arg(long)]
    mc_reps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct IndicatorArgs {
    #[command(flatten)]
    x: ExpansionArgs,
}

#[derive(Args, Debug)]
struct RssArgs {
    #[command(flatten)]
    x: ExpansionArgs,
    #[arg(long, default_value_t = 10)]
    k_start: u32,
    #[arg(long, default_value_t = 10)]
    k_step: u32,
    #[arg(long, default_value_t = 1000)]
    k_max: u32,
}

#[derive(Args, Debug)]
struct CoinArgs {
    #[command(flatten)]
    x: ExpansionArgs,
    /// Sample size of the regression
    #[arg(long)]
    n_actual: u64,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    path: PathBuf,
    #[command(flatten)]
    csv: CsvOptions,
}

#[derive(Subcommand, Debug)]
enum EtaCommand {
    /// Print every entry as JSON
    Dump(EtaDumpArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EtaMethodArg {
    /// Closed form where there is one, quadrature otherwise
    Auto,
    Quadrature,
    MonteCarlo,
}

#[derive(Args, Debug)]
struct EtaDumpArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "auto")]
    method: EtaMethodArg,
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Also compare the expansion with simulation under this regressor preset
    #[arg(long)]
    xdist: Option<String>,
    #[arg(long, default_value_t = 1)]
    p: u32,
    #[arg(long, default_value_t = 100)]
    n: u64,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    #[command(flatten)]
    x: ExpansionArgs,
    #[arg(long, default_value_t = 1)]
    k_from: u64,
    #[arg(long, default_value_t = 50)]
    k_to: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TablePreset {
    Table1,
    Table2,
    Table3,
    Table4,
    Table5,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long, value_enum)]
    preset: TablePreset,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

/// A result ready to print: the full JSON document, and flat rows when the
/// command has a tabular form.
struct Report {
    json: Value,
    rows: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    default_format: Format,
    /// Printed after the report; turns the exit code non-zero.
    failure: Option<CliError>,
}

impl Report {
    fn json(json: Value) -> Self {
        Report { json, rows: None, default_format: Format::Json, failure: None }
    }

    fn with_rows(json: Value, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Report { json, rows: Some((header, rows)), default_format: Format::Json, failure: None }
    }
}

struct Alpha {
    value: f64,
    exact: Rational,
}

fn parse_alpha(text: &str) -> Result<Alpha, CliError> {
    let exact = parse_rational(text).map_err(|_| CliError::Config(format!("--alpha: not a number `{text}`")))?;
    Ok(Alpha { value: rational_to_f64(&exact), exact })
}

fn build_table(model: &ModelArgs, exec: Execution) -> Result<(ErrorModel, EtaTable), CliError> {
    if !(model.tol > 0.0) {
        return Err(CliError::Config(format!("--tol must be positive, got {}", model.tol)));
    }
    let m = ErrorModel::from_spec(&model.error)?;
    let t = build_eta_table_with(&m, model.tol, exec)?;
    Ok((m, t))
}

struct Prepared {
    model: ErrorModel,
    moments: MomentSummary,
    expansion: RiskExpansion,
    alpha: Alpha,
}

fn prepare(x: &ExpansionArgs, exec: Execution) -> Result<Prepared, CliError> {
    let alpha = parse_alpha(&x.alpha)?;
    let moments = x.source.resolve(x.p, &x.csv, exec)?;
    let (model, table) = build_table(&x.model, exec)?;
    let expansion = expand(&table, &moments)?;
    Ok(Prepared { model, moments, expansion, alpha })
}

fn aggregates_json(a: &Aggregates) -> Value {
    json!({"M2a": a.m2a.to_string(), "M2b": a.m2b.to_string(), "M1": a.m1.to_string()})
}

fn expansion_json(pr: &Prepared) -> Value {
    let e = &pr.expansion;
    let q_alpha_exact = e.q_exact_at(&pr.alpha.exact).map(|q| q.to_string());
    json!({
        "error": pr.model.label(),
        "p": e.p,
        "alpha": pr.alpha.value,
        "aggregates": aggregates_json(&pr.moments.to_aggregated()),
        "main": e.main,
        "main_exact": e.main_exact().to_string(),
        "q": e.q,
        "q_exact": e.q_exact.as_ref().map(|q| q.iter().map(|r| r.to_string()).collect::<Vec<_>>()),
        "coeff_error": e.coeff_error,
        "q_alpha": e.q_at(pr.alpha.value),
        "q_alpha_exact": q_alpha_exact,
        "validity_n_min": e.validity_n_min,
    })
}

fn parse_n_range(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Config(format!("--n: expected n or lo:hi[:step], got `{text}`"));
    let parts: Vec<u64> = text.split(':').map(|s| s.trim().parse::<u64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let ns: Vec<u64> = match parts.as_slice() {
        [n] => vec![*n],
        [lo, hi] => (*lo..=*hi).collect(),
        [lo, hi, step] if *step > 0 => (*lo..=*hi).step_by(*step as usize).collect(),
        _ => return Err(bad()),
    };
    if ns.is_empty() || ns.contains(&0) {
        return Err(bad());
    }
    Ok(ns)
}

fn preset_x_dist(source: &MomentSource) -> Result<XDist, CliError> {
    match &source.xpreset {
        Some(spec) => Ok(XDist::from_spec(spec)?),
        None => Err(CliError::Config("--mc-reps needs --xpreset to know how to draw regressors".into())),
    }
}

fn cmd_risk(a: &RiskArgs, exec: Execution) -> Result<Report, CliError> {
    let pr = prepare(&a.x, exec)?;
    let ns = match &a.n {
        Some(t) => parse_n_range(t)?,
        None => vec![],
    };
    let x_dist = match a.mc_reps {
        Some(0) => return Err(CliError::Config("--mc-reps must be positive".into())),
        Some(_) => Some(preset_x_dist(&a.x.source)?),
        None => None,
    };
    let q_exact = pr.expansion.q_exact_at(&pr.alpha.exact);
    let mut values = vec![];
    let mut rows = vec![];
    for &n in &ns {
        let v = pr.expansion.evaluate(pr.alpha.value, n);
        let nr = Rational::from_integer(n.into());
        let exact = q_exact.as_ref().map(|q| (pr.expansion.main_exact() / &nr + q / (&nr * &nr)).to_string());
        let mut entry = json!({"n": n, "ed": v.value, "ed_exact": exact, "below_validity": v.below_validity});
        let mut row = vec![n.to_string(), v.value.to_string(), exact.clone().unwrap_or_default(), v.below_validity.to_string()];
        if let (Some(reps), Some(xd)) = (a.mc_reps, x_dist) {
            let cfg = SimConfig::new(pr.model.clone(), xd, pr.expansion.p as usize, n as usize, pr.alpha.value, reps, a.seed);
            let est = estimate_risk_with(&cfg, exec)?;
            entry["mc"] = json!({
                "mean": est.mean,
                "std_error": est.std_error,
                "replications_used": est.replications_used,
                "fit_failures": est.fit_failures,
                "divergence_failures": est.divergence_failures,
            });
            row.push(est.mean.to_string());
            row.push(est.std_error.map(|s| s.to_string()).unwrap_or_default());
        }
        values.push(entry);
        rows.push(row);
    }
    let mut doc = expansion_json(&pr);
    doc["values"] = Value::Array(values);
    let mut header = vec!["n", "ed", "ed_exact", "below_validity"];
    if a.mc_reps.is_some() {
        header.extend(["mc_mean", "mc_std_error"]);
    }
    Ok(Report::with_rows(doc, header, rows))
}

fn ide_fields(i: Ide) -> (Value, Option<f64>) {
    match i {
        Ide::Root { m, other } => (json!(m), Some(other)),
        Ide::NoRealRoot => (json!("*"), None),
    }
}

fn cmd_ide(a: &IndicatorArgs, exec: Execution) -> Result<Report, CliError> {
    let pr = prepare(&a.x, exec)?;
    let i = ide(&pr.expansion, pr.alpha.value);
    let (value, other) = ide_fields(i);
    let mut doc = expansion_json(&pr);
    doc["ide"] = value;
    doc["ide_other_root"] = json!(other);
    Ok(Report::with_rows(doc, vec!["p", "alpha", "ide"], vec![vec![pr.expansion.p.to_string(), pr.alpha.value.to_string(), i.to_string()]]))
}

fn cmd_rss(a: &RssArgs, exec: Execution) -> Result<Report, CliError> {
    let pr = prepare(&a.x, exec)?;
    let opts = RssOptions { k_start: a.k_start, k_step: a.k_step, k_max: a.k_max };
    let s = rss_with(&pr.expansion, pr.alpha.value, opts)?;
    let mut doc = expansion_json(&pr);
    doc["rss"] = json!({"n": s.n, "k": s.k, "n_real": s.n_real});
    Ok(Report::with_rows(
        doc,
        vec!["p", "alpha", "n", "k", "n_real"],
        vec![vec![pr.expansion.p.to_string(), pr.alpha.value.to_string(), s.n.to_string(), s.k.to_string(), s.n_real.to_string()]],
    ))
}

fn cmd_coin(a: &CoinArgs, exec: Execution) -> Result<Report, CliError> {
    let pr = prepare(&a.x, exec)?;
    let c = coin_equivalent(&pr.expansion, pr.alpha.value, a.n_actual)?;
    let mut doc = expansion_json(&pr);
    doc["n_actual"] = json!(a.n_actual);
    doc["coin_tosses"] = json!(c);
    Ok(Report::with_rows(
        doc,
        vec!["p", "alpha", "n_actual", "coin_tosses"],
        vec![vec![pr.expansion.p.to_string(), pr.alpha.value.to_string(), a.n_actual.to_string(), c.to_string()]],
    ))
}

fn cmd_moments(a: &MomentsArgs, exec: Execution) -> Result<Report, CliError> {
    let r = moments_from_csv(&a.path, &a.csv.load_options()?, exec)?;
    let json = serde_json::to_value(&r).map_err(|e| CliError::Output(e.to_string()))?;
    let row = vec![
        r.n.to_string(),
        r.p.to_string(),
        r.aggregates.m2a.to_string(),
        r.aggregates.m2b.to_string(),
        r.aggregates.m1.to_string(),
        r.condition_number.to_string(),
    ];
    Ok(Report::with_rows(json, vec!["n", "p", "M2a", "M2b", "M1", "condition_number"], vec![row]))
}

fn cmd_eta(a: &EtaDumpArgs, exec: Execution) -> Result<Report, CliError> {
    let table = match a.method {
        EtaMethodArg::Auto => build_table(&a.model, exec)?.1,
        EtaMethodArg::Quadrature => build_quadrature_table(&ErrorModel::from_spec(&a.model.error)?, a.model.tol, exec)?,
        EtaMethodArg::MonteCarlo => build_monte_carlo_table(&ErrorModel::from_spec(&a.model.error)?, a.draws, a.seed, exec)?,
    };
    Ok(Report::json(serde_json::to_value(&table).map_err(|e| CliError::Output(e.to_string()))?))
}

fn cmd_validate(a: &ValidateArgs, exec: Execution) -> Result<Report, CliError> {
    let (model, table) = build_table(&a.model, exec)?;
    let mut failures = vec![];
    let derivs = match finite_difference_mismatch(&model, 1e-5, 1e-5) {
        None => json!({"holds": true}),
        Some((order, y, analytic, numeric)) => {
            failures.push(format!("derivative {order} at y = {y}"));
            json!({"holds": false, "order": order, "y": y, "analytic": analytic, "numeric": numeric})
        }
    };
    for c in table.checks().iter().filter(|c| !c.holds) {
        failures.push(c.name.clone());
    }
    // dual path: closed form against quadrature where both exist
    let mut dual = Value::Null;
    if !matches!(model.kind(), regrisk::ErrorKind::SkewNormal(_) | regrisk::ErrorKind::Custom) {
        let quad = build_quadrature_table(&model, a.model.tol, exec)?;
        let mut worst: f64 = 0.0;
        for (ix, cell) in quad.iter() {
            if let (regrisk::eta::EtaCell::Finite(q), Ok(c)) = (cell, table.entry(*ix)) {
                worst = worst.max((q.value - c.value).abs() / c.value.abs().max(1.0));
            }
        }
        let holds = worst <= 1e-9;
        if !holds {
            failures.push(format!("closed form vs quadrature: {worst:e}"));
        }
        dual = json!({"worst_relative_gap": worst, "holds": holds});
    }
    let mut mc = Value::Null;
    if let Some(spec) = &a.xdist {
        let alpha = parse_alpha(&a.alpha)?;
        if a.p == 0 || a.reps < 2 {
            return Err(CliError::Config("simulation needs --p >= 1 and --reps >= 2".into()));
        }
        let e = expand(&table, &XPreset::from_spec(spec)?.summary(a.p)?)?;
        let expected = e.ed(alpha.value, a.n as f64);
        let cfg = SimConfig::new(model.clone(), XDist::from_spec(spec)?, a.p as usize, a.n as usize, alpha.value, a.reps, a.seed);
        let est = estimate_risk_with(&cfg, exec)?;
        let z = est.std_error.map(|se| (est.mean - expected) / se);
        if !z.is_some_and(|z| z.abs() <= 3.0) {
            failures.push(format!("simulation z = {z:?}"));
        }
        mc = json!({
            "mc_mean": est.mean,
            "mc_se": est.std_error,
            "expansion": expected,
            "z": z,
            "replications_used": est.replications_used,
            "fit_failures": est.fit_failures,
            "divergence_failures": est.divergence_failures,
            "below_validity": a.n < e.validity_n_min,
        });
    }
    let doc = json!({
        "error": model.label(),
        "finite_difference": derivs,
        "checks": table.checks(),
        "closed_form_vs_quadrature": dual,
        "simulation": mc,
        "holds": failures.is_empty(),
    });
    let mut report = Report::json(doc);
    if !failures.is_empty() {
        report.failure = Some(CliError::Numeric(format!("validation failed: {}", failures.join("; "))));
    }
    Ok(report)
}

fn cmd_series(a: &SeriesArgs, exec: Execution) -> Result<Report, CliError> {
    if a.k_from == 0 || a.k_from > a.k_to {
        return Err(CliError::Config(format!("empty k range {}..{}", a.k_from, a.k_to)));
    }
    let pr = prepare(&a.x, exec)?;
    let coin = BinomialRisk::new(0.5)?;
    let d = pr.expansion.p as u64 + 2;
    let mut rows = vec![];
    let mut points = vec![];
    for k in a.k_from..=a.k_to {
        let n = d * k;
        let reg = pr.expansion.ed(pr.alpha.value, n as f64);
        let bin = coin.ed(pr.alpha.value, k as f64);
        points.push(json!({"k": k, "n": n, "ed_regression": reg, "ed_binomial": bin, "below_validity": n < pr.expansion.validity_n_min}));
        rows.push(vec![k.to_string(), reg.to_string(), bin.to_string()]);
    }
    let mut doc = expansion_json(&pr);
    doc["series"] = Value::Array(points);
    let mut r = Report::with_rows(doc, vec!["k", "ed_regression", "ed_binomial"], rows);
    r.default_format = Format::Csv;
    Ok(r)
}

/// Printed aggregates, p and n of the two real datasets.
const WINE: (&str, &str, &str, u32, u64) = ("0.000326899", "0.000230836", "0.116967", 11, 4898);
const CRIME: (&str, &str, &str, u32, u64) = ("1708.97", "1749.28", "2604.5", 99, 2215);

fn cmd_table(a: &TableArgs, exec: Execution) -> Result<Report, CliError> {
    let alpha = parse_alpha(&a.alpha)?;
    let model_args = |error: &str| ModelArgs { error: error.into(), tol: a.tol };
    let errors = ["normal", "t:3", "skew-normal:3"];
    // (error spec, x label, moments, n of the data if any)
    let mut cells: Vec<(&str, String, MomentSummary, Option<u64>)> = vec![];
    match a.preset {
        TablePreset::Table1 | TablePreset::Table2 | TablePreset::Table3 => {
            let error = errors[a.preset as usize];
            for x in ["normal", "t", "controlled", "pareto"] {
                cells.push((error, x.into(), XPreset::from_spec(x)?.summary(10)?, None));
            }
        }
        TablePreset::Table4 | TablePreset::Table5 => {
            let (label, d) = if a.preset == TablePreset::Table4 { ("wine", WINE) } else { ("crime", CRIME) };
            let agg = Aggregates { m2a: parse_rational(d.0)?, m2b: parse_rational(d.1)?, m1: parse_rational(d.2)? };
            for error in errors {
                cells.push((error, label.into(), MomentSummary::aggregated(d.3, agg.clone()), Some(d.4)));
            }
        }
    }
    let mut rows = vec![];
    let mut out = vec![];
    for (error, x, moments, n_data) in cells {
        let (model, table) = build_table(&model_args(error), exec)?;
        let e = expand(&table, &moments)?;
        let i = ide(&e, alpha.value);
        let s = rss_with(&e, alpha.value, RssOptions::default())?;
        let coin = n_data.map(|n| coin_equivalent(&e, alpha.value, n)).transpose()?;
        out.push(json!({
            "error": model.label(),
            "x": x,
            "p": e.p,
            "ide": ide_fields(i).0,
            "rss": s.n,
            "k": s.k,
            "rss_real": s.n_real,
            "cell": format!("{i}, {s}"),
            "coin_tosses": coin,
        }));
        rows.push(vec![model.label().to_string(), x, i.to_string(), s.n.to_string(), s.k.to_string(), coin.map(|c| c.to_string()).unwrap_or_default()]);
    }
    let name = format!("{:?}", a.preset).to_lowercase();
    Ok(Report::with_rows(json!({"table": name, "alpha": alpha.value, "rows": out}), vec!["error", "x", "ide", "rss", "k", "coin_tosses"], rows))
}

fn emit(report: &Report, format: Option<Format>) -> Result<(), CliError> {
    let format = format.unwrap_or(report.default_format);
    let out = std::io::stdout();
    let mut out = out.lock();
    let io = |e: std::io::Error| CliError::Output(e.to_string());
    match (format, &report.rows) {
        (Format::Json, _) => {
            serde_json::to_writer_pretty(&mut out, &report.json).map_err(|e| CliError::Output(e.to_string()))?;
            writeln!(out).map_err(io)?;
        }
        (Format::Csv, Some((header, rows))) => {
            let mut w = csv::Writer::from_writer(out);
            let csv_err = |e: csv::Error| CliError::Output(e.to_string());
            w.write_record(header).map_err(csv_err)?;
            for r in rows {
                w.write_record(r).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
        (Format::Csv, None) => return Err(CliError::Config("this command has no CSV form; use --format json".into())),
    }
    Ok(())
}

fn threads_from_env() -> Result<(), CliError> {
    match std::env::var("REGRISK_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Config(format!("REGRISK_THREADS: expected a positive integer, got `{v}`")))?;
            Ok(regrisk::exec::configure_threads(n)?)
        }
        Err(_) => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<Option<CliError>, CliError> {
    threads_from_env()?;
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let report = match &cli.command {
        Command::Risk(a) => cmd_risk(a, exec)?,
        Command::Ide(a) => cmd_ide(a, exec)?,
        Command::Rss(a) => cmd_rss(a, exec)?,
        Command::CoinEquiv(a) => cmd_coin(a, exec)?,
        Command::Moments(a) => cmd_moments(a, exec)?,
        Command::Eta { command: EtaCommand::Dump(a) } => cmd_eta(a, exec)?,
        Command::Validate(a) => cmd_validate(a, exec)?,
        Command::Series(a) => cmd_series(a, exec)?,
        Command::Table(a) => cmd_table(a, exec)?,
    };
    emit(&report, cli.format)?;
    Ok(report.failure)
}

fn diagnose(e: &CliError) -> ExitCode {
    let code = e.exit_code();
    let kind = if code == 2 { "config" } else { "numeric" };
    let diag = json!({"error": kind, "message": e.to_string(), "exit_code": code});
    eprintln!("{diag}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(e)) | Err(e) => diagnose(&e),
    }
}
