//! Where the regressor moments come from.

use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::Value;

use regrisk::data::{load_csv, sample_aggregates_with, standardize, LoadOptions, MissingPolicy};
use regrisk::risk::{Aggregates, Homogeneous, MomentSummary, XPreset};
use regrisk::scalar::{parse_rational, rational_from_decimal_f64, Rational};
use regrisk::Execution;

use crate::CliError;

#[derive(Args, Debug, Clone)]
#[group(id = "moment_source", required = true, multiple = false)]
pub struct MomentSource {
    /// normal, t[:nu], controlled or pareto[:b]
    #[arg(long)]
    pub xpreset: Option<String>,
    /// m4,m22[,m3,m21,m111]
    #[arg(long, allow_hyphen_values = true)]
    pub homogeneous: Option<String>,
    /// M2a,M2b,M1 (decimals or fractions)
    #[arg(long)]
    pub aggregated: Option<String>,
    /// Raw regressors; the response column must already be removed or dropped
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON written by `risk` or `moments`
    #[arg(long)]
    pub moments_json: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CsvOptions {
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Columns to ignore, comma separated or repeated
    #[arg(long = "drop", value_delimiter = ',')]
    pub drop: Vec<String>,
    /// Token marking a missing value; repeatable. Defaults to `?`, `NA` and empty
    #[arg(long = "missing")]
    pub missing: Vec<String>,
    /// Flag column pairs whose absolute correlation exceeds this
    #[arg(long, default_value_t = 0.99)]
    pub threshold: f64,
    /// Drop rows with missing values instead of columns
    #[arg(long)]
    pub drop_rows: bool,
    #[arg(long)]
    pub no_header: bool,
}

impl CsvOptions {
    pub fn load_options(&self) -> Result<LoadOptions, CliError> {
        let delimiter = match self.delimiter {
            None => None,
            Some(c) if c.is_ascii() => Some(c as u8),
            Some(c) => return Err(CliError::Config(format!("delimiter `{c}` is not ASCII"))),
        };
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(CliError::Config(format!("--threshold must lie in (0, 1], got {}", self.threshold)));
        }
        let defaults = LoadOptions::default();
        Ok(LoadOptions {
            delimiter,
            has_header: !self.no_header,
            missing_tokens: if self.missing.is_empty() { defaults.missing_tokens } else { self.missing.clone() },
            drop_columns: self.drop.clone(),
            missing: if self.drop_rows { MissingPolicy::DropRows } else { MissingPolicy::DropColumns },
            correlation_threshold: self.threshold,
        })
    }
}

fn rationals(text: &str, what: &str) -> Result<Vec<Rational>, CliError> {
    text.split(',')
        .map(|t| parse_rational(t).map_err(|_| CliError::Config(format!("{what}: not a number `{}`", t.trim()))))
        .collect()
}

fn need_p(p: Option<u32>) -> Result<u32, CliError> {
    match p {
        Some(0) => Err(CliError::Config("--p must be positive".into())),
        Some(p) => Ok(p),
        None => Err(CliError::Config("--p is required for this moment source".into())),
    }
}

fn json_rational(v: &Value, key: &str) -> Result<Rational, CliError> {
    match v.get(key) {
        Some(Value::String(s)) => Ok(parse_rational(s)?),
        Some(Value::Number(n)) => {
            let f = n.as_f64().ok_or_else(|| CliError::Config(format!("{key}: bad number")))?;
            Ok(rational_from_decimal_f64(f)?)
        }
        _ => Err(CliError::Config(format!("moments json: missing `{key}`"))),
    }
}

fn from_json(path: &Path, p: Option<u32>) -> Result<MomentSummary, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let agg = doc.get("aggregates").unwrap_or(&doc);
    let a = Aggregates { m2a: json_rational(agg, "M2a")?, m2b: json_rational(agg, "M2b")?, m1: json_rational(agg, "M1")? };
    let from_doc = doc.get("p").and_then(Value::as_u64).map(|v| v as u32);
    let p = match (p, from_doc) {
        (Some(a), Some(b)) if a != b => return Err(CliError::Config(format!("--p {a} disagrees with p = {b} in the file"))),
        (a, b) => need_p(a.or(b))?,
    };
    Ok(MomentSummary::aggregated(p, a))
}

impl MomentSource {
    pub fn resolve(&self, p: Option<u32>, csv: &CsvOptions, exec: Execution) -> Result<MomentSummary, CliError> {
        let summary = if let Some(spec) = &self.xpreset {
            XPreset::from_spec(spec)?.summary(need_p(p)?)?
        } else if let Some(text) = &self.homogeneous {
            let v = rationals(text, "--homogeneous")?;
            let h = match v.as_slice() {
                [m4, m22] => Homogeneous::even(m4.clone(), m22.clone()),
                [m4, m22, m3, m21, m111] => Homogeneous {
                    m4: m4.clone(),
                    m22: m22.clone(),
                    m3: m3.clone(),
                    m21: m21.clone(),
                    m111: m111.clone(),
                },
                _ => return Err(CliError::Config(format!("--homogeneous needs 2 or 5 values, got {}", v.len()))),
            };
            MomentSummary::homogeneous(need_p(p)?, h)
        } else if let Some(text) = &self.aggregated {
            let v = rationals(text, "--aggregated")?;
            let [m2a, m2b, m1] = <[Rational; 3]>::try_from(v)
                .map_err(|v| CliError::Config(format!("--aggregated needs 3 values, got {}", v.len())))?;
            MomentSummary::aggregated(need_p(p)?, Aggregates { m2a, m2b, m1 })
        } else if let Some(path) = &self.csv {
            let ds = load_csv(path, &csv.load_options()?)?;
            let agg = sample_aggregates_with(&standardize(&ds)?, exec);
            let dp = ds.p() as u32;
            if let Some(p) = p.filter(|&p| p != dp) {
                return Err(CliError::Config(format!("--p {p} but the data has {dp} columns")));
            }
            MomentSummary::aggregated(dp, Aggregates::from_f64(agg.m2a, agg.m2b, agg.m1)?)
        } else if let Some(path) = &self.moments_json {
            from_json(path, p)?
        } else {
            return Err(CliError::Config("no moment source given".into()));
        };
        summary.validate()?;
        Ok(summary)
    }
}
