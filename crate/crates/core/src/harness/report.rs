//! Tabular and JSON emission. Every CSV starts with a `# schema=1` line and
//! every number is printed with 12 significant digits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_SCHEMA_LINE: &str = "# schema=1";

const SIG_DIGITS: i32 = 12;

/// Formats `x` with 12 significant digits, dropping trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..SIG_DIGITS).contains(&exp) {
        let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new leading digit (9.99.. -> 10.0)
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
        let (mantissa, exponent) = s.split_once('e').expect("scientific format");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exponent}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!("unknown output format {other:?}"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_SCHEMA_LINE}")?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            out.write_record(row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8")
    }

    /// Parses CSV written by [`Table::write_csv`].
    pub fn from_csv_str(text: &str) -> Result<Table> {
        let body = text
            .strip_prefix(CSV_SCHEMA_LINE)
            .ok_or_else(|| Error::Parse(format!("missing {CSV_SCHEMA_LINE:?} header")))?
            .trim_start_matches(['\r', '\n']);
        let mut rd = csv::Reader::from_reader(body.as_bytes());
        let columns = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = rd
            .records()
            .map(|r| r.map(|rec| rec.iter().map(String::from).collect()).map_err(csv_err))
            .collect::<Result<_>>()?;
        Ok(Table { columns, rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Cell helpers.
pub fn num(x: f64) -> String {
    fmt_num(x)
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn text(x: impl fmt::Display) -> String {
    x.to_string()
}
