//! Profile ingestion, CSV tables and JSON reports.
//!
//! CSV cells are written as `{:.16e}` (17 significant digits, always round-trips) with a
//! `\n` terminator. JSON reports use serde_json's shortest round-trip float formatting.

use std::fs;
use std::io::Write;
use std::path::Path;

use helmscat_core::profile::{Profile, ProfileConfig, ProfileKind};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::CliError;

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Parses and validates a profile description held in `text`. `file` only labels errors.
pub fn parse_profile_str(text: &str, file: &str, tail_tol: Option<f64>) -> Result<Profile, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut config: ProfileConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Schema {
            file: file.into(),
            path: if path == "." { "profile".into() } else { format!("profile.{path}") },
            message: e.into_inner().to_string(),
        }
    })?;
    if tail_tol.is_some() {
        config.tail_tol = tail_tol;
    }
    Profile::new(config).map_err(|e| CliError::schema(file, e))
}

pub fn parse_profile(path: &Path, tail_tol: Option<f64>) -> Result<Profile, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        file: display(path),
        source,
    })?;
    parse_profile_str(&text, &display(path), tail_tol)
}

/// Deterministic pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        file: display(path),
        source,
    })
}

pub fn write_profile(path: &Path, config: &ProfileConfig) -> Result<(), CliError> {
    write_text(path, &to_json(config))
}

/// A numeric table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(table: &Table) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    write_text(path, &csv_string(table))
}

pub fn parse_csv(text: &str, file: &str) -> Result<Table, CliError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let csv_err = |source| CliError::Csv {
        file: file.into(),
        source,
    };
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| CliError::Schema {
                    file: file.into(),
                    path: format!("row {}, column {}", i + 1, table.header[j]),
                    message: format!("{cell:?} is not a number"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        table.rows.push(row);
    }
    Ok(table)
}

pub fn read_csv(path: &Path) -> Result<Table, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        file: display(path),
        source,
    })?;
    parse_csv(&text, &display(path))
}

/// Reflection samples from a table with columns `k`, `ReR2`, `ImR2`, sorted by `k`.
pub fn r2_samples(table: &Table, file: &str) -> Result<(Vec<f64>, Vec<Complex64>), CliError> {
    let col = |name: &str| {
        table.column(name).ok_or_else(|| CliError::Schema {
            file: file.into(),
            path: "header".into(),
            message: format!("missing column {name:?}"),
        })
    };
    let (ks, re, im) = (col("k")?, col("ReR2")?, col("ImR2")?);
    let mut rows: Vec<(f64, Complex64)> = ks
        .into_iter()
        .zip(re.into_iter().zip(im))
        .map(|(k, (a, b))| (k, Complex64::new(a, b)))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rows.into_iter().unzip())
}

/// `(x, c)` samples of a profile.
pub fn sample_table(p: &Profile, xs: &[f64]) -> Table {
    let mut t = Table::new(&["x", "c"]);
    for &x in xs {
        t.push(vec![x, p.eval_c(x)]);
    }
    t
}

/// Builds a `samples` profile from a table with columns `x` and `c`.
pub fn profile_from_table(table: &Table, file: &str) -> Result<Profile, CliError> {
    let missing = |name: &str| CliError::Schema {
        file: file.into(),
        path: "header".into(),
        message: format!("missing column {name:?}"),
    };
    let xs = table.column("x").ok_or_else(|| missing("x"))?;
    let cs = table.column("c").ok_or_else(|| missing("c"))?;
    Profile::from_kind(ProfileKind::Samples { xs, cs }).map_err(|e| CliError::schema(file, e))
}
