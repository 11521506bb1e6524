//! Result tables on disk: one CSV per table plus a JSON sidecar tying the
//! numbers back to the binary, seed, and config that produced them. No
//! timestamps anywhere; two runs with identical inputs write identical
//! bytes.

use crate::error::CliError;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // The shortest round-trip decimal form, so equal bits always
            // print equal strings.
            Cell::Num(x) => format!("{x}"),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => format!("{b}"),
        }
    }
}

#[derive(Debug)]
pub struct ResultTable {
    /// File stem of the CSV and its sidecar.
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Provenance shared by every table of one run.
#[derive(Debug)]
pub struct RunMeta {
    pub kind: &'static str,
    pub seed: u64,
    pub config_sha256: String,
    /// Gates and numerical budgets the run applied, by name.
    pub tolerances: BTreeMap<String, f64>,
}

impl RunMeta {
    pub fn new(kind: &'static str, seed: u64, raw_config: &[u8]) -> Self {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(raw_config);
        let mut config_sha256 = String::with_capacity(64);
        for byte in digest {
            let _ = write!(config_sha256, "{byte:02x}");
        }
        Self { kind, seed, config_sha256, tolerances: BTreeMap::new() }
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    artifact: String,
    kind: &'static str,
    git_describe: &'static str,
    seed: u64,
    config_sha256: &'a str,
    columns: &'a [Column],
    tolerances: &'a BTreeMap<String, f64>,
}

/// Writes `<name>.csv` and `<name>.json` under `dir`, returning the CSV
/// path.
pub fn write_table(dir: &Path, table: &ResultTable, meta: &RunMeta) -> Result<PathBuf, CliError> {
    let io_err = |what: &str, path: &Path, e: std::io::Error| {
        CliError::Usage(format!("{what} {}: {e}", path.display()))
    };
    fs::create_dir_all(dir).map_err(|e| io_err("cannot create output directory", dir, e))?;

    let csv_path = dir.join(format!("{}.csv", table.name));
    let mut writer = csv::Writer::from_path(&csv_path)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", csv_path.display())))?;
    writer
        .write_record(table.columns.iter().map(|c| c.name))
        .and_then(|()| {
            table.rows.iter().try_for_each(|row| {
                writer.write_record(row.iter().map(|cell| cell.render()))
            })
        })
        .and_then(|()| writer.flush().map_err(csv::Error::from))
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", csv_path.display())))?;

    let sidecar = Sidecar {
        artifact: format!("{}.csv", table.name),
        kind: meta.kind,
        git_describe: env!("DRONECELL_GIT_DESCRIBE"),
        seed: meta.seed,
        config_sha256: &meta.config_sha256,
        columns: &table.columns,
        tolerances: &meta.tolerances,
    };
    let json_path = dir.join(format!("{}.json", table.name));
    let body = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| CliError::Usage(format!("cannot encode {}: {e}", json_path.display())))?;
    fs::write(&json_path, body + "\n").map_err(|e| io_err("cannot write", &json_path, e))?;
    Ok(csv_path)
}
