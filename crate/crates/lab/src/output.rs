//! CSV tables with unit headers and the JSON run manifest.

use crate::config::RunConfig;
use crate::experiments::Outcome;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use swe_core::noise::{seed_derive, Label};

pub const MANIFEST_SCHEMA: &str = "swe-lab/manifest/v1";
pub const MANIFEST_FILE: &str = "manifest.json";

/// One pass/fail threshold evaluated on the run's own output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRef {
    pub name: String,
    /// relative to the output directory
    pub path: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub root: u64,
    pub derivation: String,
    /// keys of the first samples, for spot checks
    pub first: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub experiment: String,
    pub anchor: String,
    pub version: String,
    pub config: RunConfig,
    pub seeds: Seeds,
    pub workers: usize,
    pub wall_time_s: f64,
    pub tables: Vec<TableRef>,
    /// other emitted files (JSON summaries, binary dumps)
    pub files: Vec<String>,
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
}

impl Manifest {
    pub(crate) fn new(config: &RunConfig, workers: usize, wall: f64, tables: Vec<TableRef>, outcome: &Outcome) -> Self {
        let exp = config.run.experiment;
        let root = config.run.root_seed;
        let first = (0..config.run.samples.min(4)).map(|s| crate::experiments::sample_seed(root, exp, s)).collect();
        Manifest {
            schema: MANIFEST_SCHEMA.to_string(),
            experiment: exp.name().to_string(),
            anchor: exp.anchor().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            seeds: Seeds { root, derivation: format!("seed_derive(root, [\"{exp}\", \"sample\", index])"), first },
            workers,
            wall_time_s: wall,
            tables,
            files: outcome.files.clone(),
            summary: outcome.summary.clone(),
            checks: outcome.checks.clone(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(dir.join(MANIFEST_FILE))?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(dir.join(MANIFEST_FILE))?)?)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub manifest: Manifest,
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Writes tables into the output directory and remembers them for the manifest.
pub struct Sink {
    dir: PathBuf,
    pub(crate) tables: Vec<TableRef>,
}

impl Sink {
    pub(crate) fn new(dir: &Path) -> Self {
        Sink { dir: dir.to_path_buf(), tables: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// `columns` are `name[unit]`; values are written with shortest round-trip formatting.
    pub fn table(&mut self, name: &str, columns: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
        let path = format!("{name}.csv");
        let mut w = csv::Writer::from_path(self.dir.join(&path))?;
        w.write_record(columns)?;
        for r in rows {
            debug_assert_eq!(r.len(), columns.len());
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()?;
        self.tables.push(TableRef {
            name: name.to_string(),
            path,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: rows.len(),
        });
        Ok(())
    }

    pub fn json(&self, file: &str, value: &impl Serialize) -> Result<String> {
        let mut w = BufWriter::new(File::create(self.dir.join(file))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        Ok(file.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

/// The documented derivation, checked against the core implementation.
pub fn derived_key(root: u64, experiment: &str, index: usize) -> u64 {
    seed_derive(root, &[Label::Str(experiment), Label::Str("sample"), Label::Int(index as i64)])
}
