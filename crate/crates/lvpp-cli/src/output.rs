use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lvpp::solver::fmt_sig;

use crate::config::ExperimentConfig;

pub const GIT_HASH: &str = env!("LVPP_GIT_HASH");

/// `#` comment lines naming the tool, its build and the resolved configuration.
pub fn metadata_header(command: &str, cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# lvpp {} ({command})", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# git = {GIT_HASH}");
    for (k, v) in cfg.echo() {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

/// A CSV table built row by row with the shared number format.
pub struct Table {
    header: String,
    body: String,
}

pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { header: columns.join(","), body: String::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        let line: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Num(x) => fmt_sig(x),
                Cell::Int(i) => i.to_string(),
                Cell::Text(t) if t.contains([',', '"']) => format!("\"{}\"", t.replace('"', "\"\"")),
                Cell::Text(t) => t,
            })
            .collect();
        self.body += &line.join(",");
        self.body.push('\n');
    }

    pub fn render(&self, preamble: &str) -> String {
        format!("{preamble}{}\n{}", self.header, self.body)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}
