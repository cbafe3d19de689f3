use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_OBSTRUCTION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    /// An expected mathematical negative result.
    Obstruction(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Obstruction(_) => EXIT_OBSTRUCTION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Obstruction(_) => "obstruction",
            CliError::Numerical(_) => "numerical",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Obstruction(m) | CliError::Numerical(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    /// `|value - target| <= tolerance`.
    #[serde(rename = "~=")]
    Near,
}

/// One asserted number with its tolerance and the claim it checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub tolerance: f64,
    pub anchor: String,
    pub pass: bool,
    #[serde(skip)]
    pub flag: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, anchor: impl Into<String>) -> Self {
        let pass = value <= bound;
        Self { name: name.into(), value, relation: Relation::AtMost, target: None, tolerance: bound, anchor: anchor.into(), pass, flag: false }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, anchor: impl Into<String>) -> Self {
        let pass = value >= bound;
        Self { name: name.into(), value, relation: Relation::AtLeast, target: None, tolerance: bound, anchor: anchor.into(), pass, flag: false }
    }

    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64, anchor: impl Into<String>) -> Self {
        let pass = (value - target).abs() <= tol;
        Self { name: name.into(), value, relation: Relation::Near, target: Some(target), tolerance: tol, anchor: anchor.into(), pass, flag: false }
    }

    /// A yes/no fact, recorded as `1` or `0` against the bound `1`.
    pub fn holds(name: impl Into<String>, ok: bool, anchor: impl Into<String>) -> Self {
        Self { flag: true, ..Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0, anchor) }
    }
}

/// A CSV table; every row has one entry per header column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Usage(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorObject {
    pub kind: String,
    pub message: String,
}

/// Everything a run produced, written whether or not it succeeded.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub pass: bool,
    pub exit_code: i32,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub data: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorObject>,
    pub elapsed_s: f64,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            command: command.into(),
            pass: false,
            exit_code: EXIT_USAGE,
            config,
            checks: Vec::new(),
            data: BTreeMap::new(),
            error: None,
            elapsed_s: 0.0,
            tables: Vec::new(),
            lines: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn data(&mut self, key: &str, v: impl Serialize) {
        self.data.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn fail_with(&mut self, e: &CliError) {
        self.pass = false;
        self.exit_code = e.exit_code();
        self.error = Some(ErrorObject { kind: e.kind().into(), message: e.message().into() });
    }

    /// `<dir>/<command>.json` plus `<dir>/<command>_<table>.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
        let io = |e: std::io::Error| CliError::Usage(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let p = dir.join(format!("{}_{}.csv", self.command, t.name));
            t.write(&p)?;
            written.push(p);
        }
        let p = dir.join(format!("{}.json", self.command));
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Usage(e.to_string()))?;
        std::fs::write(&p, text + "\n").map_err(io)?;
        written.push(p);
        Ok(written)
    }

    pub fn human(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        for c in &self.checks {
            if c.flag {
                s.push_str(&format!("[{}] {}\n", if c.pass { "pass" } else { "FAIL" }, c.name));
                continue;
            }
            let rel = match c.relation {
                Relation::AtMost => format!("<= {:.3e}", c.tolerance),
                Relation::AtLeast => format!(">= {:.3e}", c.tolerance),
                Relation::Near => format!("~= {:.6} +- {:.1e}", c.target.unwrap_or(f64::NAN), c.tolerance),
            };
            s.push_str(&format!("[{}] {} = {:.6e} {rel}\n", if c.pass { "pass" } else { "FAIL" }, c.name, c.value));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!("error ({}): {}\n", e.kind, e.message));
        }
        s.push_str(&format!("{}: {} (exit {})\n", self.command, if self.pass { "pass" } else { "fail" }, self.exit_code));
        s
    }
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}
