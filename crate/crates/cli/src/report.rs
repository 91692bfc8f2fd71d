//! Tables and the trailing summary line.

use std::fmt::Write as _;

use crate::config::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

/// Named columns with units (`-` for dimensionless) and string cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[(&'static str, &'static str)]) -> Self {
        Self { title: title.into(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Cell of `row` under column `name`.
    pub fn get(&self, row: usize, name: &str) -> Option<&str> {
        let c = self.columns.iter().position(|(n, _)| *n == name)?;
        self.rows.get(row).map(|r| r[c].as_str())
    }

    pub fn render(&self, format: Format) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.title);
        match format {
            Format::Table => {
                let names: Vec<&str> = self.columns.iter().map(|c| c.0).collect();
                let units: Vec<&str> = self.columns.iter().map(|c| c.1).collect();
                let _ = writeln!(s, "# columns: {}", names.join(" "));
                let _ = writeln!(s, "# units: {}", units.join(" "));
                for r in &self.rows {
                    let _ = writeln!(s, "{}", r.join(" "));
                }
            }
            Format::Records => {
                for r in &self.rows {
                    let line: Vec<String> = self.columns.iter().zip(r).map(|((n, _), v)| format!("{n}={v}")).collect();
                    let _ = writeln!(s, "{}", line.join(" "));
                }
            }
        }
        s
    }
}

/// Result of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub command: &'static str,
    pub status: Status,
    pub tables: Vec<Table>,
    /// Ordered `key=value` pairs for the summary line.
    pub summary: Vec<(String, String)>,
    /// Extra payload written to the configured output path (or appended to stdout).
    pub payload: Option<String>,
}

impl CommandOutput {
    pub fn new(command: &'static str) -> Self {
        Self { command, status: Status::Pass, tables: Vec::new(), summary: Vec::new(), payload: None }
    }

    pub fn add(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn table(&self, title_prefix: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.title.starts_with(title_prefix))
    }

    /// `# summary command=… status=… key=value …`
    pub fn summary_line(&self) -> String {
        let mut s = format!("# summary command={} status={}", self.command, self.status.as_str());
        for (k, v) in &self.summary {
            let _ = write!(s, " {k}={v}");
        }
        s
    }

    pub fn render(&self, format: Format, include_payload: bool) -> String {
        let mut s = String::new();
        if include_payload {
            if let Some(p) = &self.payload {
                s.push_str(p);
            }
        }
        for t in &self.tables {
            s.push_str(&t.render(format));
        }
        s.push_str(&self.summary_line());
        s.push('\n');
        s
    }
}

pub fn sci(x: f64) -> String {
    format!("{x:.9e}")
}

pub fn fix(x: f64) -> String {
    format!("{x:.6}")
}
