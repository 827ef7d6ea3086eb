use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Flat view of a report for CSV export.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table { headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub result: serde_json::Value,
    /// Identities that failed; a nonempty list makes the process exit with code 3.
    pub violations: Vec<String>,
    #[serde(skip)]
    pub table: Table,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, result: impl Serialize, table: Table) -> Result<Self, CliError> {
        Ok(Report {
            command: command.to_string(),
            config: config.clone(),
            result: serde_json::to_value(result)?,
            violations: Vec::new(),
            table,
        })
    }

    pub fn violation(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                let mut out = format!("# config: {}\n", serde_json::to_string(&self.config)?);
                for v in &self.violations {
                    out.push_str(&format!("# violation: {v}\n"));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.table.headers)?;
                for row in &self.table.rows {
                    w.write_record(row)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
                out.push_str(&String::from_utf8_lossy(&bytes));
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_both_formats() {
        let mut t = Table::new(&["n", "v"]);
        t.push(vec!["0".into(), "0".into()]);
        let r = Report::new("test", &RunConfig::default(), serde_json::json!({"x": 1}), t).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.render(Format::Json).unwrap()).unwrap();
        assert_eq!(json["config"]["p"], 3);
        assert_eq!(json["result"]["x"], 1);
        let csv = r.render(Format::Csv).unwrap();
        assert!(csv.starts_with("# config: "));
        assert!(csv.ends_with("n,v\n0,0\n"));
    }
}
