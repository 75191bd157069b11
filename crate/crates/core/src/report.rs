//! Deterministic pass/fail reporting shared by the verification suites:
//! one line per identity, rendered either as an aligned text table or as
//! line-delimited JSON records. No timestamps, no map-order dependence.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

/// One verified identity: which suite it belongs to, a stable check id,
/// the expected and computed values as canonical text, and the verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckLine {
    pub suite: String,
    pub check: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl CheckLine {
    pub fn new(
        suite: impl Into<String>,
        check: impl Into<String>,
        expected: impl Into<String>,
        computed: impl Into<String>,
        pass: bool,
    ) -> Self {
        Self {
            suite: suite.into(),
            check: check.into(),
            expected: expected.into(),
            computed: computed.into(),
            pass,
        }
    }

    /// Convenience for equality checks on displayable exact values.
    pub fn equality<T: PartialEq + std::fmt::Display>(
        suite: impl Into<String>,
        check: impl Into<String>,
        expected: &T,
        computed: &T,
    ) -> Self {
        Self::new(
            suite,
            check,
            expected.to_string(),
            computed.to_string(),
            expected == computed,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Records,
}

/// Renders the report. Table output pads columns to the widest entry;
/// records output is one JSON object per line.
pub fn render(lines: &[CheckLine], format: ReportFormat, out: &mut impl Write) -> io::Result<()> {
    match format {
        ReportFormat::Records => {
            for line in lines {
                serde_json::to_writer(&mut *out, line)?;
                writeln!(out)?;
            }
        }
        ReportFormat::Table => {
            // Cap the alignment width: occasional entries (whole operator
            // texts) run to thousands of characters and would pad every row.
            let cap = 40;
            let width =
                |f: fn(&CheckLine) -> usize| lines.iter().map(f).max().unwrap_or(5).clamp(5, cap);
            let w_suite = width(|l| l.suite.len());
            let w_check = width(|l| l.check.len());
            let w_expected = width(|l| l.expected.len());
            for line in lines {
                writeln!(
                    out,
                    "{}  {:<w_suite$}  {:<w_check$}  expected {:<w_expected$}  computed {}",
                    if line.pass { "PASS" } else { "FAIL" },
                    line.suite,
                    line.check,
                    line.expected,
                    line.computed,
                )?;
            }
        }
    }
    Ok(())
}

/// Summary trailer with counts, omitted in records mode by the caller if
/// byte-stable machine output is required.
pub fn render_summary(lines: &[CheckLine], out: &mut impl Write) -> io::Result<()> {
    let failed = lines.iter().filter(|l| !l.pass).count();
    writeln!(out, "{} checks, {} failed", lines.len(), failed)
}

pub fn first_failure(lines: &[CheckLine]) -> Option<&CheckLine> {
    lines.iter().find(|l| !l.pass)
}

pub fn all_pass(lines: &[CheckLine]) -> bool {
    lines.iter().all(|l| l.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_and_records_render() {
        let lines = vec![
            CheckLine::new("tu", "sum n=1", "(1, 3)", "(1, 3)", true),
            CheckLine::new("tu", "sum n=2", "(1, 3)", "(1, 4)", false),
        ];
        let mut buf = Vec::new();
        render(&lines, ReportFormat::Table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("PASS  tu"));
        assert!(text.contains("FAIL  tu"));

        let mut buf = Vec::new();
        render(&lines, ReportFormat::Records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first: CheckLine = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert!(first.pass);
        assert_eq!(first_failure(&lines).unwrap().check, "sum n=2");
        assert!(!all_pass(&lines));
    }
}
