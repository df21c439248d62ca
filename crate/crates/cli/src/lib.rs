//! The `ridgekit` command-line tool.
//!
//! Every invocation prints one machine-readable line,
//! `status=ok key=value ...` or `status=error error=<kind> message="..."`.
//! Usage errors exit with 2, computation errors with 1.

pub mod args;
mod commands;

use std::ffi::OsString;
use std::fmt::Write as _;

use clap::Parser;

use ridgekit_core::Error;

pub use args::Cli;

/// Ordered `key=value` pairs of a summary line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pairs: Vec<(String, String)>,
}

impl Summary {
    pub fn new(command: &str) -> Self {
        let mut s = Self::default();
        s.push("command", command);
        s
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.pairs.push((key.to_string(), value.to_string()));
        self
    }

    /// Shortest round-trip representation, with `.0` for integral values.
    pub fn number(&mut self, key: &str, value: f64) -> &mut Self {
        self.push(key, format!("{value:?}"))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn render(&self, status: &str) -> String {
        let mut line = format!("status={status}");
        for (k, v) in &self.pairs {
            let _ = write!(line, " {k}={}", quote(v));
        }
        line
    }
}

fn quote(v: &str) -> String {
    if !v.is_empty() && !v.contains(|c: char| c.is_whitespace() || c == '"' || c == '=') {
        return v.to_string();
    }
    format!("\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Result of one invocation: what to print and how to exit.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Precondition(_) => "precondition",
        Error::DegenerateInput { .. } => "degenerate_input",
        Error::EmptyAccumulator(_) => "empty_accumulator",
        Error::EmptyComplement(_) => "empty_complement",
        Error::Infeasible { .. } => "infeasible",
        Error::DivisionGuard(_) => "division_guard",
        Error::Numerical(_) => "numerical",
        Error::Parse { .. } => "parse",
        Error::Io(_) => "io",
    }
}

fn failure(e: &Error) -> Outcome {
    let mut s = Summary::default();
    s.push("error", error_kind(e));
    if let Error::Infeasible { max_violation } = e {
        s.push("infeasible", true).number("max_violation", *max_violation);
    }
    s.push("message", e);
    Outcome { code: 1, stdout: s.render("error") + "\n", stderr: format!("error: {e}\n") }
}

/// Parses `argv` (including the program name) and runs the command.
///
/// `serve` blocks; everything else returns once its files are written.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome { code: 0, stdout: rendered, stderr: String::new() };
            }
            let mut s = Summary::default();
            s.push("error", "usage").push("message", e.kind());
            return Outcome { code: 2, stdout: s.render("error") + "\n", stderr: rendered };
        }
    };
    match commands::execute(cli.command) {
        Ok(summary) => Outcome { code: 0, stdout: summary.render("ok") + "\n", stderr: String::new() },
        Err(e) => failure(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_quotes_values_with_spaces() {
        let mut s = Summary::new("angle");
        s.number("phi", 0.0).push("message", "two words");
        assert_eq!(s.render("ok"), "status=ok command=angle phi=0.0 message=\"two words\"");
        assert_eq!(s.get("phi"), Some("0.0"));
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let out = run(["ridgekit", "angle", "--bogus"]);
        assert_eq!(out.code, 2);
        assert!(out.stdout.starts_with("status=error error=usage"));
    }

    #[test]
    fn help_exits_cleanly() {
        let out = run(["ridgekit", "--help"]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains("fit"));
    }
}
