//! Output envelope shared by every subcommand.
//!
//! JSON schema: `{"command", "inputs", "result", "residuals", "tolerance",
//! "pass"}`. Exit code 2 if and only if `"pass"` is false; usage, parse and
//! library errors exit 1 with `{"error": {"code", "message"}}` in JSON mode.

use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub result: Value,
    pub residuals: Value,
    pub tolerance: Value,
    pub pass: bool,
    /// human-readable lines for text mode
    pub lines: Vec<String>,
}

impl Report {
    pub fn exact(command: &'static str, inputs: Value, result: Value, lines: Vec<String>) -> Report {
        Report {
            command,
            inputs,
            result,
            residuals: json!([]),
            tolerance: Value::Null,
            pass: true,
            lines,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json!({
                "command": self.command,
                "inputs": self.inputs,
                "result": self.result,
                "residuals": self.residuals,
                "tolerance": self.tolerance,
                "pass": self.pass,
            })
            .to_string(),
            Format::Text => self.lines.join("\n"),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            2
        }
    }
}

/// Stable machine-readable error classification.
pub fn error_code(message: &str) -> &'static str {
    let m = message.to_ascii_lowercase();
    if m.contains("expected") && m.contains(':') {
        "parse_error"
    } else if m.contains("unknown symbol") {
        "unknown_symbol"
    } else if m.contains("not symplectic") {
        "not_symplectic"
    } else if m.contains("singular") && m.contains("generating") {
        "singular_cayley"
    } else if m.contains("interchange block") {
        "degenerate_decomposition"
    } else if m.contains("no convergence") {
        "no_convergence"
    } else if m.contains("exceeds the configured limit") {
        "resource_limit"
    } else if m.contains("resolved band") {
        "under_resolved"
    } else if m.contains("airy working range") {
        "out_of_range"
    } else if m.contains("two exponential-phase") || m.contains("two exponentials") {
        "unsupported_product"
    } else if m.contains("domain") {
        "domain_error"
    } else {
        "invalid_input"
    }
}

pub fn render_error(message: &str, format: Format) -> String {
    match format {
        Format::Json => json!({
            "error": { "code": error_code(message), "message": message }
        })
        .to_string(),
        Format::Text => format!("error: {message}"),
    }
}
