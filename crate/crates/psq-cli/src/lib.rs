//! Library surface of the `psq` command-line tool: the expression grammar,
//! the exact/closed-form lowering passes, and the subcommand logic. Kept as
//! a library so the parsing entry points stay directly testable and fuzzable.

pub mod commands;
pub mod expr;
pub mod lower;
pub mod output;

use clap::Parser;
use std::io::Write;

/// Run with the given argv; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match commands::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success status
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let format = commands::format_of(cli.format);
    match commands::run_command(&cli) {
        Ok(report) => {
            // tolerate a closed pipe (e.g. `psq ... | head`)
            let _ = writeln!(std::io::stdout(), "{}", report.render(format));
            report.exit_code()
        }
        Err(message) => {
            let _ = writeln!(std::io::stderr(), "{}", output::render_error(&message, format));
            1
        }
    }
}
