//! Concrete syntax of `.magpi` protocol files.
//!
//! ```text
//! protocol Ping
//! roles p, q, r
//! reliability { p: {r}, r: {p} }
//! type Sr @ r = &{p?ok().end, p?ko().end}
//! proc Pr(c: Sr) = c & {p?ok().0, p?ko().0}
//! system new s : {p: Sp, q: Sq, r: Sr} in Pp(s[p]) | Pq(s[q]) | Pr(s[r]) | s:[]
//! ```
//!
//! Roles left out of `reliability` have the empty reliability set.

mod ast;
mod check;
mod lexer;
mod parser;
mod pretty;

use magpi_core::{Diagnostic, Process, SbTypeExpr, SessionTypeExpr};

pub use ast::ProtocolFile;
pub use parser::RESERVED;
pub use pretty::{pretty_file, pretty_process, pretty_sb_type, pretty_session_type};

/// Parses and checks a whole file.
pub fn parse(source: &str) -> Result<ProtocolFile, Vec<Diagnostic>> {
    let raw = parser::Parser::new(source)
        .and_then(|mut p| p.file())
        .map_err(|d| vec![d])?;
    check::check(raw)
}

fn parse_with<T>(source: &str, f: impl FnOnce(&mut parser::Parser) -> Result<T, Diagnostic>) -> Result<T, Diagnostic> {
    let mut p = parser::Parser::new(source)?;
    let out = f(&mut p)?;
    p.expect_eof()?;
    Ok(out)
}

/// Parses a process term on its own. Syntax only: names are not checked.
pub fn parse_process(source: &str) -> Result<Process, Diagnostic> {
    parse_with(source, |p| p.process())
}

/// Parses a session type on its own. Free names become `type` references.
pub fn parse_session_type(source: &str) -> Result<SessionTypeExpr, Diagnostic> {
    parse_with(source, |p| p.session_type())
}

pub fn parse_sb_type(source: &str) -> Result<SbTypeExpr, Diagnostic> {
    parse_with(source, |p| p.sb_type())
}

/// `[{code, severity, span, message}, ...]`
pub fn diagnostics_json(diags: &[Diagnostic]) -> String {
    serde_json::to_string_pretty(diags).expect("diagnostics serialize")
}

/// One `line:col: error[Code]: message` line per diagnostic.
pub fn diagnostics_text(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}
