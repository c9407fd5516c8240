use std::io::{self, BufRead, Write};

use qutedb_core::sql::parse_script;
use qutedb_core::Engine;

use crate::{render, OutputFormat};

pub const PROMPT: &str = "qute> ";
const CONTINUATION: &str = "   -> ";

/// Executes every statement of `text` in order. Diagnostics go to stderr;
/// returns false at the first failing statement.
pub fn run_script(
    engine: &mut Engine,
    text: &str,
    out: &mut dyn Write,
    format: OutputFormat,
) -> bool {
    let stmts = match parse_script(text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return false;
        }
    };
    for (i, stmt) in stmts.iter().enumerate() {
        let result = engine
            .execute(stmt)
            .map_err(anyhow::Error::from)
            .and_then(|o| Ok(render::outcome(&o, format, out)?));
        if let Err(e) = result {
            eprintln!("error in statement {}: {e:#}", i + 1);
            return false;
        }
    }
    true
}

/// Byte offset just past the last `;` outside string literals and comments.
fn complete_prefix(buf: &str) -> Option<usize> {
    let (mut in_str, mut in_comment, mut end) = (false, false, None);
    let mut chars = buf.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '\n' if in_comment => in_comment = false,
            _ if in_comment => {}
            '\'' => in_str = !in_str,
            '-' if !in_str && chars.peek().is_some_and(|&(_, n)| n == '-') => in_comment = true,
            ';' if !in_str => end = Some(i + 1),
            _ => {}
        }
    }
    end
}

/// Interactive loop over `input`. Returns whether every statement succeeded.
pub fn repl(
    engine: &mut Engine,
    input: impl BufRead,
    out: &mut dyn Write,
    format: OutputFormat,
) -> io::Result<bool> {
    let mut ok = true;
    let mut buf = String::new();
    write!(out, "{PROMPT}")?;
    out.flush()?;
    for line in input.lines() {
        let line = line?;
        let cmd = line.trim();
        if buf.trim().is_empty() && matches!(cmd, ".quit" | ".exit" | "\\q") {
            return Ok(ok);
        }
        if buf.trim().is_empty() && cmd == ".tables" {
            for t in engine.catalog.tables() {
                writeln!(out, "{} ({} rows)", t.name, t.row_count())?;
            }
        } else {
            buf.push_str(&line);
            buf.push('\n');
            if let Some(end) = complete_prefix(&buf) {
                let rest = buf.split_off(end);
                ok &= run_script(engine, &buf, out, format);
                buf = rest;
            }
        }
        write!(
            out,
            "{}",
            if buf.trim().is_empty() {
                PROMPT
            } else {
                CONTINUATION
            }
        )?;
        out.flush()?;
    }
    if !buf.trim().is_empty() && parse_script(&buf).is_ok_and(|s| !s.is_empty()) {
        eprintln!("error: unterminated statement (missing ';')");
        ok = false;
    }
    writeln!(out)?;
    Ok(ok)
}
