use std::io::{self, Write};

use qutedb_core::{Outcome, Quality, ResultSet};

use crate::OutputFormat;

fn table(rs: &ResultSet, out: &mut dyn Write) -> io::Result<()> {
    let cells: Vec<Vec<String>> = rs
        .rows
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect())
        .collect();
    let mut widths: Vec<usize> = rs.columns.iter().map(|c| c.chars().count()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |vals: &[String]| {
        vals.iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:<w$}"))
            .collect::<Vec<_>>()
            .join(" | ")
    };
    writeln!(out, "{}", line(&rs.columns))?;
    writeln!(
        out,
        "{}",
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("-+-")
    )?;
    for row in &cells {
        writeln!(out, "{}", line(row))?;
    }
    let quality = match rs.quality {
        Quality::Exact => "exact".to_string(),
        Quality::Approximate { bound } => format!("approximate, ±{bound:.4}"),
    };
    let n = rs.rows.len();
    writeln!(out, "({n} row{}, {quality})", if n == 1 { "" } else { "s" })
}

fn csv(rs: &ResultSet, out: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&rs.columns)?;
    for row in &rs.rows {
        w.write_record(row.iter().map(ToString::to_string))?;
    }
    w.flush()
}

pub fn result(rs: &ResultSet, format: OutputFormat, out: &mut dyn Write) -> io::Result<()> {
    match format {
        OutputFormat::Table => table(rs, out),
        OutputFormat::Csv => csv(rs, out),
    }
}

pub fn outcome(o: &Outcome, format: OutputFormat, out: &mut dyn Write) -> io::Result<()> {
    match o {
        Outcome::Done(msg) => writeln!(out, "{msg}"),
        Outcome::Rows(rs) => result(rs, format, out),
        Outcome::Explain { plan, analyzed } => {
            write!(out, "{plan}")?;
            if let Some(rs) = analyzed {
                writeln!(out, "-- trace")?;
                write!(out, "{}", rs.trace_text())?;
                result(rs, format, out)?;
            }
            Ok(())
        }
    }
}
