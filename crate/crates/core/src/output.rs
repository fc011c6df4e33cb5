//! CSV and JSON emitters.
//!
//! Floats in CSV are written with 17 significant digits, which round-trips
//! every `f64`. Optional `#` comment lines precede the header.

use std::io::{self, Write};

use serde::Serialize;

use crate::analysis::SweepRow;

pub const CSV_HEADER: &str = "n,m,ratio,e_in,e_out,eta,bell";

/// 17 significant digits in scientific notation.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write + ?Sized>(
    out: &mut W,
    comments: &[String],
    rows: &[SweepRow],
) -> io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let bell = r.bell.map(float).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.m,
            float(r.ratio),
            float(r.e_in),
            float(r.e_out),
            float(r.eta),
            bell
        )?;
    }
    Ok(())
}

/// Two-column `quantity,value` listing for single-point results.
pub fn write_pairs<W: Write + ?Sized>(out: &mut W, pairs: &[(&str, String)]) -> io::Result<()> {
    writeln!(out, "quantity,value")?;
    for (k, v) in pairs {
        writeln!(out, "{k},{v}")?;
    }
    Ok(())
}

pub fn write_json<W: Write + ?Sized, T: Serialize + ?Sized>(
    out: &mut W,
    value: &T,
) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}
