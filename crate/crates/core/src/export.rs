//! Plain-text output shared by the matrix, spectrum and report writers.

use std::io::Write;

use crate::error::Result;

/// Version tag carried by every JSON report and CSV header.
pub const SCHEMA_VERSION: u32 = 1;

/// Decimal rendering with 17 significant digits, enough to round-trip any
/// `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `rows` as comma-separated lines.
pub fn write_csv_rows<W, I, R>(mut out: W, header: Option<&str>, rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: AsRef<[String]>,
{
    if let Some(h) = header {
        writeln!(out, "{h}")?;
    }
    for row in rows {
        writeln!(out, "{}", row.as_ref().join(","))?;
    }
    Ok(())
}
