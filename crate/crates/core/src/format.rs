//! Number formatting shared by every CSV writer.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats `v` with nine significant digits in scientific notation.
///
/// The output round-trips through any float parser and is byte-stable for
/// identical inputs.
pub fn sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{v:.8e}")
}

/// Writes a header row and data rows as comma-separated lines. Fields are
/// written verbatim; callers keep commas and quotes out of them.
pub fn write_csv<S: AsRef<str>>(file: &Path, header: &[S], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let f = std::fs::File::create(file).map_err(|e| Error::io(file, e))?;
    let mut w = std::io::BufWriter::new(f);
    let io = |e| Error::io(file, e);
    let head: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
    writeln!(w, "{}", head.join(",")).map_err(io)?;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}
