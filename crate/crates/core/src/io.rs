//! CSV conventions: comma separator, header row, LF line endings, floats
//! with 17 significant digits.

use crate::error::Result;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

/// 17 significant digits, so every f64 round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_writer<W: std::io::Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn csv_file(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(csv_writer(BufWriter::new(File::create(path)?)))
}
