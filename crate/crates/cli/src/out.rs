//! Output plumbing shared by every command: one float format for
//! diff-stable CSVs, and atomic file writes confined to the output
//! directory.

use crate::errors::{io_at, CliResult};
use std::fs;
use std::path::{Path, PathBuf};

/// Nine significant digits, scientific notation, '.' decimal separator.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

/// A CSV document with a mandatory header row and LF line endings.
pub struct Csv {
    buf: String,
    cols: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv { buf, cols: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.cols, "ragged CSV row");
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

/// Create `dir` if needed and return the path of `name` inside it.
pub fn ensure_out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_at(dir, e))
}

/// Write `bytes` to `dir/name` via a temp file in the same directory,
/// renamed into place so readers never observe a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    ensure_out_dir(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| io_at(&tmp, e))?;
    fs::rename(&tmp, &target).map_err(|e| io_at(&target, e))?;
    Ok(target)
}
