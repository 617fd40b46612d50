//! CSV emission: comma-separated, header row, LF endings, UTF-8, every
//! number printed with 12 significant digits so identical runs produce
//! byte-identical files.

use std::io::Write;
use std::path::Path;

use crate::Failure;

pub fn fmt(v: f64) -> String {
    format!("{v:.11e}")
}

/// `None` cells print as empty fields (windows that do not exist).
pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<(), Failure> {
    let mut out = String::with_capacity(rows.len() * header.len() * 20);
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let mut first = true;
        for cell in row {
            if !first {
                out.push(',');
            }
            first = false;
            if let Some(v) = cell {
                out.push_str(&fmt(*v));
            }
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| Failure::io(format!("`{}`: {e}", path.display())))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Failure::io(format!("`{}`: {e}", path.display())))
}
