//! CSV output shared by the bench and command-line writers.

use std::path::Path;

use crate::{Error, Result};

/// Writes a CSV file with the comma-separated `header` followed by `rows`.
/// Fields are quoted only when they need it.
pub(crate) fn write_csv<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let to_io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    w.write_record(header.split(',')).map_err(to_io)?;
    for row in rows {
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
