//! Deterministic CSV output.
//!
//! Layout: the column header on line 1, `#`-prefixed metadata comments next,
//! then the data rows. Floats are written with Rust's shortest round-trip
//! formatting, so identical flags and seeds reproduce identical bytes.
//! Nothing time- or machine-dependent ever enters a file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use spdgeo::Result;

pub struct Csv {
    w: BufWriter<File>,
}

impl Csv {
    pub fn create(path: &Path, header: &str, metadata: &[String]) -> Result<Csv> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{header}")?;
        for m in metadata {
            writeln!(w, "# {m}")?;
        }
        Ok(Csv { w })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        writeln!(self.w, "{}", fields.join(","))?;
        Ok(())
    }

    /// Out-of-band marker, e.g. for a solver that never reached its stop
    /// threshold. Kept as a comment so the column contract stays intact.
    pub fn flag(&mut self, note: &str) -> Result<()> {
        writeln!(self.w, "# {note}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal form, the same formatting the matrix files
/// use.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Fixed three decimals, for the dB columns: plot-friendly and still exact
/// enough to check orderings and thresholds from the file.
pub fn db(x: f64) -> String {
    format!("{x:.3}")
}
