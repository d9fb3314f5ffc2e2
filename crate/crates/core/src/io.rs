//! Plain-text persistence for matrix sets and generator ground truth.
//!
//! `spdset v1`: header `spdset v1 N=<n> K=<k>`, then one line per matrix —
//! a 0-based index followed by the `N(N+1)/2` upper-triangular entries in
//! row-major order. `spdtruth v1`: same header shape, one `A` line with the
//! `N*N` mixing entries (row-major) and one `D <k> <entries>` line per
//! member. Lines starting with `#` are comments (generator metadata lives
//! there) and blank lines are ignored. Floats are written with Rust's
//! shortest round-trip formatting, so write-read cycles are bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::set::MatrixSet;

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn write_header<W: Write>(
    w: &mut W,
    kind: &str,
    n: usize,
    k: usize,
    comments: &[String],
) -> std::io::Result<()> {
    writeln!(w, "{kind} v1 N={n} K={k}")?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    Ok(())
}

/// Writes a set in `spdset v1` form; `comments` become `#` lines after the
/// header.
pub fn write_set<W: Write>(w: &mut W, set: &MatrixSet, comments: &[String]) -> Result<()> {
    let n = set.dim();
    write_header(w, "spdset", n, set.len(), comments)?;
    for (k, c) in set.members().iter().enumerate() {
        write!(w, "{k}")?;
        let m = c.matrix();
        for i in 0..n {
            for j in i..n {
                write!(w, " {}", m[(i, j)])?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_set_file(path: impl AsRef<Path>, set: &MatrixSet, comments: &[String]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_set(&mut w, set, comments)?;
    w.flush()?;
    Ok(())
}

struct Lines<'a, R> {
    reader: R,
    origin: &'a str,
    line_no: usize,
}

impl<'a, R: BufRead> Lines<'a, R> {
    fn new(reader: R, origin: &'a str) -> Self {
        Self {
            reader,
            origin,
            line_no: 0,
        }
    }

    /// Next content line (comments and blanks skipped), or None at EOF.
    fn next_content(&mut self) -> Result<Option<(usize, String)>> {
        loop {
            let mut buf = String::new();
            if self.reader.read_line(&mut buf)? == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let trimmed = buf.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok(Some((self.line_no, trimmed.to_string())));
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        parse_err(self.origin, line, message)
    }
}

fn parse_header(header: &str, kind: &str, origin: &str, line: usize) -> Result<(usize, usize)> {
    let mut parts = header.split_whitespace();
    let (tag, version) = (parts.next(), parts.next());
    if tag != Some(kind) || version != Some("v1") {
        return Err(parse_err(
            origin,
            line,
            format!("expected header `{kind} v1 ...`, found `{header}`"),
        ));
    }
    let mut n = None;
    let mut k = None;
    for p in parts {
        if let Some(v) = p.strip_prefix("N=") {
            n = v.parse::<usize>().ok();
        } else if let Some(v) = p.strip_prefix("K=") {
            k = v.parse::<usize>().ok();
        } else {
            return Err(parse_err(origin, line, format!("unexpected header field `{p}`")));
        }
    }
    match (n, k) {
        (Some(n), Some(k)) if n > 0 && k > 0 => Ok((n, k)),
        _ => Err(parse_err(origin, line, "header must carry positive N= and K=")),
    }
}

fn parse_floats(fields: &[&str], origin: &str, line: usize) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| parse_err(origin, line, format!("not a number: `{f}`")))
        })
        .collect()
}

/// Reads an `spdset v1` stream; `origin` labels parse errors (a path or a
/// description of the stream).
pub fn read_set<R: BufRead>(reader: R, origin: &str) -> Result<MatrixSet> {
    let mut lines = Lines::new(reader, origin);
    let (hline, header) = lines
        .next_content()?
        .ok_or_else(|| parse_err(origin, 0, "empty input"))?;
    let (n, k) = parse_header(&header, "spdset", origin, hline)?;
    let entries_per_matrix = n * (n + 1) / 2;

    let mut members = Vec::with_capacity(k);
    for expected in 0..k {
        let (lno, content) = lines
            .next_content()?
            .ok_or_else(|| lines.err(lines.line_no, format!("expected matrix {expected}, found end of input")))?;
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != entries_per_matrix + 1 {
            return Err(lines.err(
                lno,
                format!(
                    "expected index plus {entries_per_matrix} entries, found {} fields",
                    fields.len()
                ),
            ));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| lines.err(lno, format!("bad matrix index `{}`", fields[0])))?;
        if index != expected {
            return Err(lines.err(lno, format!("matrix index {index}, expected {expected}")));
        }
        let values = parse_floats(&fields[1..], origin, lno)?;
        let mut m = DMatrix::zeros(n, n);
        let mut it = values.into_iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().expect("field count checked above");
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        members.push(SpdMatrix::new(m)?);
    }
    if let Some((lno, _)) = lines.next_content()? {
        return Err(lines.err(lno, format!("trailing content after {k} matrices")));
    }
    MatrixSet::new(members)
}

pub fn read_set_file(path: impl AsRef<Path>) -> Result<MatrixSet> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    read_set(BufReader::new(File::open(path)?), &origin)
}

/// Writes generator ground truth (`spdtruth v1`): the mixing matrix and the
/// per-member diagonals.
pub fn write_truth<W: Write>(
    w: &mut W,
    a_true: &DMatrix<f64>,
    d_true: &[DVector<f64>],
    comments: &[String],
) -> Result<()> {
    let n = a_true.nrows();
    write_header(w, "spdtruth", n, d_true.len(), comments)?;
    write!(w, "A")?;
    for i in 0..n {
        for j in 0..n {
            write!(w, " {}", a_true[(i, j)])?;
        }
    }
    writeln!(w)?;
    for (k, d) in d_true.iter().enumerate() {
        write!(w, "D {k}")?;
        for v in d.iter() {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_truth_file(
    path: impl AsRef<Path>,
    a_true: &DMatrix<f64>,
    d_true: &[DVector<f64>],
    comments: &[String],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_truth(&mut w, a_true, d_true, comments)?;
    w.flush()?;
    Ok(())
}

/// Reads an `spdtruth v1` stream back into the mixing matrix and diagonals.
pub fn read_truth<R: BufRead>(reader: R, origin: &str) -> Result<(DMatrix<f64>, Vec<DVector<f64>>)> {
    let mut lines = Lines::new(reader, origin);
    let (hline, header) = lines
        .next_content()?
        .ok_or_else(|| parse_err(origin, 0, "empty input"))?;
    let (n, k) = parse_header(&header, "spdtruth", origin, hline)?;

    let (lno, content) = lines
        .next_content()?
        .ok_or_else(|| lines.err(lines.line_no, "expected mixing matrix line"))?;
    let fields: Vec<&str> = content.split_whitespace().collect();
    if fields.first() != Some(&"A") || fields.len() != n * n + 1 {
        return Err(lines.err(lno, format!("expected `A` plus {} entries", n * n)));
    }
    let values = parse_floats(&fields[1..], origin, lno)?;
    let mut a = DMatrix::zeros(n, n);
    let mut it = values.into_iter();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = it.next().expect("field count checked above");
        }
    }

    let mut d_true = Vec::with_capacity(k);
    for expected in 0..k {
        let (lno, content) = lines
            .next_content()?
            .ok_or_else(|| lines.err(lines.line_no, format!("expected diagonal {expected}")))?;
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.first() != Some(&"D") || fields.len() != n + 2 {
            return Err(lines.err(lno, format!("expected `D <k>` plus {n} entries")));
        }
        let index: usize = fields[1]
            .parse()
            .map_err(|_| lines.err(lno, format!("bad diagonal index `{}`", fields[1])))?;
        if index != expected {
            return Err(lines.err(lno, format!("diagonal index {index}, expected {expected}")));
        }
        d_true.push(DVector::from_vec(parse_floats(&fields[2..], origin, lno)?));
    }
    if let Some((lno, _)) = lines.next_content()? {
        return Err(lines.err(lno, format!("trailing content after {k} diagonals")));
    }
    Ok((a, d_true))
}

pub fn read_truth_file(path: impl AsRef<Path>) -> Result<(DMatrix<f64>, Vec<DVector<f64>>)> {
    let path = path.as_ref();
    let origin = path.display().to_string();
    read_truth(BufReader::new(File::open(path)?), &origin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{generate, GeneratorConfig};
    use std::io::Cursor;

    fn roundtrip(set: &MatrixSet) -> (Vec<u8>, MatrixSet) {
        let mut buf = Vec::new();
        write_set(&mut buf, set, &["made by a test".into()]).unwrap();
        let back = read_set(Cursor::new(&buf), "test").unwrap();
        (buf, back)
    }

    #[test]
    fn set_round_trip_is_bit_exact() {
        let gen = generate(&GeneratorConfig::new(4, 5, 0.3, 77)).unwrap();
        let (bytes, back) = roundtrip(&gen.set);
        assert_eq!(back.len(), 5);
        for k in 0..5 {
            assert_eq!(back.members()[k].matrix(), gen.set.members()[k].matrix());
        }
        // writing the read-back set reproduces the payload lines
        let (bytes2, _) = roundtrip(&back);
        assert_eq!(bytes, bytes2);
    }

    #[test]
    fn truth_round_trip_is_bit_exact() {
        let gen = generate(&GeneratorConfig::new(4, 5, 0.3, 78)).unwrap();
        let mut buf = Vec::new();
        write_truth(&mut buf, &gen.a_true, &gen.d_true, &[]).unwrap();
        let (a, d) = read_truth(Cursor::new(&buf), "test").unwrap();
        assert_eq!(a, gen.a_true);
        assert_eq!(d, gen.d_true);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "spdset v1 N=2 K=2\n# comment\n0 1 0 1\nnot-an-index 1 0 1\n";
        let err = read_set(Cursor::new(text), "bad.txt").unwrap_err();
        match err {
            Error::Parse { path, line, .. } => {
                assert_eq!(path, "bad.txt");
                assert_eq!(line, 4);
            }
            other => panic!("unexpected error {other}"),
        }

        let text = "spdset v1 N=2 K=1\n0 1 0\n";
        let err = read_set(Cursor::new(text), "short.txt").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("3 entries"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }

        let err = read_set(Cursor::new("spdtruth v1 N=2 K=1\n"), "wrong.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_non_spd_payload() {
        // symmetric but indefinite
        let text = "spdset v1 N=2 K=1\n0 1 2 1\n";
        let err = read_set(Cursor::new(text), "indef.txt").unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "\n# leading\nspdset v1 N=2 K=1\n\n# mid\n0 2 0.5 1\n# trailing\n\n";
        let set = read_set(Cursor::new(text), "c.txt").unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.members()[0].matrix()[(0, 1)], 0.5);
    }
}
