//! Matrix Market coordinate files and plain vector files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{KrylovError, Result};
use crate::scalar::{sci17, Scalar};

use super::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> KrylovError {
    KrylovError::Parse { line, msg: msg.into() }
}

fn io_err(path: &Path, source: std::io::Error) -> KrylovError {
    KrylovError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_header(line: &str, lineno: usize, want_format: &str) -> Result<Symmetry> {
    let toks: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(parse_err(
            lineno,
            "expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    if toks[2] != want_format {
        return Err(parse_err(
            lineno,
            format!("unsupported format '{}', expected '{want_format}'", toks[2]),
        ));
    }
    if toks[3] != "real" {
        return Err(parse_err(
            lineno,
            format!("unsupported field '{}', only 'real' is accepted", toks[3]),
        ));
    }
    match toks[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        other => Err(parse_err(lineno, format!("unsupported symmetry '{other}'"))),
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| match l {
            Ok(s) => {
                let t = s.trim();
                !t.is_empty() && !t.starts_with('%')
            }
            Err(_) => true,
        })
}

fn parse_usize(tok: Option<&str>, lineno: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| parse_err(lineno, format!("missing {what}")))?
        .parse::<usize>()
        .map_err(|_| parse_err(lineno, format!("invalid {what}")))
}

fn parse_f64(tok: Option<&str>, lineno: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(lineno, "missing value"))?;
    let v = tok
        .parse::<f64>()
        .map_err(|_| parse_err(lineno, format!("invalid value '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(lineno, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

/// Reads a `coordinate real general|symmetric` matrix from any buffered source.
pub fn parse_matrix_market<R: BufRead>(mut reader: R) -> Result<SparseMatrix<f64>> {
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| parse_err(1, e.to_string()))?;
    let symmetry = parse_header(&first, 1, "coordinate")?;

    let mut lines = data_lines(reader).map(|(n, l)| (n + 1, l));
    let (size_line, size) = lines.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let size = size.map_err(|e| parse_err(size_line, e.to_string()))?;
    let mut toks = size.split_whitespace();
    let nrows = parse_usize(toks.next(), size_line, "row count")?;
    let ncols = parse_usize(toks.next(), size_line, "column count")?;
    let nnz = parse_usize(toks.next(), size_line, "entry count")?;
    if toks.next().is_some() {
        return Err(parse_err(size_line, "trailing tokens on size line"));
    }
    if nrows == 0 || ncols == 0 {
        return Err(parse_err(size_line, "empty dimension"));
    }
    if symmetry == Symmetry::Symmetric && nrows != ncols {
        return Err(parse_err(size_line, "symmetric matrix must be square"));
    }

    let mut entries = Vec::with_capacity(nnz * 2);
    let mut seen = 0usize;
    for (lineno, line) in lines {
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        if seen == nnz {
            return Err(parse_err(lineno, "more entries than declared"));
        }
        let mut toks = line.split_whitespace();
        let i = parse_usize(toks.next(), lineno, "row index")?;
        let j = parse_usize(toks.next(), lineno, "column index")?;
        let v = parse_f64(toks.next(), lineno)?;
        if toks.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens after value"));
        }
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(parse_err(
                lineno,
                format!("index ({i}, {j}) out of range for {nrows}x{ncols}"),
            ));
        }
        entries.push((i - 1, j - 1, v));
        if symmetry == Symmetry::Symmetric && i != j {
            entries.push((j - 1, i - 1, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(size_line, format!("declared {nnz} entries, found {seen}")));
    }
    SparseMatrix::from_triplets(nrows, ncols, &entries)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    parse_matrix_market(BufReader::new(file))
}

/// Writes a matrix as `coordinate real general` with 17 significant digits.
pub fn write_matrix_market_to<T: Scalar, W: Write>(m: &SparseMatrix<T>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(w, "{} {} {}", i + 1, j + 1, sci17(v.to_f64_lossy()))?;
    }
    w.flush()
}

pub fn write_matrix_market<T: Scalar>(path: impl AsRef<Path>, m: &SparseMatrix<T>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write_matrix_market_to(m, BufWriter::new(file)).map_err(|e| io_err(path, e))
}

/// Parses a dense vector: either a Matrix Market `array real general` file
/// with one column, or whitespace-separated numbers.
pub fn parse_vector<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    let mut expected: Option<usize> = None;
    if let Some((_, Ok(first))) = lines.peek() {
        if first.trim_start().starts_with("%%") {
            let (n, first) = lines.next().expect("peeked");
            let first = first.map_err(|e| parse_err(n, e.to_string()))?;
            parse_header(&first, n, "array")?;
            for (n, line) in lines.by_ref() {
                let line = line.map_err(|e| parse_err(n, e.to_string()))?;
                let t = line.trim();
                if t.is_empty() || t.starts_with('%') {
                    continue;
                }
                let mut toks = t.split_whitespace();
                let rows = parse_usize(toks.next(), n, "row count")?;
                let cols = parse_usize(toks.next(), n, "column count")?;
                if cols != 1 {
                    return Err(parse_err(n, format!("expected a single column, found {cols}")));
                }
                expected = Some(rows);
                break;
            }
            if expected.is_none() {
                return Err(parse_err(n + 1, "missing size line"));
            }
        }
    }
    let mut out = Vec::new();
    let mut last_line = 0;
    for (n, line) in lines {
        let line = line.map_err(|e| parse_err(n, e.to_string()))?;
        last_line = n;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        for tok in t.split_whitespace() {
            out.push(parse_f64(Some(tok), n)?);
        }
    }
    if let Some(rows) = expected {
        if rows != out.len() {
            return Err(parse_err(
                last_line,
                format!("declared {rows} values, found {}", out.len()),
            ));
        }
    }
    if out.is_empty() {
        return Err(parse_err(last_line.max(1), "no values"));
    }
    Ok(out)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    parse_vector(BufReader::new(file))
}

/// Writes a vector as a one-column `array real general` file.
pub fn write_vector<T: Scalar>(path: impl AsRef<Path>, v: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix array real general")?;
        writeln!(w, "{} 1", v.len())?;
        for x in v {
            writeln!(w, "{}", sci17(x.to_f64_lossy()))?;
        }
        w.flush()
    };
    body().map_err(|e| io_err(path, e))
}
