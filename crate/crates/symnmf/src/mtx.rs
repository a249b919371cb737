//! MatrixMarket dense/coordinate IO for real matrices.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_header(line: &str) -> Result<(Format, Symmetry)> {
    let fields: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse(format!("bad MatrixMarket header: {line}")));
    }
    let format = match fields[2].as_str() {
        "array" => Format::Array,
        "coordinate" => Format::Coordinate,
        other => return Err(Error::Parse(format!("unsupported format '{other}'"))),
    };
    match fields[3].as_str() {
        "real" | "integer" => {}
        other => return Err(Error::Parse(format!("unsupported field type '{other}'"))),
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(Error::Parse(format!("unsupported symmetry '{other}'"))),
    };
    Ok((format, symmetry))
}

fn parse_num<T: Scalar>(tok: &str) -> Result<T> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Parse(format!("bad numeric token '{tok}'")))?;
    Ok(T::from_f64_const(v))
}

/// Reads a real matrix in MatrixMarket format (array or coordinate,
/// general or symmetric).
pub fn read_matrix_market<T: Scalar, R: Read>(reader: R) -> Result<DenseMatrix<T>> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty MatrixMarket file".into()))??;
    let (format, symmetry) = parse_header(&header)?;

    let mut tokens: Vec<String> = Vec::new();
    for line in lines {
        let line = line?;
        let body = line.split('%').next().unwrap_or("");
        tokens.extend(body.split_whitespace().map(str::to_string));
    }
    let mut it = tokens.iter();
    let mut next_usize = |what: &str| -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad {what}")))
    };
    let rows = next_usize("row count")?;
    let cols = next_usize("column count")?;
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix);
    }
    if symmetry == Symmetry::Symmetric && rows != cols {
        return Err(Error::Parse("symmetric matrix must be square".into()));
    }
    let mut a = DenseMatrix::zeros(rows, cols);
    match format {
        Format::Array => {
            // column-major; symmetric variant stores the lower triangle only
            let mut it2 = tokens.iter().skip(2);
            for j in 0..cols {
                let i0 = if symmetry == Symmetry::Symmetric { j } else { 0 };
                for i in i0..rows {
                    let tok = it2
                        .next()
                        .ok_or_else(|| Error::Parse("truncated array data".into()))?;
                    let v = parse_num::<T>(tok)?;
                    a.set(i, j, v);
                    if symmetry == Symmetry::Symmetric && i != j {
                        a.set(j, i, v);
                    }
                }
            }
            if it2.next().is_some() {
                return Err(Error::Parse("trailing data after array entries".into()));
            }
        }
        Format::Coordinate => {
            let nnz = next_usize("entry count")?;
            let mut it2 = tokens.iter().skip(3);
            for _ in 0..nnz {
                let mut field = |what: &str| -> Result<&String> {
                    it2.next()
                        .ok_or_else(|| Error::Parse(format!("truncated coordinate data ({what})")))
                };
                let i: usize = field("row")?
                    .parse()
                    .map_err(|_| Error::Parse("bad row index".into()))?;
                let j: usize = field("col")?
                    .parse()
                    .map_err(|_| Error::Parse("bad column index".into()))?;
                let v = parse_num::<T>(field("value")?)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse(format!("index ({i},{j}) out of range")));
                }
                a.set(i - 1, j - 1, v);
                if symmetry == Symmetry::Symmetric && i != j {
                    a.set(j - 1, i - 1, v);
                }
            }
            if it2.next().is_some() {
                return Err(Error::Parse("trailing data after coordinate entries".into()));
            }
        }
    }
    Ok(a)
}

/// Writes a dense matrix as `array real general` with 17 significant digits,
/// enough for exact double-precision roundtrips.
pub fn write_matrix_market<T: Scalar, W: Write>(w: &mut W, a: &DenseMatrix<T>) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            writeln!(w, "{:.16e}", a.get(i, j).to_f64_lossy())?;
        }
    }
    Ok(())
}

/// Writes a symmetric matrix as `array real symmetric` (lower triangle only).
pub fn write_matrix_market_symmetric<T: Scalar, W: Write>(
    w: &mut W,
    a: &DenseMatrix<T>,
) -> Result<()> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "symmetric MatrixMarket output must be square",
            expected: (n, n),
            found: (a.rows(), a.cols()),
        });
    }
    writeln!(w, "%%MatrixMarket matrix array real symmetric")?;
    writeln!(w, "{n} {n}")?;
    for j in 0..n {
        for i in j..n {
            writeln!(w, "{:.16e}", a.get(i, j).to_f64_lossy())?;
        }
    }
    Ok(())
}

pub fn read_matrix_file<T: Scalar>(path: &Path) -> Result<DenseMatrix<T>> {
    read_matrix_market(File::open(path)?)
}

pub fn write_matrix_file<T: Scalar>(path: &Path, a: &DenseMatrix<T>, symmetric: bool) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if symmetric {
        write_matrix_market_symmetric(&mut w, a)
    } else {
        write_matrix_market(&mut w, a)
    }
}
