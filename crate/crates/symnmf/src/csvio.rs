//! Small CSV helpers for point sets and factor matrices.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::similarity::PointSet;

/// Reads 2-D points from CSV rows `x,y` or `x,y,label`; a non-numeric first
/// row is treated as a header and skipped.
pub fn read_points<R: Read>(reader: R) -> Result<PointSet> {
    let mut points = Vec::new();
    let mut labels: Vec<u32> = Vec::new();
    let mut has_labels = None;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if points.is_empty() && labels.is_empty() && fields[0].parse::<f64>().is_err() {
            continue; // header row
        }
        if fields.len() != 2 && fields.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected 2 or 3 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let with_label = fields.len() == 3;
        match has_labels {
            None => has_labels = Some(with_label),
            Some(h) if h != with_label => {
                return Err(Error::Parse(format!(
                    "line {}: inconsistent field count",
                    lineno + 1
                )))
            }
            _ => {}
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number '{s}'", lineno + 1)))
        };
        points.push([num(fields[0])?, num(fields[1])?]);
        if with_label {
            labels.push(fields[2].parse().map_err(|_| {
                Error::Parse(format!("line {}: bad label '{}'", lineno + 1, fields[2]))
            })?);
        }
    }
    if points.is_empty() {
        return Err(Error::Parse("no points in CSV input".into()));
    }
    Ok(PointSet {
        points,
        labels: if has_labels == Some(true) { Some(labels) } else { None },
    })
}

pub fn write_points<W: Write>(w: &mut W, set: &PointSet) -> Result<()> {
    match &set.labels {
        Some(labels) => {
            writeln!(w, "x,y,label")?;
            for (p, l) in set.points.iter().zip(labels) {
                writeln!(w, "{:.16e},{:.16e},{l}", p[0], p[1])?;
            }
        }
        None => {
            writeln!(w, "x,y")?;
            for p in &set.points {
                writeln!(w, "{:.16e},{:.16e}", p[0], p[1])?;
            }
        }
    }
    Ok(())
}

/// Writes a matrix one row per CSV line.
pub fn write_matrix_csv<T: Scalar, W: Write>(w: &mut W, a: &DenseMatrix<T>) -> Result<()> {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                write!(w, ",")?;
            }
            write!(w, "{:.16e}", a.get(i, j).to_f64_lossy())?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_points_file(path: &Path) -> Result<PointSet> {
    read_points(File::open(path)?)
}

pub fn write_points_file(path: &Path, set: &PointSet) -> Result<()> {
    write_points(&mut BufWriter::new(File::create(path)?), set)
}
