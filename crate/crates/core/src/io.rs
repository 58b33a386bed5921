//! CSV ingestion and export of data matrices.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rank::DataMatrix;

/// Reads a numeric CSV file. The first row is treated as a header if any of
/// its fields does not parse as a number.
pub fn load_csv(path: impl AsRef<Path>) -> Result<DataMatrix> {
    parse_csv(File::open(path)?)
}

pub fn parse_csv<R: Read>(reader: R) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::ParseError {
            row: line,
            column: 0,
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if idx == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::ParseError {
                    row: line,
                    column: record.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::ParseError {
                row: line,
                column: col + 1,
                message: format!("'{field}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row: line,
                    column: col + 1,
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    match width {
        Some(d) if rows > 0 => DataMatrix::new(rows, d, values),
        _ => Err(Error::EmptyFile),
    }
}

/// Writes `x` as headerless CSV with shortest round-trip float formatting.
pub fn write_csv<W: Write>(x: &DataMatrix, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..x.n() {
        wtr.write_record(x.row(i).iter().map(|v| v.to_string()))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(x: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_csv(x, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_plain_numeric_rows() {
        let x = parse_csv("1,2\n3,4.5\n-1e-3,7\n".as_bytes()).unwrap();
        assert_eq!((x.n(), x.d()), (3, 2));
        assert_eq!(x.get(2, 0), -1e-3);
    }

    #[test]
    fn skips_header_row() {
        let x = parse_csv("x,y\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(x.to_rows(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn reports_nan_location() {
        assert_eq!(
            parse_csv("1,2\n3,NaN\n".as_bytes()),
            Err(Error::NonFiniteValue { row: 2, column: 2 })
        );
    }

    #[test]
    fn reports_parse_errors() {
        let err = parse_csv("1,2\n3,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ParseError { row: 2, column: 2, .. }));
        let err = parse_csv("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ParseError { row: 2, .. }));
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(parse_csv("".as_bytes()), Err(Error::EmptyFile));
        assert_eq!(parse_csv("a,b\n".as_bytes()), Err(Error::EmptyFile));
    }
}
