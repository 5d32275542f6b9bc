//! Scan output in CSV and JSON.
//!
//! A CSV file starts with a `schema=` line, then a header and one record per
//! row, LF-terminated. Floats use `{:.16e}`, which round-trips every `f64`,
//! so parsing a file and writing it back reproduces it byte for byte. An
//! empty `bound` field means the row has no companion bound.

use std::io::{BufRead, BufReader, Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

use super::scan::{Coords, GridRow};

pub const SCHEMA_LINE: &str = "schema=qdefcs/1";

const T_HEADER: [&str; 5] = ["q", "t", "value", "bound", "error_bound"];
const Z_HEADER: [&str; 6] = ["q", "x", "y", "value", "bound", "error_bound"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::invalid("output", e.to_string())
}

fn parse_error(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::invalid("input", format!("line {line}: {msg}"))
}

/// Writes rows as CSV. All rows must share one coordinate kind; an empty
/// slice is written with the `t` header.
pub fn write_csv<W: Write>(rows: &[GridRow], mut out: W) -> Result<()> {
    writeln!(out, "{SCHEMA_LINE}").map_err(io_error)?;
    let polar = matches!(rows.first().map(|r| r.coords), Some(Coords::Z { .. }));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    if polar {
        w.write_record(Z_HEADER).map_err(io_error)?;
    } else {
        w.write_record(T_HEADER).map_err(io_error)?;
    }
    for row in rows {
        let mut record = vec![fmt_f64(row.q)];
        match (row.coords, polar) {
            (Coords::T { t }, false) => record.push(fmt_f64(t)),
            (Coords::Z { x, y }, true) => {
                record.push(fmt_f64(x));
                record.push(fmt_f64(y));
            }
            _ => return Err(io_error("rows mix t and z coordinates")),
        }
        record.push(fmt_f64(row.value));
        record.push(row.bound.map(fmt_f64).unwrap_or_default());
        record.push(fmt_f64(row.error_bound));
        w.write_record(&record).map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}

pub fn to_csv_string(rows: &[GridRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(io_error)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<GridRow>> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| parse_error(1, e))?;
    if first.trim_end_matches('\n') != SCHEMA_LINE {
        return Err(parse_error(1, format!("expected `{SCHEMA_LINE}`")));
    }
    let mut r = csv::ReaderBuilder::new().from_reader(reader);
    let header = r.headers().map_err(|e| parse_error(2, e))?.clone();
    let polar = if header.iter().eq(Z_HEADER) {
        true
    } else if header.iter().eq(T_HEADER) {
        false
    } else {
        return Err(parse_error(2, "unrecognised header"));
    };
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let line = i + 3;
        let record = record.map_err(|e| parse_error(line, e))?;
        let field = |k: usize| -> Result<f64> {
            record
                .get(k)
                .ok_or_else(|| parse_error(line, "missing field"))?
                .parse::<f64>()
                .map_err(|e| parse_error(line, e))
        };
        let (coords, next) = if polar {
            (Coords::Z { x: field(1)?, y: field(2)? }, 3)
        } else {
            (Coords::T { t: field(1)? }, 2)
        };
        let bound = match record.get(next + 1) {
            Some("") => None,
            Some(_) => Some(field(next + 1)?),
            None => return Err(parse_error(line, "missing field")),
        };
        rows.push(GridRow {
            q: field(0)?,
            coords,
            value: field(next)?,
            bound,
            error_bound: field(next + 2)?,
        });
    }
    Ok(rows)
}

pub fn write_json<W: Write>(rows: &[GridRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(io_error)?;
    writeln!(out).map_err(io_error)
}

pub fn write_rows<W: Write>(rows: &[GridRow], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<GridRow> {
        vec![
            GridRow {
                q: 0.98,
                coords: Coords::T { t: 0.1 },
                value: 1.0 / 3.0,
                bound: None,
                error_bound: 1e-13,
            },
            GridRow {
                q: 0.98,
                coords: Coords::T { t: 0.2 },
                value: -2.5e-300,
                bound: Some(4.0),
                error_bound: 0.0,
            },
        ]
    }

    #[test]
    fn csv_layout() {
        let s = to_csv_string(&rows()).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], SCHEMA_LINE);
        assert_eq!(lines[1], "q,t,value,bound,error_bound");
        assert_eq!(
            lines[2],
            "9.7999999999999998e-1,1.0000000000000001e-1,3.3333333333333331e-1,,1.0000000000000000e-13"
        );
        assert!(!s.contains('\r'));
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn csv_round_trip() {
        let s = to_csv_string(&rows()).unwrap();
        let parsed = read_csv(s.as_bytes()).unwrap();
        assert_eq!(parsed, rows());
        assert_eq!(to_csv_string(&parsed).unwrap(), s);
    }

    #[test]
    fn polar_rows() {
        let rows = vec![GridRow {
            q: 0.5,
            coords: Coords::Z { x: 0.25, y: -0.75 },
            value: 0.1,
            bound: Some(0.2),
            error_bound: 1e-15,
        }];
        let s = to_csv_string(&rows).unwrap();
        assert!(s.contains("q,x,y,value,bound,error_bound\n"));
        assert_eq!(read_csv(s.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_csv("q,t\n".as_bytes()).is_err());
        assert!(read_csv(format!("{SCHEMA_LINE}\na,b\n").as_bytes()).is_err());
        let bad = format!("{SCHEMA_LINE}\nq,t,value,bound,error_bound\n1,x,1,,0\n");
        assert!(read_csv(bad.as_bytes()).is_err());
    }

    #[test]
    fn json_rows() {
        let mut buf = Vec::new();
        write_json(&rows(), &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["t"], 0.1);
        assert!(v[0]["bound"].is_null());
        assert_eq!(v[1]["bound"], 4.0);
    }
}
