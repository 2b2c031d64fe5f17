//! Reading count data from text files.

use std::fs;
use std::path::Path;

use bhgof_core::BivariateSample;
use thiserror::Error;

/// The two-period accident table shipped with the crate (708 individuals).
pub const ACCIDENTS_CSV: &str = include_str!("../data/accidents.csv");

/// Ingestion failures. Line numbers are 1-based.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("empty sample")]
    Empty,
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect()
}

fn parse_count(field: &str, line: usize) -> Result<u32, IngestError> {
    field.parse::<u32>().map_err(|_| {
        let reason = match field.parse::<f64>() {
            Ok(v) if v < 0.0 => format!("negative value `{field}`"),
            Ok(_) => format!("non-integer value `{field}`"),
            Err(_) => format!("not a number: `{field}`"),
        };
        IngestError::Malformed { line, reason }
    })
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Parse `x,y` pairs, one per line. A non-numeric first data line is taken
/// as a header; blank lines and `#` comments are ignored.
pub fn parse_pairs(text: &str) -> Result<BivariateSample, IngestError> {
    let mut pairs = Vec::new();
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if is_skippable(raw) {
            continue;
        }
        let fields = split_fields(raw);
        let first_data = !seen_data;
        seen_data = true;
        if first_data && fields.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if fields.len() != 2 {
            return Err(IngestError::Malformed {
                line,
                reason: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        pairs.push((parse_count(fields[0], line)?, parse_count(fields[1], line)?));
    }
    BivariateSample::new(pairs).map_err(|_| IngestError::Empty)
}

/// Parse a contingency matrix: row `i` holds the counts for second
/// coordinate `i`, column `j` those for first coordinate `j`.
pub fn parse_contingency(text: &str) -> Result<BivariateSample, IngestError> {
    let mut pairs = Vec::new();
    let mut width = None;
    let mut row = 0u32;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if is_skippable(raw) {
            continue;
        }
        let fields = split_fields(raw);
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(IngestError::Ragged {
                    line,
                    expected: w,
                    found: fields.len(),
                })
            }
            _ => {}
        }
        for (col, f) in fields.iter().enumerate() {
            let k = parse_count(f, line)?;
            pairs.extend(std::iter::repeat_n((col as u32, row), k as usize));
        }
        row += 1;
    }
    BivariateSample::new(pairs).map_err(|_| IngestError::Empty)
}

/// [`parse_pairs`] on a file.
pub fn ingest_pairs(path: &Path) -> Result<BivariateSample, IngestError> {
    parse_pairs(&read(path)?)
}

/// [`parse_contingency`] on a file.
pub fn ingest_contingency(path: &Path) -> Result<BivariateSample, IngestError> {
    parse_contingency(&read(path)?)
}

/// The bundled accident data as a sample.
pub fn accidents() -> BivariateSample {
    parse_contingency(ACCIDENTS_CSV).expect("bundled table parses")
}

/// Write pairs as `x,y` lines with a header.
pub fn format_pairs(s: &BivariateSample) -> String {
    let mut out = String::from("x,y\n");
    for (x, y) in s.pairs() {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_basic() {
        let s = parse_pairs("0,0\n1,2\n").unwrap();
        assert_eq!(s.pairs(), &[(0, 0), (1, 2)]);
        let s = parse_pairs("x,y\n3,4\n").unwrap();
        assert_eq!(s.pairs(), &[(3, 4)]);
    }

    #[test]
    fn pairs_errors() {
        match parse_pairs("1,-2\n") {
            Err(IngestError::Malformed { line: 1, reason }) => assert!(reason.contains("negative")),
            other => panic!("unexpected {other:?}"),
        }
        match parse_pairs("0,0\n1.5,2\n") {
            Err(IngestError::Malformed { line: 2, reason }) => assert!(reason.contains("non-integer")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_pairs("0,0,1\n"), Err(IngestError::Malformed { line: 1, .. })));
        let err = parse_pairs("").unwrap_err();
        assert_eq!(err.to_string(), "empty sample");
    }

    #[test]
    fn contingency_basic() {
        let s = parse_contingency("5\n").unwrap();
        assert_eq!(s.pairs(), vec![(0, 0); 5].as_slice());
        let s = parse_contingency("1,2\n0,1\n").unwrap();
        assert_eq!(s.pairs(), &[(0, 0), (1, 0), (1, 0), (1, 1)]);
        assert!(matches!(
            parse_contingency("1,2\n3\n"),
            Err(IngestError::Ragged { line: 2, expected: 2, found: 1 })
        ));
        assert!(matches!(parse_contingency("1,-1\n"), Err(IngestError::Malformed { .. })));
    }

    #[test]
    fn bundled_table() {
        let s = accidents();
        assert_eq!(s.len(), 708);
        let origin = s.cells().iter().find(|c| (c.x, c.y) == (0, 0)).unwrap();
        assert_eq!(origin.count, 117);
        let row_sums: Vec<u32> = (0..8)
            .map(|y| s.cells().iter().filter(|c| c.y == y).map(|c| c.count).sum())
            .collect();
        assert_eq!(row_sums, [291, 218, 132, 49, 13, 3, 1, 1]);
        let col_sums: Vec<u32> = (0..8)
            .map(|x| s.cells().iter().filter(|c| c.x == x).map(|c| c.count).sum())
            .collect();
        assert_eq!(col_sums, [224, 226, 150, 68, 23, 11, 5, 1]);
    }
}
