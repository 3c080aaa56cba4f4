//! Paired-sample CSV input/output and the bundled football dataset.
//!
//! CSV files have the header `x1,x2` and one pair per line. Values are
//! written with the shortest representation that parses back to the same
//! `f64`, so a save/load cycle is exact.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::PairedSample;

/// Description of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetMeta {
    pub name: String,
    pub n: usize,
    pub source: String,
}

/// Times to first score in American football league games over three
/// consecutive weekends of 1986: `x1` to the first field goal (kick),
/// `x2` to the first touchdown. Ties are converted touchdowns. Values are
/// taken verbatim, as decimals.
const FOOTBALL: [(f64, f64); 42] = [
    (2.05, 3.98),
    (5.78, 25.98),
    (10.40, 10.25),
    (9.05, 9.05),
    (13.80, 49.75),
    (2.98, 2.98),
    (0.85, 0.85),
    (7.25, 7.25),
    (3.88, 6.43),
    (3.43, 3.43),
    (4.25, 4.25),
    (0.75, 0.75),
    (7.78, 7.78),
    (1.65, 1.65),
    (11.63, 17.37),
    (10.57, 14.28),
    (6.42, 15.08),
    (1.38, 1.38),
    (7.05, 7.05),
    (4.22, 9.48),
    (10.53, 10.53),
    (2.58, 2.58),
    (15.53, 15.53),
    (12.13, 12.13),
    (7.23, 9.68),
    (2.90, 2.90),
    (14.58, 14.58),
    (6.85, 34.58),
    (7.02, 7.02),
    (11.82, 11.82),
    (32.45, 42.35),
    (6.42, 6.42),
    (5.52, 11.27),
    (8.53, 14.57),
    (8.98, 8.98),
    (19.65, 10.70),
    (31.13, 49.88),
    (10.15, 10.15),
    (17.83, 17.83),
    (14.58, 20.57),
    (8.87, 8.87),
    (10.85, 38.07),
];

/// The bundled 42-pair football dataset.
pub fn nfl_dataset() -> PairedSample {
    PairedSample::new(FOOTBALL.to_vec()).expect("bundled data are positive")
}

pub fn nfl_meta() -> DatasetMeta {
    DatasetMeta {
        name: "nfl-1986".into(),
        n: FOOTBALL.len(),
        source: "American football league, first-score times over three weekends in 1986 (Csorgo and Welsh, 1989)"
            .into(),
    }
}

/// Parses CSV text with header `x1,x2`. Row numbers in errors count data
/// rows from 1.
pub fn read_csv<R: Read>(reader: R) -> Result<PairedSample> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse { row: 0, message: e.to_string() })?;
    if header.len() != 2 || &header[0] != "x1" || &header[1] != "x2" {
        return Err(Error::Parse { row: 0, message: format!("expected header `x1,x2`, found `{}`", header.iter().collect::<Vec<_>>().join(",")) });
    }
    let mut pairs = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse { row, message: e.to_string() })?;
        if record.len() != 2 {
            return Err(Error::Parse { row, message: format!("expected 2 fields, found {}", record.len()) });
        }
        let field = |k: usize| -> Result<f64> {
            let text = &record[k];
            if text.is_empty() {
                return Err(Error::Parse { row, message: format!("missing value in column x{}", k + 1) });
            }
            text.parse::<f64>()
                .map_err(|_| Error::Parse { row, message: format!("`{text}` is not a decimal number") })
        };
        pairs.push((field(0)?, field(1)?));
    }
    PairedSample::new(pairs)
}

pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<PairedSample> {
    read_csv(File::open(path)?)
}

pub fn write_csv<W: Write>(mut writer: W, s: &PairedSample) -> Result<()> {
    writeln!(writer, "x1,x2")?;
    for (x1, x2) in s.pairs() {
        writeln!(writer, "{x1},{x2}")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn save_csv<P: AsRef<Path>>(path: P, s: &PairedSample) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), s)
}
