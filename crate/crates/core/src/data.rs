//! Reading paired observations from delimited text.
//!
//! Files hold two numeric columns `x,y`, separated by commas or tabs. A first
//! row whose fields do not both parse as numbers is taken as a header. Blank
//! lines are skipped.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::BivariateSample;

/// Tab when the path ends in `.tsv` or `.tab`, otherwise comma.
fn delimiter_for(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("tsv") || e.eq_ignore_ascii_case("tab") => b'\t',
        _ => b',',
    }
}

pub fn read_sample(path: &Path) -> Result<BivariateSample> {
    let file = std::fs::File::open(path)?;
    read_sample_from(file, delimiter_for(path), &path.display().to_string())
}

/// Parses from any reader; `label` names the source in error messages.
pub fn read_sample_from<R: Read>(reader: R, delimiter: u8, label: &str) -> Result<BivariateSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let parse_err = |line: u64, reason: String| Error::Parse {
        path: label.to_string(),
        line,
        reason,
    };
    let mut first = true;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        let is_header = first && (parsed.0.is_err() || parsed.1.is_err());
        first = false;
        if is_header {
            continue;
        }
        match parsed {
            (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => {
                x.push(a);
                y.push(b);
            }
            (Ok(_), Ok(_)) => return Err(parse_err(line, "non-finite value".into())),
            (Err(_), _) => {
                return Err(parse_err(
                    line,
                    format!("cannot parse x value {:?}", &record[0]),
                ))
            }
            (_, Err(_)) => {
                return Err(parse_err(
                    line,
                    format!("cannot parse y value {:?}", &record[1]),
                ))
            }
        }
    }
    if x.len() < 2 {
        return Err(Error::param(
            "input",
            format!("{label}: need at least 2 data rows, found {}", x.len()),
        ));
    }
    BivariateSample::new(x, y)
}
