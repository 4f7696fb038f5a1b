//! CSV and config-file formats.
//!
//! * series: header `index,value`, one row per observation, strictly
//!   increasing integer indices.
//! * weights: one row per factor, one column per time point, no header.
//! * config: optional `key = value` lines; `#` starts a comment.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::WeightMatrix;
use crate::series::TimeSeries;

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    parse_error(line, e.to_string())
}

pub fn read_series<R: Read>(reader: R) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(parse_error(1, "empty file: expected header `index,value`")),
        Some(r) => r.map_err(csv_error)?,
    };
    if header.len() != 2 || &header[0] != "index" || &header[1] != "value" {
        return Err(parse_error(record_line(&header), "expected header `index,value`"));
    }

    let mut start = None;
    let mut last: Option<i64> = None;
    let mut values = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(parse_error(line, format!("expected 2 fields, found {}", record.len())));
        }
        let index: i64 = record[0]
            .parse()
            .map_err(|_| parse_error(line, format!("index `{}` is not an integer", &record[0])))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| parse_error(line, format!("value `{}` is not a number", &record[1])))?;
        if !value.is_finite() {
            return Err(parse_error(line, format!("value `{}` is not finite", &record[1])));
        }
        if let Some(prev) = last {
            if index <= prev {
                return Err(parse_error(
                    line,
                    format!("index {index} does not increase (previous {prev})"),
                ));
            }
        }
        start.get_or_insert(index);
        last = Some(index);
        values.push(value);
    }
    if values.len() < 2 {
        return Err(parse_error(
            1,
            format!("need at least 2 observations, found {}", values.len()),
        ));
    }
    TimeSeries::with_start(values, start.unwrap())
}

pub fn read_series_file(path: &Path) -> Result<TimeSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_series(file)
}

pub fn write_series<W: Write>(series: &TimeSeries, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wtr.write_record(["index", "value"]).map_err(io)?;
    for (index, value) in series.indexed() {
        wtr.write_record([index.to_string(), value.to_string()]).map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_weights<R: Read>(reader: R) -> Result<WeightMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| parse_error(line, format!("weight `{field}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(1, "weights file has no rows"));
    }
    WeightMatrix::from_rows(rows)
}

pub fn read_weights_file(path: &Path) -> Result<WeightMatrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_weights(file)
}

/// Parses `key = value` lines. Keys are lower-cased; later keys win.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(k as u64 + 1, format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        if key.is_empty() {
            return Err(parse_error(k as u64 + 1, "empty key"));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        let s = TimeSeries::with_start(vec![1.5, -2.25, 1e-300, 3.0], 7).unwrap();
        let mut buf = Vec::new();
        write_series(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,value\n7,1.5\n"));
        assert_eq!(read_series(text.as_bytes()).unwrap(), s);
    }

    #[test]
    fn series_errors_carry_line_numbers() {
        let err = read_series("".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_series("idx,val\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_series("index,value\n1,2\n2,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = read_series("index,value\n1,2\n3,4\n2,5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
        let err = read_series("index,value\n1,2\n1,4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = read_series("index,value\n1,2\n2,NaN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(read_series("index,value\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn weights_parse() {
        let w = read_weights("# two factors\n1,2,3\n0.5, 0, 1\n\n".as_bytes()).unwrap();
        assert_eq!((w.factors(), w.times()), (2, 3));
        assert_eq!(w.column(2), Some(&[2.0, 0.0][..]));
        assert!(matches!(
            read_weights("1,2\n1,x\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_weights("1,2\n1\n".as_bytes()).is_err());
        assert!(read_weights("".as_bytes()).is_err());
    }

    #[test]
    fn config_lines() {
        let map = parse_config("# manifest\nmodel = mar1\nc=0.5 # inline\n\nsample-size = 100\n").unwrap();
        assert_eq!(map["model"], "mar1");
        assert_eq!(map["c"], "0.5");
        assert_eq!(map["sample_size"], "100");
        assert!(matches!(parse_config("model mar1"), Err(Error::Parse { line: 1, .. })));
    }
}
