//! File formats. Floats are written with Rust's shortest round-trip
//! formatting, so parsing a written file gives back the same bits.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rodshape::{RecoveredProfile, ResponseSample};
use serde::Serialize;

use crate::error::CliError;

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(CliError::io(&dir))?;
    tmp.write_all(contents).map_err(CliError::io(path))?;
    tmp.as_file().sync_all().map_err(CliError::io(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn format_dataset(samples: &[ResponseSample]) -> String {
    let mut out = String::from("omega,f_tilde,resonant\n");
    for s in samples {
        match s.f_tilde {
            Some(f) if !s.resonant => writeln!(out, "{},{},0", fmt_f64(s.omega), fmt_f64(f)),
            _ => writeln!(out, "{},,1", fmt_f64(s.omega)),
        }
        .unwrap();
    }
    out
}

fn parse_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_path_buf(), message: message.into() }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| parse_error(path, e.to_string()))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| parse_error(path, format!("missing column `{name}`")))
}

fn parse_f64(field: &str, line: u64, name: &str, path: &Path) -> Result<f64, CliError> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_error(path, format!("line {line}: `{field}` is not a number in column `{name}`")))?;
    if !v.is_finite() {
        return Err(parse_error(path, format!("line {line}: non-finite value in column `{name}`")));
    }
    Ok(v)
}

pub fn read_dataset(path: &Path) -> Result<Vec<ResponseSample>, CliError> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| parse_error(path, e.to_string()))?.clone();
    let (i_omega, i_f, i_res) = (
        column(&headers, "omega", path)?,
        column(&headers, "f_tilde", path)?,
        column(&headers, "resonant", path)?,
    );
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let omega = parse_f64(&record[i_omega], line, "omega", path)?;
        let sample = match &record[i_res] {
            "1" => ResponseSample::resonant(omega),
            "0" => ResponseSample::regular(omega, parse_f64(&record[i_f], line, "f_tilde", path)?),
            other => return Err(parse_error(path, format!("line {line}: resonant must be 0 or 1, got `{other}`"))),
        };
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(parse_error(path, "no data rows"));
    }
    Ok(samples)
}

pub fn format_profile(rec: &RecoveredProfile) -> String {
    let mut out = String::from(if rec.q.is_some() { "x,g0,F,q\n" } else { "x,g0,F\n" });
    for i in 0..rec.x.len() {
        write!(out, "{},{},{}", fmt_f64(rec.x[i]), fmt_f64(rec.g0[i]), fmt_f64(rec.area[i])).unwrap();
        if let Some(q) = &rec.q {
            write!(out, ",{}", fmt_f64(q[i])).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `(x, F)` columns of a profile CSV.
pub fn read_profile(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| parse_error(path, e.to_string()))?.clone();
    let (i_x, i_f) = (column(&headers, "x", path)?, column(&headers, "F", path)?);
    let (mut x, mut f) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(path, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        x.push(parse_f64(&record[i_x], line, "x", path)?);
        f.push(parse_f64(&record[i_f], line, "F", path)?);
    }
    if x.is_empty() {
        return Err(parse_error(path, "no data rows"));
    }
    Ok((x, f))
}
