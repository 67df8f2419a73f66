//! CSV and LIBSVM loaders, plus the text writers used by the CLI.
//!
//! CSV: comma separated, one sample per line, blank lines ignored. The first
//! non-blank line is a header iff one of its fields does not parse as a
//! number. The label column (default 0) holds non-negative integers; every
//! other column is a finite real. Missing values are rejected.
//!
//! LIBSVM: `label idx:value ...` with 1-based, distinct feature indices.
//! Absent entries are 0. Labels are arbitrary integers, remapped to
//! `0..K` in ascending order; the original values are kept in
//! [`LibsvmData::label_map`].

use std::fs;
use std::io::Write;
use std::path::Path;

use abcboost_core::Dataset;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsvOptions {
    pub label_column: usize,
    /// Declared `K`; inferred from the labels when `None`.
    pub num_classes: Option<usize>,
}

/// Non-blank lines of a data file, split into an optional header and the
/// sample lines with their 1-based line numbers.
#[derive(Debug, Clone)]
pub struct DataLines<'a> {
    pub header: Option<(usize, &'a str)>,
    pub records: Vec<(usize, &'a str)>,
}

fn is_header(line: &str) -> bool {
    line.split(',')
        .any(|field| field.trim().parse::<f64>().is_err())
}

/// Splits CSV text into header and record lines.
pub fn csv_lines(text: &str) -> DataLines<'_> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut header = None;
    let mut records = Vec::new();
    if let Some(first) = lines.next() {
        if is_header(first.1) {
            header = Some(first);
        } else {
            records.push(first);
        }
    }
    records.extend(lines);
    DataLines { header, records }
}

/// Sample lines of LIBSVM text (blank and `#` comment lines dropped).
pub fn libsvm_lines(text: &str) -> DataLines<'_> {
    let records = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .collect();
    DataLines {
        header: None,
        records,
    }
}

fn parse_label(token: &str, line: usize, column: usize) -> Result<usize> {
    let token = token.trim();
    if let Ok(v) = token.parse::<usize>() {
        return Ok(v);
    }
    match token.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u32::MAX as f64 => Ok(v as usize),
        _ => Err(Error::Parse {
            line,
            column,
            message: format!("label {token:?} is not a non-negative integer"),
        }),
    }
}

fn parse_feature(token: &str, line: usize, column: usize) -> Result<f64> {
    let token = token.trim();
    if token.is_empty() {
        return Err(Error::Parse {
            line,
            column,
            message: "missing value".into(),
        });
    }
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::Parse {
            line,
            column,
            message: format!("non-finite value {token:?}"),
        }),
        Err(_) => Err(Error::Parse {
            line,
            column,
            message: format!("cannot parse {token:?} as a number"),
        }),
    }
}

/// Parses CSV text. Errors carry 1-based line and column numbers.
pub fn parse_csv(text: &str, options: CsvOptions) -> Result<Dataset> {
    let lines = csv_lines(text);
    let arity = match (lines.header, lines.records.first()) {
        (Some((_, h)), _) => h.split(',').count(),
        (None, Some((_, r))) => r.split(',').count(),
        (None, None) => return Err(abcboost_core::Error::NoSamples.into()),
    };
    if arity < 2 {
        return Err(Error::Parse {
            line: lines
                .header
                .or(lines.records.first().copied())
                .map_or(1, |l| l.0),
            column: 1,
            message: "need a label column and at least one feature column".into(),
        });
    }
    if options.label_column >= arity {
        return Err(Error::Parse {
            line: 1,
            column: options.label_column + 1,
            message: format!(
                "label column {} beyond {arity} columns",
                options.label_column
            ),
        });
    }
    let mut features = Vec::with_capacity(lines.records.len() * (arity - 1));
    let mut labels = Vec::with_capacity(lines.records.len());
    for &(line, record) in &lines.records {
        let fields: Vec<&str> = record.split(',').collect();
        if fields.len() != arity {
            return Err(Error::Arity {
                line,
                expected: arity,
                found: fields.len(),
            });
        }
        for (c, field) in fields.iter().enumerate() {
            if c == options.label_column {
                let label = parse_label(field, line, c + 1)?;
                if let Some(k) = options.num_classes {
                    if label >= k {
                        return Err(Error::Parse {
                            line,
                            column: c + 1,
                            message: format!("label {label} is not below the declared K = {k}"),
                        });
                    }
                }
                labels.push(label);
            } else {
                features.push(parse_feature(field, line, c + 1)?);
            }
        }
    }
    let ds = Dataset::new(features, arity - 1, labels, options.num_classes)?;
    match lines.header {
        Some((_, h)) => {
            let names = h
                .split(',')
                .enumerate()
                .filter(|&(c, _)| c != options.label_column)
                .map(|(_, n)| n.trim().to_string())
                .collect();
            Ok(ds.with_feature_names(names)?)
        }
        None => Ok(ds),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_csv(path: &Path, options: CsvOptions) -> Result<Dataset> {
    parse_csv(&read_text(path)?, options)
}

/// A LIBSVM file converted to a dense dataset.
#[derive(Debug, Clone)]
pub struct LibsvmData {
    pub dataset: Dataset,
    /// Original label of each class id.
    pub label_map: Vec<i64>,
}

pub fn parse_libsvm(text: &str) -> Result<LibsvmData> {
    parse_libsvm_with(text, None, None)
}

/// Parses LIBSVM text against a companion file's conventions: labels go
/// through the known `label_map` (unknown labels are an error) and the
/// dimensionality is fixed to `num_features` (larger indices are an error).
pub fn parse_libsvm_with(
    text: &str,
    known: Option<&[i64]>,
    num_features: Option<usize>,
) -> Result<LibsvmData> {
    let fixed_features = num_features;
    let lines = libsvm_lines(text);
    if lines.records.is_empty() {
        return Err(abcboost_core::Error::NoSamples.into());
    }
    let mut raw_labels = Vec::with_capacity(lines.records.len());
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::with_capacity(lines.records.len());
    let mut num_features = 0;
    for &(line, record) in &lines.records {
        let record = record.split('#').next().unwrap_or("");
        let mut tokens = record.split_whitespace();
        let label_token = tokens.next().unwrap_or("");
        let label = match label_token.parse::<i64>() {
            Ok(v) => v,
            Err(_) => match label_token.parse::<f64>() {
                Ok(v) if v.fract() == 0.0 && v.abs() < 1e15 => v as i64,
                _ => {
                    return Err(Error::Parse {
                        line,
                        column: 1,
                        message: format!("label {label_token:?} is not an integer"),
                    })
                }
            },
        };
        let mut row = Vec::new();
        for (t, token) in tokens.enumerate() {
            let column = t + 2;
            let malformed = || Error::Parse {
                line,
                column,
                message: format!("malformed token {token:?}, expected index:value"),
            };
            let (idx, val) = token.split_once(':').ok_or_else(malformed)?;
            let idx: usize = idx.parse().map_err(|_| malformed())?;
            if idx == 0 {
                return Err(Error::Parse {
                    line,
                    column,
                    message: "feature indices are 1-based".into(),
                });
            }
            if row.iter().any(|&(j, _)| j == idx - 1) {
                return Err(Error::Parse {
                    line,
                    column,
                    message: format!("duplicate feature index {idx}"),
                });
            }
            if fixed_features.is_some_and(|d| idx > d) {
                return Err(Error::Parse {
                    line,
                    column,
                    message: format!(
                        "feature index {idx} beyond the model's {} features",
                        fixed_features.unwrap_or(0)
                    ),
                });
            }
            row.push((idx - 1, parse_feature(val, line, column)?));
            num_features = num_features.max(idx);
        }
        raw_labels.push(label);
        entries.push(row);
    }
    let label_map = match known {
        Some(map) => map.to_vec(),
        None => {
            let mut map = raw_labels.clone();
            map.sort_unstable();
            map.dedup();
            map
        }
    };
    let mut labels = Vec::with_capacity(raw_labels.len());
    for (l, &(line, _)) in raw_labels.iter().zip(&lines.records) {
        match label_map.iter().position(|m| m == l) {
            Some(id) => labels.push(id),
            None => {
                return Err(Error::Parse {
                    line,
                    column: 1,
                    message: format!("label {l} does not occur in the training labels"),
                })
            }
        }
    }
    let num_features = fixed_features.unwrap_or(num_features).max(1);
    let mut features = vec![0.0; entries.len() * num_features];
    for (i, row) in entries.iter().enumerate() {
        for &(j, v) in row {
            features[i * num_features + j] = v;
        }
    }
    // A single distinct label still yields K = 2 so the set can be scored.
    let k = label_map.len().max(2);
    let label_map = if label_map.len() < k {
        let mut m = label_map;
        // Pad with an unused label so every class id has one.
        let next = m.iter().max().map_or(0, |v| v + 1);
        m.push(next);
        m
    } else {
        label_map
    };
    let dataset = Dataset::new(features, num_features, labels, Some(k))?;
    Ok(LibsvmData { dataset, label_map })
}

pub fn load_libsvm(path: &Path) -> Result<LibsvmData> {
    parse_libsvm(&read_text(path)?)
}

/// Input file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Libsvm,
}

/// Loads either format. `label_map` and `num_features` apply to LIBSVM only;
/// for CSV the class ids are the labels themselves.
pub fn load_dataset(
    path: &Path,
    format: Format,
    csv: CsvOptions,
    label_map: Option<&[i64]>,
    num_features: Option<usize>,
) -> Result<LibsvmData> {
    let text = read_text(path)?;
    match format {
        Format::Csv => {
            let dataset = parse_csv(&text, csv)?;
            let label_map = (0..dataset.num_classes() as i64).collect();
            Ok(LibsvmData { dataset, label_map })
        }
        Format::Libsvm => parse_libsvm_with(&text, label_map, num_features),
    }
}

/// Writes `contents` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
