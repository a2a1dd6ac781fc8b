//! CSV ingestion and persistence of preprocessed splits.
//!
//! A split directory holds `train.csv`, `val.csv` and `test.csv` (feature
//! columns then `label`) and `metadata.json`:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "seed": 42,
//!   "per_class": 5000,
//!   "columns": ["cc_num_encoded", "..."],
//!   "encoders": [{"column": "cc_num", "categories": ["..."]}, "..."],
//!   "norm_stats": {"mean": [0.0], "std": [1.0]},
//!   "counts": {"train": 7000, "val": 1500, "test": 1500}
//! }
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so reloading is exact.

use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{DatasetSplit, Encoders, LabeledSet, NormStats, RawTransaction, FEATURE_COLUMNS};
use crate::error::{Error, Result};

pub const SPLIT_FORMAT_VERSION: u32 = 1;

/// Columns an input file must provide.
pub const REQUIRED_COLUMNS: [&str; 17] = [
    "cc_num",
    "merchant",
    "category",
    "amt",
    "gender",
    "city",
    "state",
    "zip",
    "lat",
    "long",
    "city_pop",
    "job",
    "dob",
    "unix_time",
    "merch_lat",
    "merch_long",
    "is_fraud",
];

fn row_error(e: csv::Error) -> Error {
    match e.position() {
        // Record 0 is the header, so the record index is the 1-based data row.
        Some(pos) => Error::Row {
            row: pos.record() as usize,
            message: match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            },
        },
        None => Error::Csv(e),
    }
}

/// Parses and validates transactions. Any bad row aborts the read with its row number.
pub fn read_transactions_from(reader: impl Read) -> Result<Vec<RawTransaction>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let missing: Vec<&str> = REQUIRED_COLUMNS
        .iter()
        .copied()
        .filter(|c| !headers.iter().any(|h| h == *c))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Data(format!("missing required columns: {}", missing.join(", "))));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<RawTransaction>().enumerate() {
        let row = rec.map_err(row_error)?;
        row.validate().map_err(|e| Error::Row {
            row: i + 1,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data("input has a header but no data rows".into()));
    }
    Ok(rows)
}

pub fn read_transactions(path: impl AsRef<Path>) -> Result<Vec<RawTransaction>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_transactions_from(file)
}

pub fn write_transactions_to(writer: impl Write, rows: &[RawTransaction]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_transactions(path: impl AsRef<Path>, rows: &[RawTransaction]) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_transactions_to(std::io::BufWriter::new(file), rows)
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitCounts {
    train: usize,
    val: usize,
    test: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitMetadata {
    format_version: u32,
    seed: u64,
    per_class: usize,
    columns: Vec<String>,
    encoders: Encoders,
    norm_stats: NormStats,
    counts: SplitCounts,
}

fn write_set(path: &Path, columns: &[String], set: &LabeledSet) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(columns.iter().map(String::as_str).chain(["label"]))?;
    let mut record = Vec::with_capacity(columns.len() + 1);
    for (row, y) in set.features.rows().into_iter().zip(&set.labels) {
        record.clear();
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(y.to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_set(path: &Path, columns: &[String]) -> Result<LabeledSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let expected: Vec<&str> = columns.iter().map(String::as_str).chain(["label"]).collect();
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Data(format!("{}: header does not match metadata columns", path.display())));
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(row_error)?;
        let bad = |message: String| Error::Row { row: i + 1, message };
        for field in rec.iter().take(columns.len()) {
            let v: f64 = field.parse().map_err(|_| bad(format!("{}: bad number {field:?}", path.display())))?;
            if !v.is_finite() {
                return Err(bad(format!("{}: non-finite feature", path.display())));
            }
            values.push(v);
        }
        let y = &rec[columns.len()];
        labels.push(match y {
            "0" => 0,
            "1" => 1,
            _ => return Err(bad(format!("{}: label {y:?} is not 0 or 1", path.display()))),
        });
    }
    let features = Array2::from_shape_vec((labels.len(), columns.len()), values).expect("width checked by csv");
    LabeledSet::new(features, labels)
}

pub fn save_split(dir: impl AsRef<Path>, split: &DatasetSplit) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, set) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
        write_set(&dir.join(format!("{name}.csv")), &split.columns, set)?;
    }
    let meta = SplitMetadata {
        format_version: SPLIT_FORMAT_VERSION,
        seed: split.seed,
        per_class: split.per_class,
        columns: split.columns.clone(),
        encoders: split.encoders.clone(),
        norm_stats: split.norm_stats.clone(),
        counts: SplitCounts {
            train: split.train.len(),
            val: split.val.len(),
            test: split.test.len(),
        },
    };
    let path = dir.join("metadata.json");
    let json = serde_json::to_string_pretty(&meta)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

pub fn load_split(dir: impl AsRef<Path>) -> Result<DatasetSplit> {
    let dir = dir.as_ref();
    let path = dir.join("metadata.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: SplitMetadata = serde_json::from_str(&text)?;
    if meta.format_version != SPLIT_FORMAT_VERSION {
        return Err(Error::Data(format!(
            "split format version {} is not supported (expected {SPLIT_FORMAT_VERSION})",
            meta.format_version
        )));
    }
    if meta.columns.iter().map(String::as_str).ne(FEATURE_COLUMNS) {
        return Err(Error::Data("metadata column list does not match this build's features".into()));
    }
    let train = read_set(&dir.join("train.csv"), &meta.columns)?;
    let val = read_set(&dir.join("val.csv"), &meta.columns)?;
    let test = read_set(&dir.join("test.csv"), &meta.columns)?;
    if (train.len(), val.len(), test.len()) != (meta.counts.train, meta.counts.val, meta.counts.test) {
        return Err(Error::Data("split row counts do not match metadata".into()));
    }
    Ok(DatasetSplit {
        train,
        val,
        test,
        norm_stats: meta.norm_stats,
        encoders: meta.encoders,
        seed: meta.seed,
        per_class: meta.per_class,
        columns: meta.columns,
    })
}
