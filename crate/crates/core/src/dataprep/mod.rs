//! Transaction ingestion, feature engineering, balancing, splitting and
//! normalization, plus a seeded synthetic transaction generator.
//!
//! The pipeline order is: fit label encoders on every row, engineer the
//! feature matrix, draw a class-balanced subset, split it stratified by label,
//! then fit z-score statistics on the training split and apply them to all
//! three splits.

pub mod encode;
pub mod features;
pub mod io;
pub mod normalize;
pub mod sampling;
pub mod synth;

use chrono::NaiveDate;
use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use encode::{label_encode, LabelEncoder};
pub use features::{compute_age_years, extract_time_features, haversine_km, TimeFeatures};
pub use io::{load_split, read_transactions, save_split, write_transactions};
pub use normalize::NormStats;
pub use sampling::{balance_subset, stratified_split, SplitFractions, SplitIndices};
pub use synth::generate_synthetic;

use crate::error::{Error, Result};

/// One card transaction with the raw column names of the source CSV.
///
/// `first`, `last`, `street` and `trans_num` identify people or receipts and
/// never reach the feature matrix; they may be absent from input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTransaction {
    #[serde(default)]
    pub trans_date_trans_time: String,
    pub cc_num: String,
    pub merchant: String,
    pub category: String,
    pub amt: f64,
    #[serde(default)]
    pub first: String,
    #[serde(default)]
    pub last: String,
    pub gender: String,
    #[serde(default)]
    pub street: String,
    pub city: String,
    pub state: String,
    pub zip: u32,
    pub lat: f64,
    pub long: f64,
    pub city_pop: u64,
    pub job: String,
    pub dob: NaiveDate,
    #[serde(default)]
    pub trans_num: String,
    pub unix_time: i64,
    pub merch_lat: f64,
    pub merch_long: f64,
    pub is_fraud: u8,
}

impl RawTransaction {
    pub fn validate(&self) -> Result<()> {
        let coord_ok = |lat: f64, lon: f64| (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon);
        if !coord_ok(self.lat, self.long) {
            return Err(Error::Data(format!("customer location ({}, {}) out of range", self.lat, self.long)));
        }
        if !coord_ok(self.merch_lat, self.merch_long) {
            return Err(Error::Data(format!(
                "merchant location ({}, {}) out of range",
                self.merch_lat, self.merch_long
            )));
        }
        if !(self.amt.is_finite() && self.amt >= 0.0) {
            return Err(Error::Data(format!("amount {} must be finite and non-negative", self.amt)));
        }
        if self.is_fraud > 1 {
            return Err(Error::Data(format!("is_fraud must be 0 or 1, got {}", self.is_fraud)));
        }
        Ok(())
    }
}

/// Engineered feature columns, in matrix order.
pub const FEATURE_COLUMNS: [&str; 20] = [
    "cc_num_encoded",
    "merchant_encoded",
    "category_encoded",
    "amt",
    "gender_encoded",
    "city_encoded",
    "state_encoded",
    "zip",
    "lat",
    "long",
    "city_pop",
    "job_encoded",
    "unix_time",
    "transaction_hour",
    "transaction_day",
    "transaction_weekday",
    "transaction_month",
    "transaction_year",
    "customer_age",
    "customer_merchant_distance",
];

/// Categorical source columns, in encoder order.
pub const CATEGORICAL_COLUMNS: [&str; 7] = ["cc_num", "merchant", "category", "gender", "city", "state", "job"];

fn categorical_value<'a>(row: &'a RawTransaction, column: &str) -> &'a str {
    match column {
        "cc_num" => &row.cc_num,
        "merchant" => &row.merchant,
        "category" => &row.category,
        "gender" => &row.gender,
        "city" => &row.city,
        "state" => &row.state,
        "job" => &row.job,
        _ => unreachable!("not a categorical column: {column}"),
    }
}

/// One fitted encoder per entry of [`CATEGORICAL_COLUMNS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<LabelEncoder>", into = "Vec<LabelEncoder>")]
pub struct Encoders(Vec<LabelEncoder>);

impl Encoders {
    pub fn fit(rows: &[RawTransaction]) -> Result<Self> {
        CATEGORICAL_COLUMNS
            .iter()
            .map(|&col| LabelEncoder::fit(col, rows.iter().map(|r| categorical_value(r, col))))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn get(&self, column: &str) -> Option<&LabelEncoder> {
        self.0.iter().find(|e| e.column() == column)
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabelEncoder> {
        self.0.iter()
    }

    fn code(&self, k: usize, row: &RawTransaction) -> Result<f64> {
        let enc = &self.0[k];
        Ok(enc.transform(categorical_value(row, enc.column()))? as f64)
    }
}

impl TryFrom<Vec<LabelEncoder>> for Encoders {
    type Error = Error;

    fn try_from(encoders: Vec<LabelEncoder>) -> Result<Self> {
        let names: Vec<&str> = encoders.iter().map(LabelEncoder::column).collect();
        if names != CATEGORICAL_COLUMNS {
            return Err(Error::Data(format!(
                "encoders cover columns {names:?}, expected {CATEGORICAL_COLUMNS:?}"
            )));
        }
        Ok(Self(encoders))
    }
}

impl From<Encoders> for Vec<LabelEncoder> {
    fn from(e: Encoders) -> Self {
        e.0
    }
}

/// Feature vector for one transaction, ordered as [`FEATURE_COLUMNS`].
pub fn engineer_row(row: &RawTransaction, encoders: &Encoders) -> Result<[f64; 20]> {
    row.validate()?;
    let time = extract_time_features(row.unix_time)?;
    let date = chrono::DateTime::from_timestamp(row.unix_time, 0)
        .expect("validated by extract_time_features")
        .date_naive();
    let age = compute_age_years(row.dob, date)?;
    let distance = haversine_km(row.lat, row.long, row.merch_lat, row.merch_long)?;
    Ok([
        encoders.code(0, row)?,
        encoders.code(1, row)?,
        encoders.code(2, row)?,
        row.amt,
        encoders.code(3, row)?,
        encoders.code(4, row)?,
        encoders.code(5, row)?,
        f64::from(row.zip),
        row.lat,
        row.long,
        row.city_pop as f64,
        encoders.code(6, row)?,
        row.unix_time as f64,
        f64::from(time.hour),
        f64::from(time.day),
        f64::from(time.weekday),
        f64::from(time.month),
        f64::from(time.year),
        f64::from(age),
        distance,
    ])
}

/// Feature matrix and labels for `rows`. Errors name the 1-based data row.
pub fn engineer(rows: &[RawTransaction], encoders: &Encoders) -> Result<LabeledSet> {
    let engineered = rows
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            engineer_row(r, encoders).map_err(|e| Error::Row {
                row: i + 1,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let features = Array2::from_shape_vec((rows.len(), FEATURE_COLUMNS.len()), engineered.concat())
        .expect("rows have fixed width");
    Ok(LabeledSet {
        features,
        labels: rows.iter().map(|r| r.is_fraud).collect(),
    })
}

/// Feature matrix with one binary label per row (1 = fraud).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
}

impl LabeledSet {
    pub fn new(features: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        crate::error::ensure_len("labels per feature row", features.nrows(), labels.len())?;
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::Data(format!("label {bad} is not 0 or 1")));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessConfig {
    pub per_class: usize,
    pub seed: u64,
    pub fractions: SplitFractions,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            per_class: 5000,
            seed: 0,
            fractions: SplitFractions::default(),
        }
    }
}

/// Normalized train/validation/test splits with everything needed to
/// reproduce the transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: LabeledSet,
    pub val: LabeledSet,
    pub test: LabeledSet,
    pub norm_stats: NormStats,
    pub encoders: Encoders,
    pub seed: u64,
    pub per_class: usize,
    pub columns: Vec<String>,
}

pub fn preprocess(rows: &[RawTransaction], cfg: &PreprocessConfig) -> Result<DatasetSplit> {
    let encoders = Encoders::fit(rows)?;
    let all = engineer(rows, &encoders)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let subset = all.select(&balance_subset(&all.labels, cfg.per_class, &mut rng)?);
    let idx = stratified_split(&subset.labels, cfg.fractions, &mut rng)?;
    let (train, val, test) = (subset.select(&idx.train), subset.select(&idx.val), subset.select(&idx.test));
    let norm_stats = NormStats::fit(train.features.view())?;
    let normalize = |s: LabeledSet| -> Result<LabeledSet> {
        Ok(LabeledSet {
            features: norm_stats.apply(s.features.view())?,
            labels: s.labels,
        })
    };
    Ok(DatasetSplit {
        train: normalize(train)?,
        val: normalize(val)?,
        test: normalize(test)?,
        norm_stats: norm_stats.clone(),
        encoders,
        seed: cfg.seed,
        per_class: cfg.per_class,
        columns: FEATURE_COLUMNS.iter().map(|c| c.to_string()).collect(),
    })
}
