use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps each distinct string of a column to its rank in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEncoder {
    column: String,
    categories: Vec<String>,
}

impl LabelEncoder {
    pub fn fit<'a>(column: &str, values: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let categories: Vec<String> = values
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(str::to_owned)
            .collect();
        if categories.is_empty() {
            return Err(Error::InvalidArgument(format!("cannot fit encoder on empty column {column}")));
        }
        Ok(Self {
            column: column.to_owned(),
            categories,
        })
    }

    /// Rebuilds an encoder from persisted categories, which must be sorted and distinct.
    pub fn from_categories(column: &str, categories: Vec<String>) -> Result<Self> {
        if categories.is_empty() || categories.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!(
                "categories for column {column} must be non-empty, sorted and distinct"
            )));
        }
        Ok(Self {
            column: column.to_owned(),
            categories,
        })
    }

    pub fn column(&self) -> &str {
        &self.column
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn transform(&self, value: &str) -> Result<usize> {
        self.categories
            .binary_search_by(|c| c.as_str().cmp(value))
            .map_err(|_| Error::UnseenCategory {
                column: self.column.clone(),
                value: value.to_owned(),
            })
    }

    pub fn decode(&self, code: usize) -> Option<&str> {
        self.categories.get(code).map(String::as_str)
    }
}

/// Fits an encoder on `values` and returns the codes alongside it.
pub fn label_encode(column: &str, values: &[&str]) -> Result<(Vec<usize>, LabelEncoder)> {
    let enc = LabelEncoder::fit(column, values.iter().copied())?;
    let codes = values.iter().map(|v| enc.transform(v)).collect::<Result<_>>()?;
    Ok((codes, enc))
}
