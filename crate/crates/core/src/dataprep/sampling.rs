//! Class balancing and stratified splitting, expressed over row indices.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};

fn indices_by_class(labels: &[u8]) -> Result<[Vec<usize>; 2]> {
    let mut by_class = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        match y {
            0 | 1 => by_class[y as usize].push(i),
            other => return Err(Error::InvalidArgument(format!("label {other} at index {i} is not 0 or 1"))),
        }
    }
    Ok(by_class)
}

/// Row indices giving exactly `per_class` rows of each label, shuffled.
///
/// A class with more rows than needed is sampled without replacement. A class
/// with fewer keeps every row once and fills the gap with draws made with
/// replacement.
pub fn balance_subset(labels: &[u8], per_class: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    if per_class == 0 {
        return Err(Error::InvalidArgument("per_class must be positive".into()));
    }
    let by_class = indices_by_class(labels)?;
    let mut out = Vec::with_capacity(2 * per_class);
    for (class, rows) in by_class.iter().enumerate() {
        if rows.is_empty() {
            return Err(Error::InvalidArgument(format!("no rows with label {class}")));
        }
        if rows.len() >= per_class {
            out.extend(index::sample(rng, rows.len(), per_class).into_iter().map(|k| rows[k]));
        } else {
            out.extend_from_slice(rows);
            out.extend((rows.len()..per_class).map(|_| rows[rng.random_range(0..rows.len())]));
        }
    }
    out.shuffle(rng);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.70,
            val: 0.15,
            test: 0.15,
        }
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("split fractions must be in [0, 1] and sum to 1: {self:?}")));
        }
        Ok(())
    }
}

/// Splits `total` across classes in proportion to `counts` by largest
/// remainder. Ties go to the class that received fewer extra rows in the
/// previous allocation (`prior_extra`), then to the lower label.
fn apportion(counts: [usize; 2], total: usize, prior_extra: [usize; 2]) -> ([usize; 2], [usize; 2]) {
    let n: usize = counts.iter().sum();
    let mut alloc = counts.map(|c| c * total / n);
    let rem = counts.map(|c| c * total % n);
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| rem[b].cmp(&rem[a]).then(prior_extra[a].cmp(&prior_extra[b])).then(a.cmp(&b)));
    let mut extra = [0usize; 2];
    let left = total - alloc.iter().sum::<usize>();
    for &c in order.iter().take(left) {
        alloc[c] += 1;
        extra[c] += 1;
    }
    (alloc, extra)
}

/// Per-class shuffle, then proportional slicing into train/val/test.
///
/// Validation and test each get `floor(N · fraction)` rows and train takes
/// the remainder. Each split's class mix is within one row of the global mix.
pub fn stratified_split(labels: &[u8], fractions: SplitFractions, rng: &mut impl Rng) -> Result<SplitIndices> {
    fractions.validate()?;
    let mut by_class = indices_by_class(labels)?;
    for (class, rows) in by_class.iter().enumerate() {
        if rows.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "label {class} has {} rows; stratified splitting needs at least 3",
                rows.len()
            )));
        }
    }
    let n = labels.len();
    let counts = [by_class[0].len(), by_class[1].len()];
    let n_val = (n as f64 * fractions.val + 1e-9).floor() as usize;
    let n_test = (n as f64 * fractions.test + 1e-9).floor() as usize;
    let (val_alloc, val_extra) = apportion(counts, n_val, [0, 0]);
    let (test_alloc, _) = apportion(counts, n_test, val_extra);

    let mut split = SplitIndices {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for (class, rows) in by_class.iter_mut().enumerate() {
        let (v, t) = (val_alloc[class], test_alloc[class]);
        if v + t > rows.len() {
            return Err(Error::InvalidArgument(format!("label {class} has too few rows for the requested split")));
        }
        rows.shuffle(rng);
        split.val.extend_from_slice(&rows[..v]);
        split.test.extend_from_slice(&rows[v..v + t]);
        split.train.extend_from_slice(&rows[v + t..]);
    }
    split.train.shuffle(rng);
    split.val.shuffle(rng);
    split.test.shuffle(rng);
    Ok(split)
}
