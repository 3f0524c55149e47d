//! Time series datasets: ingestion, normalization and subsequence windows.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Standard deviation below which a sequence is treated as constant.
pub const FLAT_STD: f64 = 1e-8;

/// Smallest dataset (by shortest series) the length grid supports.
pub const MIN_SERIES_LEN: usize = 8;

/// Shortest subsequence length the grid will propose.
pub const MIN_WINDOW: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub id: usize,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(id: usize, values: Vec<f64>) -> Self {
        Self { id, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `length` consecutive points of series `series_id`, starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subsequence<'a> {
    pub series_id: usize,
    pub start: usize,
    pub values: &'a [f64],
}

impl Subsequence<'_> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub series: Vec<TimeSeries>,
    pub true_labels: Option<Vec<usize>>,
    /// Target number of clusters.
    pub k: usize,
}

impl Dataset {
    /// Builds a dataset from raw value vectors. `k` defaults to the number of
    /// distinct labels (or 1 when unlabelled).
    pub fn new(
        name: impl Into<String>,
        values: Vec<Vec<f64>>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (i, row) in values.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::EmptyRow { line: i + 1 });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    line: i + 1,
                    token: v.to_string(),
                });
            }
        }
        let labels = match labels {
            Some(l) if l.len() != values.len() => {
                return Err(Error::LabelLengthMismatch {
                    left: values.len(),
                    right: l.len(),
                })
            }
            Some(l) => Some(remap_first_occurrence(&l)),
            None => None,
        };
        let k = labels
            .as_ref()
            .map_or(1, |l| l.iter().max().map_or(1, |m| m + 1));
        let series = values
            .into_iter()
            .enumerate()
            .map(|(id, v)| TimeSeries::new(id, v))
            .collect();
        Ok(Self {
            name: name.into(),
            series,
            true_labels: labels,
            k,
        })
    }

    /// Overrides the target cluster count.
    pub fn with_k(mut self, k: usize) -> Result<Self> {
        if k == 0 || k > self.series.len() {
            return Err(Error::TooManyClusters {
                k,
                n: self.series.len(),
            });
        }
        self.k = k;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn min_len(&self) -> usize {
        self.series.iter().map(TimeSeries::len).min().unwrap_or(0)
    }

    pub fn max_len(&self) -> usize {
        self.series.iter().map(TimeSeries::len).max().unwrap_or(0)
    }

    /// Writes the dataset in UCR tab-separated layout. Unlabelled series get
    /// label 0. Values use the shortest round-trip representation.
    pub fn write_ucr_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, s) in self.series.iter().enumerate() {
            let label = self.true_labels.as_ref().map_or(0, |l| l[i]);
            write!(out, "{label}")?;
            for v in &s.values {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Relabels so that classes are numbered `0..` in order of first appearance.
pub fn remap_first_occurrence<T: PartialEq + Copy>(labels: &[T]) -> Vec<usize> {
    let mut seen: Vec<T> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|s| s == l) {
            Some(p) => p,
            None => {
                seen.push(*l);
                seen.len() - 1
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    #[default]
    UcrTsv,
    Csv,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ucr-tsv" | "tsv" | "ucr" => Ok(Self::UcrTsv),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown dataset format {other:?} (expected ucr-tsv or csv)"
            ))),
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::UcrTsv => "ucr-tsv",
            Self::Csv => "csv",
        })
    }
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token.trim().parse().map_err(|_| Error::NonNumeric {
        line,
        token: token.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            line,
            token: token.to_string(),
        });
    }
    Ok(v)
}

/// Class labels are integers, though some archives write them as `1.0`.
fn parse_label(token: &str, line: usize) -> Result<i64> {
    let t = token.trim();
    if let Ok(v) = t.parse::<i64>() {
        return Ok(v);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 => Ok(v as i64),
        _ => Err(Error::NonNumeric {
            line,
            token: token.to_string(),
        }),
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

/// Reads a labelled dataset. Every row becomes one series; labels are
/// remapped to `0..k` by first occurrence and `k` is set to the class count.
pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (labels, values) = match format {
        DatasetFormat::UcrTsv => parse_ucr_tsv(&text)?,
        DatasetFormat::Csv => parse_csv(&text)?,
    };
    Dataset::new(
        dataset_name(path),
        values,
        Some(remap_first_occurrence(&labels)),
    )
}

type Rows = (Vec<i64>, Vec<Vec<f64>>);

pub fn parse_ucr_tsv(text: &str) -> Result<Rows> {
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut fields = raw.split('\t');
        let label = parse_label(fields.next().unwrap_or_default(), line)?;
        let mut cells: Vec<&str> = fields.collect();
        while cells.last().is_some_and(|c| c.trim().is_empty()) {
            cells.pop();
        }
        if cells.is_empty() {
            return Err(Error::EmptyRow { line });
        }
        let values = cells
            .iter()
            .map(|c| parse_value(c, line))
            .collect::<Result<Vec<_>>>()?;
        labels.push(label);
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((labels, rows))
}

/// CSV with an optional header. A header column named `label` selects the
/// label column; otherwise the first column holds labels.
pub fn parse_csv(text: &str) -> Result<Rows> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    let mut label_col = 0;
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        let mut cells: Vec<&str> = record.iter().collect();
        while cells.last().is_some_and(|c| c.trim().is_empty()) {
            cells.pop();
        }
        if cells.is_empty() {
            continue;
        }
        if idx == 0 && cells.iter().any(|c| c.trim().parse::<f64>().is_err()) {
            if let Some(p) = cells
                .iter()
                .position(|c| c.trim().eq_ignore_ascii_case("label"))
            {
                label_col = p;
            }
            continue;
        }
        if cells.len() <= label_col {
            return Err(Error::EmptyRow { line });
        }
        let label = parse_label(cells[label_col], line)?;
        let values = cells
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != label_col)
            .map(|(_, c)| parse_value(c, line))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::EmptyRow { line });
        }
        labels.push(label);
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((labels, rows))
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Z-normalizes `values` into `out`. Flat input maps to zeros.
pub fn znormalize_into(values: &[f64], out: &mut [f64]) {
    debug_assert_eq!(values.len(), out.len());
    let (mean, std) = mean_std(values);
    if std < FLAT_STD {
        out.fill(0.0);
    } else {
        for (o, v) in out.iter_mut().zip(values) {
            *o = (v - mean) / std;
        }
    }
}

pub fn znormalize_values(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    znormalize_into(values, &mut out);
    out
}

pub fn znormalize(series: &TimeSeries) -> TimeSeries {
    TimeSeries::new(series.id, znormalize_values(&series.values))
}

/// All stride-1 windows of length `length`, in increasing start order.
pub fn extract_subsequences(series: &TimeSeries, length: usize) -> Result<Vec<Subsequence<'_>>> {
    if length == 0 {
        return Err(Error::InvalidParameter(
            "subsequence length must be positive".into(),
        ));
    }
    if length > series.len() {
        return Err(Error::LengthTooLong {
            length,
            series_len: series.len(),
        });
    }
    Ok(series
        .values
        .windows(length)
        .enumerate()
        .map(|(start, values)| Subsequence {
            series_id: series.id,
            start,
            values,
        })
        .collect())
}

/// Candidate subsequence lengths: `count` points spaced linearly between 5%
/// and 40% of the shortest series (rounded up), clamped to at least
/// [`MIN_WINDOW`], deduplicated and ascending.
pub fn candidate_lengths(dataset: &Dataset, count: usize) -> Result<Vec<usize>> {
    lengths_for(dataset.min_len(), count)
}

pub fn lengths_for(min_len: usize, count: usize) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "number of lengths must be at least 1".into(),
        ));
    }
    if min_len < MIN_SERIES_LEN {
        return Err(Error::DatasetTooShort {
            min_len,
            required: MIN_SERIES_LEN,
        });
    }
    // integer arithmetic keeps the grid exact: ceil(5n/100), floor(40n/100)
    let lo = (5 * min_len).div_ceil(100);
    let hi = (40 * min_len) / 100;
    let mut out: Vec<usize> = if count == 1 {
        vec![lo]
    } else {
        let steps = count - 1;
        (0..count)
            .map(|i| (lo * steps + (hi - lo) * i).div_ceil(steps))
            .collect()
    };
    for l in &mut out {
        *l = (*l).max(MIN_WINDOW);
    }
    out.dedup();
    Ok(out)
}
