//! Annual series containers, lag/difference operators and CSV ingestion.
//!
//! Every series is indexed by an integer year with no gaps. Lagging and
//! differencing shrink the sample instead of padding it, so two derived series
//! are combined by restricting both to their common year range.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One named annual series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    name: String,
    start_year: i32,
    values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, start_year: i32, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::InvalidSeries {
                name,
                reason: "series is empty".into(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries {
                name,
                reason: format!("non-finite value in {}", start_year + i as i32),
            });
        }
        Ok(Series {
            name,
            start_year,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: a series holds at least one value.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.start_year + i as i32)
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        let offset = year.checked_sub(self.start_year)?;
        usize::try_from(offset).ok().and_then(|i| self.values.get(i).copied())
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Restricts the series to `[first, last]`, which must lie inside its range.
    pub fn window(&self, first: i32, last: i32) -> Result<Series> {
        if first < self.start_year || last > self.end_year() || first > last {
            return Err(Error::EmptyIntersection);
        }
        let lo = (first - self.start_year) as usize;
        let hi = (last - self.start_year) as usize;
        Series::new(self.name.clone(), first, self.values[lo..=hi].to_vec())
    }

    /// Applies `f` elementwise and keeps the year index.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Series> {
        Series::new(
            self.name.clone(),
            self.start_year,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// Shifts `s` forward by `k` years: the value reported at year `t` is `s(t - k)`.
pub fn lag(s: &Series, k: usize) -> Result<Series> {
    if k == 0 {
        return Err(Error::ZeroOrder);
    }
    if k >= s.len() {
        return Err(Error::LagTooLarge { lag: k, len: s.len() });
    }
    Series::new(
        s.name.clone(),
        s.start_year + k as i32,
        s.values[..s.len() - k].to_vec(),
    )
}

/// `s(t) - s(t - k)`, defined from `start_year + k` onward.
pub fn diff(s: &Series, k: usize) -> Result<Series> {
    if k == 0 {
        return Err(Error::ZeroOrder);
    }
    if k >= s.len() {
        return Err(Error::LagTooLarge { lag: k, len: s.len() });
    }
    let values = s.values.windows(k + 1).map(|w| w[k] - w[0]).collect();
    Series::new(s.name.clone(), s.start_year + k as i32, values)
}

/// A set of series sharing one consecutive year range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    start_year: i32,
    len: usize,
    columns: Vec<Series>,
}

impl Frame {
    pub fn new(columns: Vec<Series>) -> Result<Self> {
        let first = columns.first().ok_or(Error::EmptyInput)?;
        let (start_year, len) = (first.start_year, first.len());
        Frame::with_range(start_year, len, columns)
    }

    /// Builds a frame with an explicit year range; `columns` may be empty.
    pub fn with_range(start_year: i32, len: usize, columns: Vec<Series>) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput);
        }
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
            if c.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    found: c.len(),
                });
            }
            if c.start_year != start_year {
                return Err(Error::InvalidSeries {
                    name: c.name.clone(),
                    reason: format!("starts in {} instead of {start_year}", c.start_year),
                });
            }
        }
        Ok(Frame {
            start_year,
            len,
            columns,
        })
    }

    pub fn year_range(&self) -> (i32, i32) {
        (self.start_year, self.start_year + self.len as i32 - 1)
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn nrows(&self) -> usize {
        self.len
    }

    pub fn columns(&self) -> &[Series] {
        &self.columns
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name())
    }

    pub fn get(&self, name: &str) -> Option<&Series> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Result<&Series> {
        self.get(name).ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    /// New frame holding only `names`, in that order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Frame> {
        let cols = names
            .iter()
            .map(|n| self.column(n.as_ref()).cloned())
            .collect::<Result<Vec<_>>>()?;
        Frame::with_range(self.start_year, self.len, cols)
    }

    pub fn push(&mut self, column: Series) -> Result<()> {
        if self.get(column.name()).is_some() {
            return Err(Error::DuplicateColumn(column.name));
        }
        if column.start_year != self.start_year || column.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: column.len(),
            });
        }
        self.columns.push(column);
        Ok(())
    }

    pub fn window(&self, first: i32, last: i32) -> Result<Frame> {
        let (lo, hi) = self.year_range();
        if first < lo || last > hi || first > last {
            return Err(Error::EmptyIntersection);
        }
        let cols = self
            .columns
            .iter()
            .map(|c| c.window(first, last))
            .collect::<Result<Vec<_>>>()?;
        Frame::with_range(first, (last - first + 1) as usize, cols)
    }

    /// Writes the frame as CSV with the year in the first column.
    ///
    /// Values use the shortest decimal representation that parses back to the
    /// same `f64`, so [`load_csv`] restores the frame exactly.
    pub fn write_csv(&self, path: impl AsRef<Path>, year_column: &str) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = File::create(path).map_err(io_err)?;
        out.write_all(self.to_csv_string(year_column).as_bytes())
            .map_err(io_err)
    }

    pub fn to_csv_string(&self, year_column: &str) -> String {
        let mut buf = String::new();
        buf.push_str(year_column);
        for c in &self.columns {
            buf.push(',');
            buf.push_str(&c.name);
        }
        buf.push('\n');
        for i in 0..self.len {
            buf.push_str(&(self.start_year + i as i32).to_string());
            for c in &self.columns {
                buf.push(',');
                buf.push_str(&format!("{:?}", c.values[i]));
            }
            buf.push('\n');
        }
        buf
    }
}

/// Restricts every frame to the common year range and merges their columns.
pub fn align(frames: &[Frame]) -> Result<Frame> {
    let first = frames.first().ok_or(Error::EmptyInput)?;
    let (mut lo, mut hi) = first.year_range();
    for f in &frames[1..] {
        let (a, b) = f.year_range();
        lo = lo.max(a);
        hi = hi.min(b);
    }
    if lo > hi {
        return Err(Error::EmptyIntersection);
    }
    let mut columns = Vec::new();
    let mut seen = HashSet::new();
    for f in frames {
        for c in &f.columns {
            if !seen.insert(c.name.clone()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
            columns.push(c.window(lo, hi)?);
        }
    }
    Frame::with_range(lo, (hi - lo + 1) as usize, columns)
}

/// Reads an annual CSV file: a header row, one integer year column and
/// numeric data columns.
///
/// Rows and columns in [`Error::Parse`] are 1-based and count the header as
/// row 1, matching what a spreadsheet shows.
pub fn load_csv(path: impl AsRef<Path>, year_column: &str) -> Result<Frame> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, year_column)
}

pub fn read_csv<R: std::io::Read>(reader: R, year_column: &str) -> Result<Frame> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();

    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }
    let year_idx = header
        .iter()
        .position(|h| h == year_column)
        .ok_or_else(|| Error::MissingColumn(year_column.to_owned()))?;

    let mut years: Vec<i64> = Vec::new();
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if record.len() != header.len() {
            return Err(Error::Csv(format!(
                "row {row} has {} fields, header has {}",
                record.len(),
                header.len()
            )));
        }
        for (j, cell) in record.iter().enumerate() {
            let bad = || Error::Parse {
                row,
                col: j + 1,
                value: cell.to_owned(),
            };
            if j == year_idx {
                let year: i64 = cell.parse().map_err(|_| bad())?;
                if let Some(&prev) = years.last() {
                    if year != prev + 1 {
                        return Err(Error::GapInYears {
                            previous: prev,
                            found: year,
                        });
                    }
                }
                years.push(year);
            } else {
                let v: f64 = cell.parse().map_err(|_| bad())?;
                if !v.is_finite() {
                    return Err(bad());
                }
                data[j].push(v);
            }
        }
    }

    let start = *years.first().ok_or(Error::EmptyInput)?;
    let start_year = i32::try_from(start).map_err(|_| Error::Parse {
        row: 2,
        col: year_idx + 1,
        value: start.to_string(),
    })?;
    let columns = header
        .into_iter()
        .zip(data)
        .enumerate()
        .filter(|(j, _)| *j != year_idx)
        .map(|(_, (name, values))| Series::new(name, start_year, values))
        .collect::<Result<Vec<_>>>()?;
    Frame::with_range(start_year, years.len(), columns)
}
