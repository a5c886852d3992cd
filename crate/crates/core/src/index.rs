//! Composite food-security index and disaster-exposure metrics.
//!
//! The index is the first principal component of the min-max normalised
//! indicators (correlation-matrix PCA), oriented so the anchor indicator loads
//! positively and rescaled to zero mean and unit sample standard deviation.
//!
//! Each disaster metric sums, for every year, the events recorded in that
//! year divided by the year's denominator (population or GDP).

use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::jacobi_eigen;
use crate::stats::{mean, sample_sd};
use crate::timeseries::{Frame, Series};

/// Observed `(min, max)` of one indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorBounds {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub indicators: Vec<IndicatorBounds>,
}

impl NormalizationBounds {
    /// Sample bounds of every column; fails on a constant column.
    pub fn from_frame(f: &Frame) -> Result<Self> {
        let indicators = f
            .columns()
            .iter()
            .map(|c| {
                let min = c.values().iter().copied().fold(f64::INFINITY, f64::min);
                let max = c.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max <= min {
                    return Err(Error::DegenerateRange(c.name().to_owned()));
                }
                Ok(IndicatorBounds {
                    name: c.name().to_owned(),
                    min,
                    max,
                })
            })
            .collect::<Result<_>>()?;
        Ok(NormalizationBounds { indicators })
    }

    pub fn get(&self, name: &str) -> Option<&IndicatorBounds> {
        self.indicators.iter().find(|b| b.name == name)
    }

    pub fn normalize(&self, f: &Frame) -> Result<Frame> {
        let cols = self
            .indicators
            .iter()
            .map(|b| minmax_normalize(f.column(&b.name)?, (b.min, b.max)))
            .collect::<Result<Vec<_>>>()?;
        Frame::with_range(f.start_year(), f.nrows(), cols)
    }
}

/// `(x - min) / (max - min)`.
pub fn minmax_normalize(s: &Series, bounds: (f64, f64)) -> Result<Series> {
    let (min, max) = bounds;
    if !(max > min) {
        return Err(Error::DegenerateRange(s.name().to_owned()));
    }
    let width = max - min;
    s.map(|x| (x - min) / width)
}

/// `(x - mean) / sd` with the sample standard deviation.
pub fn standardize(s: &Series) -> Result<Series> {
    let v = s.values();
    if v.len() < 2 {
        return Err(Error::DegenerateRange(s.name().to_owned()));
    }
    let m = mean(v);
    let sd = sample_sd(v);
    if !(sd > 0.0) {
        return Err(Error::DegenerateRange(s.name().to_owned()));
    }
    s.map(|x| (x - m) / sd)
}

#[derive(Debug, Clone)]
pub struct PcaResult {
    pub names: Vec<String>,
    /// Non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the loading vector of component `j`.
    pub loadings: DMatrix<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Component scores `PC1..PCp`.
    pub scores: Frame,
    /// The smallest eigenvalue is numerically zero.
    pub rank_deficient: bool,
}

/// Standardised columns (sample SD) as a `T x p` matrix.
fn standardized_matrix(f: &Frame) -> Result<DMatrix<f64>> {
    let n = f.nrows();
    let mut z = DMatrix::zeros(n, f.columns().len());
    for (j, c) in f.columns().iter().enumerate() {
        let v = c.values();
        let m = mean(v);
        let sd = sample_sd(v);
        if !(sd > 0.0) || v.iter().all(|&x| x == v[0]) {
            return Err(Error::ConstantColumn(c.name().to_owned()));
        }
        for (i, &x) in v.iter().enumerate() {
            z[(i, j)] = (x - m) / sd;
        }
    }
    Ok(z)
}

/// Principal components of the sample correlation matrix of `f`'s columns.
pub fn pca(f: &Frame) -> Result<PcaResult> {
    let p = f.columns().len();
    let n = f.nrows();
    if p < 2 {
        return Err(Error::InvalidSpec("PCA needs at least two columns".into()));
    }
    if n < 3 {
        return Err(Error::SampleTooShort {
            needed: 2,
            available: n,
        });
    }
    let z = standardized_matrix(f)?;
    let corr = (z.transpose() * &z) / (n as f64 - 1.0);
    let eig = jacobi_eigen(&corr);
    let total: f64 = eig.values.iter().sum();
    let explained_variance_ratio = eig.values.iter().map(|v| v / total).collect();
    let rank_deficient = eig.values[p - 1] < 1e-10 * p as f64;

    let scores = &z * &eig.vectors;
    let cols = (0..p)
        .map(|j| {
            Series::new(
                format!("PC{}", j + 1),
                f.start_year(),
                scores.column(j).iter().copied().collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PcaResult {
        names: f.names().map(str::to_owned).collect(),
        eigenvalues: eig.values,
        loadings: eig.vectors,
        explained_variance_ratio,
        scores: Frame::with_range(f.start_year(), n, cols)?,
        rank_deficient,
    })
}

/// Column names of the eight index indicators, in the default order.
pub const DEFAULT_INDICATORS: [&str; 8] = [
    "ELEC_RURAL",
    "AGR_VA",
    "GRAIN_YIELD",
    "EMP_AGR",
    "FOOD_PROD",
    "LIVESTOCK",
    "RURAL_POP",
    "RURAL_POP_GROWTH",
];

/// Which columns make up the index and which one fixes its sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexRecipe {
    pub name: String,
    pub indicators: Vec<String>,
    pub anchor: String,
}

impl Default for IndexRecipe {
    fn default() -> Self {
        IndexRecipe {
            name: "FSI".into(),
            indicators: DEFAULT_INDICATORS.iter().map(|s| s.to_string()).collect(),
            anchor: "FOOD_PROD".into(),
        }
    }
}

/// Fitted index: enough to recompute the index on the same indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexModel {
    pub name: String,
    pub bounds: NormalizationBounds,
    /// Unit-norm first-component loadings, already multiplied by `orientation_sign`.
    pub loadings: Vec<f64>,
    pub orientation_sign: f64,
    /// Mean and SD of the normalised-data standardisation, per indicator.
    pub column_scale: Vec<(f64, f64)>,
    /// Mean and SD of the raw oriented component scores.
    pub score_scale: (f64, f64),
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl IndexModel {
    pub fn indicators(&self) -> impl Iterator<Item = &str> {
        self.bounds.indicators.iter().map(|b| b.name.as_str())
    }

    /// Recomputes the index from raw indicator columns.
    pub fn apply(&self, f: &Frame) -> Result<Series> {
        let normalized = self.bounds.normalize(f)?;
        let n = normalized.nrows();
        let (m, sd) = self.score_scale;
        let mut out = vec![0.0; n];
        for (j, col) in normalized.columns().iter().enumerate() {
            let (cm, csd) = self.column_scale[j];
            for (o, &x) in out.iter_mut().zip(col.values()) {
                *o += self.loadings[j] * (x - cm) / csd;
            }
        }
        Series::new(
            self.name.clone(),
            f.start_year(),
            out.into_iter().map(|s| (s - m) / sd).collect(),
        )
    }
}

/// Builds the composite index from the recipe's indicator columns of `f`.
pub fn build_index(f: &Frame, recipe: &IndexRecipe) -> Result<(IndexModel, Series)> {
    if !recipe.indicators.iter().any(|n| n == &recipe.anchor) {
        return Err(Error::Config(format!(
            "anchor {:?} is not one of the index indicators",
            recipe.anchor
        )));
    }
    let raw = f.select(&recipe.indicators)?;
    let bounds = NormalizationBounds::from_frame(&raw)?;
    let normalized = bounds.normalize(&raw)?;
    let components = pca(&normalized)?;

    let anchor = recipe
        .indicators
        .iter()
        .position(|n| n == &recipe.anchor)
        .expect("anchor checked above");
    let first = components.loadings.column(0);
    let orientation_sign = if first[anchor] < 0.0 { -1.0 } else { 1.0 };
    let loadings: Vec<f64> = first.iter().map(|l| l * orientation_sign).collect();
    let column_scale = normalized
        .columns()
        .iter()
        .map(|c| (mean(c.values()), sample_sd(c.values())))
        .collect();

    let scores: Vec<f64> = components
        .scores
        .column("PC1")?
        .values()
        .iter()
        .map(|s| s * orientation_sign)
        .collect();
    let score_scale = (mean(&scores), sample_sd(&scores));
    let raw_scores = Series::new(recipe.name.clone(), f.start_year(), scores)?;
    let index = standardize(&raw_scores)?;

    let model = IndexModel {
        name: recipe.name.clone(),
        bounds,
        loadings,
        orientation_sign,
        column_scale,
        score_scale,
        eigenvalues: components.eigenvalues,
        explained_variance_ratio: components.explained_variance_ratio,
    };
    Ok((model, index))
}

/// The three damage measures, each a ratio to a per-year denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisasterMetricKind {
    /// People affected relative to population.
    Affected,
    /// Fatalities relative to population.
    Deaths,
    /// Economic damage (USD) relative to GDP.
    Damage,
}

/// Per-year sum of `event_value / denominator`. `event_values[i]` holds the
/// events of the `i`-th year of `denominator`; an empty list contributes zero.
pub fn disaster_metric(kind: DisasterMetricKind, event_values: &[Vec<f64>], denominator: &Series) -> Result<Series> {
    if event_values.len() != denominator.len() {
        return Err(Error::LengthMismatch {
            expected: denominator.len(),
            found: event_values.len(),
        });
    }
    let values = denominator
        .years()
        .zip(denominator.values())
        .zip(event_values)
        .map(|((year, &d), events)| {
            if !(d > 0.0) {
                return Err(Error::NonPositiveDenominator { year, value: d });
            }
            Ok(events.iter().map(|e| e / d).sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    let name = match kind {
        DisasterMetricKind::Affected => "AFFECTED",
        DisasterMetricKind::Deaths => "DEATHS",
        DisasterMetricKind::Damage => "DAMAGE",
    };
    Series::new(name, denominator.start_year(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisasterType {
    Quake,
    Storm,
    Flood,
    Other,
}

impl std::str::FromStr for DisasterType {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quake" => Ok(DisasterType::Quake),
            "storm" => Ok(DisasterType::Storm),
            "flood" => Ok(DisasterType::Flood),
            "other" => Ok(DisasterType::Other),
            _ => Err(()),
        }
    }
}

/// One row of the disaster events file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisasterEvent {
    pub year: i32,
    pub kind: DisasterType,
    pub affected: f64,
    pub deaths: f64,
    pub damage_usd: f64,
}

impl DisasterEvent {
    pub fn value(&self, metric: DisasterMetricKind) -> f64 {
        match metric {
            DisasterMetricKind::Affected => self.affected,
            DisasterMetricKind::Deaths => self.deaths,
            DisasterMetricKind::Damage => self.damage_usd,
        }
    }
}

const EVENT_COLUMNS: [&str; 5] = ["year", "kind", "affected", "deaths", "damage_usd"];

/// Reads `year,kind,affected,deaths,damage_usd` records.
pub fn load_disaster_events(path: impl AsRef<Path>) -> Result<Vec<DisasterEvent>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_disaster_events(file)
}

pub fn read_disaster_events<R: std::io::Read>(reader: R) -> Result<Vec<DisasterEvent>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
    let idx = EVENT_COLUMNS
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == *c)
                .ok_or_else(|| Error::MissingColumn((*c).to_owned()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut events = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let cell = |k: usize| record.get(idx[k]).unwrap_or("");
        let bad = |k: usize| Error::Parse {
            row,
            col: idx[k] + 1,
            value: cell(k).to_owned(),
        };
        let num = |k: usize| -> Result<f64> {
            let v: f64 = cell(k).parse().map_err(|_| bad(k))?;
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(bad(k))
            }
        };
        events.push(DisasterEvent {
            year: cell(0).parse().map_err(|_| bad(0))?,
            kind: cell(1).parse().map_err(|_| bad(1))?,
            affected: num(2)?,
            deaths: num(3)?,
            damage_usd: num(4)?,
        });
    }
    Ok(events)
}

pub fn write_disaster_events(events: &[DisasterEvent]) -> String {
    let mut out = EVENT_COLUMNS.join(",");
    out.push('\n');
    for e in events {
        let kind = match e.kind {
            DisasterType::Quake => "quake",
            DisasterType::Storm => "storm",
            DisasterType::Flood => "flood",
            DisasterType::Other => "other",
        };
        out.push_str(&format!(
            "{},{kind},{:?},{:?},{:?}\n",
            e.year, e.affected, e.deaths, e.damage_usd
        ));
    }
    out
}

/// Groups event values by year over `[start_year, start_year + len)`.
/// `filter = None` keeps every disaster type; events outside the range are
/// ignored.
pub fn events_by_year(
    events: &[DisasterEvent],
    filter: Option<DisasterType>,
    metric: DisasterMetricKind,
    start_year: i32,
    len: usize,
) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); len];
    for e in events {
        if filter.is_some_and(|k| k != e.kind) {
            continue;
        }
        let offset = e.year - start_year;
        if offset >= 0 && (offset as usize) < len {
            out[offset as usize].push(e.value(metric));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(values: &[f64]) -> Series {
        Series::new("x", 2000, values.to_vec()).unwrap()
    }

    #[test]
    fn minmax_cases() {
        let a = minmax_normalize(&series(&[1.0, 2.0, 3.0]), (1.0, 3.0)).unwrap();
        assert_eq!(a.values(), &[0.0, 0.5, 1.0]);
        let b = minmax_normalize(&series(&[10.0, 0.0, 5.0]), (0.0, 10.0)).unwrap();
        assert_eq!(b.values(), &[1.0, 0.0, 0.5]);
        assert!(matches!(
            minmax_normalize(&series(&[5.0, 5.0, 5.0]), (5.0, 5.0)),
            Err(Error::DegenerateRange(_))
        ));
        let f = Frame::new(vec![series(&[5.0, 5.0, 5.0])]).unwrap();
        assert!(NormalizationBounds::from_frame(&f).is_err());
    }

    #[test]
    fn standardize_sample_convention() {
        let z = standardize(&series(&[0.0, 1.0, 2.0])).unwrap();
        assert_eq!(z.values(), &[-1.0, 0.0, 1.0]);
        assert!(matches!(
            standardize(&series(&[3.0, 3.0])),
            Err(Error::DegenerateRange(_))
        ));
    }

    proptest! {
        #[test]
        fn standardize_is_idempotent(values in prop::collection::vec(-1e3f64..1e3, 3..40)) {
            let s = series(&values);
            prop_assume!(sample_sd(&values) > 1e-6);
            let once = standardize(&s).unwrap();
            let twice = standardize(&once).unwrap();
            for (a, b) in once.values().iter().zip(twice.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn metric_is_additive_over_event_partitions(
            events in prop::collection::vec(0.0f64..1e6, 0..8),
            split in 0usize..8,
            denom in 1.0f64..1e7,
        ) {
            let split = split.min(events.len());
            let d = series(&[denom]);
            let whole = disaster_metric(DisasterMetricKind::Deaths, std::slice::from_ref(&events), &d).unwrap();
            let a = disaster_metric(DisasterMetricKind::Deaths, &[events[..split].to_vec()], &d).unwrap();
            let b = disaster_metric(DisasterMetricKind::Deaths, &[events[split..].to_vec()], &d).unwrap();
            let sum = a.values()[0] + b.values()[0];
            prop_assert!((whole.values()[0] - sum).abs() <= 1e-12 * whole.values()[0].abs().max(1e-300));
        }
    }

    #[test]
    fn metric_examples() {
        let pop = series(&[100_000.0, 100_000.0]);
        let none = disaster_metric(DisasterMetricKind::Affected, &[vec![], vec![]], &pop).unwrap();
        assert_eq!(none.values(), &[0.0, 0.0]);
        let one = disaster_metric(DisasterMetricKind::Affected, &[vec![1000.0], vec![]], &pop).unwrap();
        assert_eq!(one.values(), &[0.01, 0.0]);
        let million = series(&[1_000_000.0]);
        let deaths = disaster_metric(DisasterMetricKind::Deaths, &[vec![500.0, 300.0]], &million).unwrap();
        // Brute force over events: 500/1e6 + 300/1e6.
        assert!((deaths.values()[0] - 8.0e-4).abs() < 1e-18);
        let bad = series(&[1.0, 0.0]);
        assert!(matches!(
            disaster_metric(DisasterMetricKind::Damage, &[vec![], vec![]], &bad),
            Err(Error::NonPositiveDenominator { year: 2001, .. })
        ));
    }

    #[test]
    fn event_file_parsing() {
        let text = "year,kind,affected,deaths,damage_usd\n\
                    1999,quake,1000,17000,2e10\n\
                    1999,flood,50,2,1e6\n\
                    2001,storm,10,0,0\n";
        let events = read_disaster_events(text.as_bytes()).unwrap();
        assert_eq!(events.len(), 3);
        assert_eq!(events[0].kind, DisasterType::Quake);
        let by_year = events_by_year(&events, None, DisasterMetricKind::Deaths, 1999, 3);
        assert_eq!(by_year, vec![vec![17000.0, 2.0], vec![], vec![0.0]]);
        let quakes = events_by_year(&events, Some(DisasterType::Quake), DisasterMetricKind::Damage, 1999, 3);
        assert_eq!(quakes, vec![vec![2e10], vec![], vec![]]);
        let back = read_disaster_events(write_disaster_events(&events).as_bytes()).unwrap();
        assert_eq!(back, events);

        let bad = "year,kind,affected,deaths,damage_usd\n1999,volcano,1,1,1\n";
        assert!(matches!(
            read_disaster_events(bad.as_bytes()),
            Err(Error::Parse { row: 2, col: 2, .. })
        ));
    }

    #[test]
    fn pca_perfect_correlation() {
        let a = Series::new("a", 2000, vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        let b = Series::new("b", 2000, vec![3.0, 5.0, 9.0, 17.0]).unwrap();
        let r = pca(&Frame::new(vec![a, b]).unwrap()).unwrap();
        assert!((r.eigenvalues[0] - 2.0).abs() < 1e-12);
        assert!(r.eigenvalues[1].abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.loadings[(0, 0)].abs() - h).abs() < 1e-12);
        assert!((r.loadings[(1, 0)].abs() - h).abs() < 1e-12);
        assert!(r.rank_deficient);
    }

    #[test]
    fn pca_orthogonal_columns() {
        // Centred, mutually orthogonal columns of equal norm.
        let a = Series::new("a", 2000, vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let b = Series::new("b", 2000, vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        let c = Series::new("c", 2000, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let r = pca(&Frame::new(vec![a, b, c]).unwrap()).unwrap();
        for v in &r.eigenvalues {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pca_rejects_constant_column() {
        let a = Series::new("a", 2000, vec![1.0, 2.0, 3.0]).unwrap();
        let b = Series::new("b", 2000, vec![4.0, 4.0, 4.0]).unwrap();
        assert!(matches!(
            pca(&Frame::new(vec![a, b]).unwrap()),
            Err(Error::ConstantColumn(name)) if name == "b"
        ));
    }

    #[test]
    fn rank_one_indicators() {
        let base = [3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0, 6.0, 5.5, 3.5];
        let recipe = IndexRecipe {
            name: "IDX".into(),
            indicators: vec!["a".into(), "b".into(), "c".into()],
            anchor: "b".into(),
        };
        let cols = vec![
            Series::new("a", 2000, base.iter().map(|v| 2.0 * v + 1.0).collect()).unwrap(),
            Series::new("b", 2000, base.iter().map(|v| -0.5 * v + 3.0).collect()).unwrap(),
            Series::new("c", 2000, base.iter().map(|v| 10.0 * v).collect()).unwrap(),
        ];
        let f = Frame::new(cols).unwrap();
        let (model, idx) = build_index(&f, &recipe).unwrap();
        assert!((model.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        // Anchor b falls with the common factor, so the index does too.
        let expected = standardize(&Series::new("b", 2000, base.iter().map(|v| -v).collect()).unwrap()).unwrap();
        for (a, b) in idx.values().iter().zip(expected.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(model.loadings[1] > 0.0);
        let again = model.apply(&f).unwrap();
        for (a, b) in idx.values().iter().zip(again.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn anchor_must_be_an_indicator() {
        let f = Frame::new(vec![series(&[1.0, 2.0, 3.0])]).unwrap();
        let recipe = IndexRecipe {
            name: "I".into(),
            indicators: vec!["x".into()],
            anchor: "nope".into(),
        };
        assert!(matches!(build_index(&f, &recipe), Err(Error::Config(_))));
    }

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_frame(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Frame {
        let cols = (0..p)
            .map(|j| {
                let v = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                Series::new(format!("v{j}"), 2000, v).unwrap()
            })
            .collect();
        Frame::new(cols).unwrap()
    }

    /// Power iteration with Hotelling deflation.
    fn power_oracle(a: &DMatrix<f64>) -> Vec<(f64, Vec<f64>)> {
        let n = a.nrows();
        let mut m = a.clone();
        let mut out = Vec::new();
        for k in 0..n {
            let mut v = nalgebra::DVector::from_fn(n, |i, _| 1.0 + (i * 7 + k) as f64 * 0.1);
            v /= v.norm();
            let mut lambda = 0.0;
            for _ in 0..20_000 {
                let w = &m * &v;
                let next = w.dot(&v);
                let norm = w.norm();
                if norm == 0.0 {
                    break;
                }
                let w = w / norm;
                let converged = (next - lambda).abs() < 1e-15 && (&w - &v).norm() < 1e-13;
                v = w;
                lambda = next;
                if converged {
                    break;
                }
            }
            m -= lambda * &v * v.transpose();
            out.push((lambda, v.iter().copied().collect()));
        }
        out
    }

    #[test]
    fn eigen_matches_power_iteration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let f = random_frame(&mut rng, 10, 3);
            let r = pca(&f).unwrap();
            let z = standardized_matrix(&f).unwrap();
            let corr = (z.transpose() * &z) / 9.0;
            let mut oracle = power_oracle(&corr);
            oracle.sort_by(|a, b| b.0.total_cmp(&a.0));
            let library = corr.clone().symmetric_eigen();
            let mut lib_vals: Vec<f64> = library.eigenvalues.iter().copied().collect();
            lib_vals.sort_by(|a, b| b.total_cmp(a));
            for (j, (lambda, vec)) in oracle.iter().enumerate() {
                assert!((r.eigenvalues[j] - lambda).abs() < 1e-8);
                assert!((r.eigenvalues[j] - lib_vals[j]).abs() < 1e-10);
                let dot: f64 = (0..3).map(|i| r.loadings[(i, j)] * vec[i]).sum();
                assert!((dot.abs() - 1.0).abs() < 1e-8);
            }
            assert!((r.eigenvalues.iter().sum::<f64>() - 3.0).abs() < 1e-8);
            assert!((r.explained_variance_ratio.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scores_reconstruct_standardized_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_frame(&mut rng, 25, 5);
        let r = pca(&f).unwrap();
        let z = standardized_matrix(&f).unwrap();
        let scores = DMatrix::from_fn(25, 5, |i, j| r.scores.columns()[j].values()[i]);
        let back = scores * r.loadings.transpose();
        assert!((back - z).abs().max() < 1e-8);
        let gram = r.loadings.transpose() * &r.loadings;
        assert!((gram - DMatrix::identity(5, 5)).abs().max() < 1e-8);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn index_is_standardized_and_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_frame(&mut rng, 33, 4);
        let recipe = IndexRecipe {
            name: "I".into(),
            indicators: (0..4).map(|j| format!("v{j}")).collect(),
            anchor: "v2".into(),
        };
        let (model, idx) = build_index(&f, &recipe).unwrap();
        assert!(mean(idx.values()).abs() < 1e-8);
        assert!((sample_sd(idx.values()) - 1.0).abs() < 1e-8);
        let norm: f64 = model.loadings.iter().map(|l| l * l).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(model.loadings[2] > 0.0);

        let scaled: Vec<Series> = f
            .columns()
            .iter()
            .enumerate()
            .map(|(j, c)| c.map(|x| x * (j as f64 + 0.5) * 37.0).unwrap())
            .collect();
        let (_, idx2) = build_index(&Frame::new(scaled).unwrap(), &recipe).unwrap();
        for (a, b) in idx.values().iter().zip(idx2.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dominant_factor_is_recovered() {
        let reps = 200;
        let (n, p) = (60, 6);
        let mut checked = 0;
        for rep in 0..reps {
            let mut rng = ChaCha8Rng::seed_from_u64(2024);
            rng.set_stream(rep);
            let f1: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let f2: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let cols: Vec<Series> = (0..p)
                .map(|j| {
                    let a: f64 = rng.random_range(2.0..3.0);
                    let b: f64 = rng.random_range(-0.4..0.4);
                    let v = (0..n)
                        .map(|t| {
                            let e: f64 = rng.sample(StandardNormal);
                            a * f1[t] + b * f2[t] + 0.3 * e
                        })
                        .collect();
                    Series::new(format!("v{j}"), 2000, v).unwrap()
                })
                .collect();
            let frame = Frame::new(cols).unwrap();
            let recipe = IndexRecipe {
                name: "I".into(),
                indicators: (0..p).map(|j| format!("v{j}")).collect(),
                anchor: "v0".into(),
            };
            let (model, idx) = build_index(&frame, &recipe).unwrap();
            if model.explained_variance_ratio[0] > 0.8 {
                checked += 1;
                let r = crate::stats::pearson(idx.values(), &f1);
                assert!(r.abs() > 0.99, "replication {rep}: corr {r}");
            }
        }
        assert!(checked >= reps as usize / 2);
    }
}
