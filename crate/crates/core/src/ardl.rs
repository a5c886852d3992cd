//! ARDL lag search and estimation, the bounds F-test for a levels
//! relationship, long-run coefficients and the error-correction form.
//!
//! Levels model, over the effective sample `t = m..T` with
//! `m = max(p, q_1, .., q_k)`:
//!
//! ```text
//! y_t = a + sum_{i=1..p} phi_i y_{t-i} + sum_j sum_{l=0..q_j} b_{jl} x_{j,t-l} + e_t
//! ```

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::t_two_sided;
use crate::error::{Error, Result};
use crate::regression::{ols, wald_f, DesignMatrix, InfoCriterion, OlsFit};
use crate::timeseries::Frame;

/// Deterministic case of the bounds test. Only II and III carry tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PssCase {
    /// No intercept, no trend.
    #[serde(rename = "I")]
    I,
    /// Intercept restricted to the levels relationship.
    #[serde(rename = "II")]
    II,
    /// Unrestricted intercept.
    #[default]
    #[serde(rename = "III")]
    III,
    /// Unrestricted intercept, restricted trend.
    #[serde(rename = "IV")]
    IV,
    /// Unrestricted intercept and trend.
    #[serde(rename = "V")]
    V,
}

impl PssCase {
    pub fn label(self) -> &'static str {
        match self {
            PssCase::I => "Case I",
            PssCase::II => "Case II",
            PssCase::III => "Case III",
            PssCase::IV => "Case IV",
            PssCase::V => "Case V",
        }
    }

    fn ensure_supported(self) -> Result<()> {
        match self {
            PssCase::II | PssCase::III => Ok(()),
            other => Err(Error::UnsupportedCase(other.label().to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArdlSpec {
    pub dependent: String,
    pub regressors: Vec<String>,
    pub p: usize,
    pub q: Vec<usize>,
    #[serde(default)]
    pub case: PssCase,
}

impl ArdlSpec {
    pub fn new(dependent: impl Into<String>, regressors: Vec<String>, p: usize, q: Vec<usize>) -> Result<Self> {
        let spec = ArdlSpec {
            dependent: dependent.into(),
            regressors,
            p,
            q,
            case: PssCase::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_case(mut self, case: PssCase) -> Self {
        self.case = case;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.q.len() != self.regressors.len() {
            return Err(Error::InvalidLags);
        }
        for (i, r) in self.regressors.iter().enumerate() {
            if r == &self.dependent || self.regressors[..i].contains(r) {
                return Err(Error::InvalidSpec(format!("regressor {r:?} repeated")));
            }
        }
        Ok(())
    }

    /// `max(p, q_1, .., q_k)`: observations lost to lagging.
    pub fn max_lag(&self) -> usize {
        self.q.iter().copied().fold(self.p, usize::max)
    }

    pub fn k(&self) -> usize {
        self.regressors.len()
    }

    /// `(p, q_1, .., q_k)` as printed in lag-order tables.
    pub fn order_label(&self) -> String {
        let parts: Vec<String> = std::iter::once(self.p)
            .chain(self.q.iter().copied())
            .map(|v| v.to_string())
            .collect();
        format!("({})", parts.join(", "))
    }
}

fn lag_name(name: &str, l: usize) -> String {
    if l == 0 {
        name.to_owned()
    } else {
        format!("{name}(-{l})")
    }
}

fn diff_name(name: &str, l: usize) -> String {
    if l == 0 {
        format!("D({name})")
    } else {
        format!("D({name}(-{l}))")
    }
}

/// Column values of the spec's variables, dependent first.
fn variables<'a>(data: &'a Frame, spec: &ArdlSpec) -> Result<Vec<&'a [f64]>> {
    std::iter::once(&spec.dependent)
        .chain(&spec.regressors)
        .map(|n| data.column(n).map(|s| s.values()))
        .collect()
}

/// Levels design over rows `start..T`.
fn levels_design(vars: &[&[f64]], spec: &ArdlSpec, start: usize) -> Result<(Vec<f64>, DesignMatrix)> {
    let y = vars[0];
    let rows = start..y.len();
    let n = rows.len();
    let mut cols = Vec::with_capacity(spec.p + spec.q.iter().sum::<usize>() + spec.k());
    for i in 1..=spec.p {
        cols.push((lag_name(&spec.dependent, i), rows.clone().map(|t| y[t - i]).collect()));
    }
    for (j, name) in spec.regressors.iter().enumerate() {
        let x = vars[j + 1];
        for l in 0..=spec.q[j] {
            cols.push((lag_name(name, l), rows.clone().map(|t| x[t - l]).collect()));
        }
    }
    let design = DesignMatrix::with_intercept(n, cols)?;
    Ok((y[start..].to_vec(), design))
}

fn sample_error(e: Error) -> Error {
    match e {
        Error::InsufficientObservations { nobs, nparams } => Error::SampleTooShort {
            needed: nparams + 1,
            available: nobs,
        },
        other => other,
    }
}

#[derive(Debug, Clone)]
pub struct ArdlFit {
    pub spec: ArdlSpec,
    pub fit: OlsFit,
    pub design: DesignMatrix,
    /// First and last year of the effective sample.
    pub sample: (i32, i32),
    /// Sum of the dependent-lag coefficients is below one.
    pub stable: bool,
}

impl ArdlFit {
    pub fn phi_indices(&self) -> Vec<usize> {
        (1..=self.spec.p).collect()
    }

    /// Coefficient positions of each regressor's lags `0..=q_j`.
    pub fn beta_indices(&self) -> Vec<Vec<usize>> {
        let mut next = 1 + self.spec.p;
        self.spec
            .q
            .iter()
            .map(|&q| {
                let idx = (next..next + q + 1).collect();
                next += q + 1;
                idx
            })
            .collect()
    }

    pub fn phi_sum(&self) -> f64 {
        self.phi_indices().iter().map(|&i| self.fit.coefficients[i]).sum()
    }
}

pub fn fit_ardl(spec: &ArdlSpec, data: &Frame) -> Result<ArdlFit> {
    spec.validate()?;
    spec.case.ensure_supported()?;
    let vars = variables(data, spec)?;
    let m = spec.max_lag();
    if vars[0].len() <= m {
        return Err(Error::SampleTooShort {
            needed: m + 1,
            available: vars[0].len(),
        });
    }
    let (y, design) = levels_design(&vars, spec, m)?;
    let fit = ols(&y, &design).map_err(sample_error)?;
    let first = data.start_year() + m as i32;
    let phi_sum: f64 = fit.coefficients[1..=spec.p].iter().sum();
    Ok(ArdlFit {
        spec: spec.clone(),
        fit,
        design,
        sample: (first, data.year_range().1),
        stable: phi_sum < 1.0,
    })
}

/// Candidate count above which lag search switches to coordinate descent.
pub const SEARCH_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LagSearch {
    pub p_max: usize,
    pub q_max: usize,
    pub criterion: InfoCriterion,
    pub budget: usize,
}

impl Default for LagSearch {
    fn default() -> Self {
        LagSearch {
            p_max: 2,
            q_max: 2,
            criterion: InfoCriterion::Aic,
            budget: SEARCH_BUDGET,
        }
    }
}

/// One evaluated candidate: criterion value and lag orders `(p, q..)`.
#[derive(Debug, Clone, PartialEq)]
struct Scored {
    ic: f64,
    orders: Vec<usize>,
}

impl Scored {
    fn total(&self) -> usize {
        self.orders.iter().sum()
    }

    /// Criterion, then total lag count, then lexicographic order.
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.ic
            .total_cmp(&other.ic)
            .then(self.total().cmp(&other.total()))
            .then_with(|| self.orders.cmp(&other.orders))
    }
}

/// Criterion-minimising lag orders over `[1..p_max] x [0..q_max]^k`, each
/// candidate estimated on the sample common to the whole grid.
pub fn select_lags(data: &Frame, dependent: &str, regressors: &[String], search: &LagSearch) -> Result<ArdlSpec> {
    if search.p_max == 0 {
        return Err(Error::InvalidLags);
    }
    let base = ArdlSpec::new(dependent, regressors.to_vec(), 1, vec![0; regressors.len()])?;
    let vars = variables(data, &base)?;
    let k = regressors.len();
    let start = search.p_max.max(search.q_max);
    let available = vars[0].len().saturating_sub(start);
    let largest = 1 + search.p_max + k * (search.q_max + 1);
    if available <= largest {
        return Err(Error::SampleTooShort {
            needed: start + largest + 1,
            available: vars[0].len(),
        });
    }

    let evaluate = |orders: &[usize]| -> Result<Scored> {
        let spec = ArdlSpec {
            p: orders[0],
            q: orders[1..].to_vec(),
            ..base.clone()
        };
        let (y, x) = levels_design(&vars, &spec, start)?;
        let fit = ols(&y, &x).map_err(sample_error)?;
        Ok(Scored {
            ic: fit.criterion(search.criterion),
            orders: orders.to_vec(),
        })
    };

    let q_levels = search.q_max + 1;
    let count = (0..k).try_fold(search.p_max, |acc, _| acc.checked_mul(q_levels));
    let best = match count {
        Some(n) if n <= search.budget => {
            let decode = |mut idx: usize| {
                let mut orders = vec![0; k + 1];
                for slot in orders[1..].iter_mut().rev() {
                    *slot = idx % q_levels;
                    idx /= q_levels;
                }
                orders[0] = idx + 1;
                orders
            };
            (0..n)
                .into_par_iter()
                .map(|i| evaluate(&decode(i)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min_by(Scored::cmp_key)
                .expect("non-empty grid")
        }
        _ => coordinate_descent(k, search, &evaluate)?,
    };
    Ok(ArdlSpec {
        p: best.orders[0],
        q: best.orders[1..].to_vec(),
        ..base
    })
}

/// Cycles through the coordinates, optimising one lag order at a time, until
/// a full pass changes nothing.
fn coordinate_descent(
    k: usize,
    search: &LagSearch,
    evaluate: &(dyn Fn(&[usize]) -> Result<Scored> + Sync),
) -> Result<Scored> {
    let mut current = evaluate(&std::iter::once(1).chain(std::iter::repeat_n(0, k)).collect::<Vec<_>>())?;
    loop {
        let mut changed = false;
        for coord in 0..=k {
            let range = if coord == 0 { 1..=search.p_max } else { 0..=search.q_max };
            let candidates = range
                .map(|v| {
                    let mut o = current.orders.clone();
                    o[coord] = v;
                    o
                })
                .collect::<Vec<_>>();
            let best = candidates
                .par_iter()
                .map(|o| evaluate(o))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min_by(Scored::cmp_key)
                .expect("non-empty range");
            if best.cmp_key(&current) == Ordering::Less {
                current = best;
                changed = true;
            }
        }
        if !changed {
            return Ok(current);
        }
    }
}

/// Bounds-table significance levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Significance {
    #[serde(rename = "10%")]
    P10,
    #[serde(rename = "5%")]
    P5,
    #[serde(rename = "2.5%")]
    P2_5,
    #[serde(rename = "1%")]
    P1,
}

impl Significance {
    pub const ALL: [Significance; 4] = [
        Significance::P10,
        Significance::P5,
        Significance::P2_5,
        Significance::P1,
    ];

    pub fn value(self) -> f64 {
        match self {
            Significance::P10 => 0.10,
            Significance::P5 => 0.05,
            Significance::P2_5 => 0.025,
            Significance::P1 => 0.01,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Significance::P10 => "10%",
            Significance::P5 => "5%",
            Significance::P2_5 => "2.5%",
            Significance::P1 => "1%",
        }
    }

    fn column(self) -> usize {
        self as usize
    }
}

/// Asymptotic F-bounds `(I(0), I(1))` at 10%, 5%, 2.5%, 1% for `k = 0..=10`.
const PSS_CASE_III: [[(f64, f64); 4]; 11] = [
    [(6.58, 6.58), (8.21, 8.21), (9.80, 9.80), (11.79, 11.79)],
    [(4.04, 4.78), (4.94, 5.73), (5.77, 6.68), (6.84, 7.84)],
    [(3.17, 4.14), (3.79, 4.85), (4.41, 5.52), (5.15, 6.36)],
    [(2.72, 3.77), (3.23, 4.35), (3.69, 4.89), (4.29, 5.61)],
    [(2.45, 3.52), (2.86, 4.01), (3.25, 4.49), (3.74, 5.06)],
    [(2.26, 3.35), (2.62, 3.79), (2.96, 4.18), (3.41, 4.68)],
    [(2.12, 3.23), (2.45, 3.61), (2.75, 3.99), (3.15, 4.43)],
    [(2.03, 3.13), (2.32, 3.50), (2.60, 3.84), (2.96, 4.26)],
    [(1.95, 3.06), (2.22, 3.39), (2.48, 3.70), (2.79, 4.10)],
    [(1.88, 2.99), (2.14, 3.30), (2.37, 3.60), (2.65, 3.97)],
    [(1.83, 2.94), (2.06, 3.24), (2.28, 3.50), (2.54, 3.86)],
];

const PSS_CASE_II: [[(f64, f64); 4]; 11] = [
    [(3.80, 3.80), (4.60, 4.60), (5.39, 5.39), (6.44, 6.44)],
    [(3.02, 3.51), (3.62, 4.16), (4.18, 4.79), (4.94, 5.58)],
    [(2.63, 3.35), (3.10, 3.87), (3.55, 4.38), (4.13, 5.00)],
    [(2.37, 3.20), (2.79, 3.67), (3.15, 4.08), (3.65, 4.66)],
    [(2.20, 3.09), (2.56, 3.49), (2.88, 3.87), (3.29, 4.37)],
    [(2.08, 3.00), (2.39, 3.38), (2.70, 3.73), (3.06, 4.15)],
    [(1.99, 2.94), (2.27, 3.28), (2.55, 3.61), (2.88, 3.99)],
    [(1.92, 2.89), (2.17, 3.21), (2.43, 3.51), (2.73, 3.90)],
    [(1.85, 2.85), (2.11, 3.15), (2.33, 3.42), (2.62, 3.77)],
    [(1.80, 2.80), (2.04, 3.08), (2.24, 3.35), (2.50, 3.68)],
    [(1.76, 2.77), (1.98, 3.04), (2.18, 3.28), (2.41, 3.61)],
];

/// `I(0) <= I(1)` in every cell and both bounds grow as the level tightens.
const fn pss_table_is_consistent(t: &[[(f64, f64); 4]; 11]) -> bool {
    let mut k = 0;
    while k < t.len() {
        let mut j = 0;
        while j < 4 {
            if t[k][j].0 > t[k][j].1 {
                return false;
            }
            if j > 0 && (t[k][j].0 <= t[k][j - 1].0 || t[k][j].1 <= t[k][j - 1].1) {
                return false;
            }
            j += 1;
        }
        k += 1;
    }
    true
}

const _: () = assert!(pss_table_is_consistent(&PSS_CASE_III));
const _: () = assert!(pss_table_is_consistent(&PSS_CASE_II));

/// Largest regressor count with tabulated bounds.
pub const PSS_MAX_K: usize = 10;

pub fn pesaran_critical_values(k: usize, level: Significance, case: PssCase) -> Result<(f64, f64)> {
    let table = match case {
        PssCase::II => &PSS_CASE_II,
        PssCase::III => &PSS_CASE_III,
        other => return Err(Error::UnsupportedCase(other.label().to_owned())),
    };
    table.get(k).map(|row| row[level.column()]).ok_or(Error::KOutOfRange(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub level: Significance,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", content = "level")]
pub enum BoundsDecision {
    Cointegrated(Significance),
    Inconclusive,
    NotCointegrated,
}

impl std::fmt::Display for BoundsDecision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundsDecision::Cointegrated(l) => write!(f, "Cointegrated ({})", l.label()),
            BoundsDecision::Inconclusive => f.write_str("Inconclusive"),
            BoundsDecision::NotCointegrated => f.write_str("Not cointegrated"),
        }
    }
}

/// Levels used for the decision, tightest first.
const DECISION_LEVELS: [Significance; 3] = [Significance::P1, Significance::P5, Significance::P10];

/// Cointegrated at the tightest of 1%, 5%, 10% whose upper bound `f`
/// exceeds; NotCointegrated below the 10% lower bound; else Inconclusive.
pub fn decide(f: f64, bands: &[Band]) -> BoundsDecision {
    let band = |l| bands.iter().find(|b| b.level == l);
    for level in DECISION_LEVELS {
        if band(level).is_some_and(|b| f > b.upper) {
            return BoundsDecision::Cointegrated(level);
        }
    }
    match band(Significance::P10) {
        Some(b) if f < b.lower => BoundsDecision::NotCointegrated,
        _ => BoundsDecision::Inconclusive,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    pub fstat: f64,
    pub k: usize,
    pub case: PssCase,
    pub restrictions: usize,
    pub nobs: usize,
    pub bands: Vec<Band>,
    pub decision: BoundsDecision,
}

impl BoundsResult {
    pub fn band(&self, level: Significance) -> Option<&Band> {
        self.bands.iter().find(|b| b.level == level)
    }
}

/// Unrestricted error-correction regression over the ARDL effective sample:
/// `dy_t` on the intercept, `y_{t-1}`, each `x_{j,t-1}`, `dy_{t-1..t-p+1}`
/// and `dx_{j,t..t-max(q_j-1,0)}`.
fn unrestricted_ecm(
    vars: &[&[f64]],
    spec: &ArdlSpec,
) -> Result<(Vec<f64>, Vec<(String, Vec<f64>)>, Vec<(String, Vec<f64>)>)> {
    let start = spec.max_lag();
    let y = vars[0];
    let rows = start..y.len();
    let dy: Vec<f64> = rows.clone().map(|t| y[t] - y[t - 1]).collect();
    let mut levels = vec![(lag_name(&spec.dependent, 1), rows.clone().map(|t| y[t - 1]).collect())];
    for (j, name) in spec.regressors.iter().enumerate() {
        let x = vars[j + 1];
        levels.push((lag_name(name, 1), rows.clone().map(|t| x[t - 1]).collect()));
    }
    Ok((dy, levels, short_run_columns(vars, spec, start)))
}

/// Differenced short-run terms shared by the bounds regression and the ECM.
fn short_run_columns(vars: &[&[f64]], spec: &ArdlSpec, start: usize) -> Vec<(String, Vec<f64>)> {
    let n = vars[0].len();
    let d = |v: &[f64], t: usize| v[t] - v[t - 1];
    let mut cols = Vec::new();
    for i in 1..spec.p {
        cols.push((
            diff_name(&spec.dependent, i),
            (start..n).map(|t| d(vars[0], t - i)).collect(),
        ));
    }
    for (j, name) in spec.regressors.iter().enumerate() {
        for l in 0..spec.q[j].max(1) {
            cols.push((diff_name(name, l), (start..n).map(|t| d(vars[j + 1], t - l)).collect()));
        }
    }
    cols
}

pub fn bounds_test(fit: &ArdlFit, data: &Frame) -> Result<BoundsResult> {
    let spec = &fit.spec;
    spec.case.ensure_supported()?;
    let k = spec.k();
    if k > PSS_MAX_K {
        return Err(Error::KOutOfRange(k));
    }
    let vars = variables(data, spec)?;
    let start = spec.max_lag();
    if start == 0 || vars[0].len() <= start {
        return Err(Error::SampleTooShort {
            needed: start + 2,
            available: vars[0].len(),
        });
    }
    let (dy, levels, short_run) = unrestricted_ecm(&vars, spec)?;
    let n = dy.len();
    let unrestricted_cols: Vec<_> = levels.iter().cloned().chain(short_run.iter().cloned()).collect();
    let unrestricted = ols(&dy, &DesignMatrix::with_intercept(n, unrestricted_cols)?).map_err(sample_error)?;
    let (restricted, r) = match spec.case {
        PssCase::III => (
            ols(&dy, &DesignMatrix::with_intercept(n, short_run)?).map_err(sample_error)?,
            k + 1,
        ),
        _ => (
            ols(&dy, &DesignMatrix::from_columns(n, short_run)?).map_err(sample_error)?,
            k + 2,
        ),
    };
    let fstat = wald_f(&restricted, &unrestricted, r)?;
    let bands = Significance::ALL
        .iter()
        .map(|&level| {
            let (lower, upper) = pesaran_critical_values(k, level, spec.case)?;
            Ok(Band { level, lower, upper })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundsResult {
        fstat,
        k,
        case: spec.case,
        restrictions: r,
        nobs: n,
        decision: decide(fstat, &bands),
        bands,
    })
}

/// A named estimate with its standard error and two-sided p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub tstat: f64,
    pub pvalue: f64,
}

impl Estimate {
    fn new(name: impl Into<String>, estimate: f64, variance: f64, df: f64) -> Self {
        let stderr = variance.max(0.0).sqrt();
        let tstat = estimate / stderr;
        Estimate {
            name: name.into(),
            estimate,
            stderr,
            tstat,
            pvalue: t_two_sided(tstat, df),
        }
    }
}

/// Below this `|1 - sum phi|` the long-run multipliers are undefined.
pub const UNIT_ROOT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRun {
    /// One per regressor, in spec order.
    pub coefficients: Vec<Estimate>,
    pub constant: Estimate,
    /// `1 - sum phi`.
    pub denominator: f64,
    /// Gradient rows of `(theta.., c)` with respect to the levels coefficients.
    #[serde(skip)]
    pub jacobian: Vec<Vec<f64>>,
}

/// Long-run multipliers `theta_j = sum_l b_jl / D` and `c = a / D` with
/// `D = 1 - sum_i phi_i`, standard errors by the delta method.
pub fn long_run_from_coefficients(
    names: &[String],
    coefficients: &[f64],
    covariance: &DMatrix<f64>,
    intercept: usize,
    phi: &[usize],
    beta: &[Vec<usize>],
    df: f64,
) -> Result<LongRun> {
    let d = 1.0 - phi.iter().map(|&i| coefficients[i]).sum::<f64>();
    if d.abs() <= UNIT_ROOT_TOLERANCE {
        return Err(Error::UnitRootInDynamics(d));
    }
    let dim = coefficients.len();
    let delta = |numerator_idx: &[usize]| -> (f64, Vec<f64>) {
        let value = numerator_idx.iter().map(|&i| coefficients[i]).sum::<f64>() / d;
        let mut g = vec![0.0; dim];
        for &i in numerator_idx {
            g[i] = 1.0 / d;
        }
        for &i in phi {
            g[i] = value / d;
        }
        (value, g)
    };
    let variance = |g: &[f64]| {
        let g = DVector::from_column_slice(g);
        (g.transpose() * covariance * &g)[(0, 0)]
    };
    let mut jacobian = Vec::with_capacity(beta.len() + 1);
    let coefficients_out = names
        .iter()
        .zip(beta)
        .map(|(name, idx)| {
            let (value, g) = delta(idx);
            let e = Estimate::new(name.clone(), value, variance(&g), df);
            jacobian.push(g);
            e
        })
        .collect();
    let (c, g) = delta(&[intercept]);
    let constant = Estimate::new("C", c, variance(&g), df);
    jacobian.push(g);
    Ok(LongRun {
        coefficients: coefficients_out,
        constant,
        denominator: d,
        jacobian,
    })
}

pub fn long_run(fit: &ArdlFit) -> Result<LongRun> {
    long_run_from_coefficients(
        &fit.spec.regressors,
        &fit.fit.coefficients,
        &fit.fit.covariance,
        0,
        &fit.phi_indices(),
        &fit.beta_indices(),
        fit.fit.df_resid() as f64,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcmResult {
    /// Coefficients on the differenced terms.
    pub short_run: Vec<Estimate>,
    /// Coefficient on `ECT(-1)`; equals `sum phi - 1`.
    pub ect: Estimate,
    pub long_run: Vec<Estimate>,
    pub constant: Estimate,
    /// The ECT coefficient lies in `(-2, 0)`.
    pub ect_in_range: bool,
    pub ssr: f64,
    pub nobs: usize,
    pub residuals: Vec<f64>,
    /// `ECT_{t-1}` over the effective sample.
    pub ect_series: Vec<f64>,
}

/// The error-correction form of a fitted ARDL:
///
/// ```text
/// dy_t = sum_{i<p} g_i dy_{t-i} + sum_j sum_{l<max(q_j,1)} d_jl dx_{j,t-l} + rho ECT_{t-1}
/// ECT_{t-1} = y_{t-1} - theta'x_{t-1} - c
/// ```
///
/// Every coefficient is a linear function of the levels coefficients, so
/// fitted values, residuals and standard errors carry over exactly:
/// `rho = sum phi - 1`, `g_i = -sum_{m>i} phi_m`, `d_j0 = b_j0` and
/// `d_jl = -sum_{m>l} b_jm`.
pub fn ecm(fit: &ArdlFit, data: &Frame) -> Result<EcmResult> {
    let spec = &fit.spec;
    spec.case.ensure_supported()?;
    let lr = long_run(fit)?;
    let b = &fit.fit.coefficients;
    let cov = &fit.fit.covariance;
    let dim = b.len();
    let df = fit.fit.df_resid() as f64;
    let phi = fit.phi_indices();
    let beta = fit.beta_indices();

    let linear = |g: &[f64]| -> (f64, f64) {
        let gv = DVector::from_column_slice(g);
        let value = g.iter().zip(b).map(|(a, c)| a * c).sum();
        (value, (gv.transpose() * cov * &gv)[(0, 0)])
    };

    let vars = variables(data, spec)?;
    let start = spec.max_lag();
    let short_cols = short_run_columns(&vars, spec, start);
    let mut short_run = Vec::with_capacity(short_cols.len());
    let mut gradients = Vec::with_capacity(short_cols.len());
    for i in 1..spec.p {
        let mut g = vec![0.0; dim];
        for &m in &phi[i..] {
            g[m] = -1.0;
        }
        gradients.push(g);
    }
    for idx in &beta {
        let q = idx.len() - 1;
        let mut g0 = vec![0.0; dim];
        g0[idx[0]] = 1.0;
        gradients.push(g0);
        for l in 1..q {
            let mut g = vec![0.0; dim];
            for &m in &idx[l + 1..] {
                g[m] = -1.0;
            }
            gradients.push(g);
        }
    }
    for ((name, _), g) in short_cols.iter().zip(&gradients) {
        let (value, var) = linear(g);
        short_run.push(Estimate::new(name.clone(), value, var, df));
    }

    let mut g_ect = vec![0.0; dim];
    for &i in &phi {
        g_ect[i] = 1.0;
    }
    let (sum_phi, var_ect) = linear(&g_ect);
    let rho = sum_phi - 1.0;
    let ect = Estimate::new("ECT(-1)", rho, var_ect, df);

    // Rebuild the fitted values in the error-correction basis.
    let y = vars[0];
    let n = y.len() - start;
    let theta: Vec<f64> = lr.coefficients.iter().map(|e| e.estimate).collect();
    let c = lr.constant.estimate;
    let ect_series: Vec<f64> = (start..y.len())
        .map(|t| {
            let xs: f64 = theta.iter().enumerate().map(|(j, th)| th * vars[j + 1][t - 1]).sum();
            y[t - 1] - xs - c
        })
        .collect();
    let residuals: Vec<f64> = (0..n)
        .map(|r| {
            let t = start + r;
            let fitted = rho * ect_series[r]
                + short_cols
                    .iter()
                    .zip(&short_run)
                    .map(|((_, col), e)| e.estimate * col[r])
                    .sum::<f64>();
            (y[t] - y[t - 1]) - fitted
        })
        .collect();
    let ssr = residuals.iter().map(|e| e * e).sum();

    Ok(EcmResult {
        short_run,
        ect_in_range: rho > -2.0 && rho < 0.0,
        ect,
        long_run: lr.coefficients,
        constant: lr.constant,
        ssr,
        nobs: n,
        residuals,
        ect_series,
    })
}
