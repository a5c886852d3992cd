//! Augmented Dickey-Fuller and Phillips-Perron unit-root tests.
//!
//! Both are left-tailed tests of a unit root against stationarity around the
//! chosen deterministic terms. Decisions are reported at 1%, 5% and 10%
//! against finite-sample Dickey-Fuller critical values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{auto_bandwidth, long_run_variance, ols, DesignMatrix, InfoCriterion, OlsFit};
use crate::timeseries::{diff, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeterministicSpec {
    #[default]
    Intercept,
    TrendAndIntercept,
}

impl DeterministicSpec {
    pub fn label(self) -> &'static str {
        match self {
            DeterministicSpec::Intercept => "Intercept",
            DeterministicSpec::TrendAndIntercept => "Trend and Intercept",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagCriterion {
    #[default]
    Aic,
    Sbc,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitRootTest {
    #[serde(rename = "ADF")]
    Adf,
    #[serde(rename = "PP")]
    Pp,
}

/// Significance levels of the decision columns, tightest first.
pub const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootResult {
    pub test: UnitRootTest,
    pub spec: DeterministicSpec,
    pub statistic: f64,
    /// Augmentation lags (ADF) or Bartlett bandwidth (PP).
    pub lags_or_bandwidth: usize,
    /// Observations in the test regression.
    pub nobs: usize,
    /// At 1%, 5%, 10%.
    pub critical_values: [f64; 3],
    /// `statistic < critical_values[i]`.
    pub reject: [bool; 3],
}

impl UnitRootResult {
    fn new(
        test: UnitRootTest,
        spec: DeterministicSpec,
        statistic: f64,
        lags_or_bandwidth: usize,
        nobs: usize,
    ) -> Result<Self> {
        let critical_values = df_critical_values(spec, nobs)?;
        Ok(UnitRootResult {
            test,
            spec,
            statistic,
            lags_or_bandwidth,
            nobs,
            critical_values,
            reject: critical_values.map(|cv| statistic < cv),
        })
    }

    pub fn rejects_at_5(&self) -> bool {
        self.reject[1]
    }

    /// Tightest rejecting level, if any.
    pub fn strongest_rejection(&self) -> Option<f64> {
        LEVELS.iter().zip(self.reject).find(|(_, r)| *r).map(|(l, _)| *l)
    }
}

/// Schwert rule `floor(12 (T/100)^(1/4))`.
pub fn schwert_max_lag(len: usize) -> usize {
    (12.0 * (len as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Dickey-Fuller regression of `dy_t` on deterministics, `y_{t-1}` and `p`
/// lagged differences, over differences `start..` (`start >= p`).
fn df_regression(y: &[f64], spec: DeterministicSpec, p: usize, start: usize) -> Result<OlsFit> {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let rows = start..dy.len();
    let n = rows.len();
    let mut cols: Vec<(String, Vec<f64>)> = Vec::with_capacity(p + 2);
    if spec == DeterministicSpec::TrendAndIntercept {
        cols.push(("@TREND".into(), rows.clone().map(|i| (i + 1) as f64).collect()));
    }
    cols.push(("y(-1)".into(), rows.clone().map(|i| y[i]).collect()));
    for j in 1..=p {
        cols.push((format!("dy(-{j})"), rows.clone().map(|i| dy[i - j]).collect()));
    }
    let x = DesignMatrix::with_intercept(n, cols)?;
    ols(&dy[start..], &x).map_err(|e| match e {
        Error::InsufficientObservations { nobs, nparams } => Error::SampleTooShort {
            needed: nparams + 1,
            available: nobs,
        },
        other => other,
    })
}

fn level_tstat(fit: &OlsFit) -> f64 {
    fit.tstats[fit.index_of("y(-1)").expect("level regressor present")]
}

/// Lag order chosen by `criterion` on the sample common to all orders.
pub fn select_adf_lag(y: &[f64], spec: DeterministicSpec, max_lag: usize, criterion: InfoCriterion) -> Result<usize> {
    let mut best = (f64::INFINITY, 0);
    for p in 0..=max_lag {
        let ic = df_regression(y, spec, p, max_lag)?.criterion(criterion);
        if ic < best.0 {
            best = (ic, p);
        }
    }
    Ok(best.1)
}

pub fn adf(s: &Series, spec: DeterministicSpec, max_lag: usize, criterion: LagCriterion) -> Result<UnitRootResult> {
    let y = s.values();
    let needed = max_lag + 4 + usize::from(spec == DeterministicSpec::TrendAndIntercept);
    if y.len() < needed {
        return Err(Error::SampleTooShort {
            needed,
            available: y.len(),
        });
    }
    let p = match criterion {
        LagCriterion::Aic => select_adf_lag(y, spec, max_lag, InfoCriterion::Aic)?,
        LagCriterion::Sbc => select_adf_lag(y, spec, max_lag, InfoCriterion::Sbc)?,
        LagCriterion::Fixed(p) => p,
    };
    let fit = df_regression(y, spec, p, p)?;
    UnitRootResult::new(UnitRootTest::Adf, spec, level_tstat(&fit), p, fit.nobs)
}

/// Phillips-Perron `Z_t`: the lag-free DF t-ratio corrected with a
/// Bartlett-kernel long-run variance of the regression residuals.
pub fn pp(s: &Series, spec: DeterministicSpec, bandwidth: Bandwidth) -> Result<UnitRootResult> {
    let y = s.values();
    if y.len() < 10 {
        return Err(Error::SampleTooShort {
            needed: 10,
            available: y.len(),
        });
    }
    let fit = df_regression(y, spec, 0, 0)?;
    let t = fit.nobs;
    let m = match bandwidth {
        Bandwidth::Auto => auto_bandwidth(t),
        Bandwidth::Fixed(m) => m,
    };
    let lambda2 = long_run_variance(&fit.residuals, m)?;
    let gamma0 = fit.ssr / t as f64;
    let j = fit.index_of("y(-1)").expect("level regressor present");
    let (t_ratio, se) = (fit.tstats[j], fit.stderr[j]);
    let s_hat = fit.sigma2.sqrt();
    let lambda = lambda2.sqrt();
    let z = (gamma0 / lambda2).sqrt() * t_ratio - (lambda2 - gamma0) / (2.0 * lambda) * (t as f64 * se / s_hat);
    UnitRootResult::new(UnitRootTest::Pp, spec, z, m, t)
}

/// Sample sizes of the critical-value table rows.
pub const DF_TABLE_SIZES: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, f64::INFINITY];

/// Dickey-Fuller `tau_mu` quantiles at 1%, 5%, 10% by sample size.
pub const DF_TAU_MU: [[f64; 3]; 6] = [
    [-3.75, -3.00, -2.63],
    [-3.58, -2.93, -2.60],
    [-3.51, -2.89, -2.58],
    [-3.46, -2.88, -2.57],
    [-3.44, -2.87, -2.57],
    [-3.43, -2.86, -2.57],
];

/// Dickey-Fuller `tau_tau` quantiles at 1%, 5%, 10% by sample size.
pub const DF_TAU_TAU: [[f64; 3]; 6] = [
    [-4.38, -3.60, -3.24],
    [-4.15, -3.50, -3.18],
    [-4.04, -3.45, -3.15],
    [-3.99, -3.43, -3.13],
    [-3.98, -3.42, -3.13],
    [-3.96, -3.41, -3.12],
];

/// Quantiles increase across a row and, per level, shrink in magnitude
/// towards the asymptote as `T` grows.
const fn df_table_is_consistent(t: &[[f64; 3]; 6]) -> bool {
    let mut i = 0;
    while i < t.len() {
        if !(t[i][0] < t[i][1] && t[i][1] < t[i][2]) {
            return false;
        }
        if i > 0 {
            let mut j = 0;
            while j < 3 {
                if t[i][j] < t[i - 1][j] {
                    return false;
                }
                j += 1;
            }
        }
        i += 1;
    }
    true
}

const _: () = assert!(df_table_is_consistent(&DF_TAU_MU));
const _: () = assert!(df_table_is_consistent(&DF_TAU_TAU));

/// Critical values at 1%, 5%, 10% for a test regression with `nobs`
/// observations, linear in `1/T` between table rows and extrapolated from
/// the first two rows below `T = 25`.
pub fn df_critical_values(spec: DeterministicSpec, nobs: usize) -> Result<[f64; 3]> {
    if nobs < 10 {
        return Err(Error::SampleTooShort {
            needed: 10,
            available: nobs,
        });
    }
    let table = match spec {
        DeterministicSpec::Intercept => &DF_TAU_MU,
        DeterministicSpec::TrendAndIntercept => &DF_TAU_TAU,
    };
    let inv = 1.0 / nobs as f64;
    let inv_sizes = DF_TABLE_SIZES.map(|t| 1.0 / t);
    // Rows are ordered by decreasing 1/T; find the bracketing pair.
    let i = (1..inv_sizes.len())
        .find(|&i| inv >= inv_sizes[i])
        .unwrap_or(inv_sizes.len() - 1);
    let (lo, hi) = (i - 1, i);
    let w = (inv - inv_sizes[hi]) / (inv_sizes[lo] - inv_sizes[hi]);
    Ok(std::array::from_fn(|j| {
        table[hi][j] + w * (table[lo][j] - table[hi][j])
    }))
}

/// Simulates the lag-free DF statistic under a driftless random walk and
/// returns its 1%, 5%, 10% quantiles for each regression size in `sizes`.
pub fn simulate_df_quantiles(
    spec: DeterministicSpec,
    sizes: &[usize],
    replications: usize,
    seed: u64,
) -> Result<Vec<(usize, [f64; 3])>> {
    sizes
        .iter()
        .enumerate()
        .map(|(idx, &t)| {
            let stats = crate::sim::monte_carlo(seed.wrapping_add(idx as u64), replications, |rng| {
                let y = crate::sim::random_walk(rng, t + 1);
                df_regression(&y, spec, 0, 0).map(|f| level_tstat(&f))
            })
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
            let mut sorted = stats;
            sorted.sort_by(f64::total_cmp);
            let q = LEVELS.map(|l| crate::stats::quantile_sorted(&sorted, l));
            Ok((t, q))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntegrationOrder {
    I0,
    I1,
    #[serde(rename = "I2+")]
    I2Plus,
}

impl std::fmt::Display for IntegrationOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IntegrationOrder::I0 => "I(0)",
            IntegrationOrder::I1 => "I(1)",
            IntegrationOrder::I2Plus => "I(2+)",
        })
    }
}

/// How ADF and PP decisions combine into one stationarity verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotingRule {
    #[default]
    AdfOnly,
    Both,
    Either,
}

impl VotingRule {
    fn combine(self, adf: bool, pp: bool) -> bool {
        match self {
            VotingRule::AdfOnly => adf,
            VotingRule::Both => adf && pp,
            VotingRule::Either => adf || pp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct UnitRootOptions {
    /// `None` applies the Schwert rule to each tested series.
    pub max_lag: Option<usize>,
    pub criterion: LagCriterion,
    pub bandwidth: Bandwidth,
    pub voting: VotingRule,
}

/// ADF and PP on the level and first difference of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootBattery {
    pub variable: String,
    pub spec: DeterministicSpec,
    pub adf_level: UnitRootResult,
    pub pp_level: UnitRootResult,
    pub adf_difference: UnitRootResult,
    pub pp_difference: UnitRootResult,
    pub order: IntegrationOrder,
}

fn adf_with(s: &Series, spec: DeterministicSpec, o: &UnitRootOptions) -> Result<UnitRootResult> {
    let max_lag = o.max_lag.unwrap_or_else(|| schwert_max_lag(s.len()));
    adf(s, spec, max_lag, o.criterion)
}

pub fn unit_root_battery(s: &Series, spec: DeterministicSpec, options: &UnitRootOptions) -> Result<UnitRootBattery> {
    let ds = diff(s, 1)?;
    let adf_level = adf_with(s, spec, options)?;
    let pp_level = pp(s, spec, options.bandwidth)?;
    let adf_difference = adf_with(&ds, spec, options)?;
    let pp_difference = pp(&ds, spec, options.bandwidth)?;
    let order = if options
        .voting
        .combine(adf_level.rejects_at_5(), pp_level.rejects_at_5())
    {
        IntegrationOrder::I0
    } else if options
        .voting
        .combine(adf_difference.rejects_at_5(), pp_difference.rejects_at_5())
    {
        IntegrationOrder::I1
    } else {
        IntegrationOrder::I2Plus
    };
    Ok(UnitRootBattery {
        variable: s.name().to_owned(),
        spec,
        adf_level,
        pp_level,
        adf_difference,
        pp_difference,
        order,
    })
}

/// I0 if the level rejects a unit root at 5%, else I1 if the first
/// difference does, else I2Plus.
pub fn classify_integration(
    s: &Series,
    spec: DeterministicSpec,
    options: &UnitRootOptions,
) -> Result<IntegrationOrder> {
    Ok(unit_root_battery(s, spec, options)?.order)
}
