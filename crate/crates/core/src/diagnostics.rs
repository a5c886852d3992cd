//! Post-estimation checks: serial correlation, heteroscedasticity,
//! normality, functional form and recursive-residual stability paths.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dist::{chi2_sf, f_sf};
use crate::error::{Error, Result};
use crate::regression::{ols, DesignMatrix, OlsFit, RANK_TOL};

/// A test statistic, its reference degrees of freedom and p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    /// Numerator and, for F tests, denominator degrees of freedom.
    pub df: (f64, Option<f64>),
    pub pvalue: f64,
}

impl TestResult {
    fn chi2(statistic: f64, df: usize) -> Self {
        let statistic = statistic.max(0.0);
        TestResult {
            statistic,
            df: (df as f64, None),
            pvalue: chi2_sf(statistic, df as f64),
        }
    }

    pub fn rejects(&self, level: f64) -> bool {
        self.pvalue < level
    }
}

/// `1 - SSR_aux / sum(e^2)`: share of `e` explained by an auxiliary fit.
fn explained_share(e: &[f64], aux: &OlsFit) -> f64 {
    let total: f64 = e.iter().map(|v| v * v).sum();
    if total == 0.0 {
        0.0
    } else {
        (1.0 - aux.ssr / total).clamp(0.0, 1.0)
    }
}

/// Breusch-Godfrey LM test: `T R^2` from residuals on `X` and `lags` lagged
/// residuals, pre-sample residuals set to zero; chi-square(`lags`).
pub fn breusch_godfrey(fit: &OlsFit, x: &DesignMatrix, lags: usize) -> Result<TestResult> {
    if lags == 0 {
        return Err(Error::InvalidLags);
    }
    let n = fit.nobs;
    let k = x.ncols();
    if n <= k + lags {
        return Err(Error::SampleTooShort {
            needed: k + lags + 1,
            available: n,
        });
    }
    let e = &fit.residuals;
    let extra = (1..=lags)
        .map(|l| {
            let col = (0..n).map(|t| if t >= l { e[t - l] } else { 0.0 }).collect();
            (format!("RESID(-{l})"), col)
        })
        .collect();
    let aux = ols(e, &x.augmented(extra)?)?;
    Ok(TestResult::chi2(n as f64 * explained_share(e, &aux), lags))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum HeteroTest {
    /// Squared residuals on the non-constant regressors.
    #[default]
    BreuschPaganGodfrey,
    /// Squared residuals on their own lags.
    Arch { lags: usize },
}

pub fn heteroscedasticity_test(fit: &OlsFit, x: &DesignMatrix, test: HeteroTest) -> Result<TestResult> {
    let e2: Vec<f64> = fit.residuals.iter().map(|e| e * e).collect();
    let n = e2.len();
    match test {
        HeteroTest::BreuschPaganGodfrey => {
            let constant = x.constant_columns();
            let cols: Vec<(String, Vec<f64>)> = (0..x.ncols())
                .filter(|j| !constant.contains(j))
                .map(|j| (x.names()[j].clone(), x.column(j)))
                .collect();
            if cols.is_empty() {
                return Err(Error::DegenerateDesign);
            }
            let df = cols.len();
            let aux = ols(&e2, &DesignMatrix::with_intercept(n, cols)?)?;
            Ok(TestResult::chi2(n as f64 * aux.r2, df))
        }
        HeteroTest::Arch { lags } => {
            if lags == 0 {
                return Err(Error::InvalidLags);
            }
            if n <= 2 * lags + 1 {
                return Err(Error::SampleTooShort {
                    needed: 2 * lags + 2,
                    available: n,
                });
            }
            let rows = lags..n;
            let cols = (1..=lags)
                .map(|l| (format!("RESID^2(-{l})"), rows.clone().map(|t| e2[t - l]).collect()))
                .collect();
            let aux = ols(&e2[lags..], &DesignMatrix::with_intercept(rows.len(), cols)?)?;
            Ok(TestResult::chi2(rows.len() as f64 * aux.r2, lags))
        }
    }
}

/// Population skewness and kurtosis.
pub fn moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    (m3 / m2.powf(1.5), m4 / (m2 * m2))
}

/// `JB = T/6 (S^2 + (K - 3)^2 / 4)`; chi-square(2).
pub fn jarque_bera(residuals: &[f64]) -> Result<TestResult> {
    if residuals.len() < 8 {
        return Err(Error::SampleTooShort {
            needed: 8,
            available: residuals.len(),
        });
    }
    let (s, k) = moments(residuals);
    let jb = residuals.len() as f64 / 6.0 * (s * s + (k - 3.0).powi(2) / 4.0);
    Ok(TestResult::chi2(jb, 2))
}

/// Ramsey RESET: F test on powers of the fitted values added to `X`.
/// Fitted values are divided by their standard deviation before raising to
/// a power; the column span is unchanged.
pub fn ramsey_reset(fit: &OlsFit, y: &[f64], x: &DesignMatrix, powers: &[u32]) -> Result<TestResult> {
    if powers.is_empty() {
        return Err(Error::EmptyPowers);
    }
    if powers.iter().any(|&p| p < 2) {
        return Err(Error::InvalidSpec("RESET powers must be at least 2".into()));
    }
    let fitted = fit.fitted();
    let sd = crate::stats::sample_sd(&fitted);
    if !(sd > 0.0) {
        return Err(Error::SingularDesign);
    }
    let extra = powers
        .iter()
        .map(|&p| {
            (
                format!("FITTED^{p}"),
                fitted.iter().map(|f| (f / sd).powi(p as i32)).collect(),
            )
        })
        .collect();
    let augmented = ols(y, &x.augmented(extra)?)?;
    let m = powers.len();
    let df2 = augmented.df_resid();
    let f = ((fit.ssr - augmented.ssr) / m as f64) / (augmented.ssr / df2 as f64);
    let f = f.max(0.0);
    Ok(TestResult {
        statistic: f,
        df: (m as f64, Some(df2 as f64)),
        pvalue: f_sf(f, m as f64, df2 as f64),
    })
}

/// Standardised one-step-ahead prediction errors for `t = k+1..T`, each from
/// a fresh fit on the first `t - 1` observations.
pub fn recursive_residuals(y: &[f64], x: &DesignMatrix) -> Result<Vec<f64>> {
    let n = x.nrows();
    let k = x.ncols();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if n <= k + 1 {
        return Err(Error::SampleTooShort {
            needed: k + 2,
            available: n,
        });
    }
    let xm = x.matrix();
    (k..n)
        .map(|r| {
            let head = xm.rows(0, r).clone_owned();
            let qr = head.clone().qr();
            let rmat = qr.r();
            for j in 0..k {
                let norm = head.column(j).norm();
                if norm == 0.0 || rmat[(j, j)].abs() <= RANK_TOL * norm {
                    return Err(Error::SingularDesign);
                }
            }
            let qty = qr.q().transpose() * DVector::from_column_slice(&y[..r]);
            let b = rmat.solve_upper_triangular(&qty).ok_or(Error::SingularDesign)?;
            let xt: DVector<f64> = xm.row(r).transpose();
            let v = rmat
                .transpose()
                .solve_lower_triangular(&xt)
                .ok_or(Error::SingularDesign)?;
            let prediction_error = y[r] - xt.dot(&b);
            Ok(prediction_error / (1.0 + v.norm_squared()).sqrt())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityKind {
    #[serde(rename = "CUSUM")]
    Cusum,
    #[serde(rename = "CUSUMSQ")]
    CusumSq,
}

/// Two-sided band significance for the stability paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BandLevel {
    #[serde(rename = "1%")]
    P1,
    #[default]
    #[serde(rename = "5%")]
    P5,
    #[serde(rename = "10%")]
    P10,
}

impl BandLevel {
    /// CUSUM line constant `a` in `a [sqrt(n) + 2 (r - k) / sqrt(n)]`.
    pub fn cusum_constant(self) -> f64 {
        match self {
            BandLevel::P1 => 1.143,
            BandLevel::P5 => 0.948,
            BandLevel::P10 => 0.850,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BandLevel::P1 => "1%",
            BandLevel::P5 => "5%",
            BandLevel::P10 => "10%",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityPath {
    pub kind: StabilityKind,
    pub level: BandLevel,
    /// Observation index (1-based) or year of each point.
    pub t: Vec<i64>,
    pub statistic: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Every point lies within `[lower, upper]`.
    pub stable: bool,
}

impl StabilityPath {
    /// Relabels the time axis, e.g. with calendar years.
    pub fn with_time_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.t.len() {
            return Err(Error::LengthMismatch {
                expected: self.t.len(),
                found: labels.len(),
            });
        }
        self.t = labels;
        Ok(self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,statistic,lower,upper\n");
        for i in 0..self.t.len() {
            out.push_str(&format!(
                "{},{:?},{:?},{:?}\n",
                self.t[i], self.statistic[i], self.lower[i], self.upper[i]
            ));
        }
        out
    }
}

pub fn stability_path(y: &[f64], x: &DesignMatrix, kind: StabilityKind, level: BandLevel) -> Result<StabilityPath> {
    let w = recursive_residuals(y, x)?;
    let k = x.ncols();
    Ok(stability_from_residuals(&w, k, kind, level))
}

/// Path and bands from precomputed recursive residuals of a `k`-parameter fit.
pub fn stability_from_residuals(w: &[f64], k: usize, kind: StabilityKind, level: BandLevel) -> StabilityPath {
    let m = w.len();
    let mf = m as f64;
    let t: Vec<i64> = (0..m).map(|i| (k + i + 1) as i64).collect();
    let (statistic, lower, upper) = match kind {
        StabilityKind::Cusum => {
            let sd = crate::stats::sample_sd(w);
            let scale = if sd > 0.0 { 1.0 / sd } else { 0.0 };
            let path: Vec<f64> = crate::sim::cumulate(w).into_iter().map(|s| s * scale).collect();
            let a = level.cusum_constant();
            let upper: Vec<f64> = (1..=m).map(|r| a * (mf.sqrt() + 2.0 * r as f64 / mf.sqrt())).collect();
            let lower: Vec<f64> = upper.iter().map(|u| -u).collect();
            (path, lower, upper)
        }
        StabilityKind::CusumSq => {
            let sq: Vec<f64> = w.iter().map(|v| v * v).collect();
            let cum = crate::sim::cumulate(&sq);
            let total = cum[m - 1];
            let path: Vec<f64> = if total > 0.0 {
                cum.iter().map(|c| c / total).collect()
            } else {
                vec![0.0; m]
            };
            let c0 = cusumsq_c0(m, level);
            let expected: Vec<f64> = (1..=m).map(|r| r as f64 / mf).collect();
            let lower: Vec<f64> = expected.iter().map(|e| e - c0).collect();
            let upper: Vec<f64> = expected.iter().map(|e| e + c0).collect();
            (path, lower, upper)
        }
    };
    let stable = statistic
        .iter()
        .zip(lower.iter().zip(&upper))
        .all(|(s, (l, u))| s >= l && s <= u);
    StabilityPath {
        kind,
        level,
        t,
        statistic,
        lower,
        upper,
        stable,
    }
}

/// Half-widths `c0` of the CUSUMSQ bands for `m = T - k` recursive residuals,
/// row `n = m/2 - 1` for `m = 2, 4, .., 202`, two-sided 10%, 5%, 1%.
/// Generated by [`cusumsq_c0_table_source`] with [`CUSUMSQ_C0_REPLICATIONS`]
/// draws per row and base seed [`CUSUMSQ_C0_SEED`].
pub const CUSUMSQ_C0: [[f64; 3]; 101] = include!("cusumsq_c0.in");

/// `c0` for `m` residuals: linear in `n = m/2 - 1` inside the table and
/// scaled by `sqrt(202 / m)` beyond it.
pub fn cusumsq_c0(m: usize, level: BandLevel) -> f64 {
    let col = match level {
        BandLevel::P10 => 0,
        BandLevel::P5 => 1,
        BandLevel::P1 => 2,
    };
    let n = m as f64 / 2.0 - 1.0;
    let last = CUSUMSQ_C0.len() - 1;
    if n >= last as f64 {
        return CUSUMSQ_C0[last][col] * (202.0 / m as f64).sqrt();
    }
    let n = n.max(0.0);
    let lo = n.floor() as usize;
    let hi = (lo + 1).min(last);
    let w = n - lo as f64;
    CUSUMSQ_C0[lo][col] + w * (CUSUMSQ_C0[hi][col] - CUSUMSQ_C0[lo][col])
}

/// Monte-Carlo 90%, 95%, 99% quantiles of `max_r |S_r - r/m|` for the
/// normalised cumulative sum of squares of `m` iid normal draws.
pub fn simulate_cusumsq_c0(m: usize, replications: usize, seed: u64) -> [f64; 3] {
    let mut stats = crate::sim::monte_carlo(seed, replications, |rng| {
        let sq: Vec<f64> = crate::sim::white_noise(rng, m).iter().map(|v| v * v).collect();
        let cum = crate::sim::cumulate(&sq);
        let total = cum[m - 1];
        cum.iter()
            .enumerate()
            .map(|(i, c)| (c / total - (i + 1) as f64 / m as f64).abs())
            .fold(0.0f64, f64::max)
    });
    stats.sort_by(f64::total_cmp);
    [0.90, 0.95, 0.99].map(|q| crate::stats::quantile_sorted(&stats, q))
}

/// Rust source of [`CUSUMSQ_C0`]: row `n` simulated for `m = 2(n + 1)` with
/// seed `base_seed + n`.
pub fn cusumsq_c0_table_source(replications: usize, base_seed: u64) -> String {
    let mut out = String::from("[\n");
    for n in 0..CUSUMSQ_C0.len() {
        let r = simulate_cusumsq_c0(2 * (n + 1), replications, base_seed + n as u64);
        out.push_str(&format!("    [{:.4}, {:.4}, {:.4}],\n", r[0], r[1], r[2]));
    }
    out.push_str("]\n");
    out
}

/// Seed used for the shipped [`CUSUMSQ_C0`] table.
pub const CUSUMSQ_C0_SEED: u64 = 20240601;
/// Replications per row of the shipped [`CUSUMSQ_C0`] table.
pub const CUSUMSQ_C0_REPLICATIONS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsOptions {
    pub serial_lags: usize,
    pub hetero: HeteroTest,
    pub reset_powers: Vec<u32>,
    pub band_level: BandLevel,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            serial_lags: 2,
            hetero: HeteroTest::default(),
            reset_powers: vec![2, 3],
            band_level: BandLevel::P5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub serial_correlation: TestResult,
    pub heteroscedasticity: TestResult,
    pub normality: TestResult,
    pub functional_form: TestResult,
    pub cusum: StabilityPath,
    pub cusumsq: StabilityPath,
}

pub fn run_diagnostics(
    fit: &OlsFit,
    y: &[f64],
    x: &DesignMatrix,
    options: &DiagnosticsOptions,
) -> Result<DiagnosticsReport> {
    let w = recursive_residuals(y, x)?;
    let k = x.ncols();
    Ok(DiagnosticsReport {
        serial_correlation: breusch_godfrey(fit, x, options.serial_lags)?,
        heteroscedasticity: heteroscedasticity_test(fit, x, options.hetero)?,
        normality: jarque_bera(&fit.residuals)?,
        functional_form: ramsey_reset(fit, y, x, &options.reset_powers)?,
        cusum: stability_from_residuals(&w, k, StabilityKind::Cusum, options.band_level),
        cusumsq: stability_from_residuals(&w, k, StabilityKind::CusumSq, options.band_level),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{self, monte_carlo};
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Exp1, StandardNormal};

    fn linear_design(rng: &mut ChaCha8Rng, n: usize) -> DesignMatrix {
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        DesignMatrix::with_intercept(n, vec![("x".into(), x)]).unwrap()
    }

    fn response(x: &DesignMatrix, errors: &[f64]) -> Vec<f64> {
        let xv = x.column(1);
        xv.iter().zip(errors).map(|(a, e)| 1.0 + 2.0 * a + e).collect()
    }

    fn rate(seed: u64, reps: usize, f: impl Fn(&mut ChaCha8Rng) -> bool + Sync) -> f64 {
        sim::rate(&monte_carlo(seed, reps, f))
    }

    #[test]
    fn guards() {
        let mut rng = sim::replication_rng(1, 0);
        let x = linear_design(&mut rng, 30);
        let y = response(&x, &sim::white_noise(&mut rng, 30));
        let fit = ols(&y, &x).unwrap();
        assert!(matches!(breusch_godfrey(&fit, &x, 0), Err(Error::InvalidLags)));
        assert!(matches!(ramsey_reset(&fit, &y, &x, &[]), Err(Error::EmptyPowers)));
        let c = DesignMatrix::with_intercept(30, vec![]).unwrap();
        let fit_c = ols(&y, &c).unwrap();
        assert!(matches!(
            heteroscedasticity_test(&fit_c, &c, HeteroTest::BreuschPaganGodfrey),
            Err(Error::DegenerateDesign)
        ));
        assert!(matches!(jarque_bera(&[1.0; 7]), Err(Error::SampleTooShort { .. })));
        let tiny = DesignMatrix::with_intercept(3, vec![("x".into(), vec![0.0, 1.0, 2.0])]).unwrap();
        assert!(matches!(
            stability_path(&[1.0, 2.0, 4.0], &tiny, StabilityKind::Cusum, BandLevel::P5),
            Err(Error::SampleTooShort { .. })
        ));
    }

    #[test]
    fn jarque_bera_zero_at_normal_moments() {
        // {-s, 0, 0, 0, 0, s}: m2 = s^2 / 3 and m4 = s^4 / 3, so K = 3.
        let s = 3.0f64.sqrt();
        let x = [-s, 0.0, 0.0, 0.0, 0.0, s, -s, s, 0.0, 0.0, 0.0, 0.0];
        let (skew, kurt) = moments(&x);
        assert!(skew.abs() < 1e-15 && (kurt - 3.0).abs() < 1e-12);
        let r = jarque_bera(&x).unwrap();
        assert!(r.statistic < 1e-10);
        assert!((r.pvalue - 1.0).abs() < 1e-10);
        assert!(((-r.statistic / 2.0).exp() - r.pvalue).abs() < 1e-12);
    }

    #[test]
    fn cusumsq_endpoint_and_shortest_path() {
        let x = DesignMatrix::with_intercept(4, vec![("x".into(), vec![0.0, 1.0, 3.0, 2.0])]).unwrap();
        let y = [1.0, 2.5, 3.0, 7.0];
        let p = stability_path(&y, &x, StabilityKind::CusumSq, BandLevel::P5).unwrap();
        assert_eq!(p.statistic.len(), 2);
        assert_eq!(*p.statistic.last().unwrap(), 1.0);
        assert_eq!(p.t, vec![3, 4]);
        let c = stability_path(&y, &x, StabilityKind::Cusum, BandLevel::P5).unwrap();
        for (l, u) in c.lower.iter().zip(&c.upper) {
            assert_eq!(*l, -*u);
        }
        assert!(c.to_csv().starts_with("t,statistic,lower,upper\n3,"));
    }

    #[test]
    fn recursive_residuals_match_explicit_refits() {
        let mut rng = sim::replication_rng(2, 0);
        let x = linear_design(&mut rng, 20);
        let y = response(&x, &sim::white_noise(&mut rng, 20));
        let w = recursive_residuals(&y, &x).unwrap();
        assert_eq!(w.len(), 18);
        for (i, r) in (3..20).enumerate() {
            // Fit on the first r rows via ordinary OLS; invert X'X directly.
            let head = x.head(r);
            let fit = ols(&y[..r], &head).unwrap();
            let xt = x.matrix().row(r).transpose();
            let pred: f64 = xt.iter().zip(&fit.coefficients).map(|(a, b)| a * b).sum();
            let xtx = head.matrix().transpose() * head.matrix();
            let inv = xtx.try_inverse().unwrap();
            let f = 1.0 + (xt.transpose() * inv * &xt)[(0, 0)];
            assert!((w[i + 1] - (y[r] - pred) / f.sqrt()).abs() < 1e-9);
        }
        // Sum of squared recursive residuals equals the full-sample SSR.
        let ssr = ols(&y, &x).unwrap().ssr;
        assert!((w.iter().map(|v| v * v).sum::<f64>() - ssr).abs() < 1e-9 * ssr);
    }

    #[test]
    fn recursive_residuals_are_standard_under_null() {
        let mut rng = sim::replication_rng(3, 0);
        let x = linear_design(&mut rng, 500);
        let y = response(&x, &sim::white_noise(&mut rng, 500));
        let w = recursive_residuals(&y, &x).unwrap();
        assert!(crate::stats::mean(&w).abs() < 0.1);
        assert!((crate::stats::sample_variance(&w) - 1.0).abs() < 0.2);
        assert!(crate::stats::pearson(&w[1..], &w[..w.len() - 1]).abs() < 0.15);
    }

    #[test]
    fn p_values_are_scale_free() {
        let mut rng = sim::replication_rng(4, 0);
        let x = linear_design(&mut rng, 60);
        let y = response(&x, &sim::white_noise(&mut rng, 60));
        let y10: Vec<f64> = y.iter().map(|v| 10.0 * v).collect();
        let opts = DiagnosticsOptions::default();
        let a = run_diagnostics(&ols(&y, &x).unwrap(), &y, &x, &opts).unwrap();
        let b = run_diagnostics(&ols(&y10, &x).unwrap(), &y10, &x, &opts).unwrap();
        for (p, q) in [
            (a.serial_correlation.pvalue, b.serial_correlation.pvalue),
            (a.heteroscedasticity.pvalue, b.heteroscedasticity.pvalue),
            (a.normality.pvalue, b.normality.pvalue),
            (a.functional_form.pvalue, b.functional_form.pvalue),
        ] {
            assert!((p - q).abs() < 1e-8);
            assert!((0.0..=1.0).contains(&p));
        }
        assert_eq!(a.cusum.stable, b.cusum.stable);
        for (s, t) in a.cusumsq.statistic.iter().zip(&b.cusumsq.statistic) {
            assert!((s - t).abs() < 1e-8);
        }
        let arch = heteroscedasticity_test(&ols(&y, &x).unwrap(), &x, HeteroTest::Arch { lags: 1 }).unwrap();
        assert!((0.0..=1.0).contains(&arch.pvalue));
    }

    #[test]
    fn cusumsq_is_monotone_in_unit_interval() {
        let mut rng = sim::replication_rng(5, 0);
        let x = linear_design(&mut rng, 80);
        let y = response(&x, &sim::white_noise(&mut rng, 80));
        let p = stability_path(&y, &x, StabilityKind::CusumSq, BandLevel::P5).unwrap();
        assert!(p.statistic[0] >= 0.0);
        assert!(p.statistic.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*p.statistic.last().unwrap(), 1.0);
    }

    #[test]
    fn c0_table_shape() {
        for row in &CUSUMSQ_C0 {
            assert!(row[0] < row[1] && row[1] < row[2]);
        }
        for w in CUSUMSQ_C0.windows(2).skip(2) {
            assert!(w[1][1] <= w[0][1] + 2e-3);
        }
        // Large-sample scaling agrees with the Brownian-bridge limit 1.358 sqrt(2/m).
        let m = 1000;
        assert!((cusumsq_c0(m, BandLevel::P5) - 1.358 * (2.0 / m as f64).sqrt()).abs() < 0.005);
        assert_eq!(cusumsq_c0(2, BandLevel::P5), CUSUMSQ_C0[0][1]);
        let mid = cusumsq_c0(9, BandLevel::P5);
        assert!((mid - 0.5 * (CUSUMSQ_C0[3][1] + CUSUMSQ_C0[4][1])).abs() < 1e-15);
    }

    #[test]
    fn breusch_godfrey_size_and_power() {
        let size = rate(10, 1000, |rng| {
            let x = linear_design(rng, 200);
            let y = response(&x, &sim::white_noise(rng, 200));
            breusch_godfrey(&ols(&y, &x).unwrap(), &x, 2).unwrap().rejects(0.05)
        });
        assert!((0.03..=0.07).contains(&size), "size {size}");
        let power = rate(11, 1000, |rng| {
            let x = linear_design(rng, 200);
            let y = response(&x, &sim::ar1(rng, 200, 0.8));
            breusch_godfrey(&ols(&y, &x).unwrap(), &x, 2).unwrap().rejects(0.05)
        });
        assert!(power >= 0.95, "power {power}");
    }

    #[test]
    fn heteroscedasticity_size_and_power() {
        let size = rate(20, 1000, |rng| {
            let x = linear_design(rng, 200);
            let y = response(&x, &sim::white_noise(rng, 200));
            heteroscedasticity_test(&ols(&y, &x).unwrap(), &x, HeteroTest::BreuschPaganGodfrey)
                .unwrap()
                .rejects(0.05)
        });
        assert!((0.03..=0.07).contains(&size), "size {size}");
        // Positive regressor, so the variance x^2 is monotone in x.
        let power = rate(21, 1000, |rng| {
            let xs: Vec<f64> = (0..200).map(|_| rng.random_range(1.0..5.0)).collect();
            let x = DesignMatrix::with_intercept(200, vec![("x".into(), xs.clone())]).unwrap();
            let e: Vec<f64> = sim::white_noise(rng, 200)
                .iter()
                .zip(&xs)
                .map(|(e, x)| e * x.abs())
                .collect();
            let y = response(&x, &e);
            heteroscedasticity_test(&ols(&y, &x).unwrap(), &x, HeteroTest::BreuschPaganGodfrey)
                .unwrap()
                .rejects(0.05)
        });
        assert!(power >= 0.90, "power {power}");
    }

    #[test]
    fn jarque_bera_size_and_power() {
        let size = rate(30, 1000, |rng| {
            jarque_bera(&sim::white_noise(rng, 500)).unwrap().rejects(0.05)
        });
        assert!((0.03..=0.07).contains(&size), "size {size}");
        let power = rate(31, 1000, |rng| {
            let e: Vec<f64> = (0..200).map(|_| rng.sample(Exp1)).collect();
            jarque_bera(&e).unwrap().rejects(0.05)
        });
        assert!(power >= 0.99, "power {power}");
    }

    #[test]
    fn reset_size_and_power() {
        let size = rate(40, 1000, |rng| {
            let x = linear_design(rng, 200);
            let y = response(&x, &sim::white_noise(rng, 200));
            ramsey_reset(&ols(&y, &x).unwrap(), &y, &x, &[2, 3])
                .unwrap()
                .rejects(0.05)
        });
        assert!((0.03..=0.07).contains(&size), "size {size}");
        let power = rate(41, 1000, |rng| {
            let x = linear_design(rng, 200);
            let xs = x.column(1);
            let e = sim::white_noise(rng, 200);
            let y: Vec<f64> = xs.iter().zip(&e).map(|(a, e)| 1.0 + a + 0.5 * a * a + e).collect();
            ramsey_reset(&ols(&y, &x).unwrap(), &y, &x, &[2, 3])
                .unwrap()
                .rejects(0.05)
        });
        assert!(power >= 0.90, "power {power}");
    }

    #[test]
    fn cusum_size_and_power() {
        let exits = rate(50, 1000, |rng| {
            let x = linear_design(rng, 100);
            let y = response(&x, &sim::white_noise(rng, 100));
            !stability_path(&y, &x, StabilityKind::Cusum, BandLevel::P5)
                .unwrap()
                .stable
        });
        assert!(exits < 0.10, "exit rate {exits}");
        let power = rate(51, 1000, |rng| {
            let x = linear_design(rng, 100);
            let e: Vec<f64> = sim::white_noise(rng, 100)
                .iter()
                .enumerate()
                .map(|(t, e)| e + if t >= 50 { 5.0 } else { 0.0 })
                .collect();
            let y = response(&x, &e);
            !stability_path(&y, &x, StabilityKind::Cusum, BandLevel::P5)
                .unwrap()
                .stable
        });
        assert!(power >= 0.90, "power {power}");
    }

    #[test]
    fn cusumsq_size() {
        let exits = rate(52, 1000, |rng| {
            let x = linear_design(rng, 100);
            let y = response(&x, &sim::white_noise(rng, 100));
            !stability_path(&y, &x, StabilityKind::CusumSq, BandLevel::P5)
                .unwrap()
                .stable
        });
        assert!((0.02..=0.08).contains(&exits), "exit rate {exits}");
    }

    #[test]
    fn simulated_c0_reproduces_table_row() {
        let row = simulate_cusumsq_c0(40, 20_000, 99);
        let table = CUSUMSQ_C0[19];
        for j in 0..3 {
            assert!((row[j] - table[j]).abs() < 0.01, "{row:?} vs {table:?}");
        }
    }
}
