//! Ordinary least squares and the inference built on it.
//!
//! Fits are computed from a Householder QR factorisation of the design. Rank
//! is judged column by column: a design is singular when some diagonal entry
//! of `R` falls below `1e-10` times the norm of its column.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};

pub(crate) const RANK_TOL: f64 = 1e-10;

/// Regressor matrix with one name per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    x: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>, x: DMatrix<f64>) -> Result<Self> {
        if names.len() != x.ncols() {
            return Err(Error::LengthMismatch {
                expected: x.ncols(),
                found: names.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("design contains non-finite values".into()));
        }
        Ok(DesignMatrix { names, x })
    }

    /// Builds a design from named columns of equal length. `nrows` is needed
    /// so an empty column list still has a sample size.
    pub fn from_columns(nrows: usize, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut x = DMatrix::zeros(nrows, columns.len());
        let mut names = Vec::with_capacity(columns.len());
        for (j, (name, col)) in columns.into_iter().enumerate() {
            if col.len() != nrows {
                return Err(Error::LengthMismatch {
                    expected: nrows,
                    found: col.len(),
                });
            }
            x.set_column(j, &DVector::from_vec(col));
            names.push(name);
        }
        DesignMatrix::new(names, x)
    }

    /// Intercept column followed by `columns`.
    pub fn with_intercept(nrows: usize, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut all = vec![("C".to_owned(), vec![1.0; nrows])];
        all.extend(columns);
        DesignMatrix::from_columns(nrows, all)
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.x.column(j).iter().copied().collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Appends extra named columns.
    pub fn augmented(&self, extra: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut cols: Vec<(String, Vec<f64>)> = (0..self.ncols())
            .map(|j| (self.names[j].clone(), self.column(j)))
            .collect();
        cols.extend(extra);
        DesignMatrix::from_columns(self.nrows(), cols)
    }

    /// The first `n` rows.
    pub fn head(&self, n: usize) -> DesignMatrix {
        DesignMatrix {
            names: self.names.clone(),
            x: self.x.rows(0, n).clone_owned(),
        }
    }

    /// Indices of columns that are constant and non-zero.
    pub fn constant_columns(&self) -> Vec<usize> {
        (0..self.ncols())
            .filter(|&j| {
                let c = self.x.column(j);
                let first = c[0];
                first != 0.0 && c.iter().all(|&v| v == first)
            })
            .collect()
    }

    pub fn has_intercept(&self) -> bool {
        !self.constant_columns().is_empty()
    }
}

/// Which information criterion ranks competing specifications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InfoCriterion {
    #[default]
    Aic,
    Sbc,
}

/// Everything a single least-squares fit produces.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub stderr: Vec<f64>,
    pub tstats: Vec<f64>,
    pub residuals: Vec<f64>,
    pub response: Vec<f64>,
    pub ssr: f64,
    pub sigma2: f64,
    pub r2: f64,
    pub loglik: f64,
    pub aic: f64,
    pub sbc: f64,
    pub nobs: usize,
    pub nparams: usize,
    pub covariance: DMatrix<f64>,
    /// `(X'X)^{-1}`, kept for sandwich estimators.
    pub xtx_inv: DMatrix<f64>,
}

impl OlsFit {
    pub fn fitted(&self) -> Vec<f64> {
        self.response.iter().zip(&self.residuals).map(|(y, e)| y - e).collect()
    }

    pub fn criterion(&self, c: InfoCriterion) -> f64 {
        match c {
            InfoCriterion::Aic => self.aic,
            InfoCriterion::Sbc => self.sbc,
        }
    }

    pub fn df_resid(&self) -> usize {
        self.nobs - self.nparams
    }

    /// Two-sided p-values of the coefficient t-ratios.
    pub fn pvalues(&self) -> Vec<f64> {
        let df = self.df_resid() as f64;
        self.tstats.iter().map(|&t| dist::t_two_sided(t, df)).collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.coefficients[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Gaussian log-likelihood at the ML variance `ssr / n`.
pub fn gaussian_loglik(ssr: f64, nobs: usize) -> f64 {
    let n = nobs as f64;
    -0.5 * n * (1.0 + (2.0 * std::f64::consts::PI).ln() + (ssr / n).ln())
}

pub fn ols(y: &[f64], x: &DesignMatrix) -> Result<OlsFit> {
    let n = x.nrows();
    let k = x.ncols();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if n <= k {
        return Err(Error::InsufficientObservations { nobs: n, nparams: k });
    }
    let yv = DVector::from_column_slice(y);

    let (beta, xtx_inv) = if k == 0 {
        (DVector::zeros(0), DMatrix::zeros(0, 0))
    } else {
        let qr = x.x.clone().qr();
        let r = qr.r();
        for j in 0..k {
            let col_norm = x.x.column(j).norm();
            if col_norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * col_norm {
                return Err(Error::SingularDesign);
            }
        }
        let qty = qr.q().transpose() * &yv;
        let beta = r.solve_upper_triangular(&qty).ok_or(Error::SingularDesign)?;
        let r_inv = r
            .solve_upper_triangular(&DMatrix::identity(k, k))
            .ok_or(Error::SingularDesign)?;
        let xtx_inv = &r_inv * r_inv.transpose();
        (beta, xtx_inv)
    };

    let fitted = &x.x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let df = (n - k) as f64;
    let sigma2 = ssr / df;
    let covariance = &xtx_inv * sigma2;
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let stderr: Vec<f64> = (0..k).map(|j| covariance[(j, j)].max(0.0).sqrt()).collect();
    let tstats = coefficients.iter().zip(&stderr).map(|(b, s)| b / s).collect();

    let tss = if x.has_intercept() {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        y.iter().map(|v| v * v).sum::<f64>()
    };
    // SSR <= TSS up to rounding; the intercept-only fit lands on zero.
    let r2 = if tss > 0.0 {
        (1.0 - ssr / tss).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let loglik = gaussian_loglik(ssr, n);
    let kf = k as f64;

    Ok(OlsFit {
        names: x.names.clone(),
        coefficients,
        stderr,
        tstats,
        residuals,
        response: y.to_vec(),
        ssr,
        sigma2,
        r2,
        loglik,
        aic: -2.0 * loglik + 2.0 * kf,
        sbc: -2.0 * loglik + kf * (n as f64).ln(),
        nobs: n,
        nparams: k,
        covariance,
        xtx_inv,
    })
}

/// Newey-West automatic bandwidth `floor(4 (T/100)^(2/9))`.
pub fn auto_bandwidth(nobs: usize) -> usize {
    (4.0 * (nobs as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Bartlett weight for autocovariance lag `j` at bandwidth `m`.
pub fn bartlett_weight(j: usize, bandwidth: usize) -> f64 {
    1.0 - j as f64 / (bandwidth as f64 + 1.0)
}

/// HAC covariance of the OLS coefficients with Bartlett-kernel weights.
///
/// Bandwidth zero gives the White (HC0) sandwich.
pub fn newey_west(fit: &OlsFit, x: &DesignMatrix, bandwidth: usize) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if bandwidth >= n {
        return Err(Error::BandwidthTooLarge { bandwidth, nobs: n });
    }
    if fit.nobs != n || fit.nparams != x.ncols() {
        return Err(Error::LengthMismatch {
            expected: fit.nobs,
            found: n,
        });
    }
    let k = x.ncols();
    // Scores g_t = x_t u_t stacked as rows.
    let mut g = x.x.clone();
    for (t, &u) in fit.residuals.iter().enumerate() {
        g.row_mut(t).scale_mut(u);
    }
    let mut meat = g.transpose() * &g;
    for j in 1..=bandwidth {
        let w = bartlett_weight(j, bandwidth);
        let lead = g.rows(j, n - j);
        let lagged = g.rows(0, n - j);
        let gamma = lead.transpose() * lagged;
        meat += (&gamma + gamma.transpose()) * w;
    }
    debug_assert_eq!(meat.nrows(), k);
    Ok(&fit.xtx_inv * meat * &fit.xtx_inv)
}

pub fn white_covariance(fit: &OlsFit, x: &DesignMatrix) -> Result<DMatrix<f64>> {
    newey_west(fit, x, 0)
}

/// Bartlett-kernel long-run variance `gamma_0 + 2 sum w_j gamma_j` of a
/// mean-zero sequence, with autocovariances divided by `T`.
pub fn long_run_variance(u: &[f64], bandwidth: usize) -> Result<f64> {
    let n = u.len();
    if bandwidth >= n {
        return Err(Error::BandwidthTooLarge { bandwidth, nobs: n });
    }
    let nf = n as f64;
    let autocov = |j: usize| u[j..].iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / nf;
    let mut lrv = autocov(0);
    for j in 1..=bandwidth {
        lrv += 2.0 * bartlett_weight(j, bandwidth) * autocov(j);
    }
    Ok(lrv)
}

/// F statistic for nested models from their residual sums of squares:
/// `((SSR_r - SSR_ur) / r) / (SSR_ur / (T - k))`, with `T` and `k` taken from
/// the unrestricted fit.
pub fn wald_f(restricted: &OlsFit, unrestricted: &OlsFit, r: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::NestedModelMismatch("zero restrictions".into()));
    }
    if restricted.nobs != unrestricted.nobs {
        return Err(Error::NestedModelMismatch(format!(
            "samples differ ({} vs {} observations)",
            restricted.nobs, unrestricted.nobs
        )));
    }
    let scale = unrestricted.response.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if restricted
        .response
        .iter()
        .zip(&unrestricted.response)
        .any(|(a, b)| (a - b).abs() > 1e-12 * scale)
    {
        return Err(Error::NestedModelMismatch("dependent variables differ".into()));
    }
    let (ssr_r, ssr_ur) = (restricted.ssr, unrestricted.ssr);
    if ssr_r < ssr_ur - 1e-9 * ssr_ur.max(1.0) {
        return Err(Error::NestedModelMismatch(format!(
            "restricted SSR {ssr_r} is below unrestricted SSR {ssr_ur}"
        )));
    }
    let df = unrestricted.df_resid() as f64;
    Ok(((ssr_r - ssr_ur).max(0.0) / r as f64) / (ssr_ur / df))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn design(xs: &[f64]) -> DesignMatrix {
        DesignMatrix::with_intercept(xs.len(), vec![("x".into(), xs.to_vec())]).unwrap()
    }

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = ols(&y, &design(&xs)).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.ssr < 1e-24);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_response_has_zero_slope() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let y = [1.0, -2.0, 2.0, -2.0, 1.0];
        let fit = ols(&y, &design(&xs)).unwrap();
        assert!(fit.coefficients[1].abs() < 1e-14);
    }

    #[test]
    fn four_points_match_hand_solved_normal_equations() {
        // X'X = [[4, 10], [10, 30]], X'y = [10.5, 30.5] for x = 1..4.
        let xs = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.5, 4.0];
        let fit = ols(&y, &design(&xs)).unwrap();
        let det = 4.0 * 30.0 - 10.0 * 10.0;
        let b0 = (30.0 * 10.5 - 10.0 * 30.5) / det;
        let b1 = (4.0 * 30.5 - 10.0 * 10.5) / det;
        assert!((fit.coefficients[0] - b0).abs() < 1e-12);
        assert!((fit.coefficients[1] - b1).abs() < 1e-12);
    }

    #[test]
    fn singular_and_short_designs() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let x = DesignMatrix::with_intercept(
            4,
            vec![
                ("a".into(), xs.to_vec()),
                ("b".into(), xs.iter().map(|v| 2.0 * v).collect()),
            ],
        )
        .unwrap();
        assert!(matches!(ols(&[1.0, 2.0, 3.0, 5.0], &x), Err(Error::SingularDesign)));
        let short = design(&[1.0, 2.0]);
        assert!(matches!(
            ols(&[1.0, 2.0], &short),
            Err(Error::InsufficientObservations { .. })
        ));
    }

    #[test]
    fn empty_design_leaves_response_as_residual() {
        let x = DesignMatrix::from_columns(3, vec![]).unwrap();
        let fit = ols(&[1.0, -2.0, 3.0], &x).unwrap();
        assert_eq!(fit.ssr, 14.0);
        assert_eq!(fit.residuals, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn zero_bandwidth_is_white() {
        let xs = [0.3, 1.2, 2.8, 3.1, 4.9, 5.5, 7.0];
        let y = [1.0, 2.1, 2.7, 4.9, 5.2, 7.7, 7.1];
        let x = design(&xs);
        let fit = ols(&y, &x).unwrap();
        let hac = newey_west(&fit, &x, 0).unwrap();
        // Explicit sandwich (X'X)^-1 (sum u_t^2 x_t x_t') (X'X)^-1.
        let mut meat = DMatrix::zeros(2, 2);
        for t in 0..xs.len() {
            let xt = DVector::from_vec(vec![1.0, xs[t]]);
            meat += &xt * xt.transpose() * fit.residuals[t].powi(2);
        }
        let white = &fit.xtx_inv * meat * &fit.xtx_inv;
        assert!((hac - white).abs().max() < 1e-14);
        assert!(matches!(newey_west(&fit, &x, 7), Err(Error::BandwidthTooLarge { .. })));
    }

    #[test]
    fn wald_f_plugs_into_formula() {
        let mk = |ssr: f64, nobs: usize, nparams: usize| OlsFit {
            names: vec![],
            coefficients: vec![],
            stderr: vec![],
            tstats: vec![],
            residuals: vec![],
            response: vec![0.0; nobs],
            ssr,
            sigma2: 0.0,
            r2: 0.0,
            loglik: 0.0,
            aic: 0.0,
            sbc: 0.0,
            nobs,
            nparams,
            covariance: DMatrix::zeros(0, 0),
            xtx_inv: DMatrix::zeros(0, 0),
        };
        assert_eq!(wald_f(&mk(1.0, 12, 2), &mk(1.0, 12, 2), 1).unwrap(), 0.0);
        assert!((wald_f(&mk(2.0, 12, 1), &mk(1.0, 12, 2), 1).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(
            wald_f(&mk(0.5, 12, 1), &mk(1.0, 12, 2), 1),
            Err(Error::NestedModelMismatch(_))
        ));
        assert!(matches!(
            wald_f(&mk(2.0, 11, 1), &mk(1.0, 12, 2), 1),
            Err(Error::NestedModelMismatch(_))
        ));
    }

    #[test]
    fn auto_bandwidth_rule() {
        assert_eq!(auto_bandwidth(100), 4);
        assert_eq!(auto_bandwidth(33), 3);
        assert_eq!(auto_bandwidth(500), 5);
    }

    #[test]
    fn long_run_variance_of_constant_pattern() {
        let u = [1.0, -1.0, 1.0, -1.0];
        // gamma_0 = 1, gamma_1 = -3/4, weight 1/2 at bandwidth 1.
        assert!((long_run_variance(&u, 1).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(long_run_variance(&u, 0).unwrap(), 1.0);
    }

    fn lcg_data(seed: u64, n: usize, k: usize) -> (Vec<f64>, DesignMatrix) {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let cols = (0..k)
            .map(|j| (format!("x{j}"), (0..n).map(|_| next()).collect()))
            .collect();
        let x = DesignMatrix::with_intercept(n, cols).unwrap();
        let y = (0..n).map(|_| next()).collect();
        (y, x)
    }

    proptest! {
        #[test]
        fn fitted_plus_residuals_is_response(seed in any::<u64>(), n in 6usize..30, k in 0usize..4) {
            let (y, x) = lcg_data(seed, n, k);
            let fit = ols(&y, &x).unwrap();
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (f, (e, v)) in fit.fitted().iter().zip(fit.residuals.iter().zip(&y)) {
                prop_assert!((f + e - v).abs() <= 1e-12 * norm.max(1.0));
            }
            for j in 0..x.ncols() {
                let dot: f64 = x.column(j).iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() <= 1e-8 * norm.max(1.0));
            }
            prop_assert!(fit.ssr >= 0.0);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&fit.r2));
        }

        #[test]
        fn extra_column_never_raises_ssr(seed in any::<u64>(), n in 8usize..30) {
            let (y, x) = lcg_data(seed, n, 2);
            let (z, _) = lcg_data(seed ^ 0xdead_beef, n, 0);
            let small = ols(&y, &x).unwrap();
            let big = ols(&y, &x.augmented(vec![("z".into(), z)]).unwrap()).unwrap();
            prop_assert!(big.ssr <= small.ssr * (1.0 + 1e-12));
        }

        #[test]
        fn column_order_does_not_change_estimates(seed in any::<u64>(), n in 8usize..30) {
            let (y, x) = lcg_data(seed, n, 3);
            let fit = ols(&y, &x).unwrap();
            let perm = [2usize, 0, 3, 1];
            let cols = perm.iter().map(|&j| (x.names()[j].clone(), x.column(j))).collect();
            let xp = DesignMatrix::from_columns(n, cols).unwrap();
            let fitp = ols(&y, &xp).unwrap();
            for (i, &j) in perm.iter().enumerate() {
                prop_assert!((fitp.coefficients[i] - fit.coefficients[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn aic_drops_with_fewer_parameters_at_equal_ssr() {
        let l = gaussian_loglik(3.0, 20);
        assert!(-2.0 * l + 2.0 * 2.0 < -2.0 * l + 2.0 * 3.0);
    }
}
