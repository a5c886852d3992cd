//! Tail probabilities of the reference distributions used by the tests.

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};

/// Upper-tail probability of a chi-square variate with `df` degrees of freedom.
pub fn chi2_sf(stat: f64, df: f64) -> f64 {
    if stat.is_nan() {
        return f64::NAN;
    }
    if stat <= 0.0 {
        return 1.0;
    }
    if stat.is_infinite() {
        return 0.0;
    }
    let d = ChiSquared::new(df).expect("chi-square degrees of freedom must be positive");
    d.sf(stat).clamp(0.0, 1.0)
}

/// Upper-tail probability of an F(`d1`, `d2`) variate.
pub fn f_sf(stat: f64, d1: f64, d2: f64) -> f64 {
    if stat.is_nan() {
        return f64::NAN;
    }
    if stat <= 0.0 {
        return 1.0;
    }
    if stat.is_infinite() {
        return 0.0;
    }
    let d = FisherSnedecor::new(d1, d2).expect("F degrees of freedom must be positive");
    d.sf(stat).clamp(0.0, 1.0)
}

/// Two-sided p-value of a t-ratio with `df` degrees of freedom.
pub fn t_two_sided(stat: f64, df: f64) -> f64 {
    if stat.is_nan() {
        return f64::NAN;
    }
    if stat.is_infinite() {
        return 0.0;
    }
    let d = StudentsT::new(0.0, 1.0, df).expect("t degrees of freedom must be positive");
    (2.0 * d.sf(stat.abs())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_quantiles() {
        assert!((chi2_sf(5.991464547107979, 2.0) - 0.05).abs() < 1e-12);
        assert!((chi2_sf(3.841458820694124, 1.0) - 0.05).abs() < 1e-10);
        assert!((t_two_sided(1.959963984540054, 1e9) - 0.05).abs() < 1e-7);
        assert!((f_sf(4.964602743730711, 1.0, 10.0) - 0.05).abs() < 1e-9);
        assert_eq!(chi2_sf(0.0, 3.0), 1.0);
    }

    #[test]
    fn chi2_two_df_is_exponential() {
        for x in [0.1, 1.0, 4.0, 12.0] {
            assert!((chi2_sf(x, 2.0) - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
    }
}
