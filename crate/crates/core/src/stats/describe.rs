use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub fn z_975() -> f64 {
    Normal::standard().inverse_cdf(0.975)
}

/// Two-sided 95% Student-t quantile with `df` degrees of freedom.
pub fn t_975(df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .map(|t| t.inverse_cdf(0.975))
        .unwrap_or_else(|_| z_975())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with an `n - 1` denominator.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Z-scores with the sample standard deviation. A constant input maps to
/// all zeros.
pub fn zscore(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs);
    let sd = std_dev(xs);
    if sd == 0.0 || !sd.is_finite() {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|x| (x - m) / sd).collect()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// 95% interval for a correlation via the Fisher z transform.
pub fn pearson_ci(r: f64, n: usize) -> (f64, f64) {
    if n <= 3 {
        return (-1.0, 1.0);
    }
    let z = r.clamp(-0.999_999_999_999, 0.999_999_999_999).atanh();
    let se = 1.0 / ((n as f64) - 3.0).sqrt();
    let q = z_975();
    ((z - q * se).tanh(), (z + q * se).tanh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quantiles() {
        assert_relative_eq!(z_975(), 1.959963984540054, epsilon = 1e-9);
        assert_relative_eq!(t_975(10.0), 2.228138851986274, epsilon = 1e-9);
    }

    #[test]
    fn zscore_of_constant_is_zero() {
        assert_eq!(zscore(&[3.0, 3.0, 3.0]), vec![0.0; 3]);
    }

    #[test]
    fn pearson_perfect() {
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]).unwrap();
        assert!(r > 0.99);
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
