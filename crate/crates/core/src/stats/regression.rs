//! Least-squares and penalized logistic regression with intercept.
//!
//! Predictors are passed as an `n x p` matrix without the intercept column;
//! both fitters add it. Standardized coefficients come from a second fit on
//! z-scored predictors (and, for least squares, a z-scored outcome).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::describe::{mean, t_975, z_975, zscore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Add `1e-8 * trace(X'X) / cols` to the diagonal instead of failing on
    /// collinear predictors.
    pub ridge_fallback: bool,
    /// Logistic L2 penalty per observation.
    pub penalty: f64,
    pub max_iter: usize,
    pub tolerance: f64,
    /// Refit on z-scored data to fill the standardized fields.
    pub standardize: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            ridge_fallback: false,
            penalty: 1e-6,
            max_iter: 200,
            tolerance: 1e-8,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ols,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub model: ModelKind,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// 95% intervals per slope.
    pub conf_intervals: Vec<(f64, f64)>,
    pub standardized_coefficients: Vec<f64>,
    pub standardized_conf_intervals: Vec<(f64, f64)>,
    /// In-sample R² for least squares; McFadden pseudo-R² for logistic.
    pub r_squared: f64,
    pub cv_r_squared: Option<f64>,
    pub n_obs: usize,
    /// Penalized log-likelihood (logistic only).
    pub log_likelihood: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub ridge_applied: bool,
}

impl RegressionResult {
    /// Linear predictor `intercept + x . coefficients` for each row.
    pub fn linear_predictor(&self, x: &DMatrix<f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|i| {
                self.intercept
                    + x.row(i)
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .collect()
    }

    /// Fitted response: the linear predictor for least squares, the
    /// probability for logistic.
    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let eta = self.linear_predictor(x);
        match self.model {
            ModelKind::Ols => eta,
            ModelKind::Logistic => eta.into_iter().map(sigmoid).collect(),
        }
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Relative residual norm below which a column counts as dependent. Loose
/// enough to catch dependencies that were exact before f32 storage.
pub const COLLINEAR_TOLERANCE: f64 = 1e-6;

/// Columns (0-based, intercept excluded) that are linearly dependent on the
/// intercept and earlier columns, found by modified Gram–Schmidt on centered
/// columns.
pub fn collinear_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let n = x.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut flagged = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j);
        let m = col.sum() / n as f64;
        let mut v = DVector::from_iterator(n, col.iter().map(|c| c - m));
        let scale = col.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1.0) * (n as f64).sqrt();
        for q in &basis {
            let d = q.dot(&v);
            v.axpy(-d, q, 1.0);
        }
        let norm = v.norm();
        if norm <= COLLINEAR_TOLERANCE * scale {
            flagged.push(j);
        } else {
            basis.push(v / norm);
        }
    }
    flagged
}

fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] })
}

fn zscore_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for j in 0..x.ncols() {
        let z = zscore(x.column(j).as_slice());
        out.column_mut(j).copy_from_slice(&z);
    }
    out
}

fn check_shapes(x: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            actual: y.len(),
        });
    }
    if x.nrows() <= x.ncols() + 1 {
        return Err(Error::InvalidInput(format!(
            "{} observations cannot support {} coefficients plus intercept",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in regression input".into()));
    }
    Ok(())
}

fn ridge_lambda(xtx: &DMatrix<f64>) -> f64 {
    1e-8 * xtx.trace() / xtx.ncols() as f64
}

struct LinearSolution {
    beta: DVector<f64>,
    cov_unscaled: DMatrix<f64>,
}

fn solve_least_squares(design: &DMatrix<f64>, y: &DVector<f64>, ridge: bool) -> Result<LinearSolution> {
    let p = design.ncols();
    if ridge {
        let mut xtx = design.transpose() * design;
        let lambda = ridge_lambda(&xtx);
        for j in 1..p {
            xtx[(j, j)] += lambda;
        }
        let chol = xtx
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("ridge system is not positive definite".into()))?;
        let beta = chol.solve(&(design.transpose() * y));
        return Ok(LinearSolution {
            beta,
            cov_unscaled: chol.inverse(),
        });
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Collinear { columns: vec![] })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Collinear { columns: vec![] })?;
    Ok(LinearSolution {
        beta,
        cov_unscaled: &r_inv * r_inv.transpose(),
    })
}

struct OlsCore {
    beta: DVector<f64>,
    se: DVector<f64>,
    r_squared: f64,
    df: f64,
}

fn ols_core(x: &DMatrix<f64>, y: &[f64], ridge: bool) -> Result<OlsCore> {
    let design = with_intercept(x);
    let yv = DVector::from_column_slice(y);
    let sol = solve_least_squares(&design, &yv, ridge)?;
    let resid = &yv - &design * &sol.beta;
    let ss_res = resid.norm_squared();
    let ybar = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let df = (x.nrows() - x.ncols() - 1) as f64;
    let sigma2 = ss_res / df;
    let se = sol.cov_unscaled.diagonal().map(|v| (v * sigma2).max(0.0).sqrt());
    let r_squared = if ss_tot == 0.0 { 0.0 } else { 1.0 - ss_res / ss_tot };
    Ok(OlsCore {
        beta: sol.beta,
        se,
        r_squared,
        df,
    })
}

/// Ordinary least squares with intercept, classical standard errors and 95%
/// t intervals.
pub fn ols_fit(x: &DMatrix<f64>, y: &[f64], options: &FitOptions) -> Result<RegressionResult> {
    check_shapes(x, y)?;
    let collinear = collinear_columns(x);
    let ridge = !collinear.is_empty();
    if ridge && !options.ridge_fallback {
        return Err(Error::Collinear { columns: collinear });
    }
    let p = x.ncols();
    let ybar = mean(y);
    let constant_y = y.iter().all(|&v| v == y[0]);

    let core = ols_core(x, y, ridge)?;
    let q = t_975(core.df);
    let (intercept, coefficients, std_errors) = if constant_y {
        (ybar, vec![0.0; p], vec![0.0; p])
    } else {
        (
            core.beta[0],
            core.beta.iter().skip(1).copied().collect(),
            core.se.iter().skip(1).copied().collect(),
        )
    };
    let conf_intervals = interval(&coefficients, &std_errors, q);

    let (standardized_coefficients, standardized_conf_intervals) = if options.standardize && !constant_y {
        let zx = zscore_columns(x);
        let zy = zscore(y);
        let z = ols_core(&zx, &zy, ridge)?;
        let b: Vec<f64> = z.beta.iter().skip(1).copied().collect();
        let se: Vec<f64> = z.se.iter().skip(1).copied().collect();
        let ci = interval(&b, &se, q);
        (b, ci)
    } else {
        (vec![0.0; p], vec![(0.0, 0.0); p])
    };

    Ok(RegressionResult {
        model: ModelKind::Ols,
        intercept,
        coefficients,
        std_errors,
        conf_intervals,
        standardized_coefficients,
        standardized_conf_intervals,
        r_squared: core.r_squared,
        cv_r_squared: None,
        n_obs: y.len(),
        log_likelihood: None,
        iterations: 1,
        converged: true,
        ridge_applied: ridge,
    })
}

fn interval(b: &[f64], se: &[f64], q: f64) -> Vec<(f64, f64)> {
    b.iter().zip(se).map(|(b, s)| (b - q * s, b + q * s)).collect()
}

struct LogisticCore {
    beta: DVector<f64>,
    cov: DMatrix<f64>,
    log_lik: f64,
    penalized_log_lik: f64,
    iterations: usize,
    converged: bool,
}

fn log_likelihood(design: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = design * beta;
    eta.iter()
        .zip(y)
        .map(|(&t, &yi)| {
            // log(1 + e^t) computed stably
            let softplus = if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
            yi * t - softplus
        })
        .sum()
}

fn penalized(design: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>, lambda: f64) -> f64 {
    let slopes: f64 = beta.iter().skip(1).map(|b| b * b).sum();
    log_likelihood(design, y, beta) - 0.5 * lambda * slopes
}

/// Damped Newton (iteratively reweighted least squares) on the penalized
/// log-likelihood. The intercept is not penalized.
fn logistic_core(x: &DMatrix<f64>, y: &[f64], options: &FitOptions, extra_ridge: f64) -> Result<LogisticCore> {
    let design = with_intercept(x);
    let (n, p) = design.shape();
    let lambda = options.penalty * n as f64 + extra_ridge;
    let mut beta = DVector::zeros(p);
    let ybar = mean(y).clamp(1e-12, 1.0 - 1e-12);
    beta[0] = (ybar / (1.0 - ybar)).ln();
    let mut current = penalized(&design, y, &beta, lambda);
    let mut converged = false;
    let mut iterations = 0;

    let hessian = |beta: &DVector<f64>| -> DMatrix<f64> {
        let eta = &design * beta;
        let mut h = DMatrix::zeros(p, p);
        for i in 0..n {
            let pi = sigmoid(eta[i]);
            let w = pi * (1.0 - pi);
            let row = design.row(i);
            h.ger(w, &row.transpose(), &row.transpose(), 1.0);
        }
        for j in 1..p {
            h[(j, j)] += lambda;
        }
        h
    };

    while iterations < options.max_iter {
        iterations += 1;
        let eta = &design * &beta;
        let resid = DVector::from_iterator(n, eta.iter().zip(y).map(|(&t, &yi)| yi - sigmoid(t)));
        let mut grad = design.transpose() * resid;
        for j in 1..p {
            grad[j] -= lambda * beta[j];
        }
        let h = hessian(&beta);
        let step = match h.clone().cholesky() {
            Some(c) => c.solve(&grad),
            None => h
                .lu()
                .solve(&grad)
                .ok_or_else(|| Error::InvalidInput("singular logistic Hessian".into()))?,
        };
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let candidate = &beta + &step * scale;
            let value = penalized(&design, y, &candidate, lambda);
            if value >= current - 1e-12 * current.abs().max(1.0) {
                accepted = Some((candidate, value));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, value)) = accepted else {
            converged = step.amax() * scale < options.tolerance;
            break;
        };
        let change = (&next - &beta).amax();
        beta = next;
        current = value;
        if change < options.tolerance {
            converged = true;
            break;
        }
    }

    let h = hessian(&beta);
    let cov = h
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| h.try_inverse())
        .ok_or_else(|| Error::InvalidInput("singular logistic Hessian".into()))?;
    Ok(LogisticCore {
        log_lik: log_likelihood(&design, y, &beta),
        penalized_log_lik: current,
        beta,
        cov,
        iterations,
        converged,
    })
}

/// Penalized logistic regression for a binary outcome with Wald 95%
/// intervals. Non-convergence is reported in the result, not as an error.
pub fn logistic_fit(x: &DMatrix<f64>, y: &[f64], options: &FitOptions) -> Result<RegressionResult> {
    check_shapes(x, y)?;
    if let Some(v) = y.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidInput(format!("logistic outcome has value {v}")));
    }
    let positives = y.iter().filter(|&&v| v == 1.0).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::SingleClass);
    }
    let collinear = collinear_columns(x);
    let ridge = !collinear.is_empty();
    if ridge && !options.ridge_fallback {
        return Err(Error::Collinear { columns: collinear });
    }
    let extra = if ridge {
        let d = with_intercept(x);
        ridge_lambda(&(d.transpose() * &d))
    } else {
        0.0
    };
    let core = logistic_core(x, y, options, extra)?;
    let q = z_975();
    let se: Vec<f64> = core.cov.diagonal().iter().skip(1).map(|v| v.max(0.0).sqrt()).collect();
    let coefficients: Vec<f64> = core.beta.iter().skip(1).copied().collect();
    let conf_intervals = interval(&coefficients, &se, q);

    let (standardized_coefficients, standardized_conf_intervals) = if options.standardize {
        let z = logistic_core(&zscore_columns(x), y, options, extra)?;
        let b: Vec<f64> = z.beta.iter().skip(1).copied().collect();
        let s: Vec<f64> = z.cov.diagonal().iter().skip(1).map(|v| v.max(0.0).sqrt()).collect();
        let ci = interval(&b, &s, q);
        (b, ci)
    } else {
        let p = x.ncols();
        (vec![0.0; p], vec![(0.0, 0.0); p])
    };

    let pbar = positives as f64 / y.len() as f64;
    let null_ll = y.len() as f64 * (pbar * pbar.ln() + (1.0 - pbar) * (1.0 - pbar).ln());
    Ok(RegressionResult {
        model: ModelKind::Logistic,
        intercept: core.beta[0],
        coefficients,
        std_errors: se,
        conf_intervals,
        standardized_coefficients,
        standardized_conf_intervals,
        r_squared: 1.0 - core.log_lik / null_ll,
        cv_r_squared: None,
        n_obs: y.len(),
        log_likelihood: Some(core.penalized_log_lik),
        iterations: core.iterations,
        converged: core.converged,
        ridge_applied: ridge,
    })
}

pub fn fit(model: ModelKind, x: &DMatrix<f64>, y: &[f64], options: &FitOptions) -> Result<RegressionResult> {
    match model {
        ModelKind::Ols => ols_fit(x, y, options),
        ModelKind::Logistic => logistic_fit(x, y, options),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::auc::auc;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn column(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    /// Normal equations solved by Gauss–Jordan elimination with partial
    /// pivoting; independent of the QR path.
    fn normal_equations(x: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
        let (n, p) = x.shape();
        let cols = p + 1;
        let at = |i: usize, j: usize| if j == 0 { 1.0 } else { x[(i, j - 1)] };
        let mut a = vec![vec![0.0; cols + 1]; cols];
        for (r, row) in a.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().take(cols).enumerate() {
                *cell = (0..n).map(|i| at(i, r) * at(i, c)).sum();
            }
            row[cols] = (0..n).map(|i| at(i, r) * y[i]).sum();
        }
        for col in 0..cols {
            let piv = (col..cols).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, piv);
            let d = a[col][col];
            for v in a[col].iter_mut() {
                *v /= d;
            }
            for r in 0..cols {
                if r != col {
                    let f = a[r][col];
                    let pivot_row = a[col].clone();
                    for (v, pv) in a[r].iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        a.iter().map(|row| row[cols]).collect()
    }

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let r = ols_fit(&column(&xs), &ys, &FitOptions::default()).unwrap();
        assert_relative_eq!(r.coefficients[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.intercept, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_outcome() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let r = ols_fit(&column(&xs), &[4.0; 10], &FitOptions::default()).unwrap();
        assert_eq!(r.coefficients, vec![0.0]);
        assert_eq!(r.r_squared, 0.0);
        assert_eq!(r.intercept, 4.0);
    }

    #[test]
    fn random_system_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(50, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y: Vec<f64> = (0..50)
            .map(|i| 0.5 - x[(i, 0)] + 2.0 * x[(i, 1)] + 0.1 * x[(i, 2)] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let r = ols_fit(&x, &y, &FitOptions::default()).unwrap();
        let oracle = normal_equations(&x, &y);
        assert!((r.intercept - oracle[0]).abs() < 1e-8);
        for j in 0..3 {
            assert!((r.coefficients[j] - oracle[j + 1]).abs() < 1e-8);
            let (lo, hi) = r.conf_intervals[j];
            assert!(lo <= r.coefficients[j] && r.coefficients[j] <= hi);
        }
    }

    #[test]
    fn collinear_columns_are_named() {
        let x = DMatrix::from_fn(20, 3, |i, j| match j {
            0 => i as f64,
            1 => (i * i) as f64,
            _ => 3.0 * i as f64 + 2.0,
        });
        let y: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        match ols_fit(&x, &y, &FitOptions::default()) {
            Err(Error::Collinear { columns }) => assert_eq!(columns, vec![2]),
            other => panic!("expected collinearity error, got {other:?}"),
        }
        let opts = FitOptions {
            ridge_fallback: true,
            ..FitOptions::default()
        };
        let r = ols_fit(&x, &y, &opts).unwrap();
        assert!(r.ridge_applied);
    }

    #[test]
    fn constant_predictor_is_collinear_with_intercept() {
        let x = DMatrix::from_fn(10, 2, |i, j| if j == 0 { i as f64 } else { 5.0 });
        assert_eq!(collinear_columns(&x), vec![1]);
    }

    #[test]
    fn logistic_null_predictor_ci_contains_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..300).map(|_| rng.sample(StandardNormal)).collect();
        let ys: Vec<f64> = (0..300).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect();
        let r = logistic_fit(&column(&xs), &ys, &FitOptions::default()).unwrap();
        assert!(r.converged);
        let (lo, hi) = r.conf_intervals[0];
        assert!(lo < 0.0 && 0.0 < hi, "({lo}, {hi})");
    }

    #[test]
    fn logistic_separated_data_stays_finite() {
        let xs: Vec<f64> = (0..20).map(|i| f64::from(i) - 9.5).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f64::from(u8::from(x > 0.0))).collect();
        let r = logistic_fit(&column(&xs), &ys, &FitOptions::default()).unwrap();
        assert!(r.coefficients[0].is_finite() && r.coefficients[0] > 0.0);
        let p = r.predict(&column(&xs));
        assert!(p.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(auc(&p, &ys).unwrap(), 1.0);
    }

    #[test]
    fn logistic_rejects_single_class() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            logistic_fit(&column(&xs), &[1.0; 4], &FitOptions::default()),
            Err(Error::SingleClass)
        ));
    }

    /// Penalized log-likelihood maximized by nested golden-section search:
    /// outer over the slope, inner over the intercept.
    fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > 1e-9 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        (a + b) / 2.0
    }

    #[test]
    fn logistic_slope_matches_golden_section_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| f64::from(u8::from(rng.random::<f64>() < sigmoid(0.3 + 1.2 * x))))
            .collect();
        let lambda = 1e-6 * 200.0;
        let pll = |a: f64, b: f64| -> f64 {
            xs.iter()
                .zip(&ys)
                .map(|(&x, &y)| {
                    let t = a + b * x;
                    y * t - (1.0 + t.exp()).ln()
                })
                .sum::<f64>()
                - 0.5 * lambda * b * b
        };
        let profile = |b: f64| {
            let a = golden_max(|a| pll(a, b), -10.0, 10.0);
            pll(a, b)
        };
        let slope = golden_max(profile, -10.0, 10.0);
        let r = logistic_fit(&column(&xs), &ys, &FitOptions::default()).unwrap();
        assert!((r.coefficients[0] - slope).abs() < 1e-4, "{} vs {slope}", r.coefficients[0]);
    }

    proptest! {
        #[test]
        fn standardized_coefficients_ignore_affine_rescaling(
            scale in 0.01f64..100.0, shift in -50.0f64..50.0, seed in 0u64..1000
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = DMatrix::from_fn(40, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y: Vec<f64> = (0..40)
                .map(|i| x[(i, 0)] - 0.5 * x[(i, 1)] + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let mut x2 = x.clone();
            for i in 0..40 {
                x2[(i, 0)] = x[(i, 0)] * scale + shift;
            }
            let a = ols_fit(&x, &y, &FitOptions::default()).unwrap();
            let b = ols_fit(&x2, &y, &FitOptions::default()).unwrap();
            for j in 0..2 {
                prop_assert!((a.standardized_coefficients[j] - b.standardized_coefficients[j]).abs() < 1e-9);
            }
            prop_assert!((a.coefficients[0] - b.coefficients[0] * scale).abs() < 1e-7 * (1.0 + a.coefficients[0].abs()));
        }
    }
}
