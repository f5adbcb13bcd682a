//! Poisson regression with log link.
//!
//! The model is `λ_i = exp(V_i)` with `V_i = w_b + Σ_j w_j f_ij`, where every
//! `f_ij` is a 0/1 indicator. Weights are fitted by IRLS (Newton's method
//! with the expected information, which coincides with the observed
//! information for the canonical link) and summarised with Wald statistics.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Linear predictors above this value are treated as divergence.
pub const OVERFLOW_GUARD: f64 = 700.0;

/// Scaled residual norm below which a design column counts as dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Exact `ln(n!)` below this bound is computed by summing logarithms.
const DIRECT_LN_FACTORIAL_MAX: u64 = 1024;

/// Design matrix for a Poisson regression: an all-ones intercept column
/// followed by 0/1 indicator columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    names: Vec<String>,
}

impl DesignMatrix {
    /// Builds a design from indicator rows. `feature_names` names the
    /// non-intercept columns; the intercept is added as column 0 and named
    /// `(Bias)`.
    pub fn with_intercept<R: AsRef<[u8]>>(feature_names: &[String], rows: &[R]) -> Result<Self> {
        let m = feature_names.len();
        let mut values = DMatrix::zeros(rows.len(), m + 1);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::Dimension(format!(
                    "row {i} has {} indicators, expected {m}",
                    row.len()
                )));
            }
            values[(i, 0)] = 1.0;
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::Dimension(format!(
                        "row {i}, column {}: indicator value {v} is not 0 or 1",
                        feature_names[j]
                    )));
                }
                values[(i, j + 1)] = f64::from(v);
            }
        }
        let mut names = Vec::with_capacity(m + 1);
        names.push("(Bias)".to_string());
        names.extend(feature_names.iter().cloned());
        Ok(DesignMatrix { values, names })
    }

    /// An intercept-only design with `rows` observations.
    pub fn intercept_only(rows: usize) -> Self {
        let empty: Vec<[u8; 0]> = vec![[]; rows];
        DesignMatrix::with_intercept(&[], &empty).expect("empty rows are valid")
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Indicator values of row `i`, excluding the intercept.
    pub fn indicators(&self, i: usize) -> Vec<f64> {
        (1..self.cols()).map(|j| self.values[(i, j)]).collect()
    }

    /// Returns the names of columns that are linear combinations of the
    /// columns before them. Columns are scaled to unit norm and
    /// orthogonalised in order; a residual norm under [`RANK_TOLERANCE`]
    /// marks the column as dependent.
    pub fn dependent_columns(&self) -> Vec<String> {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        let mut dependent = Vec::new();
        for j in 0..self.cols() {
            let col = self.values.column(j).into_owned();
            let norm = col.norm();
            if norm == 0.0 {
                dependent.push(self.names[j].clone());
                continue;
            }
            let mut r = col / norm;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for q in &basis {
                    let proj = q.dot(&r);
                    r.axpy(-proj, q, 1.0);
                }
            }
            let rn = r.norm();
            if rn < RANK_TOLERANCE {
                dependent.push(self.names[j].clone());
            } else {
                basis.push(r / rn);
            }
        }
        dependent
    }
}

/// Observed counts, one per design row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResponseVector(Vec<u64>);

impl ResponseVector {
    pub fn new(counts: Vec<u64>) -> Self {
        ResponseVector(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    fn as_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(|&c| c as f64))
    }
}

impl From<Vec<u64>> for ResponseVector {
    fn from(v: Vec<u64>) -> Self {
        ResponseVector(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Bound on the sup-norm of the score `Xᵀ(y − λ)` at convergence.
    pub tol: f64,
    /// Bound on the relative change in deviance between iterations.
    pub deviance_tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-10,
            deviance_tol: 1e-12,
            max_iter: 100,
        }
    }
}

/// Maximum-likelihood fit with Wald summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Column names, `(Bias)` first.
    pub names: Vec<String>,
    /// `weights[0]` is the bias, then one weight per feature.
    pub weights: Vec<f64>,
    /// Inverse Fisher information at the optimum.
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    pub log_likelihood: f64,
    pub deviance: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Xᵀ(y − λ̂)‖∞` at the returned weights.
    pub gradient_norm: f64,
}

impl FitResult {
    /// Number of free parameters, bias included.
    pub fn dof(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaldSummary {
    pub std_errors: Vec<f64>,
    pub p_values: Vec<f64>,
}

/// `ln(n!)`, summed directly for moderate `n`.
pub fn ln_factorial(n: u64) -> f64 {
    if n <= DIRECT_LN_FACTORIAL_MAX {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Natural log of the Poisson probability of `count` under rate `lambda`.
pub fn poisson_logpmf(count: u64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositiveRate(lambda));
    }
    let f = count as f64;
    Ok(f * lambda.ln() - lambda - ln_factorial(count))
}

/// `V = w_b + Σ w_i f_i` for a single row of indicators (intercept excluded).
pub fn linear_predictor(weights: &[f64], row: &[f64]) -> Result<f64> {
    if weights.len() != row.len() + 1 {
        return Err(Error::Dimension(format!(
            "{} weights for {} indicators",
            weights.len(),
            row.len()
        )));
    }
    Ok(weights[0] + weights[1..].iter().zip(row).map(|(w, f)| w * f).sum::<f64>())
}

fn check_alignment(weights: Option<&[f64]>, x: &DesignMatrix, y: &ResponseVector) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::Dimension(format!(
            "design has {} rows but response has {} counts",
            x.rows(),
            y.len()
        )));
    }
    if let Some(w) = weights {
        if w.len() != x.cols() {
            return Err(Error::Dimension(format!(
                "{} weights for {} design columns",
                w.len(),
                x.cols()
            )));
        }
    }
    Ok(())
}

fn eta(weights: &DVector<f64>, x: &DesignMatrix) -> Result<DVector<f64>> {
    let v = x.values() * weights;
    if let Some((row, &value)) = v
        .iter()
        .enumerate()
        .find(|(_, &v)| v > OVERFLOW_GUARD || v.is_nan())
    {
        return Err(Error::Overflow { row, value });
    }
    Ok(v)
}

/// Expected counts `exp(Xw)`.
pub fn predict(weights: &[f64], x: &DesignMatrix) -> Result<Vec<f64>> {
    if weights.len() != x.cols() {
        return Err(Error::Dimension(format!(
            "{} weights for {} design columns",
            weights.len(),
            x.cols()
        )));
    }
    let w = DVector::from_column_slice(weights);
    Ok(eta(&w, x)?.iter().map(|v| v.exp()).collect())
}

/// Σ_i ln p(y_i | exp(V_i)), including the `−ln(y_i!)` constants.
pub fn log_likelihood(weights: &[f64], x: &DesignMatrix, y: &ResponseVector) -> Result<f64> {
    check_alignment(Some(weights), x, y)?;
    let lambda = predict(weights, x)?;
    y.counts()
        .iter()
        .zip(&lambda)
        .map(|(&c, &l)| poisson_logpmf(c, l))
        .sum()
}

/// Gradient of the log-likelihood, `Xᵀ(y − exp(Xw))`.
pub fn score(weights: &[f64], x: &DesignMatrix, y: &ResponseVector) -> Result<Vec<f64>> {
    check_alignment(Some(weights), x, y)?;
    let lambda = DVector::from_vec(predict(weights, x)?);
    let resid = y.as_vector() - lambda;
    Ok((x.values().transpose() * resid).iter().copied().collect())
}

fn deviance(y: &DVector<f64>, lambda: &DVector<f64>) -> f64 {
    2.0 * y
        .iter()
        .zip(lambda.iter())
        .map(|(&o, &e)| {
            let t = if o > 0.0 { o * (o / e).ln() } else { 0.0 };
            t - (o - e)
        })
        .sum::<f64>()
}

fn fisher_information(x: &DesignMatrix, lambda: &DVector<f64>) -> DMatrix<f64> {
    let xv = x.values();
    let mut weighted = xv.clone();
    for (i, mut row) in weighted.row_iter_mut().enumerate() {
        row *= lambda[i];
    }
    xv.transpose() * weighted
}

/// Maximum-likelihood Poisson regression by IRLS.
///
/// Starts from `w_b = ln(mean(y) + 0.5)` with all other weights zero. The
/// fit is marked converged once the relative change in deviance drops below
/// `opts.deviance_tol` and the score sup-norm is at most `opts.tol`.
/// Exhausting `opts.max_iter` returns the last iterate with
/// `converged = false`.
pub fn fit_poisson(x: &DesignMatrix, y: &ResponseVector, opts: &FitOptions) -> Result<FitResult> {
    check_alignment(None, x, y)?;
    if x.rows() == 0 {
        return Err(Error::Dimension("no observations".into()));
    }
    let dependent = x.dependent_columns();
    if !dependent.is_empty() {
        return Err(Error::SingularDesign { columns: dependent });
    }

    let yv = y.as_vector();
    let k = x.cols();
    let mean = yv.sum() / yv.len() as f64;
    let mut w = DVector::zeros(k);
    w[0] = (mean + 0.5).ln();

    let mut lambda = eta(&w, x)?.map(f64::exp);
    let mut dev = deviance(&yv, &lambda);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let grad = x.values().transpose() * (&yv - &lambda);
        let info = fisher_information(x, &lambda);
        let step = info
            .clone()
            .cholesky()
            .map(|c| c.solve(&grad))
            .ok_or_else(|| Error::SingularDesign {
                columns: x.names().to_vec(),
            })?;

        // step halving keeps the deviance from increasing
        let mut scale = 1.0;
        let (new_w, new_lambda, new_dev) = loop {
            let cand = &w + &step * scale;
            match eta(&cand, x) {
                Ok(v) => {
                    let l = v.map(f64::exp);
                    let d = deviance(&yv, &l);
                    if d <= dev * (1.0 + 1e-12) + 1e-12 || scale < 1e-8 {
                        break (cand, l, d);
                    }
                }
                Err(e) if scale < 1e-8 => return Err(e),
                Err(_) => {}
            }
            scale *= 0.5;
        };

        let rel_change = (dev - new_dev).abs() / (new_dev.abs() + 0.1);
        w = new_w;
        lambda = new_lambda;
        dev = new_dev;

        let grad_norm = (x.values().transpose() * (&yv - &lambda)).amax();
        if rel_change < opts.deviance_tol && grad_norm <= opts.tol {
            converged = true;
            break;
        }
    }

    let grad = x.values().transpose() * (&yv - &lambda);
    let info = fisher_information(x, &lambda);
    let cov = info
        .try_inverse()
        .ok_or_else(|| Error::NotPsd("Fisher information is not invertible".into()))?;
    let cov = (&cov + cov.transpose()) * 0.5;
    let covariance: Vec<Vec<f64>> = cov.row_iter().map(|r| r.iter().copied().collect()).collect();
    let weights: Vec<f64> = w.iter().copied().collect();
    let wald = wald_inference(&weights, &covariance)?;
    let log_likelihood = y
        .counts()
        .iter()
        .zip(lambda.iter())
        .map(|(&c, &l)| poisson_logpmf(c, l))
        .sum::<Result<f64>>()?;

    Ok(FitResult {
        names: x.names().to_vec(),
        weights,
        covariance,
        std_errors: wald.std_errors,
        p_values: wald.p_values,
        log_likelihood,
        deviance: dev,
        iterations,
        converged,
        gradient_norm: grad.amax(),
    })
}

/// Two-sided standard-normal tail probability `P(|Z| ≥ |z|)`.
pub fn two_sided_normal_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Wald standard errors and two-sided p-values from a covariance matrix.
pub fn wald_inference(weights: &[f64], covariance: &[Vec<f64>]) -> Result<WaldSummary> {
    let k = weights.len();
    if covariance.len() != k || covariance.iter().any(|r| r.len() != k) {
        return Err(Error::Dimension(format!(
            "covariance must be {k}x{k} to match the weights"
        )));
    }
    let m = DMatrix::from_fn(k, k, |i, j| covariance[i][j]);
    let scale = m.amax().max(f64::MIN_POSITIVE);
    if (&m - m.transpose()).amax() > 1e-9 * scale {
        return Err(Error::NotPsd("matrix is not symmetric".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPsd("matrix has non-finite entries".into()));
    }
    let min_eig = m.symmetric_eigenvalues().min();
    if min_eig < -1e-10 * scale {
        return Err(Error::NotPsd(format!("smallest eigenvalue {min_eig:e}")));
    }
    let std_errors: Vec<f64> = (0..k).map(|i| m[(i, i)].max(0.0).sqrt()).collect();
    let p_values = weights
        .iter()
        .zip(&std_errors)
        .map(|(&w, &se)| {
            if se == 0.0 {
                if w == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                two_sided_normal_p(w / se)
            }
        })
        .collect();
    Ok(WaldSummary {
        std_errors,
        p_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn logpmf_trivial_values() {
        assert!((poisson_logpmf(0, 1.0).unwrap() + 1.0).abs() < 1e-15);
        assert!((poisson_logpmf(1, 1.0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn logpmf_at_84() {
        // 84 ln 84 − 84 − ln(84!) evaluated with 50-digit arithmetic
        let expected = -3.135_338_991_431_963_9;
        let got = poisson_logpmf(84, 84.0).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got}");
    }

    #[test]
    fn logpmf_rejects_nonpositive_rate() {
        assert!(matches!(poisson_logpmf(0, 0.0), Err(Error::NonPositiveRate(_))));
        assert!(matches!(poisson_logpmf(3, -1.0), Err(Error::NonPositiveRate(_))));
        assert!(poisson_logpmf(3, f64::NAN).is_err());
    }

    #[test]
    fn ln_factorial_switches_smoothly() {
        let direct: f64 = (2..=2000u64).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(2000) - direct).abs() / direct < 1e-12);
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
    }

    #[test]
    fn linear_predictor_examples() {
        let w = [3.9815, -1.5382, -1.3726, -1.7200, -1.0936, -0.7480];
        let v = linear_predictor(&w, &[0.0; 5]).unwrap();
        assert_eq!(v, 3.9815);
        assert!((v.exp() - 53.6).abs() < 0.05);
        assert_eq!(linear_predictor(&[0.0; 4], &[1.0, 0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(linear_predictor(&[1.0, 2.0], &[1.0]).unwrap(), 3.0);
        assert!(matches!(
            linear_predictor(&[1.0, 2.0], &[1.0, 1.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn intercept_only_is_log_mean() {
        let x = DesignMatrix::intercept_only(2);
        let fit = fit_poisson(&x, &ResponseVector::new(vec![2, 4]), &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.weights[0] - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_design_names_column() {
        let rows = vec![[1u8, 1], [0, 0], [1, 1], [0, 0]];
        let x = DesignMatrix::with_intercept(&names(2), &rows).unwrap();
        match fit_poisson(&x, &ResponseVector::new(vec![1, 2, 3, 4]), &FitOptions::default()) {
            Err(Error::SingularDesign { columns }) => assert_eq!(columns, vec!["f2"]),
            other => panic!("unexpected {other:?}"),
        }
        // a constant column is confounded with the bias
        let rows = vec![[1u8], [1], [1]];
        let x = DesignMatrix::with_intercept(&names(1), &rows).unwrap();
        assert!(fit_poisson(&x, &ResponseVector::new(vec![1, 2, 3]), &FitOptions::default()).is_err());
    }

    #[test]
    fn non_binary_indicator_rejected() {
        let rows = vec![[2u8]];
        assert!(DesignMatrix::with_intercept(&names(1), &rows).is_err());
    }

    #[test]
    fn misaligned_response_rejected() {
        let x = DesignMatrix::intercept_only(3);
        assert!(matches!(
            fit_poisson(&x, &ResponseVector::new(vec![1, 2]), &FitOptions::default()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let rows = vec![[0u8], [1], [0], [1]];
        let x = DesignMatrix::with_intercept(&names(1), &rows).unwrap();
        let opts = FitOptions {
            max_iter: 1,
            ..FitOptions::default()
        };
        let fit = fit_poisson(&x, &ResponseVector::new(vec![3, 9, 5, 20]), &opts).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 1);
    }

    #[test]
    fn wald_examples() {
        let s = wald_inference(&[0.0], &[vec![1.0]]).unwrap();
        assert_eq!(s.std_errors, vec![1.0]);
        assert!((s.p_values[0] - 1.0).abs() < 1e-15);

        let se = 0.1641;
        let s = wald_inference(&[-0.7480], &[vec![se * se]]).unwrap();
        assert!((s.std_errors[0] - se).abs() < 1e-12);
        assert!(s.p_values[0] < 0.001);
    }

    #[test]
    fn wald_rejects_indefinite_covariance() {
        let cov = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(matches!(wald_inference(&[0.0, 0.0], &cov), Err(Error::NotPsd(_))));
        let cov = vec![vec![1.0, 0.5], vec![0.0, 1.0]];
        assert!(matches!(wald_inference(&[0.0, 0.0], &cov), Err(Error::NotPsd(_))));
    }

    #[test]
    fn log_likelihood_is_sum_of_rows() {
        let rows = vec![[0u8, 1], [1, 0], [1, 1]];
        let x = DesignMatrix::with_intercept(&names(2), &rows).unwrap();
        let y = ResponseVector::new(vec![4, 0, 7]);
        let w = [0.3, -0.2, 0.9];
        let total = log_likelihood(&w, &x, &y).unwrap();
        let mut sum = 0.0;
        for i in 0..3 {
            let v = linear_predictor(&w, &x.indicators(i)).unwrap();
            sum += poisson_logpmf(y.counts()[i], v.exp()).unwrap();
        }
        assert!((total - sum).abs() < 1e-12);
    }

    #[test]
    fn zero_counts_approach_zero_log_likelihood() {
        let x = DesignMatrix::intercept_only(5);
        let y = ResponseVector::new(vec![0; 5]);
        let mut prev = f64::NEG_INFINITY;
        for v in [2.0, 0.0, -2.0, -5.0, -10.0, -20.0] {
            let ll = log_likelihood(&[v], &x, &y).unwrap();
            assert!(ll > prev && ll < 0.0);
            prev = ll;
        }
        assert!(prev > -1e-7);
    }

    #[test]
    fn overflow_guard_trips() {
        let x = DesignMatrix::intercept_only(1);
        assert!(matches!(
            predict(&[800.0], &x),
            Err(Error::Overflow { row: 0, .. })
        ));
    }
}
