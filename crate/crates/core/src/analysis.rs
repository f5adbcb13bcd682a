//! Fitting feature systems to typological counts and comparing the fits.

use std::cmp::Ordering;

use serde::Serialize;

use crate::dataset::{response_vector, DependentVariable, TypologyDataset};
use crate::error::{Error, Result};
use crate::features::FeatureSystem;
use crate::glm::{fit_poisson, predict, FitOptions, FitResult};
use crate::order::WordOrder;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    pub system: String,
    pub dv: DependentVariable,
    pub fit: FitResult,
    /// Orders in the row sequence used for fitting.
    pub orders: Vec<WordOrder>,
    /// Counts the model was fitted to, aligned with `orders`.
    pub observed: Vec<u64>,
    /// Expected counts λ̂, aligned with `orders`.
    pub predictions: Vec<f64>,
    pub dof: usize,
}

impl ModelFit {
    pub fn prediction(&self, order: &WordOrder) -> Option<f64> {
        self.orders
            .iter()
            .position(|o| o == order)
            .map(|i| self.predictions[i])
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        self.fit
            .names
            .iter()
            .position(|n| n == name)
            .map(|i| self.fit.weights[i])
    }

    /// Akaike information criterion, `2k − 2 ln L`.
    pub fn aic(&self) -> f64 {
        2.0 * self.dof as f64 - 2.0 * self.fit.log_likelihood
    }

    /// Bayesian information criterion, `k ln n − 2 ln L`.
    pub fn bic(&self) -> f64 {
        self.dof as f64 * (self.orders.len() as f64).ln() - 2.0 * self.fit.log_likelihood
    }
}

/// Fits `fs` to the 24 orders of `ds` with default IRLS settings.
pub fn fit_model(fs: &FeatureSystem, ds: &TypologyDataset, dv: DependentVariable) -> Result<ModelFit> {
    fit_model_with(fs, ds, dv, &FitOptions::default())
}

pub fn fit_model_with(
    fs: &FeatureSystem,
    ds: &TypologyDataset,
    dv: DependentVariable,
    opts: &FitOptions,
) -> Result<ModelFit> {
    let orders = WordOrder::all().to_vec();
    let x = fs.design_matrix(&orders)?;
    let y = response_vector(ds, dv, &orders)?;
    let fit = fit_poisson(&x, &y, opts)?;
    let predictions = predict(&fit.weights, &x)?;
    Ok(ModelFit {
        system: fs.name().to_string(),
        dv,
        dof: fs.dof(),
        observed: y.counts().to_vec(),
        predictions,
        orders,
        fit,
    })
}

/// `(O − E)·|O − E| / E`: the Pearson contribution of one cell, signed by
/// the direction of the error.
pub fn signed_chi2(observed: u64, expected: f64) -> Result<f64> {
    if !(expected > 0.0) || !expected.is_finite() {
        return Err(Error::NonPositiveExpected(expected));
    }
    let d = observed as f64 - expected;
    Ok(d * d.abs() / expected)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrepancy {
    pub order: WordOrder,
    pub observed: u64,
    pub predicted: f64,
    pub signed_chi2: f64,
}

/// Per-order signed χ² discrepancies of `mf` against the counts of `ds`
/// for `dv`. Rows follow the fitting sequence.
pub fn discrepancy_table(
    mf: &ModelFit,
    ds: &TypologyDataset,
    dv: DependentVariable,
) -> Result<Vec<Discrepancy>> {
    if mf.dv != dv {
        return Err(Error::DvMismatch {
            fitted: mf.dv.to_string(),
            requested: dv.to_string(),
        });
    }
    mf.orders
        .iter()
        .zip(&mf.predictions)
        .map(|(order, &predicted)| {
            let observed = ds
                .count(order, dv)
                .ok_or_else(|| Error::MissingOrders {
                    source_name: ds.source().into(),
                    missing: vec![*order],
                })?;
            Ok(Discrepancy {
                order: *order,
                observed,
                predicted,
                signed_chi2: signed_chi2(observed, predicted)?,
            })
        })
        .collect()
}

/// Pearson's X² statistic, `Σ (O − E)² / E`.
pub fn pearson_x2(observed: &[u64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() {
        return Err(Error::Dimension(format!(
            "{} observed vs {} expected",
            observed.len(),
            expected.len()
        )));
    }
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| signed_chi2(o, e).map(f64::abs))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSummary {
    pub system: String,
    pub dof: usize,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub rows: Vec<Discrepancy>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SystemOutcome {
    Fitted(SystemSummary),
    Failed {
        system: String,
        dof: usize,
        error: String,
    },
}

impl SystemOutcome {
    pub fn system(&self) -> &str {
        match self {
            SystemOutcome::Fitted(s) => &s.system,
            SystemOutcome::Failed { system, .. } => system,
        }
    }

    pub fn dof(&self) -> usize {
        match self {
            SystemOutcome::Fitted(s) => s.dof,
            SystemOutcome::Failed { dof, .. } => *dof,
        }
    }

    pub fn log_likelihood(&self) -> Option<f64> {
        match self {
            SystemOutcome::Fitted(s) => Some(s.log_likelihood),
            SystemOutcome::Failed { .. } => None,
        }
    }

    pub fn summary(&self) -> Option<&SystemSummary> {
        match self {
            SystemOutcome::Fitted(s) => Some(s),
            SystemOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub dv: DependentVariable,
    /// Fitted systems by descending log-likelihood, then failures.
    pub systems: Vec<SystemOutcome>,
}

impl ComparisonReport {
    pub fn get(&self, system: &str) -> Option<&SystemOutcome> {
        self.systems.iter().find(|s| s.system() == system)
    }

    pub fn ranking(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.system()).collect()
    }
}

fn summarize(fs: &FeatureSystem, ds: &TypologyDataset, dv: DependentVariable) -> SystemOutcome {
    let attempt = || -> Result<SystemSummary> {
        let mf = fit_model(fs, ds, dv)?;
        let rows = discrepancy_table(&mf, ds, dv)?;
        Ok(SystemSummary {
            system: mf.system.clone(),
            dof: mf.dof,
            log_likelihood: mf.fit.log_likelihood,
            aic: mf.aic(),
            bic: mf.bic(),
            converged: mf.fit.converged,
            rows,
        })
    };
    match attempt() {
        Ok(s) if s.converged => SystemOutcome::Fitted(s),
        Ok(s) => SystemOutcome::Failed {
            system: s.system,
            dof: s.dof,
            error: "IRLS did not converge".into(),
        },
        Err(e) => SystemOutcome::Failed {
            system: fs.name().to_string(),
            dof: fs.dof(),
            error: e.to_string(),
        },
    }
}

/// Fits every system to the same dependent variable and ranks the results.
/// A failed fit is reported in place and does not stop the others.
pub fn compare_all(
    systems: &[FeatureSystem],
    ds: &TypologyDataset,
    dv: DependentVariable,
) -> ComparisonReport {
    let mut outcomes: Vec<SystemOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = systems
            .iter()
            .map(|fs| scope.spawn(move || summarize(fs, ds, dv)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fit thread panicked"))
            .collect()
    });
    outcomes.sort_by(|a, b| match (a.log_likelihood(), b.log_likelihood()) {
        (Some(x), Some(y)) => y
            .partial_cmp(&x)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.system().cmp(b.system())),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.system().cmp(b.system()),
    });
    ComparisonReport {
        dv,
        systems: outcomes,
    }
}
