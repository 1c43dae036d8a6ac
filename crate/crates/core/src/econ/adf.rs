//! Augmented Dickey-Fuller unit-root test.
//!
//! Test regression:
//!
//! ```text
//! dy_t = a (+ d*t) + g*y_{t-1} + sum_{i=1..k} f_i*dy_{t-i} + e_t
//! ```
//!
//! The lag order `k` minimizes AIC over `0..=max_lags`, all candidates fitted
//! on the common sample that the largest lag allows. The chosen model is then
//! refitted on every observation available to it. The statistic is the
//! t-ratio of `g`, compared against asymptotic critical values.

use std::collections::BTreeMap;

use serde::Serialize;

use super::linalg::Matrix;
use super::ols::{ols, OlsFit};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Deterministic {
    Constant,
    ConstantTrend,
}

impl std::str::FromStr for Deterministic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c" | "constant" => Ok(Deterministic::Constant),
            "ct" | "trend" | "constant-trend" | "constant_trend" => Ok(Deterministic::ConstantTrend),
            other => Err(Error::InvalidArgument(format!("unknown ADF specification `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Significance {
    #[serde(rename = "1%")]
    OnePercent,
    #[serde(rename = "5%")]
    FivePercent,
    #[serde(rename = "10%")]
    TenPercent,
}

impl Significance {
    pub const ALL: [Significance; 3] = [
        Significance::OnePercent,
        Significance::FivePercent,
        Significance::TenPercent,
    ];
}

/// Asymptotic tau critical values, MacKinnon (2010), "Critical Values for
/// Cointegration Tests", Queen's Economics Department Working Paper 1227,
/// Table 2, N = 1, leading (T = infinity) response-surface coefficient.
pub fn critical_value(spec: Deterministic, level: Significance) -> f64 {
    match (spec, level) {
        (Deterministic::Constant, Significance::OnePercent) => -3.43035,
        (Deterministic::Constant, Significance::FivePercent) => -2.86154,
        (Deterministic::Constant, Significance::TenPercent) => -2.56677,
        (Deterministic::ConstantTrend, Significance::OnePercent) => -3.95877,
        (Deterministic::ConstantTrend, Significance::FivePercent) => -3.41049,
        (Deterministic::ConstantTrend, Significance::TenPercent) => -3.12705,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdfResult<T> {
    pub tau_statistic: T,
    pub lags_used: usize,
    pub max_lags: usize,
    pub n_obs: usize,
    pub deterministic_spec: Deterministic,
    pub rejected_at: Vec<Significance>,
    pub critical_values: BTreeMap<Significance, T>,
}

impl<T> AdfResult<T> {
    pub fn rejects_at(&self, level: Significance) -> bool {
        self.rejected_at.contains(&level)
    }
}

/// Default maximum lag, `floor(12 * (T/100)^(1/4))`.
pub fn schwert_max_lags(t: usize) -> usize {
    (12.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Builds the ADF design for lag order `lags`, using observations
/// `first..len` of the levels series (0-based index of `y_t`).
/// Column order: intercept, [trend], lagged level, lagged differences.
pub fn adf_design<T: Scalar>(xs: &[T], spec: Deterministic, lags: usize, first: usize) -> Result<(Matrix<T>, Vec<T>)> {
    assert!(first > lags, "first usable observation must exceed the lag order");
    let diff = |t: usize| xs[t] - xs[t - 1];
    let rows = first..xs.len();
    let mut cols: Vec<Vec<T>> = vec![rows.clone().map(|_| T::one()).collect()];
    if spec == Deterministic::ConstantTrend {
        cols.push(rows.clone().map(T::of_usize).collect());
    }
    cols.push(rows.clone().map(|t| xs[t - 1]).collect());
    for i in 1..=lags {
        cols.push(rows.clone().map(|t| diff(t - i)).collect());
    }
    let y = rows.map(diff).collect();
    Ok((Matrix::from_columns(&cols)?, y))
}

/// Column index of the lagged level in [`adf_design`].
pub fn level_column(spec: Deterministic) -> usize {
    match spec {
        Deterministic::Constant => 1,
        Deterministic::ConstantTrend => 2,
    }
}

fn fit<T: Scalar>(xs: &[T], spec: Deterministic, lags: usize, first: usize) -> Result<OlsFit<T>> {
    let (x, y) = adf_design(xs, spec, lags, first)?;
    ols(&x, &y).map_err(|e| match e {
        Error::SingularDesign => Error::Degenerate("ADF regression is singular (zero-variance regressor)".into()),
        other => other,
    })
}

pub fn adf_test<T: Scalar>(xs: &[T], spec: Deterministic, max_lags: Option<usize>) -> Result<AdfResult<T>> {
    let n = xs.len();
    let max_lags = max_lags.unwrap_or_else(|| schwert_max_lags(n));
    if n < 15 + max_lags {
        return Err(Error::InsufficientData(format!(
            "ADF with up to {max_lags} lags needs at least {} observations, got {n}",
            15 + max_lags
        )));
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("ADF input contains non-finite values".into()));
    }

    let mut best: Option<(usize, T)> = None;
    for lags in 0..=max_lags {
        let f = fit(xs, spec, lags, max_lags + 1)?;
        let aic = f.aic();
        if best.is_none_or(|(_, b)| aic < b) {
            best = Some((lags, aic));
        }
    }
    let (lags_used, _) = best.expect("at least one lag order is evaluated");

    let final_fit = fit(xs, spec, lags_used, lags_used + 1)?;
    let tau = final_fit.t_stat(level_column(spec));
    if !tau.is_finite() {
        return Err(Error::Degenerate(
            "ADF regression fits exactly; tau is undefined".into(),
        ));
    }
    let critical_values: BTreeMap<_, _> = Significance::ALL
        .iter()
        .map(|&l| (l, T::of(critical_value(spec, l))))
        .collect();
    let rejected_at = Significance::ALL
        .iter()
        .copied()
        .filter(|l| tau < critical_values[l])
        .collect();
    Ok(AdfResult {
        tau_statistic: tau,
        lags_used,
        max_lags,
        n_obs: final_fit.n,
        deterministic_spec: spec,
        rejected_at,
        critical_values,
    })
}
