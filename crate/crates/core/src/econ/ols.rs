//! Ordinary least squares shared by detrending, imputation, ADF and break search.

use serde::Serialize;

use super::linalg::{least_squares, Matrix};
use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit<T> {
    pub coefficients: Vec<T>,
    pub std_errors: Vec<T>,
    pub residuals: Vec<T>,
    pub ssr: T,
    /// Centered R², clamped to `[0, 1]`; 1 for a constant response.
    pub r_squared: T,
    pub n: usize,
    pub k: usize,
}

impl<T: Scalar> OlsFit<T> {
    /// t-statistic of coefficient `j`.
    pub fn t_stat(&self, j: usize) -> T {
        self.coefficients[j] / self.std_errors[j]
    }

    /// Residual variance with `n - k` degrees of freedom.
    pub fn sigma2(&self) -> T {
        self.ssr / T::of_usize(self.n - self.k)
    }

    /// Gaussian AIC up to a constant: `n ln(SSR/n) + 2k`.
    pub fn aic(&self) -> T {
        let n = T::of_usize(self.n);
        n * (self.ssr / n).ln() + T::of_usize(2 * self.k)
    }
}

/// Fits `y` on the columns of `design` (which should include an intercept
/// column when one is wanted). Rank-deficient designs are rejected.
pub fn ols<T: Scalar>(design: &Matrix<T>, y: &[T]) -> Result<OlsFit<T>> {
    let (n, k) = (design.rows(), design.cols());
    if k == 0 {
        return Err(Error::InvalidArgument("design has no columns".into()));
    }
    if n < k + 1 {
        return Err(Error::InsufficientData(format!("{n} observations for {k} parameters")));
    }
    if y.iter().any(|v| !v.is_finite()) || (0..k).any(|j| design.column(j).iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument("non-finite value in regression input".into()));
    }
    let ls = least_squares(design, y)?;
    if !ls.is_full_rank(k) {
        return Err(Error::SingularDesign);
    }
    let fitted = design.mul_vec(&ls.coefficients);
    let residuals: Vec<T> = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
    let ssr = residuals.iter().fold(T::zero(), |s, &e| s + e * e);
    let ybar = mean(y);
    let sst = y.iter().fold(T::zero(), |s, &v| s + (v - ybar) * (v - ybar));
    // A constant response is fitted perfectly by the intercept.
    let r_squared = if sst > T::zero() {
        (T::one() - ssr / sst).max(T::zero()).min(T::one())
    } else {
        T::one()
    };
    let sigma2 = ssr / T::of_usize(n - k);
    let std_errors = ls.inverse_gram_diagonal.iter().map(|&d| (sigma2 * d).sqrt()).collect();
    Ok(OlsFit {
        coefficients: ls.coefficients,
        std_errors,
        residuals,
        ssr,
        r_squared,
        n,
        k,
    })
}
