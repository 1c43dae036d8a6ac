//! Endogenous multiple structural break detection.
//!
//! Each regime is an intercept plus AR(p) regression fitted inside the
//! segment: the first `p` observations of a segment only serve as lags. For
//! every break count `m` up to the configured maximum, dynamic programming
//! finds the partition into `m + 1` segments with minimal total SSR; BIC then
//! picks `m`.
//!
//! Segment SSRs come from Gaussian elimination on accumulated cross-product
//! matrices `[1, y_{t-1}, .., y_{t-p}, y_t]`, so every admissible segment
//! costs `O(p^3)` after an `O(p^2)` update. The series is centered first,
//! which leaves every SSR unchanged because each regime has an intercept.

use serde::{Deserialize, Serialize};

use super::linalg::{least_squares, Matrix};
use crate::calendar::YearMonth;
use crate::error::{Error, Result};
use crate::scalar::{mean, rank_tolerance, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BreakModelConfig {
    pub max_breaks: usize,
    /// Minimum segment length as a fraction of the sample.
    pub trim_fraction: f64,
    /// Autoregressive order of each regime.
    pub ar_order: usize,
}

impl Default for BreakModelConfig {
    fn default() -> Self {
        Self {
            max_breaks: 5,
            trim_fraction: 0.15,
            ar_order: 1,
        }
    }
}

impl BreakModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.trim_fraction > 0.0 && self.trim_fraction < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "trim fraction must lie in (0, 0.5), got {}",
                self.trim_fraction
            )));
        }
        Ok(())
    }

    /// `max(ceil(trim * T), p + 2)`.
    pub fn min_segment_length(&self, t: usize) -> usize {
        let trimmed = (self.trim_fraction * t as f64 - 1e-9).ceil().max(0.0) as usize;
        trimmed.max(self.ar_order + 2)
    }
}

/// Least-squares fit of one regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentFit<T> {
    /// First index of the segment.
    pub start: usize,
    /// One past the last index.
    pub end: usize,
    /// Intercept followed by AR coefficients (in the centered units the
    /// search works in, i.e. intercept relative to the series mean).
    pub coefficients: Vec<T>,
    pub ssr: T,
    pub n_obs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakResult<T> {
    /// First index of each new regime, strictly increasing.
    pub break_indices: Vec<usize>,
    /// Month of each break, when the series is calendar indexed.
    pub break_months: Vec<YearMonth>,
    pub n_breaks: usize,
    /// Minimal total SSR for each candidate break count `m` (index = m).
    pub ssr_by_m: Vec<T>,
    pub bic_by_m: Vec<T>,
    /// Optimal break positions for each candidate `m`.
    pub breaks_by_m: Vec<Vec<usize>>,
    pub segment_fits: Vec<SegmentFit<T>>,
    pub config: BreakModelConfig,
    pub n: usize,
}

impl<T: Scalar> BreakResult<T> {
    /// Attaches calendar months, with index 0 at `start`.
    pub fn with_start(mut self, start: YearMonth) -> Self {
        self.break_months = self.break_indices.iter().map(|&i| start.plus(i as i64)).collect();
        self
    }
}

/// SSR of the projection of the last variable on the others, from their
/// cross-product matrix (row-major, `d x d`). Near-dependent regressors are
/// skipped, so rank-deficient segments get the SSR of their column space.
fn projected_ssr<T: Scalar>(cross: &[T], d: usize, work: &mut Vec<T>) -> T {
    let tol = rank_tolerance::<T>();
    work.clear();
    work.extend_from_slice(cross);
    for k in 0..d - 1 {
        let orig = cross[k * d + k];
        let pivot = work[k * d + k];
        if orig <= T::zero() || pivot <= tol * orig {
            continue;
        }
        for i in k + 1..d {
            let f = work[i * d + k] / pivot;
            if f == T::zero() {
                continue;
            }
            for j in k + 1..d {
                work[i * d + j] = work[i * d + j] - f * work[k * d + j];
            }
        }
    }
    work[d * d - 1].max(T::zero())
}

/// SSR of every admissible segment `[i, j)` with `j - i >= h`, as a dense
/// `(T+1) x (T+1)` table (infinite where inadmissible).
fn segment_costs<T: Scalar>(ys: &[T], p: usize, h: usize) -> Vec<T> {
    let n = ys.len();
    let d = p + 2;
    let width = n + 1;
    let mut cost = vec![T::infinity(); width * width];
    let z: Vec<Vec<T>> = (0..n)
        .map(|t| {
            if t < p {
                return Vec::new();
            }
            let mut v = Vec::with_capacity(d);
            v.push(T::one());
            v.extend((1..=p).map(|l| ys[t - l]));
            v.push(ys[t]);
            v
        })
        .collect();

    let mut cross = vec![T::zero(); d * d];
    let mut work = Vec::with_capacity(d * d);
    for i in 0..n {
        if n - i < h {
            break;
        }
        cross.iter_mut().for_each(|c| *c = T::zero());
        for t in i + p..n {
            let zt = &z[t];
            for a in 0..d {
                for b in 0..d {
                    cross[a * d + b] = cross[a * d + b] + zt[a] * zt[b];
                }
            }
            let j = t + 1;
            if j - i >= h {
                cost[i * width + j] = projected_ssr(&cross, d, &mut work);
            }
        }
    }
    cost
}

/// Detects structural breaks in a complete series.
pub fn detect_breaks<T: Scalar>(xs: &[T], config: &BreakModelConfig) -> Result<BreakResult<T>> {
    config.validate()?;
    let n = xs.len();
    let p = config.ar_order;
    let h = config.min_segment_length(n);
    let needed = (config.max_breaks + 1) * h;
    if n < needed || n == 0 {
        return Err(Error::InsufficientData(format!(
            "break search with up to {} breaks and minimum segment length {h} needs {needed} observations, got {n}",
            config.max_breaks
        )));
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "break search input contains non-finite values".into(),
        ));
    }

    let mu = mean(xs);
    let ys: Vec<T> = xs.iter().map(|&x| x - mu).collect();
    let tss = ys.iter().fold(T::zero(), |s, &y| s + y * y);
    let cost = segment_costs(&ys, p, h);
    let width = n + 1;
    let seg = |i: usize, j: usize| cost[i * width + j];

    // best[k][i]: minimal SSR of [i, n) split into k + 1 segments.
    // next[k][i]: first break of that split; smallest index wins ties.
    let mmax = config.max_breaks;
    let mut best = vec![vec![T::infinity(); n + 1]; mmax + 1];
    let mut next = vec![vec![usize::MAX; n + 1]; mmax + 1];
    for i in 0..=n {
        if n - i >= h {
            best[0][i] = seg(i, n);
        }
    }
    for k in 1..=mmax {
        for i in 0..=n {
            if n - i < (k + 1) * h {
                continue;
            }
            let mut b = T::infinity();
            let mut arg = usize::MAX;
            for j in (i + h)..=(n - k * h) {
                let c = seg(i, j) + best[k - 1][j];
                if c < b {
                    b = c;
                    arg = j;
                }
            }
            best[k][i] = b;
            next[k][i] = arg;
        }
    }

    let floor = (T::epsilon() * tss).max(T::min_positive_value());
    let mut ssr_by_m = Vec::with_capacity(mmax + 1);
    let mut bic_by_m = Vec::with_capacity(mmax + 1);
    let mut breaks_by_m = Vec::with_capacity(mmax + 1);
    let mut chosen = 0;
    for m in 0..=mmax {
        let ssr = best[m][0];
        let mut breaks = Vec::with_capacity(m);
        let mut i = 0;
        for k in (1..=m).rev() {
            i = next[k][i];
            breaks.push(i);
        }
        let t_eff = n - (m + 1) * p;
        let q = (m + 1) * (p + 1) + m;
        let te = T::of_usize(t_eff);
        let bic = te * (ssr.max(floor) / te).ln() + T::of_usize(q) * te.ln();
        if bic < bic_by_m.get(chosen).copied().unwrap_or(T::infinity()) {
            chosen = m;
        }
        ssr_by_m.push(ssr);
        bic_by_m.push(bic);
        breaks_by_m.push(breaks);
    }

    let break_indices = breaks_by_m[chosen].clone();
    let mut bounds = vec![0];
    bounds.extend(&break_indices);
    bounds.push(n);
    let segment_fits = bounds
        .windows(2)
        .map(|w| fit_segment(&ys, w[0], w[1], p))
        .collect::<Result<Vec<_>>>()?;

    Ok(BreakResult {
        n_breaks: break_indices.len(),
        break_indices,
        break_months: Vec::new(),
        ssr_by_m,
        bic_by_m,
        breaks_by_m,
        segment_fits,
        config: *config,
        n,
    })
}

fn fit_segment<T: Scalar>(ys: &[T], start: usize, end: usize, p: usize) -> Result<SegmentFit<T>> {
    let rows = start + p..end;
    let mut cols = vec![rows.clone().map(|_| T::one()).collect::<Vec<_>>()];
    for l in 1..=p {
        cols.push(rows.clone().map(|t| ys[t - l]).collect());
    }
    let y: Vec<T> = rows.map(|t| ys[t]).collect();
    let x = Matrix::from_columns(&cols)?;
    let ls = least_squares(&x, &y)?;
    let fitted = x.mul_vec(&ls.coefficients);
    let ssr = y
        .iter()
        .zip(&fitted)
        .fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b));
    Ok(SegmentFit {
        start,
        end,
        coefficients: ls.coefficients,
        ssr,
        n_obs: y.len(),
    })
}
