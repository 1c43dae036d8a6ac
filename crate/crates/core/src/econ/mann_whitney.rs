//! Two-sample Mann-Whitney U test.
//!
//! Small tie-free samples (both sizes at most [`EXACT_MAX_N`]) get an exact
//! p-value from the full null distribution of U; everything else uses the
//! normal approximation with tie and continuity corrections.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const EXACT_MAX_N: usize = 8;

/// Outcome of a two-sample test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult<T> {
    /// U statistic of the first sample.
    pub statistic: T,
    /// Two-sided p-value.
    pub p_value: T,
    pub method: String,
    pub n1: usize,
    pub n2: usize,
    pub exact: bool,
}

impl<T: Scalar> TestResult<T> {
    /// U statistic of the second sample, `n1 * n2 - U`.
    pub fn complement(&self) -> T {
        T::of_usize(self.n1 * self.n2) - self.statistic
    }
}

pub fn mann_whitney_u<T: Scalar>(a: &[T], b: &[T]) -> Result<TestResult<T>> {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::InsufficientData(
            "Mann-Whitney U needs two non-empty samples".into(),
        ));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("Mann-Whitney U: NaN in sample".into()));
    }

    let mut pooled: Vec<(T, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("NaN rejected above"));

    // Midranks for tied groups; ties are exact equality so that any strictly
    // increasing transform of the data gives identical ranks.
    let n = pooled.len();
    let mut rank_sum_a = 0.0f64;
    let mut tie_term = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += midrank * pooled[i..j].iter().filter(|p| p.1).count() as f64;
        i = j;
    }
    let f1 = n1 as f64;
    let u_a = rank_sum_a - f1 * (f1 + 1.0) / 2.0;
    let has_ties = tie_term > 0.0;

    let (p, exact) = if n1.max(n2) <= EXACT_MAX_N && !has_ties {
        (exact_two_sided(u_a.round() as usize, n1, n2), true)
    } else {
        (normal_two_sided(u_a, n1, n2, tie_term), false)
    };
    Ok(TestResult {
        statistic: T::of(u_a),
        p_value: T::of(p.clamp(0.0, 1.0)),
        method: if exact {
            "Mann-Whitney U (exact)".into()
        } else {
            "Mann-Whitney U (normal approximation)".into()
        },
        n1,
        n2,
        exact,
    })
}

/// Number of arrangements giving each value of U, for sizes `n1`, `n2`.
///
/// Uses the recurrence `f(u; m, n) = f(u - n; m - 1, n) + f(u; m, n - 1)`.
pub(crate) fn u_distribution(n1: usize, n2: usize) -> Vec<f64> {
    let max_u = n1 * n2;
    // table[m][n] holds counts for sizes (m, n), built bottom-up.
    let mut table: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n2 + 1]; n1 + 1];
    for m in 0..=n1 {
        for k in 0..=n2 {
            let mut counts = vec![0.0; m * k + 1];
            if m == 0 || k == 0 {
                counts[0] = 1.0;
            } else {
                for (u, c) in counts.iter_mut().enumerate() {
                    let from_m = if u >= k {
                        table[m - 1][k].get(u - k).copied().unwrap_or(0.0)
                    } else {
                        0.0
                    };
                    let from_k = table[m][k - 1].get(u).copied().unwrap_or(0.0);
                    *c = from_m + from_k;
                }
            }
            table[m][k] = counts;
        }
    }
    let out = std::mem::take(&mut table[n1][n2]);
    debug_assert_eq!(out.len(), max_u + 1);
    out
}

fn exact_two_sided(u: usize, n1: usize, n2: usize) -> f64 {
    let dist = u_distribution(n1, n2);
    let total: f64 = dist.iter().sum();
    let lower: f64 = dist[..=u].iter().sum::<f64>() / total;
    let upper: f64 = dist[u..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_two_sided(u: f64, n1: usize, n2: usize, tie_term: f64) -> f64 {
    let (f1, f2) = (n1 as f64, n2 as f64);
    let n = f1 + f2;
    let mean = f1 * f2 / 2.0;
    let var = if n > 1.0 {
        f1 * f2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}
