use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};

/// Sample Pearson correlation of two equally long vectors.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "pearson: lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let xs: Vec<Option<T>> = x.iter().map(|&v| Some(v)).collect();
    let ys: Vec<Option<T>> = y.iter().map(|&v| Some(v)).collect();
    pearson_pairwise(&xs, &ys)
}

/// Pearson correlation over the slots where both sides are present.
pub fn pearson_pairwise<T: Scalar>(x: &[Option<T>], y: &[Option<T>]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "pearson: lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let (a, b): (Vec<T>, Vec<T>) = x.iter().zip(y).filter_map(|(p, q)| Some(((*p)?, (*q)?))).unzip();
    if a.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "pearson needs at least 3 complete pairs, found {}",
            a.len()
        )));
    }
    let (ma, mb) = (mean(&a), mean(&b));
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&p, &q) in a.iter().zip(&b) {
        let (dp, dq) = (p - ma, q - mb);
        sab = sab + dp * dq;
        saa = saa + dp * dp;
        sbb = sbb + dq * dq;
    }
    if saa == T::zero() || sbb == T::zero() {
        return Err(Error::Degenerate("pearson: constant input".into()));
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}
