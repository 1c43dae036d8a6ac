//! Missing-aware monthly series: construction from scored documents, gap
//! filling, quarterly aggregation and simple transforms.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::calendar::{YearMonth, YearQuarter};
use crate::corpus::Source;
use crate::econ::{ols, Matrix};
use crate::error::{Error, Result};
use crate::lexicon::Dimension;
use crate::scalar::{mean, Scalar};
use crate::scorer::ScoredCorpus;

/// Where a slot's value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Observed,
    LinearInterp,
    RegressionImputed,
    Missing,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Observed => "OBSERVED",
            Provenance::LinearInterp => "LINEAR_INTERP",
            Provenance::RegressionImputed => "REGRESSION_IMPUTED",
            Provenance::Missing => "MISSING",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "OBSERVED" => Ok(Provenance::Observed),
            "LINEAR_INTERP" => Ok(Provenance::LinearInterp),
            "REGRESSION_IMPUTED" => Ok(Provenance::RegressionImputed),
            "MISSING" => Ok(Provenance::Missing),
            other => Err(Error::InvalidArgument(format!("unknown provenance `{other}`"))),
        }
    }
}

/// A series with one slot per consecutive calendar month.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries<T> {
    label: String,
    start: YearMonth,
    values: Vec<Option<T>>,
    provenance: Vec<Provenance>,
}

impl<T: Scalar> MonthlySeries<T> {
    /// Present values are marked OBSERVED, absent ones MISSING.
    pub fn new(label: impl Into<String>, start: YearMonth, values: Vec<Option<T>>) -> Result<Self> {
        let provenance = values
            .iter()
            .map(|v| {
                if v.is_some() {
                    Provenance::Observed
                } else {
                    Provenance::Missing
                }
            })
            .collect();
        Self::from_parts(label, start, values, provenance)
    }

    pub fn from_parts(
        label: impl Into<String>,
        start: YearMonth,
        values: Vec<Option<T>>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("a series needs at least one slot".into()));
        }
        if values.len() != provenance.len() {
            return Err(Error::InvalidArgument("values and provenance differ in length".into()));
        }
        for (i, (v, p)) in values.iter().zip(&provenance).enumerate() {
            if v.is_some() == (*p == Provenance::Missing) {
                return Err(Error::InvalidArgument(format!(
                    "slot {i}: provenance {p} inconsistent with value presence"
                )));
            }
            if v.is_some_and(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("slot {i}: non-finite value")));
            }
        }
        Ok(Self {
            label: label.into(),
            start,
            values,
            provenance,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn start(&self) -> YearMonth {
        self.start
    }

    pub fn end(&self) -> YearMonth {
        self.start.plus(self.values.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn month_at(&self, i: usize) -> YearMonth {
        self.start.plus(i as i64)
    }

    pub fn index_of(&self, month: YearMonth) -> Option<usize> {
        let d = self.start.months_until(month);
        (d >= 0 && (d as usize) < self.values.len()).then_some(d as usize)
    }

    pub fn get(&self, month: YearMonth) -> Option<T> {
        self.index_of(month).and_then(|i| self.values[i])
    }

    pub fn observed_count(&self) -> usize {
        self.provenance.iter().filter(|p| **p == Provenance::Observed).count()
    }

    pub fn missing_count(&self) -> usize {
        self.provenance.iter().filter(|p| **p == Provenance::Missing).count()
    }

    /// Share of slots that are MISSING.
    pub fn missing_fraction(&self) -> f64 {
        self.missing_count() as f64 / self.values.len() as f64
    }

    /// All values, if no slot is missing.
    pub fn complete_values(&self) -> Option<Vec<T>> {
        self.values.iter().copied().collect()
    }

    /// The present values with their slot indices.
    pub fn present(&self) -> Vec<(usize, T)> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|x| (i, x)))
            .collect()
    }

    /// Values at the given months, `None` outside the series or where missing.
    pub fn aligned(&self, start: YearMonth, len: usize) -> Vec<Option<T>> {
        (0..len).map(|i| self.get(start.plus(i as i64))).collect()
    }

    /// Writes `month,value,provenance`; missing slots have an empty value.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["month", "value", "provenance"]).map_err(err)?;
        for (i, (v, p)) in self.values.iter().zip(&self.provenance).enumerate() {
            w.write_record([
                self.month_at(i).to_string(),
                v.map(|x| x.to_string()).unwrap_or_default(),
                p.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }

    /// Reads `month,value,provenance`. Months must be consecutive.
    pub fn read_csv<R: Read>(label: impl Into<String>, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["month", "value", "provenance"] {
            return Err(Error::Format("series header must be `month,value,provenance`".into()));
        }
        let mut start = None;
        let mut values = Vec::new();
        let mut provenance = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::Validation {
                row,
                message: e.to_string(),
            })?;
            let month: YearMonth = rec[0].parse().map_err(|e: Error| Error::Validation {
                row,
                message: e.to_string(),
            })?;
            let s = *start.get_or_insert(month);
            if s.months_until(month) != values.len() as i64 {
                return Err(Error::Validation {
                    row,
                    message: format!("month {month} breaks the consecutive monthly grid"),
                });
            }
            values.push(parse_optional(&rec[1], row)?);
            provenance.push(rec[2].parse().map_err(|e: Error| Error::Validation {
                row,
                message: e.to_string(),
            })?);
        }
        let start = start.ok_or_else(|| Error::Format("series file has no rows".into()))?;
        Self::from_parts(label, start, values, provenance)
    }

    /// Reads an indicator CSV `month,value`. Months must be increasing; gaps
    /// in the month sequence and empty values become MISSING slots.
    pub fn read_indicator_csv<R: Read>(label: impl Into<String>, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["month", "value"] {
            return Err(Error::Format("indicator header must be `month,value`".into()));
        }
        let mut points: Vec<(YearMonth, Option<T>)> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::Validation {
                row,
                message: e.to_string(),
            })?;
            let month: YearMonth = rec[0].parse().map_err(|e: Error| Error::Validation {
                row,
                message: e.to_string(),
            })?;
            if points.last().is_some_and(|(m, _)| *m >= month) {
                return Err(Error::Validation {
                    row,
                    message: format!("month {month} is not after the previous row"),
                });
            }
            points.push((month, parse_optional(&rec[1], row)?));
        }
        let start = points
            .first()
            .ok_or_else(|| Error::Format("indicator file has no rows".into()))?
            .0;
        let len = start.months_until(points.last().expect("non-empty").0) as usize + 1;
        let mut values = vec![None; len];
        for (m, v) in points {
            values[start.months_until(m) as usize] = v;
        }
        Self::new(label, start, values)
    }

    pub fn load_indicator(label: impl Into<String>, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_indicator_csv(label, f)
    }
}

fn parse_optional<T: Scalar>(s: &str, row: usize) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<T>().map(Some).map_err(|_| Error::Validation {
        row,
        message: format!("`{s}` is not a number"),
    })
}

/// Named complete reference series (economic indicators).
pub type IndicatorSet<T> = BTreeMap<String, MonthlySeries<T>>;

/// Builds the monthly series of one dimension for one source. Months with
/// several documents hold the mean of their scores.
pub fn build_monthly<T: Scalar>(
    scored: &ScoredCorpus<T>,
    source: &Source,
    dimension: Dimension,
) -> Result<MonthlySeries<T>> {
    let mut by_month: BTreeMap<YearMonth, Vec<T>> = BTreeMap::new();
    for row in scored.rows_for(source) {
        by_month
            .entry(YearMonth::of_date(row.date))
            .or_default()
            .push(row.vad.get(dimension));
    }
    let (&first, _) = by_month
        .first_key_value()
        .ok_or_else(|| Error::EmptySeries(source.to_string()))?;
    let (&last, _) = by_month.last_key_value().expect("non-empty");
    let len = first.months_until(last) as usize + 1;
    let mut values = vec![None; len];
    for (month, scores) in &by_month {
        values[first.months_until(*month) as usize] = Some(mean(scores));
    }
    let series = MonthlySeries::new(format!("{source}-{dimension}"), first, values)?;
    log::info!(
        "series {}: {} months, {:.1}% missing",
        series.label(),
        series.len(),
        100.0 * series.missing_fraction()
    );
    Ok(series)
}

/// Fills interior MISSING slots on the straight line between the nearest
/// OBSERVED neighbours. Leading and trailing gaps are left missing.
pub fn interpolate_linear<T: Scalar>(s: &MonthlySeries<T>) -> Result<MonthlySeries<T>> {
    let anchors: Vec<(usize, T)> = s
        .present()
        .into_iter()
        .filter(|(i, _)| s.provenance[*i] == Provenance::Observed)
        .collect();
    if anchors.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "linear interpolation needs 2 observed slots, {} has {}",
            s.label,
            anchors.len()
        )));
    }
    let mut out = s.clone();
    for w in anchors.windows(2) {
        let ((a, ya), (b, yb)) = (w[0], w[1]);
        let span = T::of_usize(b - a);
        for i in a + 1..b {
            if out.provenance[i] == Provenance::Missing {
                let frac = T::of_usize(i - a) / span;
                out.values[i] = Some(ya + (yb - ya) * frac);
                out.provenance[i] = Provenance::LinearInterp;
            }
        }
    }
    Ok(out)
}

/// Regression diagnostics of [`impute_by_regression`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImputationDiagnostics<T> {
    /// Intercept followed by one coefficient per selected reference.
    pub coefficients: Vec<T>,
    pub references: Vec<String>,
    pub r_squared: T,
    pub n_observed: usize,
}

/// Fits the OBSERVED slots of `s` on an intercept plus the selected reference
/// series and fills every MISSING slot with the fitted value.
pub fn impute_by_regression<T: Scalar>(
    s: &MonthlySeries<T>,
    refs: &IndicatorSet<T>,
    selected: &[&str],
) -> Result<(MonthlySeries<T>, ImputationDiagnostics<T>)> {
    let mut columns: Vec<Vec<T>> = Vec::with_capacity(selected.len());
    for &name in selected {
        let r = refs
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown reference series `{name}`")))?;
        let aligned = r.aligned(s.start, s.len());
        let complete: Option<Vec<T>> = aligned.into_iter().collect();
        let col = complete.ok_or_else(|| {
            Error::Imputation(format!(
                "reference `{name}` is not complete over {}..{}",
                s.start,
                s.end()
            ))
        })?;
        columns.push(col);
    }

    let observed: Vec<usize> = (0..s.len())
        .filter(|&i| s.provenance[i] == Provenance::Observed)
        .collect();
    let k = selected.len();
    if observed.len() < k + 2 {
        return Err(Error::InsufficientData(format!(
            "regression imputation with {k} references needs {} observed slots, found {}",
            k + 2,
            observed.len()
        )));
    }

    let design_at = |rows: &[usize]| -> Result<Matrix<T>> {
        let mut cols = vec![vec![T::one(); rows.len()]];
        cols.extend(columns.iter().map(|c| rows.iter().map(|&i| c[i]).collect()));
        Matrix::from_columns(&cols)
    };
    let y: Vec<T> = observed.iter().map(|&i| s.values[i].expect("observed")).collect();
    let fit = ols(&design_at(&observed)?, &y).map_err(|e| match e {
        Error::SingularDesign => Error::Imputation("reference design is rank deficient".into()),
        other => other,
    })?;

    let missing: Vec<usize> = (0..s.len())
        .filter(|&i| s.provenance[i] == Provenance::Missing)
        .collect();
    let mut out = s.clone();
    if !missing.is_empty() {
        let fitted = design_at(&missing)?.mul_vec(&fit.coefficients);
        for (&i, v) in missing.iter().zip(fitted) {
            out.values[i] = Some(v);
            out.provenance[i] = Provenance::RegressionImputed;
        }
    }
    Ok((
        out,
        ImputationDiagnostics {
            coefficients: fit.coefficients,
            references: selected.iter().map(|s| s.to_string()).collect(),
            r_squared: fit.r_squared,
            n_observed: observed.len(),
        },
    ))
}

/// A series with one slot per calendar quarter.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarterlySeries<T> {
    pub label: String,
    pub start: YearQuarter,
    pub values: Vec<Option<T>>,
}

impl<T: Scalar> QuarterlySeries<T> {
    pub fn quarter_at(&self, i: usize) -> YearQuarter {
        YearQuarter::from_ordinal(self.start.ordinal() + i as i64)
    }

    /// Writes `quarter,value,provenance` (OBSERVED or MISSING).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["quarter", "value", "provenance"]).map_err(err)?;
        for (i, v) in self.values.iter().enumerate() {
            let p = if v.is_some() {
                Provenance::Observed
            } else {
                Provenance::Missing
            };
            w.write_record([
                self.quarter_at(i).to_string(),
                v.map(|x| x.to_string()).unwrap_or_default(),
                p.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// Quarterly means of the OBSERVED monthly slots; filled slots are ignored.
pub fn aggregate_quarterly<T: Scalar>(s: &MonthlySeries<T>) -> QuarterlySeries<T> {
    let first = s.start.quarter();
    let last = s.end().quarter();
    let len = (last.ordinal() - first.ordinal()) as usize + 1;
    let mut buckets: Vec<Vec<T>> = vec![Vec::new(); len];
    for (i, (v, p)) in s.values.iter().zip(&s.provenance).enumerate() {
        if *p == Provenance::Observed {
            let q = s.month_at(i).quarter();
            buckets[(q.ordinal() - first.ordinal()) as usize].push(v.expect("observed slot has a value"));
        }
    }
    QuarterlySeries {
        label: s.label.clone(),
        start: first,
        values: buckets.iter().map(|b| (!b.is_empty()).then(|| mean(b))).collect(),
    }
}

/// Centers and scales to unit sample standard deviation (n - 1 denominator).
pub fn zscore<T: Scalar>(xs: &[T]) -> Result<Vec<T>> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData("zscore needs at least 2 values".into()));
    }
    let m = mean(xs);
    let ss = xs.iter().fold(T::zero(), |s, &x| s + (x - m) * (x - m));
    let sd = (ss / T::of_usize(xs.len() - 1)).sqrt();
    if sd.is_nan() || sd <= T::zero() {
        return Err(Error::DegenerateScale);
    }
    Ok(xs.iter().map(|&x| (x - m) / sd).collect())
}

/// Residuals from an OLS fit on intercept and time index `0, 1, ..`.
pub fn detrend<T: Scalar>(xs: &[T]) -> Result<Vec<T>> {
    if xs.len() < 3 {
        return Err(Error::InsufficientData("detrend needs at least 3 values".into()));
    }
    let n = xs.len();
    let design = Matrix::from_columns(&[vec![T::one(); n], (0..n).map(T::of_usize).collect()])?;
    Ok(ols(&design, xs)?.residuals)
}

/// First differences; a difference is missing when either operand is.
pub fn difference<T: Scalar>(xs: &[Option<T>]) -> Result<Vec<Option<T>>> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData("difference needs at least 2 values".into()));
    }
    Ok(xs.windows(2).map(|w| Some(w[1]? - w[0]?)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::VadVector;
    use crate::scorer::ScoredRow;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    fn series(vals: &[Option<f64>]) -> MonthlySeries<f64> {
        MonthlySeries::new("t", ym("2019-01"), vals.to_vec()).unwrap()
    }

    fn scored(rows: &[(&str, &str, f64)]) -> ScoredCorpus<f64> {
        ScoredCorpus {
            rows: rows
                .iter()
                .map(|(src, date, v)| ScoredRow {
                    id: format!("{src}-{date}"),
                    source: src.parse().unwrap(),
                    date: NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
                    vad: VadVector::new(*v, 5.0, 5.0),
                    coverage: 1.0,
                })
                .collect(),
            exclusions: vec![],
        }
    }

    #[test]
    fn monthly_mean_and_gaps() {
        let sc = scored(&[
            ("ECB", "2019-06-06", 6.0),
            ("ECB", "2019-06-20", 6.4),
            ("ECB", "2019-08-01", 5.0),
            ("FED", "2019-07-01", 1.0),
        ]);
        let s = build_monthly(&sc, &Source::Ecb, Dimension::Valence).unwrap();
        assert_eq!(s.start(), ym("2019-06"));
        assert_eq!(s.len(), 3);
        assert!((s.values()[0].unwrap() - 6.2).abs() < 1e-12);
        assert_eq!(s.values()[1], None);
        assert!((s.missing_fraction() - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            build_monthly(&sc, &Source::Other("BoE".into()), Dimension::Valence),
            Err(Error::EmptySeries(_))
        ));
    }

    #[test]
    fn twelve_monthly_documents() {
        let dates: Vec<String> = (1..=12).map(|m| format!("2018-{m:02}-15")).collect();
        let rows: Vec<(&str, &str, f64)> = dates.iter().map(|d| ("FED", d.as_str(), 5.0)).collect();
        let s = build_monthly(&scored(&rows), &Source::Fed, Dimension::Valence).unwrap();
        assert_eq!(s.len(), 12);
        assert_eq!(s.observed_count(), 12);
        assert_eq!(s.missing_fraction(), 0.0);
    }

    #[test]
    fn linear_interpolation_examples() {
        let s = interpolate_linear(&series(&[Some(1.0), None, Some(3.0)])).unwrap();
        assert_eq!(s.values(), [Some(1.0), Some(2.0), Some(3.0)]);
        assert_eq!(s.provenance()[1], Provenance::LinearInterp);

        let full = series(&[Some(1.0), Some(5.0)]);
        assert_eq!(interpolate_linear(&full).unwrap(), full);

        let lead = interpolate_linear(&series(&[None, Some(2.0), Some(4.0)])).unwrap();
        assert_eq!(lead.values()[0], None);
        assert_eq!(lead.provenance()[0], Provenance::Missing);

        assert!(matches!(
            interpolate_linear(&series(&[None, Some(2.0), None])),
            Err(Error::InsufficientData(_))
        ));
    }

    fn refs(x: Vec<f64>) -> IndicatorSet<f64> {
        let mut set = IndicatorSet::new();
        set.insert(
            "x".to_string(),
            MonthlySeries::new("x", ym("2019-01"), x.into_iter().map(Some).collect()).unwrap(),
        );
        set
    }

    #[test]
    fn regression_imputation_exact_relation() {
        let s = series(&[Some(2.0), Some(4.0), None, Some(8.0), Some(10.0)]);
        let (out, diag) = impute_by_regression(&s, &refs(vec![1.0, 2.0, 3.0, 4.0, 5.0]), &["x"]).unwrap();
        assert!((out.values()[2].unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(out.provenance()[2], Provenance::RegressionImputed);
        assert!((diag.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(diag.n_observed, 4);
    }

    #[test]
    fn regression_imputation_fully_observed_and_errors() {
        let s = series(&[Some(2.0), Some(4.5), Some(5.0), Some(8.0)]);
        let (out, diag) = impute_by_regression(&s, &refs(vec![1.0, 2.0, 3.0, 4.0]), &["x"]).unwrap();
        assert_eq!(out, s);
        assert_eq!(diag.coefficients.len(), 2);

        let sparse = series(&[Some(1.0), None, Some(2.0), None, Some(4.0)]);
        let mut two = refs(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        two.insert(
            "z".into(),
            MonthlySeries::new("z", ym("2019-01"), vec![Some(0.5); 5]).unwrap(),
        );
        assert!(matches!(
            impute_by_regression(&sparse, &two, &["x", "z"]),
            Err(Error::InsufficientData(_))
        ));
        let short = refs(vec![1.0, 2.0]);
        assert!(matches!(
            impute_by_regression(&sparse, &short, &["x"]),
            Err(Error::Imputation(_))
        ));
        assert!(matches!(
            impute_by_regression(&sparse, &short, &["nope"]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn collinear_references_fail() {
        let s = series(&[Some(2.0), Some(4.0), None, Some(8.0), Some(11.0)]);
        let mut set = refs(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        set.insert(
            "x2".into(),
            MonthlySeries::new("x2", ym("2019-01"), (1..=5).map(|v| Some(2.0 * v as f64)).collect()).unwrap(),
        );
        assert!(matches!(
            impute_by_regression(&s, &set, &["x", "x2"]),
            Err(Error::Imputation(_))
        ));
    }

    #[test]
    fn quarterly_examples() {
        let s = MonthlySeries::new(
            "q",
            ym("2019-01"),
            vec![Some(1.0), Some(2.0), Some(3.0), None, None, None, None, Some(4.0), None],
        )
        .unwrap();
        let q = aggregate_quarterly(&s);
        assert_eq!(q.values, [Some(2.0), None, Some(4.0)]);
        assert_eq!(q.start.to_string(), "2019-Q1");

        // Filled slots do not count.
        let filled = interpolate_linear(&s).unwrap();
        assert_eq!(aggregate_quarterly(&filled), q);
    }

    #[test]
    fn quarterly_partial_first_quarter() {
        let s = MonthlySeries::new("q", ym("2019-03"), vec![Some(1.0), Some(3.0)]).unwrap();
        let q = aggregate_quarterly(&s);
        assert_eq!(q.values, [Some(1.0), Some(3.0)]);
    }

    #[test]
    fn zscore_examples() {
        assert_eq!(zscore(&[1.0, 2.0, 3.0]).unwrap(), [-1.0, 0.0, 1.0]);
        assert!(matches!(zscore(&[5.0, 5.0, 5.0]), Err(Error::DegenerateScale)));
        assert!(zscore(&[5.0]).is_err());
    }

    #[test]
    fn detrend_examples() {
        assert!(detrend(&[2.0f64, 4.0, 6.0]).unwrap().iter().all(|r| r.abs() < 1e-12));
        let r = detrend(&[1.0f64, 2.0, 4.0]).unwrap();
        for (a, b) in r.iter().zip([1.0 / 6.0, -1.0 / 3.0, 1.0 / 6.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(detrend(&[3.0f64; 8]).unwrap().iter().all(|r| r.abs() < 1e-12));
        assert!(matches!(detrend(&[1.0, 2.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn difference_examples() {
        assert_eq!(
            difference(&[Some(1.0), Some(2.0), Some(4.0)]).unwrap(),
            [Some(1.0), Some(2.0)]
        );
        assert_eq!(difference(&[Some(3.0); 4]).unwrap(), [Some(0.0); 3]);
        assert_eq!(difference(&[Some(1.0), None, Some(4.0)]).unwrap(), [None, None]);
        assert!(difference::<f64>(&[Some(1.0)]).is_err());
    }

    #[test]
    fn series_csv_round_trip() {
        let s = interpolate_linear(&series(&[Some(1.5), None, Some(3.0), None])).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "month,value,provenance\n2019-01,1.5,OBSERVED\n2019-02,2.25,LINEAR_INTERP\n2019-03,3,OBSERVED\n2019-04,,MISSING\n"
        );
        assert_eq!(MonthlySeries::read_csv("t", buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn indicator_csv_gaps() {
        let csv = "month,value\n2019-01,1.0\n2019-02,\n2019-04,4\n";
        let s = MonthlySeries::<f64>::read_indicator_csv("ip", csv.as_bytes()).unwrap();
        assert_eq!(s.values(), [Some(1.0), None, None, Some(4.0)]);
        let unordered = "month,value\n2019-02,1.0\n2019-01,2\n";
        assert!(MonthlySeries::<f64>::read_indicator_csv("ip", unordered.as_bytes()).is_err());
    }

    #[test]
    fn provenance_invariant_enforced() {
        assert!(MonthlySeries::from_parts("x", ym("2019-01"), vec![Some(1.0)], vec![Provenance::Missing]).is_err());
        assert!(MonthlySeries::<f64>::from_parts("x", ym("2019-01"), vec![None], vec![Provenance::Observed]).is_err());
        assert!(MonthlySeries::<f64>::new("x", ym("2019-01"), vec![]).is_err());
    }

    proptest! {
        #[test]
        fn interpolation_recovers_affine(
            a in -10.0f64..10.0, b in -2.0f64..2.0, len in 3usize..60,
            mask in prop::collection::vec(any::<bool>(), 60),
        ) {
            let truth: Vec<f64> = (0..len).map(|i| a + b * i as f64).collect();
            let vals: Vec<Option<f64>> = truth.iter().enumerate()
                .map(|(i, &v)| (i == 0 || i == len - 1 || mask[i]).then_some(v))
                .collect();
            let s = series(&vals);
            let out = interpolate_linear(&s).unwrap();
            for i in 0..len {
                prop_assert!((out.values()[i].unwrap() - truth[i]).abs() < 1e-9);
                if s.provenance()[i] == Provenance::Observed {
                    prop_assert_eq!(out.values()[i].unwrap().to_bits(), truth[i].to_bits());
                }
            }
        }

        #[test]
        fn zscore_moments_and_idempotence(xs in prop::collection::vec(-1e3f64..1e3, 2..100)) {
            if let Ok(z) = zscore(&xs) {
                let n = z.len() as f64;
                let m = z.iter().sum::<f64>() / n;
                let sd = (z.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt();
                prop_assert!(m.abs() < 1e-12);
                prop_assert!((sd - 1.0).abs() < 1e-12);
                let zz = zscore(&z).unwrap();
                for (p, q) in z.iter().zip(&zz) {
                    prop_assert!((p - q).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn detrend_residuals_orthogonal(xs in prop::collection::vec(-100.0f64..100.0, 3..120)) {
            let r = detrend(&xs).unwrap();
            let sum: f64 = r.iter().sum();
            let dot: f64 = r.iter().enumerate().map(|(t, e)| t as f64 * e).sum();
            prop_assert!(sum.abs() < 1e-9);
            prop_assert!(dot.abs() < 1e-9 * (xs.len() as f64).max(1.0).powi(2));
            // No trend left to remove: the residuals' own OLS slope vanishes.
            let again = detrend(&r).unwrap();
            for (p, q) in r.iter().zip(&again) {
                prop_assert!((p - q).abs() < 1e-9);
            }
        }
    }
}
