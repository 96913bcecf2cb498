//! The validated joint distribution of signals and MAP decodes.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result, Violation};

/// Slack allowed on the total mass.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Slack allowed when checking that each diagonal entry dominates its column.
pub const MAP_TOL: f64 = 1e-9;

/// Joint distribution `p(x, x̂)`: rows are true signals, columns are decodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    n: usize,
    joint: Vec<f64>,
}

impl ConfusionMatrix {
    /// Validates `rows` against every confusion-matrix invariant.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        validate_confusion(rows)
    }

    /// Builds a matrix without checking invariants. The caller guarantees them.
    pub(crate) fn from_joint_unchecked(n: usize, joint: Vec<f64>) -> Self {
        debug_assert_eq!(joint.len(), n * n);
        Self { n, joint }
    }

    /// Signal alphabet size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `p(X = x, X̂ = xhat)`.
    #[inline]
    pub fn get(&self, x: usize, xhat: usize) -> f64 {
        self.joint[x * self.n + xhat]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.joint[x * self.n..(x + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|x| self.row(x).to_vec()).collect()
    }

    /// Column `xhat` as a vector over signals.
    pub fn column(&self, xhat: usize) -> Vec<f64> {
        (0..self.n).map(|x| self.get(x, xhat)).collect()
    }

    /// Marginal `p(x)` (row sums).
    pub fn signal_marginal(&self) -> Vec<f64> {
        (0..self.n).map(|x| self.row(x).iter().sum()).collect()
    }

    /// Marginal `p(x̂)` (column sums).
    pub fn decode_marginal(&self) -> Vec<f64> {
        (0..self.n).map(|c| self.column(c).iter().sum()).collect()
    }

    /// Overall MAP error probability `1 - Σ p(x̂, x̂)`, clamped to `[0, (n-1)/n]`.
    pub fn overall_error(&self) -> f64 {
        let correct: f64 = (0..self.n).map(|i| self.get(i, i)).sum();
        clamp_error(1.0 - correct, self.n)
    }

    /// Largest entrywise absolute difference to `other`; infinite on size mismatch.
    pub fn max_abs_diff(&self, other: &ConfusionMatrix) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.joint.iter().zip(&other.joint).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn clamp_error(eps: f64, n: usize) -> f64 {
    let ceiling = (n as f64 - 1.0) / n as f64;
    eps.clamp(0.0, ceiling)
}

/// Checks a raw square matrix and returns it as a [`ConfusionMatrix`], or an
/// error listing every violated invariant.
pub fn validate_confusion(raw: &[Vec<f64>]) -> Result<ConfusionMatrix> {
    let n = raw.len();
    if n == 0 {
        return Err(Error::InvalidConfusion(vec![Violation::Empty]));
    }
    let shape: Vec<Violation> = raw
        .iter()
        .enumerate()
        .filter(|(_, r)| r.len() != n)
        .map(|(row, r)| Violation::NotSquare { row, len: r.len(), expected: n })
        .collect();
    if !shape.is_empty() {
        return Err(Error::InvalidConfusion(shape));
    }

    let mut violations = Vec::new();
    let mut finite = true;
    for (row, r) in raw.iter().enumerate() {
        for (col, &value) in r.iter().enumerate() {
            if !value.is_finite() {
                finite = false;
                violations.push(Violation::NonFinite { row, col });
            } else if value < 0.0 {
                violations.push(Violation::NegativeEntry { row, col, value });
            }
        }
    }
    if finite {
        let sum: f64 = raw.iter().flatten().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            violations.push(Violation::NotNormalized { sum });
        }
        #[allow(clippy::needless_range_loop)]
        for column in 0..n {
            let diagonal = raw[column][column];
            let worst = (0..n).filter(|&x| x != column).map(|x| (x, raw[x][column])).fold(
                None,
                |acc: Option<(usize, f64)>, (x, v)| match acc {
                    Some((_, best)) if best >= v => acc,
                    _ => Some((x, v)),
                },
            );
            if let Some((row, off_diagonal)) = worst {
                if off_diagonal > diagonal + MAP_TOL {
                    violations.push(Violation::NotMapConsistent { column, row, off_diagonal, diagonal });
                }
            }
        }
    }
    if !violations.is_empty() {
        return Err(Error::InvalidConfusion(violations));
    }
    Ok(ConfusionMatrix { n, joint: raw.iter().flatten().copied().collect() })
}

/// Per-decode marginals and error rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeProfile {
    pub p_hat: Vec<f64>,
    /// `ε_x̂`, or `None` for a decode that never occurs.
    pub eps: Vec<Option<f64>>,
}

impl DecodeProfile {
    /// Decodes with positive probability, paired with their error rates.
    pub fn active(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.p_hat.iter().zip(&self.eps).enumerate().filter_map(|(i, (&p, e))| e.map(|e| (i, p, e)))
    }
}

pub fn decode_profile(cm: &ConfusionMatrix) -> DecodeProfile {
    let p_hat = cm.decode_marginal();
    // Column dominance bounds ε by (n-1)/n; the clamp absorbs the MAP tolerance.
    let eps = p_hat
        .iter()
        .enumerate()
        .map(|(xhat, &p)| (p > 0.0).then(|| clamp_error(1.0 - cm.get(xhat, xhat) / p, cm.n())))
        .collect();
    DecodeProfile { p_hat, eps }
}

/// Reads an `n x n` CSV of joint probabilities (row = signal, column = decode).
/// With `header`, the first row is skipped.
pub fn read_confusion_csv<R: Read>(reader: R, header: bool) -> Result<ConfusionMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(header).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record =
            record.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Parse { line, message: format!("not a decimal number: {field:?}") })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    validate_confusion(&rows)
}

/// Writes the matrix in the format [`read_confusion_csv`] accepts (no header).
pub fn write_confusion_csv<W: Write>(cm: &ConfusionMatrix, mut w: W) -> Result<()> {
    for x in 0..cm.n() {
        let line = cm.row(x).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 / n as f64 } else { 0.0 }).collect()).collect()
    }

    fn example_n5() -> Vec<Vec<f64>> {
        let n = 5;
        let mut m = vec![vec![0.0; n]; n];
        for (x, row) in m.iter_mut().enumerate().take(n - 1) {
            row[x] = 0.1;
            row[n - 1] = 0.1;
        }
        m[n - 1][n - 1] = 0.2;
        m
    }

    #[test]
    fn identity_is_valid_with_zero_error() {
        let cm = validate_confusion(&identity(3)).unwrap();
        let prof = decode_profile(&cm);
        assert!(prof.eps.iter().all(|e| *e == Some(0.0)));
    }

    #[test]
    fn five_signal_example_profile() {
        let cm = validate_confusion(&example_n5()).unwrap();
        let prof = decode_profile(&cm);
        assert!((prof.p_hat[4] - 0.6).abs() < 1e-15);
        assert!((prof.eps[4].unwrap() - 2.0 / 3.0).abs() < 1e-15);
        for e in &prof.eps[..4] {
            assert_eq!(*e, Some(0.0));
        }
    }

    #[test]
    fn tie_with_diagonal_is_accepted() {
        assert!(validate_confusion(&[vec![0.2, 0.3], vec![0.2, 0.3]]).is_ok());
    }

    #[test]
    fn dominated_diagonal_is_rejected() {
        let err = validate_confusion(&[vec![0.1, 0.4], vec![0.2, 0.3]]).unwrap_err();
        match err {
            Error::InvalidConfusion(v) => assert_eq!(
                v,
                vec![
                    Violation::NotMapConsistent { column: 0, row: 1, off_diagonal: 0.2, diagonal: 0.1 },
                    Violation::NotMapConsistent { column: 1, row: 0, off_diagonal: 0.4, diagonal: 0.3 },
                ]
            ),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn every_violation_is_listed() {
        let err = validate_confusion(&[vec![-0.1, 0.9], vec![0.5, 0.0]]).unwrap_err();
        let Error::InvalidConfusion(v) = err else { panic!() };
        assert!(v.iter().any(|x| matches!(x, Violation::NegativeEntry { row: 0, col: 0, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::NotNormalized { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::NotMapConsistent { column: 0, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::NotMapConsistent { column: 1, .. })));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            validate_confusion(&[]),
            Err(Error::InvalidConfusion(v)) if v == vec![Violation::Empty]
        ));
        assert!(matches!(
            validate_confusion(&[vec![0.5, 0.5]]),
            Err(Error::InvalidConfusion(v)) if matches!(v[0], Violation::NotSquare { .. })
        ));
    }

    #[test]
    fn zero_decode_is_flagged() {
        let cm = validate_confusion(&[vec![0.6, 0.0], vec![0.4, 0.0]]).unwrap();
        let prof = decode_profile(&cm);
        assert_eq!(prof.eps[1], None);
        assert!((prof.eps[0].unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn csv_reads_with_and_without_header() {
        let cm = read_confusion_csv("0.25, 0.25\n0,0.5\n".as_bytes(), false).unwrap();
        assert_eq!(cm.get(0, 1), 0.25);
        let cm2 = read_confusion_csv("a,b\n0.25,0.25\n0,0.5\n".as_bytes(), true).unwrap();
        assert_eq!(cm, cm2);
        let mut out = Vec::new();
        write_confusion_csv(&cm, &mut out).unwrap();
        assert_eq!(read_confusion_csv(out.as_slice(), false).unwrap(), cm);
    }

    #[test]
    fn csv_reports_bad_number_line() {
        let err = read_confusion_csv("0.5,0\n0,zz\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }
}
