//! The worked example family: all decodes but the last are error-free, the
//! last one collects half of every other signal.

use std::io::Write;

use serde::Serialize;

use crate::bounds::{entropies, equivocation_bound, kovalevsky_bound};
use crate::confusion::{validate_confusion, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::numfmt::format_sig;

/// `p(x, x̂)` with `1/(2n)` on the diagonal below `n` and down the last column,
/// `1/n` in the last diagonal cell, zero elsewhere.
pub fn example_family(n: usize) -> Result<ConfusionMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("example family needs n >= 2, got {n}")));
    }
    let half = 1.0 / (2.0 * n as f64);
    let mut m = vec![vec![0.0; n]; n];
    for (x, row) in m.iter_mut().enumerate().take(n - 1) {
        row[x] = half;
        row[n - 1] = half;
    }
    m[n - 1][n - 1] = 1.0 / n as f64;
    validate_confusion(&m)
}

/// One point of the bound-comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub h_post: f64,
    pub bound_ours: f64,
    pub bound_kov: f64,
}

impl ExperimentRow {
    pub fn is_ordered(&self, tol: f64) -> bool {
        self.bound_kov <= self.bound_ours + tol && self.bound_ours <= self.h_post + tol
    }
}

pub fn comparison_table(n_values: &[usize]) -> Result<Vec<ExperimentRow>> {
    n_values
        .iter()
        .map(|&n| {
            let cm = example_family(n)?;
            Ok(ExperimentRow {
                n,
                h_post: entropies(&cm).h_x_given_xhat,
                bound_ours: equivocation_bound(&cm),
                bound_kov: kovalevsky_bound(&cm),
            })
        })
        .collect()
}

/// CSV with header `n,h_post,bound_ours,bound_kov`, 12 significant digits.
pub fn write_table_csv<W: Write>(rows: &[ExperimentRow], mut w: W) -> Result<()> {
    writeln!(w, "n,h_post,bound_ours,bound_kov")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.n, format_sig(r.h_post), format_sig(r.bound_ours), format_sig(r.bound_kov))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confusion::decode_profile;

    #[test]
    fn two_signal_member() {
        let cm = example_family(2).unwrap();
        assert_eq!(cm.rows(), vec![vec![0.25, 0.25], vec![0.0, 0.5]]);
        let eps = decode_profile(&cm).eps[1].unwrap();
        assert!((eps - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn last_decode_error_rate() {
        for n in 2..=40 {
            let cm = example_family(n).unwrap();
            let eps = decode_profile(&cm).eps[n - 1].unwrap();
            let want = (n as f64 - 1.0) / (n as f64 + 1.0);
            assert!((eps - want).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn table_rows() {
        let rows = comparison_table(&[2, 5]).unwrap();
        assert!((rows[0].bound_ours - rows[0].bound_kov).abs() < 1e-12);
        let r = rows[1];
        assert!((r.h_post - 0.6 * (2.0 / 3.0 + 3f64.log2())).abs() < 1e-12);
        assert!((r.bound_ours - 0.6 * 3f64.log2()).abs() < 1e-12);
        assert!((r.bound_kov - 0.8).abs() < 1e-12);
        assert!(comparison_table(&(2..=64).collect::<Vec<_>>()).unwrap().iter().all(|r| r.is_ordered(1e-12)));
    }

    #[test]
    fn csv_layout() {
        let rows = comparison_table(&[5]).unwrap();
        let mut out = Vec::new();
        write_table_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "n,h_post,bound_ours,bound_kov\n5,1.35097750043,0.950977500433,0.8\n");
    }

    #[test]
    fn small_n_is_rejected() {
        assert!(example_family(1).is_err());
    }
}
