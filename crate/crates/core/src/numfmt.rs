//! Fixed-precision float rendering for reports.

/// Significant digits used in every report.
pub const REPORT_DIGITS: usize = 12;

/// Rounds to `digits` significant digits. Non-finite values pass through.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Shortest decimal that reads back as `x` rounded to [`REPORT_DIGITS`].
pub fn format_sig(x: f64) -> String {
    let r = round_sig(x, REPORT_DIGITS);
    if r == 0.0 {
        "0".to_string()
    } else if r.abs() < 1e-6 || r.abs() >= 1e15 {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}
