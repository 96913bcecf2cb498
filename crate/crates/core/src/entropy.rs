//! Shannon entropy in bits with the `0 log 0 = 0` convention.

/// `-p log2 p`, zero for `p <= 0`.
#[inline]
pub fn surprisal_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entropy of a probability vector, in bits.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs.iter().copied().map(surprisal_term).sum()
}

/// Entropy of the normalized version of a nonnegative mass vector.
///
/// Returns 0 for an all-zero vector.
pub fn entropy_of_masses(masses: &[f64]) -> f64 {
    let total: f64 = masses.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    masses.iter().map(|&m| surprisal_term(m / total)).sum()
}
