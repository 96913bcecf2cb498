//! Fixtures shared by the benchmarks.

use equivbound::oracle::{example_family, random_confusion, sub_seed};
use equivbound::ConfusionMatrix;

/// Alphabet sizes swept by the benchmarks.
pub const SIZES: [usize; 4] = [4, 8, 16, 32];

/// A fixed random MAP confusion matrix on `n` signals.
pub fn random_matrix(n: usize) -> ConfusionMatrix {
    random_confusion(n, sub_seed(0xBE7C, n as u64))
}

/// The example family member on `n` signals.
pub fn family_matrix(n: usize) -> ConfusionMatrix {
    example_family(n).expect("n >= 2")
}

/// Error rates spread over `[0, 0.95)`.
pub fn eps_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| 0.95 * i as f64 / count as f64).collect()
}
