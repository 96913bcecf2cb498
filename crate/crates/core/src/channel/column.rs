//! Channel-output columns of a single fiber and the flattening rule.

use serde::{Deserialize, Serialize};

use crate::entropy::entropy_of_masses;

/// Relative spread below which nonzero masses count as equal.
pub const FLAT_TOL: f64 = 1e-12;

/// An output whose posterior is uniform on `support`.
///
/// `support` is kept sorted and deduplicated so that equal supports compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatColumn {
    support: Vec<usize>,
    weight: f64,
}

impl FlatColumn {
    pub fn new(support: impl IntoIterator<Item = usize>, weight: f64) -> Self {
        let mut support: Vec<usize> = support.into_iter().collect();
        support.sort_unstable();
        support.dedup();
        Self { support, weight }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// `p(y|x̂)`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub(crate) fn add_weight(&mut self, w: f64) {
        self.weight += w;
    }

    /// Number of signals with nonzero posterior.
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.support.binary_search(&x).is_ok()
    }

    /// `p(x, y|x̂)` for each support member.
    pub fn cell_mass(&self) -> f64 {
        self.weight / self.len() as f64
    }

    /// `p(y|x̂) · H(X|Y=y)`.
    pub fn equivocation(&self) -> f64 {
        self.weight * (self.len() as f64).log2()
    }

    pub(crate) fn without(&self, x: usize, weight: f64) -> Self {
        Self::new(self.support.iter().copied().filter(|&s| s != x), weight)
    }

    pub(crate) fn with(&self, x: usize, weight: f64) -> Self {
        Self::new(self.support.iter().copied().chain(std::iter::once(x)), weight)
    }
}

/// An arbitrary output column: the masses `p(x, y|x̂)` over all signals.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralColumn {
    masses: Vec<f64>,
}

impl GeneralColumn {
    pub fn new(masses: Vec<f64>) -> Self {
        debug_assert!(masses.iter().all(|m| *m >= 0.0));
        Self { masses }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `p(y|x̂)`, the column total.
    pub fn weight(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn equivocation(&self) -> f64 {
        self.weight() * entropy_of_masses(&self.masses)
    }

    /// The flat equivalent when all nonzero masses agree to within [`FLAT_TOL`].
    pub fn as_flat(&self) -> Option<FlatColumn> {
        let nonzero = self.masses.iter().filter(|m| **m > 0.0);
        let (lo, hi) = nonzero.fold((f64::INFINITY, 0.0f64), |(lo, hi), &m| (lo.min(m), hi.max(m)));
        if hi == 0.0 || hi - lo >= FLAT_TOL * hi {
            return None;
        }
        let support = self.masses.iter().enumerate().filter(|(_, m)| **m > 0.0).map(|(x, _)| x);
        Some(FlatColumn::new(support, self.weight()))
    }
}

/// Splits a column into nested flat columns without changing any row sum.
///
/// Signals are ranked by posterior, `xhat` first and ties by ascending index;
/// output `i` covers the top `i` signals with weight `i · p(y) · (p_i - p_{i+1})`.
/// Zero-weight outputs are dropped.
pub fn flatten_column(col: &GeneralColumn, xhat: usize) -> Vec<FlatColumn> {
    let masses = col.masses();
    let top = masses[xhat];
    if top <= 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..masses.len()).filter(|&x| x != xhat && masses[x] > 0.0).collect();
    order.sort_by(|&a, &b| masses[b].total_cmp(&masses[a]).then(a.cmp(&b)));
    order.insert(0, xhat);

    // Masses are capped at the decode's own mass and snapped onto their
    // predecessor when within FLAT_TOL of it.
    let mut level: Vec<f64> = Vec::with_capacity(order.len());
    for &x in &order {
        let m = masses[x].min(top);
        let prev = level.last().copied().unwrap_or(top);
        level.push(if prev - m < FLAT_TOL * top { prev } else { m });
    }

    let mut out = Vec::new();
    for i in 0..order.len() {
        let next = level.get(i + 1).copied().unwrap_or(0.0);
        let weight = (i + 1) as f64 * (level[i] - next);
        if weight > 0.0 {
            out.push(FlatColumn::new(order[..=i].iter().copied(), weight));
        }
    }
    out
}
