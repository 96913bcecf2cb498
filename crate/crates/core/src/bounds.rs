//! Closed-form lower bounds on equivocation.
//!
//! Everything here is in bits. The per-decode bound is
//!
//! ```text
//! H(X|Y) >= Σ_x̂ p(x̂) φ*(ε_x̂)
//! ```
//!
//! where `φ*` is the piecewise-linear interpolation of `-log2(1 - ε)` between
//! the knots `ε = (k-1)/k`. Applying `φ*` to the overall error rate instead
//! gives the weaker single-number bound (by convexity of `φ*`).

use serde::Serialize;

use crate::confusion::{decode_profile, ConfusionMatrix};
use crate::entropy::{entropy_bits, surprisal_term};
use crate::error::{Error, Result};

/// Added before flooring `1/(1-ε)` so that float images of exact knots
/// (e.g. `ε = 2/3`) land on the integer.
pub const KNOT_GUARD: f64 = 1e-12;

fn check_domain(eps: f64) -> Result<()> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::Domain(eps))
    }
}

/// `(⌊1/(1-ε)⌋, ⌈1/(1-ε)⌉)`, equal when `1/(1-ε)` is an integer.
pub fn admissible_lengths(eps: f64) -> Result<(usize, usize)> {
    check_domain(eps)?;
    let inv = 1.0 / (1.0 - eps);
    let low = (inv + KNOT_GUARD).floor();
    let high = if inv - low <= KNOT_GUARD { low } else { low + 1.0 };
    Ok((low as usize, high as usize))
}

/// The interpolation weight on the shorter admissible length.
///
/// Zero whenever `1/(1-ε)` is an integer, including `ε = 0`. For the share
/// of probability carried by each length use [`LengthProfile`].
pub fn alpha_coeff(eps: f64) -> Result<f64> {
    let (low, high) = admissible_lengths(eps)?;
    let alpha = low as f64 * ((1.0 - eps) * high as f64 - 1.0);
    Ok(alpha.clamp(0.0, 1.0))
}

/// `φ*(ε) = α log2 ⌊1/(1-ε)⌋ + (1-α) log2 ⌈1/(1-ε)⌉`.
pub fn phi_star(eps: f64) -> Result<f64> {
    let (low, high) = admissible_lengths(eps)?;
    let alpha = alpha_coeff(eps)?;
    Ok(alpha * (low as f64).log2() + (1.0 - alpha) * (high as f64).log2())
}

/// Lengths and probability split of the flat posteriors at the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthProfile {
    pub short: usize,
    pub long: usize,
    /// Total weight carried by length `short`. When `short == long` this is 1.
    pub short_weight: f64,
}

impl LengthProfile {
    pub fn for_error(eps: f64) -> Result<Self> {
        let (short, long) = admissible_lengths(eps)?;
        let short_weight = if short == long { 1.0 } else { alpha_coeff(eps)? };
        Ok(Self { short, long, short_weight })
    }

    /// `Σ weight · log2 length` over the two classes; equals `φ*(ε)`.
    pub fn equivocation(&self) -> f64 {
        self.short_weight * (self.short as f64).log2() + (1.0 - self.short_weight) * (self.long as f64).log2()
    }
}

/// Per-decode lower bound `Σ_x̂ p(x̂) φ*(ε_x̂)`; zero-probability decodes add nothing.
pub fn equivocation_bound(cm: &ConfusionMatrix) -> f64 {
    decode_profile(cm).active().map(|(_, p, eps)| p * phi_star(eps).expect("profile errors lie in [0, (n-1)/n]")).sum()
}

/// `φ*(ε)` of the overall error rate.
pub fn kovalevsky_bound(cm: &ConfusionMatrix) -> f64 {
    phi_star(cm.overall_error()).expect("overall error lies in [0, (n-1)/n]")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entropies {
    pub h_x: f64,
    pub h_x_given_xhat: f64,
    pub i_x_xhat: f64,
}

pub fn entropies(cm: &ConfusionMatrix) -> Entropies {
    let h_x = entropy_bits(&cm.signal_marginal());
    let h_xhat = entropy_bits(&cm.decode_marginal());
    let h_joint: f64 = (0..cm.n()).flat_map(|x| cm.row(x).iter().copied()).map(surprisal_term).sum();
    let h_x_given_xhat = (h_joint - h_xhat).max(0.0);
    Entropies { h_x, h_x_given_xhat, i_x_xhat: (h_x - h_x_given_xhat).max(0.0) }
}

/// All bounds and reference entropies for one confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub h_x: f64,
    pub h_x_given_xhat: f64,
    pub i_x_xhat: f64,
    pub bound_confusion: f64,
    pub bound_kovalevsky: f64,
    pub overall_eps: f64,
    pub mi_upper: f64,
}

pub fn bound_report(cm: &ConfusionMatrix) -> BoundReport {
    let e = entropies(cm);
    let bound_confusion = equivocation_bound(cm);
    BoundReport {
        h_x: e.h_x,
        h_x_given_xhat: e.h_x_given_xhat,
        i_x_xhat: e.i_x_xhat,
        bound_confusion,
        bound_kovalevsky: kovalevsky_bound(cm),
        overall_eps: cm.overall_error(),
        mi_upper: e.h_x - bound_confusion,
    }
}
