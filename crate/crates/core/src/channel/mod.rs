//! Explicit channels that attain the per-decode equivocation bound.
//!
//! The equivocation `H(X|Y)` separates over decodes, so each fiber (the set of
//! outputs decoding to one `x̂`) is minimized on its own:
//!
//! 1. start from a single output whose posterior is `p(x|x̂)`;
//! 2. flatten every output into nested flat posteriors (rule A);
//! 3. repeatedly move one signal from the longest to the shortest output
//!    until lengths differ by at most one (rule B).
//!
//! Both rules keep every row sum `p(x|x̂)` fixed and never increase the
//! objective, and the final state has lengths `⌊1/(1-ε)⌋` and `⌈1/(1-ε)⌉`.

mod column;
mod fiber;

use serde::{Deserialize, Serialize};

pub use column::{flatten_column, FlatColumn, GeneralColumn, FLAT_TOL};
pub use fiber::{init_fiber, length_gain, minimize_fiber, Column, Fiber, Rebalance, CAP_PER_N2, ZERO_WEIGHT};

use crate::bounds::LengthProfile;
use crate::confusion::{decode_profile, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::joint::JointChannel;

/// One minimized fiber per decode with positive probability.
#[derive(Debug, Clone, PartialEq)]
pub struct AchievingChannel {
    p_hat: Vec<f64>,
    fibers: Vec<Fiber>,
}

pub fn build_achieving_channel(cm: &ConfusionMatrix) -> Result<AchievingChannel> {
    let p_hat = cm.decode_marginal();
    let fibers = (0..cm.n())
        .filter(|&xhat| p_hat[xhat] > 0.0)
        .map(|xhat| minimize_fiber(cm, xhat))
        .collect::<Result<Vec<_>>>()?;
    Ok(AchievingChannel { p_hat, fibers })
}

impl AchievingChannel {
    pub fn n(&self) -> usize {
        self.p_hat.len()
    }

    pub fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    pub fn fibers(&self) -> &[Fiber] {
        &self.fibers
    }

    pub fn fiber(&self, xhat: usize) -> Option<&Fiber> {
        self.fibers.iter().find(|f| f.xhat() == xhat)
    }

    /// `Σ_x̂ p(x̂) · H(X|Y, Y ∈ fiber x̂)`.
    pub fn equivocation(&self) -> Result<f64> {
        self.fibers.iter().map(|f| Ok(self.p_hat[f.xhat()] * f.equivocation()?)).sum()
    }

    /// Number of distinct outputs across all fibers.
    pub fn output_count(&self) -> usize {
        self.fibers.iter().map(|f| f.columns().len()).sum()
    }

    /// Recomputes `p(x, x̂) = p(x̂) Σ_y p(x|y) p(y|x̂)`.
    pub fn induced_confusion(&self) -> ConfusionMatrix {
        let n = self.n();
        let mut joint = vec![0.0; n * n];
        for f in &self.fibers {
            for (x, s) in f.row_sums().into_iter().enumerate() {
                joint[x * n + f.xhat()] = self.p_hat[f.xhat()] * s;
            }
        }
        ConfusionMatrix::from_joint_unchecked(n, joint)
    }

    /// The channel as an explicit `p(x, y)` plus the fiber decoder `y -> x̂`.
    ///
    /// Flat posteriors tie, so the fiber decoder is one of several MAP decoders;
    /// the smallest-index rule of [`JointChannel::map_decoder`] may differ from it.
    pub fn to_joint(&self) -> (JointChannel, Vec<usize>) {
        let n = self.n();
        let ny = self.output_count();
        let mut joint = vec![0.0; n * ny];
        let mut decoder = Vec::with_capacity(ny);
        for f in &self.fibers {
            let p = self.p_hat[f.xhat()];
            for c in f.columns() {
                let y = decoder.len();
                match c {
                    Column::Flat(flat) => flat.support().iter().for_each(|&x| joint[x * ny + y] = p * flat.cell_mass()),
                    Column::General(g) => g.masses().iter().enumerate().for_each(|(x, &m)| joint[x * ny + y] = p * m),
                }
                decoder.push(f.xhat());
            }
        }
        (JointChannel::from_parts(n, ny, joint), decoder)
    }

    /// Checks each fiber against the admissible lengths and weights for its error rate.
    pub fn shape_report(&self, cm: &ConfusionMatrix) -> Result<Vec<FiberShape>> {
        let profile = decode_profile(cm);
        self.fibers
            .iter()
            .map(|f| {
                let eps = profile.eps[f.xhat()].ok_or(Error::ZeroProbabilityDecode { xhat: f.xhat() })?;
                let expected = LengthProfile::for_error(eps)?;
                let by_len = f.weight_by_length()?;
                let short_weight = by_len.get(&expected.short).copied().unwrap_or(0.0);
                let long_weight = if expected.long == expected.short {
                    0.0
                } else {
                    by_len.get(&expected.long).copied().unwrap_or(0.0)
                };
                let stray_weight = f.total_weight() - short_weight - long_weight;
                Ok(FiberShape { xhat: f.xhat(), eps, expected, short_weight, stray_weight, columns: f.columns().len() })
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.dump())?)
    }

    pub fn dump(&self) -> ChannelDump {
        ChannelDump {
            p_hat: self.p_hat.clone(),
            fibers: self
                .fibers
                .iter()
                .map(|f| FiberDump {
                    xhat: f.xhat(),
                    columns: f.columns().iter().filter_map(Column::as_flat).cloned().collect(),
                })
                .collect(),
        }
    }

    /// Rebuilds a channel from its dump, checking that every output keeps its decode.
    pub fn from_dump(dump: ChannelDump) -> Result<Self> {
        let n = dump.p_hat.len();
        let fibers = dump
            .fibers
            .into_iter()
            .map(|fd| {
                if fd.xhat >= n {
                    return Err(Error::InvalidArgument(format!("fiber decode {} out of range", fd.xhat)));
                }
                let fiber = Fiber::from_flat(fd.xhat, n, fd.columns)?;
                if !fiber.is_map_valid() {
                    return Err(Error::InvalidArgument(format!(
                        "fiber {} has an output whose support omits its decode",
                        fd.xhat
                    )));
                }
                Ok(fiber)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { p_hat: dump.p_hat, fibers })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_dump(serde_json::from_str(s)?)
    }
}

/// Serialized form: `{p_hat, fibers: [{xhat, columns: [{support, weight}]}]}`, 0-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDump {
    pub p_hat: Vec<f64>,
    pub fibers: Vec<FiberDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberDump {
    pub xhat: usize,
    pub columns: Vec<FlatColumn>,
}

/// Observed length/weight split of a fiber next to the one its error rate predicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberShape {
    pub xhat: usize,
    pub eps: f64,
    pub expected: LengthProfile,
    /// Observed weight on `expected.short`.
    pub short_weight: f64,
    /// Weight on lengths outside the admissible pair.
    pub stray_weight: f64,
    pub columns: usize,
}

impl FiberShape {
    pub fn matches(&self, tol: f64) -> bool {
        self.stray_weight.abs() <= tol && (self.short_weight - self.expected.short_weight).abs() <= tol
    }
}
