//! Finite joint distributions `p(x, y)` and their MAP decoders.

use crate::confusion::{validate_confusion, ConfusionMatrix};
use crate::entropy::{entropy_bits, surprisal_term};
use crate::error::{Error, Result};

/// Total-mass slack accepted by [`JointChannel::new`].
pub const JOINT_TOL: f64 = 1e-9;

/// Joint distribution over `nx` signals and `ny` channel outputs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointChannel {
    nx: usize,
    ny: usize,
    joint: Vec<f64>,
}

impl JointChannel {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidArgument("channel must have at least one signal and one output".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != ny) {
            return Err(Error::InvalidArgument(format!(
                "row {} has {} outputs, expected {ny}",
                bad + 1,
                rows[bad].len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("channel entries must be finite and nonnegative".into()));
        }
        let sum: f64 = rows.iter().flatten().sum();
        if (sum - 1.0).abs() > JOINT_TOL {
            return Err(Error::InvalidArgument(format!("channel entries sum to {sum}, expected 1")));
        }
        Ok(Self { nx, ny, joint: rows.iter().flatten().copied().collect() })
    }

    pub(crate) fn from_parts(nx: usize, ny: usize, joint: Vec<f64>) -> Self {
        debug_assert_eq!(joint.len(), nx * ny);
        Self { nx, ny, joint }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.joint[x * self.ny + y]
    }

    pub fn entries(&self) -> &[f64] {
        &self.joint
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.joint.chunks(self.ny).map(<[f64]>::to_vec).collect()
    }

    pub fn output_marginal(&self) -> Vec<f64> {
        (0..self.ny).map(|y| (0..self.nx).map(|x| self.get(x, y)).sum()).collect()
    }

    pub fn signal_marginal(&self) -> Vec<f64> {
        self.joint.chunks(self.ny).map(|r| r.iter().sum()).collect()
    }

    pub fn h_x(&self) -> f64 {
        entropy_bits(&self.signal_marginal())
    }

    /// `H(X|Y)` in bits, summed output by output.
    pub fn equivocation(&self) -> f64 {
        self.output_marginal()
            .iter()
            .enumerate()
            .filter(|(_, &py)| py > 0.0)
            .map(|(y, &py)| py * (0..self.nx).map(|x| surprisal_term(self.get(x, y) / py)).sum::<f64>())
            .sum()
    }

    /// MAP decode for every output; ties go to the smallest signal index.
    pub fn map_decoder(&self) -> Vec<usize> {
        (0..self.ny)
            .map(|y| (0..self.nx).fold(0, |best, x| if self.get(x, y) > self.get(best, y) { x } else { best }))
            .collect()
    }

    /// True when `decoder[y]` attains the maximum of column `y` for every output.
    pub fn is_map_decoder(&self, decoder: &[usize]) -> bool {
        decoder.len() == self.ny
            && decoder
                .iter()
                .enumerate()
                .all(|(y, &g)| g < self.nx && (0..self.nx).all(|x| self.get(x, y) <= self.get(g, y)))
    }

    /// Confusion matrix `p(x, x̂)` under an explicit decoder. Requires `nx`
    /// decodes, so the result is `nx x nx`.
    pub fn confusion_under(&self, decoder: &[usize]) -> Result<ConfusionMatrix> {
        if decoder.len() != self.ny || decoder.iter().any(|&g| g >= self.nx) {
            return Err(Error::InvalidArgument("decoder does not match the channel shape".into()));
        }
        let mut m = vec![vec![0.0; self.nx]; self.nx];
        for (y, &g) in decoder.iter().enumerate() {
            for (x, row) in m.iter_mut().enumerate() {
                row[g] += self.get(x, y);
            }
        }
        validate_confusion(&m)
    }

    /// Confusion matrix of the MAP decoder (smallest-index tie rule).
    pub fn map_confusion(&self) -> Result<ConfusionMatrix> {
        self.confusion_under(&self.map_decoder())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel() {
        let rows: Vec<Vec<f64>> =
            (0..3).map(|i| (0..3).map(|j| if i == j { 1.0 / 3.0 } else { 0.0 }).collect()).collect();
        let ch = JointChannel::new(&rows).unwrap();
        assert_eq!(ch.map_decoder(), vec![0, 1, 2]);
        assert_eq!(ch.equivocation(), 0.0);
        let cm = ch.map_confusion().unwrap();
        assert_eq!(cm.rows(), rows);
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let ch = JointChannel::new(&[vec![0.25, 0.1], vec![0.25, 0.4]]).unwrap();
        assert_eq!(ch.map_decoder(), vec![0, 1]);
        assert!(ch.is_map_decoder(&[1, 1]));
        assert!(!ch.is_map_decoder(&[0, 0]));
    }

    #[test]
    fn equivocation_of_noisy_output() {
        let ch = JointChannel::new(&[vec![0.25, 0.0], vec![0.25, 0.5]]).unwrap();
        assert!((ch.equivocation() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(JointChannel::new(&[]).is_err());
        assert!(JointChannel::new(&[vec![0.5], vec![0.2, 0.3]]).is_err());
        assert!(JointChannel::new(&[vec![0.5, 0.6]]).is_err());
        assert!(JointChannel::new(&[vec![-0.5, 1.5]]).is_err());
    }
}
