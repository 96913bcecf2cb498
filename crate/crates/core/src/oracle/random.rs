//! Seeded random channels and MAP-consistent confusion matrices.
//!
//! All generators use ChaCha8 so a seed replays identically on every platform.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::confusion::{validate_confusion, ConfusionMatrix};
use crate::joint::JointChannel;

/// Derives an independent seed for item `index` of a run seeded with `master` (SplitMix64).
pub fn sub_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random joint distribution tagged with the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomChannel {
    pub seed: u64,
    pub channel: JointChannel,
}

/// Nonnegative masses with a random sharpness and sparsity, so that both
/// near-deterministic and near-uniform columns show up.
fn random_masses<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let sharpness = [1.0, 2.0, 4.0, 8.0][rng.gen_range(0..4)];
    let sparsity = [0.0, 0.3, 0.6][rng.gen_range(0..3)];
    (0..len).map(|_| if rng.gen_bool(sparsity) { 0.0 } else { rng.gen::<f64>().powf(sharpness) }).collect()
}

pub fn random_channel(nx: usize, ny: usize, seed: u64) -> RandomChannel {
    assert!(nx >= 1 && ny >= 1, "channel needs at least one signal and one output");
    let mut rng = rng(seed);
    let mut entries = random_masses(&mut rng, nx * ny);
    let total: f64 = entries.iter().sum();
    if total <= 0.0 {
        entries[rng.gen_range(0..nx * ny)] = 1.0;
    } else {
        entries.iter_mut().for_each(|e| *e /= total);
    }
    RandomChannel { seed, channel: JointChannel::from_parts(nx, ny, entries) }
}

/// A random valid confusion matrix of size `n`.
///
/// Each column is empty, flat over a random set containing the diagonal, or
/// random with its maximum swapped onto the diagonal.
pub fn random_confusion(n: usize, seed: u64) -> ConfusionMatrix {
    assert!(n >= 1, "confusion matrix needs at least one signal");
    let mut rng = rng(seed);
    let mut m = vec![vec![0.0; n]; n];
    for c in 0..n {
        let kind: f64 = rng.gen();
        let mut col = vec![0.0; n];
        if kind < 0.1 {
            // never decoded
        } else if kind < 0.25 {
            let scale: f64 = rng.gen_range(0.1..1.0);
            col[c] = scale;
            for (x, v) in col.iter_mut().enumerate() {
                if x != c && rng.gen_bool(0.5) {
                    *v = scale;
                }
            }
        } else {
            col = random_masses(&mut rng, n);
            let arg = (0..n).fold(0, |b, i| if col[i] > col[b] { i } else { b });
            col.swap(arg, c);
        }
        for x in 0..n {
            m[x][c] = col[x];
        }
    }
    let total: f64 = m.iter().flatten().sum();
    if total <= 0.0 {
        let c = rng.gen_range(0..n);
        m[c][c] = 1.0;
    } else {
        m.iter_mut().flatten().for_each(|v| *v /= total);
    }
    validate_confusion(&m).expect("generated columns are diagonal-dominant and normalized")
}

/// Draws `count` `(x, y)` index pairs from a joint distribution.
pub fn sample_pairs(channel: &JointChannel, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let dist = WeightedIndex::new(channel.entries()).expect("channel has positive total mass");
    let mut rng = rng(seed);
    let ny = channel.ny();
    (0..count)
        .map(|_| {
            let k = dist.sample(&mut rng);
            (k / ny, k % ny)
        })
        .collect()
}
