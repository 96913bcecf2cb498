//! Brute-force minimum equivocation at a fixed success probability.
//!
//! [`min_entropy_at_max`] searches single distributions on `n` points whose
//! largest element is exactly `p_max`. One point carries `p_max`; the other
//! `n - 1` split the remaining mass with every value in `[0, p_max]`. The
//! first `n - 2` of them are chosen on a grid by dynamic programming over the
//! running sum (entropy is a sum of per-point terms), and the last takes
//! whatever mass is left. The grid is then refined around the best vector.
//!
//! A conditional entropy averages such posteriors, so the smallest
//! equivocation with mean largest posterior `p_max` is the lower convex
//! envelope of that profile. [`EquivocationOracle`] finds it by scanning
//! two-posterior mixtures `λ·f(p1) + (1-λ)·f(p2)` with `p1 <= p_max <= p2`.

use std::collections::HashMap;

use crate::entropy::{entropy_bits, surprisal_term};
use crate::error::{Error, Result};

pub const COARSE_STEP: f64 = 1e-3;
pub const REFINE_STEPS: [f64; 2] = [1e-4, 1e-5];
/// Half-width of each refinement window, in units of the previous step.
const WINDOW: f64 = 2.0;
const FEAS_TOL: f64 = 1e-12;

/// Profile spacing for the mixture scan.
pub const PROFILE_STEP: f64 = 1e-2;
/// Local refinement of the two mixture components.
pub const MIXTURE_REFINE_STEPS: [f64; 2] = [1e-3, 1e-4];
/// Half-width of each mixture refinement window, in units of the previous step.
const MIXTURE_WINDOW: f64 = 1.0;

/// Smallest `H(X|Y)` over channels on `n` signals whose MAP decoder succeeds
/// with probability `p_max`.
pub fn min_entropy_oracle(p_max: f64, n: usize) -> Result<f64> {
    EquivocationOracle::new(n)?.min_equivocation(p_max)
}

/// Mixture search with the coarse profile for one alphabet size cached.
#[derive(Debug, Clone)]
pub struct EquivocationOracle {
    n: usize,
    profile: Vec<(f64, f64)>,
}

impl EquivocationOracle {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InfeasibleMax { p_max: 1.0, n });
        }
        let lo = 1.0 / n as f64;
        let mut points = vec![lo];
        points.extend(grid(lo, 1.0, PROFILE_STEP, 1.0).into_iter().filter(|&p| p > lo));
        points.dedup();
        let profile = points.into_iter().map(|p| Ok((p, min_entropy_at_max(p, n)?))).collect::<Result<_>>()?;
        Ok(Self { n, profile })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn min_equivocation(&self, p_max: f64) -> Result<f64> {
        let n = self.n;
        let lo = 1.0 / n as f64;
        if !(p_max <= 1.0 + FEAS_TOL && p_max >= lo - FEAS_TOL) {
            return Err(Error::InfeasibleMax { p_max, n });
        }
        let p_max = p_max.clamp(lo, 1.0);
        let f = |p: f64| min_entropy_at_max(p.clamp(lo, 1.0), n);
        let centre = (p_max, p_max, f(p_max)?);

        let below: Vec<(f64, f64)> = self.profile.iter().copied().filter(|&(p, _)| p < p_max).collect();
        let above: Vec<(f64, f64)> = self.profile.iter().copied().filter(|&(p, _)| p > p_max).collect();
        let mut best = centre;
        for &(p1, f1) in &below {
            for &(p2, f2) in &above {
                let v = mix(p_max, (p1, f1), (p2, f2));
                if v < best.2 {
                    best = (p1, p2, v);
                }
            }
        }

        let mut prev_step = PROFILE_STEP;
        for step in MIXTURE_REFINE_STEPS {
            if best.0 >= p_max || best.1 <= p_max {
                break;
            }
            let side = |c: f64, lo_b: f64, hi_b: f64| -> Result<Vec<(f64, f64)>> {
                let mut ps = grid(c - MIXTURE_WINDOW * prev_step, c + MIXTURE_WINDOW * prev_step, step, hi_b);
                ps.push(c);
                ps.retain(|&p| p >= lo_b && p <= hi_b);
                ps.into_iter().map(|p| Ok((p, f(p)?))).collect()
            };
            let left: Vec<_> = side(best.0, lo, p_max)?.into_iter().filter(|&(p, _)| p < p_max).collect();
            let right: Vec<_> = side(best.1, p_max, 1.0)?.into_iter().filter(|&(p, _)| p > p_max).collect();
            for &a in &left {
                for &b in &right {
                    let v = mix(p_max, a, b);
                    if v < best.2 {
                        best = (a.0, b.0, v);
                    }
                }
            }
            prev_step = step;
        }
        Ok(best.2)
    }
}

/// Value at `p` of the chord between `(p1, f1)` and `(p2, f2)`, `p1 < p < p2`.
fn mix(p: f64, (p1, f1): (f64, f64), (p2, f2): (f64, f64)) -> f64 {
    let lambda = (p2 - p) / (p2 - p1);
    lambda * f1 + (1.0 - lambda) * f2
}

/// Minimum entropy of one distribution on `n` points with largest element `p_max`.
pub fn min_entropy_at_max(p_max: f64, n: usize) -> Result<f64> {
    if n == 0 || !(p_max <= 1.0 + FEAS_TOL && p_max * n as f64 >= 1.0 - FEAS_TOL) {
        return Err(Error::InfeasibleMax { p_max, n });
    }
    let p_max = p_max.min(1.0);
    let rest = (1.0 - p_max).max(0.0);
    if n == 1 {
        return Ok(0.0);
    }
    if n == 2 {
        return Ok(entropy_bits(&[p_max, rest]));
    }

    let free = n - 2;
    let coarse: Vec<f64> = grid(0.0, p_max, COARSE_STEP, p_max);
    let mut best = search(&vec![coarse; free], p_max, rest, COARSE_STEP)
        .expect("the coarse grid always contains a feasible point");
    let mut prev_step = COARSE_STEP;
    for step in REFINE_STEPS {
        let candidates: Vec<Vec<f64>> = best.1[..free]
            .iter()
            .map(|&v| {
                let mut c = grid(v - WINDOW * prev_step, v + WINDOW * prev_step, step, p_max);
                c.extend([0.0, p_max, v]);
                c
            })
            .collect();
        if let Some(refined) = search(&candidates, p_max, rest, step) {
            if refined.0 < best.0 {
                best = refined;
            }
        }
        prev_step = step;
    }
    Ok(best.0)
}

/// Multiples of `step` in `[lo, hi] ∩ [0, cap]`, plus `cap` itself when in range.
fn grid(lo: f64, hi: f64, step: f64, cap: f64) -> Vec<f64> {
    let lo = lo.max(0.0);
    let hi = hi.min(cap);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    let mut out: Vec<f64> = (first..=last).map(|k| k as f64 * step).collect();
    if cap >= lo && cap <= hi {
        out.push(cap);
    }
    out
}

#[derive(Clone, Copy)]
struct Node {
    cost: f64,
    prev: usize,
    value: f64,
}

/// DP states of one layer: a dense table for coarse grids, a map once the
/// key space is large and sparsely hit (refinement windows).
enum Layer {
    Dense(Vec<Option<Node>>),
    Sparse(HashMap<usize, Node>),
}

const DENSE_KEYS: usize = 1 << 16;

impl Layer {
    fn new(keys: usize) -> Self {
        if keys <= DENSE_KEYS {
            Layer::Dense(vec![None; keys])
        } else {
            Layer::Sparse(HashMap::new())
        }
    }

    fn get(&self, key: usize) -> Option<Node> {
        match self {
            Layer::Dense(v) => v[key],
            Layer::Sparse(m) => m.get(&key).copied(),
        }
    }

    /// Keeps `node` if it is the cheapest seen for `key`.
    fn offer(&mut self, key: usize, node: Node) {
        match self {
            Layer::Dense(v) => {
                if v[key].is_none_or(|s| node.cost < s.cost) {
                    v[key] = Some(node);
                }
            }
            Layer::Sparse(m) => {
                let slot = m.entry(key).or_insert(node);
                if node.cost < slot.cost {
                    *slot = node;
                }
            }
        }
    }

    fn iter(&self) -> Box<dyn Iterator<Item = (usize, Node)> + '_> {
        match self {
            Layer::Dense(v) => Box::new(v.iter().enumerate().filter_map(|(k, n)| n.map(|n| (k, n)))),
            Layer::Sparse(m) => Box::new(m.iter().map(|(&k, &n)| (k, n))),
        }
    }
}

/// Exhaustive choice of one candidate per coordinate. Every candidate is
/// either `p_max` or a multiple of `step`, so a state is keyed exactly by
/// (number of `p_max` entries, sum of grid indices) and only the cheapest
/// path to each key is kept. Returns `(entropy, free values + last)`.
fn search(candidates: &[Vec<f64>], p_max: f64, rest: f64, step: f64) -> Option<(f64, Vec<f64>)> {
    let width = (rest / step).floor() as usize + 1;
    let key_of = |caps: usize, k: usize| caps * width + k;
    let sum_of = |key: usize| (key / width) as f64 * p_max + (key % width) as f64 * step;

    let keys = (candidates.len() + 2) * width;
    let mut layers: Vec<Layer> = Vec::with_capacity(candidates.len() + 1);
    let mut start = Layer::new(keys);
    start.offer(0, Node { cost: 0.0, prev: 0, value: 0.0 });
    layers.push(start);
    for cands in candidates {
        // (is_cap, grid index, value, entropy term)
        let mut moves: Vec<(usize, usize, f64, f64)> = cands
            .iter()
            .map(|&v| {
                if (v - p_max).abs() <= FEAS_TOL {
                    (1, 0, p_max, surprisal_term(p_max))
                } else {
                    let k = (v / step).round() as usize;
                    (0, k, k as f64 * step, surprisal_term(k as f64 * step))
                }
            })
            .collect();
        moves.sort_by_key(|m| (m.0, m.1));
        moves.dedup_by(|a, b| (a.0, a.1) == (b.0, b.1));
        let mut next = Layer::new(keys);
        for (key, node) in layers.last().unwrap().iter() {
            let (caps, k) = (key / width, key % width);
            for &(dc, dk, v, t) in &moves {
                let (nc, nk) = (caps + dc, k + dk);
                if nk >= width || nc as f64 * p_max + nk as f64 * step > rest + FEAS_TOL {
                    continue;
                }
                let slot = key_of(nc, nk);
                let cost = node.cost + t;
                next.offer(slot, Node { cost, prev: key, value: v });
            }
        }
        layers.push(next);
    }

    let base = surprisal_term(p_max);
    let (slot, total, last) = layers
        .last()
        .unwrap()
        .iter()
        .filter_map(|(slot, node)| {
            let last = rest - sum_of(slot);
            (last >= -FEAS_TOL && last <= p_max + FEAS_TOL).then(|| {
                let last = last.clamp(0.0, p_max);
                (slot, base + node.cost + surprisal_term(last), last)
            })
        })
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))?;

    let mut values = vec![last];
    let mut key = slot;
    for layer in layers.iter().skip(1).rev() {
        let node = layer.get(key).expect("backpointer targets a filled slot");
        values.push(node.value);
        key = node.prev;
    }
    values.reverse();
    Some((total, values))
}
