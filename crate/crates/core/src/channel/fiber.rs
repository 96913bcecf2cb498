use std::collections::BTreeMap;

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};

use super::column::{flatten_column, FlatColumn, GeneralColumn};

/// Columns lighter than this are discarded after a split.
pub const ZERO_WEIGHT: f64 = 1e-15;

/// Balancing steps allowed per fiber, as a multiple of `n²`.
pub const CAP_PER_N2: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Flat(FlatColumn),
    General(GeneralColumn),
}

impl Column {
    /// Promotes flat-within-tolerance masses to a [`FlatColumn`].
    pub fn from_masses(masses: Vec<f64>) -> Self {
        let general = GeneralColumn::new(masses);
        match general.as_flat() {
            Some(flat) => Column::Flat(flat),
            None => Column::General(general),
        }
    }

    pub fn weight(&self) -> f64 {
        match self {
            Column::Flat(c) => c.weight(),
            Column::General(c) => c.weight(),
        }
    }

    /// `p(y|x̂) · H(X|Y=y)`.
    pub fn equivocation(&self) -> f64 {
        match self {
            Column::Flat(c) => c.equivocation(),
            Column::General(c) => c.equivocation(),
        }
    }

    pub fn as_flat(&self) -> Option<&FlatColumn> {
        match self {
            Column::Flat(c) => Some(c),
            Column::General(_) => None,
        }
    }
}

/// One rule-B move: a signal carried from a long column to a short one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rebalance {
    pub long_len: usize,
    pub short_len: usize,
    pub moved: usize,
    /// Weight of the part of the long column that took part in the move.
    pub matched_weight: f64,
    /// Predicted change of the fiber equivocation, always negative.
    pub delta: f64,
}

/// `f(t) = t log2 t - (t-1) log2 (t-1)`, increasing for `t >= 1`.
pub fn length_gain(t: usize) -> f64 {
    let t = t as f64;
    let prev = if t > 1.0 { (t - 1.0) * (t - 1.0).log2() } else { 0.0 };
    t * t.log2() - prev
}

/// All outputs that decode to `xhat`, with the conditional `p(x|x̂)` they must reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    xhat: usize,
    columns: Vec<Column>,
    target: Vec<f64>,
}

impl Fiber {
    /// A fiber made of flat columns; the target is whatever they add up to.
    pub fn from_flat(xhat: usize, n: usize, columns: Vec<FlatColumn>) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.support().iter().any(|&x| x >= n) || c.weight() < 0.0) {
            return Err(Error::InvalidArgument(format!("column {:?} does not fit {n} signals", bad.support())));
        }
        // Deserialized supports may be unsorted.
        let columns = columns
            .into_iter()
            .map(|c| Column::Flat(FlatColumn::new(c.support().iter().copied(), c.weight())))
            .collect();
        let mut fiber = Self { xhat, columns, target: vec![0.0; n] };
        fiber.target = fiber.row_sums();
        Ok(fiber)
    }

    pub fn xhat(&self) -> usize {
        self.xhat
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// The conditional `p(x|x̂)` this fiber must reproduce.
    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn is_flat(&self) -> bool {
        self.columns.iter().all(|c| matches!(c, Column::Flat(_)))
    }

    pub fn flat_columns(&self) -> Result<Vec<&FlatColumn>> {
        self.columns
            .iter()
            .enumerate()
            .map(|(index, c)| c.as_flat().ok_or(Error::NotFlat { xhat: self.xhat, index }))
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.columns.iter().map(Column::weight).sum()
    }

    /// `Σ_y p(x|y) p(y|x̂)` for every signal.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.target.len()];
        for c in &self.columns {
            match c {
                Column::Flat(f) => f.support().iter().for_each(|&x| sums[x] += f.cell_mass()),
                Column::General(g) => sums.iter_mut().zip(g.masses()).for_each(|(s, m)| *s += m),
            }
        }
        sums
    }

    /// Weighted entropy of all columns, flat or not.
    pub fn objective(&self) -> f64 {
        self.columns.iter().map(Column::equivocation).sum()
    }

    /// `Σ p(y|x̂) log2 |support|`; defined only once every column is flat.
    pub fn equivocation(&self) -> Result<f64> {
        Ok(self.flat_columns()?.iter().map(|c| c.equivocation()).sum())
    }

    /// Total weight per column length.
    pub fn weight_by_length(&self) -> Result<BTreeMap<usize, f64>> {
        let mut out = BTreeMap::new();
        for c in self.flat_columns()? {
            *out.entry(c.len()).or_insert(0.0) += c.weight();
        }
        Ok(out)
    }

    /// Whether `xhat` attains the maximum posterior of every column.
    pub fn is_map_valid(&self) -> bool {
        self.columns.iter().all(|c| match c {
            Column::Flat(f) => f.contains(self.xhat),
            Column::General(g) => g.masses().iter().all(|&m| m <= g.masses()[self.xhat]),
        })
    }

    /// Applies the flattening rule to every non-flat column.
    pub fn flatten(&mut self) {
        let xhat = self.xhat;
        let columns = std::mem::take(&mut self.columns);
        self.columns = columns
            .into_iter()
            .flat_map(|c| match c {
                Column::Flat(f) => vec![f],
                Column::General(g) => flatten_column(&g, xhat),
            })
            .map(Column::Flat)
            .collect();
        self.merge_duplicates();
    }

    /// One application of the balancing rule to the (longest, shortest) pair.
    ///
    /// Returns `None` once all lengths are within one of each other.
    pub fn balance_step(&mut self) -> Result<Option<Rebalance>> {
        let flat = self.flat_columns()?;
        if flat.len() < 2 {
            return Ok(None);
        }
        let mut long_idx = 0;
        let mut short_idx = 0;
        for (i, c) in flat.iter().enumerate() {
            if c.len() > flat[long_idx].len() {
                long_idx = i;
            }
            if c.len() < flat[short_idx].len() {
                short_idx = i;
            }
        }
        let long = flat[long_idx].clone();
        let short = flat[short_idx].clone();
        let (a, b) = (long.len(), short.len());
        if a <= b + 1 {
            return Ok(None);
        }
        let xhat = self.xhat;
        let moved = long
            .support()
            .iter()
            .rev()
            .copied()
            .find(|&x| x != xhat && !short.contains(x))
            .expect("a longer support has a signal the shorter one lacks");

        // Split off the parts with equal per-signal mass; the heavier column keeps a remainder.
        let (cell, long_rest, short_rest) = if long.cell_mass() <= short.cell_mass() {
            let cell = long.cell_mass();
            (cell, 0.0, short.weight() - cell * b as f64)
        } else {
            let cell = short.cell_mass();
            (cell, long.weight() - cell * a as f64, 0.0)
        };
        let step = Rebalance {
            long_len: a,
            short_len: b,
            moved,
            matched_weight: cell * a as f64,
            delta: cell * (length_gain(b + 1) - length_gain(a)),
        };

        self.columns[long_idx] = Column::Flat(long.without(moved, cell * (a - 1) as f64));
        self.columns[short_idx] = Column::Flat(short.with(moved, cell * (b + 1) as f64));
        if long_rest > ZERO_WEIGHT {
            self.columns.push(Column::Flat(FlatColumn::new(long.support().iter().copied(), long_rest)));
        }
        if short_rest > ZERO_WEIGHT {
            self.columns.push(Column::Flat(FlatColumn::new(short.support().iter().copied(), short_rest)));
        }
        self.merge_duplicates();
        Ok(Some(step))
    }

    /// Sums flat columns with identical supports into the first one and drops empty columns.
    fn merge_duplicates(&mut self) {
        let mut merged: Vec<Column> = Vec::with_capacity(self.columns.len());
        let mut seen: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for c in std::mem::take(&mut self.columns) {
            if c.weight() <= ZERO_WEIGHT {
                continue;
            }
            match c {
                Column::Flat(f) => match seen.get(f.support()) {
                    Some(&at) => {
                        if let Column::Flat(existing) = &mut merged[at] {
                            existing.add_weight(f.weight());
                        }
                    }
                    None => {
                        seen.insert(f.support().to_vec(), merged.len());
                        merged.push(Column::Flat(f));
                    }
                },
                general => merged.push(general),
            }
        }
        self.columns = merged;
    }
}

impl Fiber {
    fn sort_columns(&mut self) {
        self.columns.sort_by(|a, b| match (a.as_flat(), b.as_flat()) {
            (Some(a), Some(b)) => a.support().cmp(b.support()),
            _ => std::cmp::Ordering::Equal,
        });
    }
}

/// Starting point of the minimization: one column equal to `p(x|x̂)`.
pub fn init_fiber(cm: &ConfusionMatrix, xhat: usize) -> Result<Fiber> {
    let column = cm.column(xhat);
    let p_hat: f64 = column.iter().sum();
    if p_hat <= 0.0 {
        return Err(Error::ZeroProbabilityDecode { xhat });
    }
    let target: Vec<f64> = column.iter().map(|m| m / p_hat).collect();
    Ok(Fiber { xhat, columns: vec![Column::from_masses(target.clone())], target })
}

/// Runs flattening and then balancing until no pair of lengths differs by
/// more than one. Columns come back ordered by support.
pub fn minimize_fiber(cm: &ConfusionMatrix, xhat: usize) -> Result<Fiber> {
    let mut fiber = init_fiber(cm, xhat)?;
    fiber.flatten();
    let cap = CAP_PER_N2 * cm.n() * cm.n();
    for _ in 0..cap {
        if fiber.balance_step()?.is_none() {
            fiber.sort_columns();
            return Ok(fiber);
        }
    }
    match fiber.balance_step()? {
        None => {
            fiber.sort_columns();
            Ok(fiber)
        }
        Some(_) => Err(Error::IterationCapExceeded { xhat, cap }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confusion::validate_confusion;

    fn example_n5() -> ConfusionMatrix {
        let row = |x: usize| (0..5).map(|c| if c == x || c == 4 { 0.1 } else { 0.0 }).collect();
        let mut m: Vec<Vec<f64>> = (0..5).map(row).collect();
        m[4][4] = 0.2;
        validate_confusion(&m).unwrap()
    }

    fn flat_fiber(xhat: usize, n: usize, cols: &[(&[usize], f64)]) -> Fiber {
        Fiber::from_flat(xhat, n, cols.iter().map(|(s, w)| FlatColumn::new(s.iter().copied(), *w)).collect()).unwrap()
    }

    fn supports(f: &Fiber) -> Vec<(Vec<usize>, f64)> {
        f.flat_columns().unwrap().iter().map(|c| (c.support().to_vec(), c.weight())).collect()
    }

    #[test]
    fn init_examples() {
        let cm = example_n5();
        let f = init_fiber(&cm, 4).unwrap();
        match &f.columns()[0] {
            Column::General(g) => {
                let want = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0];
                for (a, b) in g.masses().iter().zip(want) {
                    assert!((a - b).abs() < 1e-15);
                }
            }
            other => panic!("expected a general column, got {other:?}"),
        }
        let f = init_fiber(&cm, 1).unwrap();
        assert_eq!(supports(&f), vec![(vec![1], 1.0)]);
        let zero = validate_confusion(&[vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        assert!(matches!(init_fiber(&zero, 1), Err(Error::ZeroProbabilityDecode { xhat: 1 })));
    }

    #[test]
    fn balance_example() {
        let mut f = flat_fiber(0, 3, &[(&[0, 1, 2], 0.6), (&[0], 0.2)]);
        let before_rows = f.row_sums();
        let before = f.equivocation().unwrap();
        assert!((before - 0.950_977_500_432_694).abs() < 1e-12);
        let step = f.balance_step().unwrap().unwrap();
        assert_eq!((step.long_len, step.short_len, step.moved), (3, 1, 2));
        let got = supports(&f);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].0, vec![0, 1]);
        assert_eq!(got[1].0, vec![0, 2]);
        assert!((got[0].1 - 0.4).abs() < 1e-15 && (got[1].1 - 0.4).abs() < 1e-15);
        let after = f.equivocation().unwrap();
        assert!((after - 0.8).abs() < 1e-12);
        assert!((step.delta - (after - before)).abs() < 1e-12);
        assert!((step.delta + 0.150_977_500_432_694).abs() < 1e-12);
        for (a, b) in before_rows.iter().zip(f.row_sums()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(f.balance_step().unwrap().is_none());
    }

    #[test]
    fn equal_lengths_are_left_alone() {
        let mut f = flat_fiber(0, 4, &[(&[0, 1], 0.5), (&[0, 2], 0.3), (&[0, 3], 0.2)]);
        let before = f.clone();
        assert!(f.balance_step().unwrap().is_none());
        assert_eq!(f, before);
    }

    #[test]
    fn unequal_cells_split_the_heavier_column() {
        // long cell 0.1, short cell 0.4: the short column keeps a remainder.
        let mut f = flat_fiber(0, 4, &[(&[0, 1, 2, 3], 0.4), (&[0], 0.4), (&[0, 1], 0.2)]);
        let rows = f.row_sums();
        let before = f.equivocation().unwrap();
        let step = f.balance_step().unwrap().unwrap();
        assert!((step.matched_weight - 0.4).abs() < 1e-15);
        assert!((f.equivocation().unwrap() - before - step.delta).abs() < 1e-12);
        for (a, b) in rows.iter().zip(f.row_sums()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((f.total_weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn not_flat_is_an_error() {
        let cm = example_n5();
        let mut f = init_fiber(&cm, 4).unwrap();
        assert!(matches!(f.balance_step(), Err(Error::NotFlat { xhat: 4, index: 0 })));
        assert!(matches!(f.equivocation(), Err(Error::NotFlat { .. })));
    }

    #[test]
    fn minimize_example_fiber() {
        let cm = example_n5();
        let f = minimize_fiber(&cm, 4).unwrap();
        assert_eq!(supports(&f), vec![(vec![0, 1, 4], 0.5), (vec![2, 3, 4], 0.5)]);
        assert!((f.equivocation().unwrap() - 3f64.log2()).abs() < 1e-12);
        let f = minimize_fiber(&cm, 0).unwrap();
        assert_eq!(supports(&f), vec![(vec![0], 1.0)]);
        assert_eq!(f.equivocation().unwrap(), 0.0);
    }

    #[test]
    fn minimize_hits_two_lengths() {
        // p(x|x̂) = (0.4, 0.35, 0.25): ε = 0.6, lengths {2, 3}, weight 0.4 on length 2.
        let cm = validate_confusion(&[vec![0.4, 0.0, 0.0], vec![0.35, 0.0, 0.0], vec![0.25, 0.0, 0.0]]).unwrap();
        let f = minimize_fiber(&cm, 0).unwrap();
        let by_len = f.weight_by_length().unwrap();
        assert_eq!(by_len.keys().copied().collect::<Vec<_>>(), vec![2, 3]);
        assert!((by_len[&2] - 0.4).abs() < 1e-12);
        assert!(f.is_map_valid());
    }

    #[test]
    fn length_gain_values() {
        assert_eq!(length_gain(1), 0.0);
        assert_eq!(length_gain(2), 2.0);
        assert!((length_gain(3) - (3.0 * 3f64.log2() - 2.0)).abs() < 1e-15);
    }
}
