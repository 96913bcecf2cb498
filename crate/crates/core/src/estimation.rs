//! Mutual-information sandwich from raw `(signal, output)` samples.
//!
//! The outputs are decoded with the empirical MAP rule, the resulting
//! confusion matrix gives `I(X;X̂)` from below (data processing) and
//! `H(X) - Σ p(x̂) φ*(ε_x̂)` from above. Plug-in frequencies only.

use std::collections::BTreeMap;
use std::io::BufRead;

use indexmap::IndexSet;
use serde::Serialize;

use crate::bounds::bound_report;
use crate::confusion::{validate_confusion, ConfusionMatrix};
use crate::error::{Error, Result};

/// Decode bins with fewer samples than this are flagged in the report.
pub const SMALL_BIN: u64 = 25;

pub const TIE_POLICY: &str = "ties decode to the earliest-seen signal";

/// Counts of `(signal, output)` pairs with first-seen label indexing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleBatch {
    signals: IndexSet<String>,
    outputs: IndexSet<String>,
    counts: BTreeMap<(usize, usize), u64>,
    total: u64,
}

impl SampleBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: &str, y: &str) {
        self.push_n(x, y, 1);
    }

    fn push_n(&mut self, x: &str, y: &str, count: u64) {
        let xi = match self.signals.get_index_of(x) {
            Some(i) => i,
            None => self.signals.insert_full(x.to_owned()).0,
        };
        let yi = match self.outputs.get_index_of(y) {
            Some(i) => i,
            None => self.outputs.insert_full(y.to_owned()).0,
        };
        *self.counts.entry((xi, yi)).or_insert(0) += count;
        self.total += count;
    }

    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let mut batch = Self::new();
        for (x, y) in pairs {
            batch.push(x.as_ref(), y.as_ref());
        }
        batch
    }

    /// Adds another batch's counts. Labels new to `self` are appended in
    /// `other`'s order, so merging shards of a stream in order reproduces the
    /// unsharded label indices.
    pub fn merge(&mut self, other: &SampleBatch) {
        for s in &other.signals {
            self.signals.insert(s.clone());
        }
        for o in &other.outputs {
            self.outputs.insert(o.clone());
        }
        for (&(x, y), &c) in &other.counts {
            self.push_n(&other.signals[x], &other.outputs[y], c);
        }
    }

    pub fn n_samples(&self) -> u64 {
        self.total
    }

    pub fn n_signals(&self) -> usize {
        self.signals.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn signal_labels(&self) -> impl Iterator<Item = &str> {
        self.signals.iter().map(String::as_str)
    }

    pub fn signal_index(&self, label: &str) -> Option<usize> {
        self.signals.get_index_of(label)
    }

    pub fn output_index(&self, label: &str) -> Option<usize> {
        self.outputs.get_index_of(label)
    }

    pub fn count(&self, x: usize, y: usize) -> u64 {
        self.counts.get(&(x, y)).copied().unwrap_or(0)
    }

    /// Number of distinct `(x, y)` cells stored.
    pub fn cells(&self) -> usize {
        self.counts.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    /// Header row naming `x` and `y`.
    Csv,
    /// One `{"x": ..., "y": ...}` object per line.
    Jsonl,
}

/// Reads samples, sniffing JSONL (first non-blank byte `{`) versus CSV when
/// `format` is `None`.
pub fn ingest_samples<R: BufRead>(mut reader: R, format: Option<SampleFormat>) -> Result<SampleBatch> {
    let format = match format {
        Some(f) => f,
        None => {
            let head = reader.fill_buf()?;
            match head.iter().find(|b| !b.is_ascii_whitespace()) {
                Some(b'{') => SampleFormat::Jsonl,
                _ => SampleFormat::Csv,
            }
        }
    };
    let batch = match format {
        SampleFormat::Csv => ingest_csv(reader)?,
        SampleFormat::Jsonl => ingest_jsonl(reader)?,
    };
    if batch.n_samples() == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(batch)
}

fn ingest_csv<R: BufRead>(reader: R) -> Result<SampleBatch> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let parse_err = |e: csv::Error| Error::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() };
    let headers = rdr.headers().map_err(parse_err)?.clone();
    if headers.is_empty() {
        return Ok(SampleBatch::new());
    }
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("header must name columns x and y, found {:?}", headers.iter().collect::<Vec<_>>()),
        })
    };
    let (xi, yi) = (column("x")?, column("y")?);
    let mut batch = SampleBatch::new();
    for record in rdr.records() {
        let record = record.map_err(parse_err)?;
        let line = record.position().map_or(0, |p| p.line());
        match (record.get(xi), record.get(yi)) {
            (Some(x), Some(y)) => batch.push(x, y),
            _ => return Err(Error::Parse { line, message: "missing x or y field".into() }),
        }
    }
    Ok(batch)
}

fn json_label(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn ingest_jsonl<R: BufRead>(reader: R) -> Result<SampleBatch> {
    let mut batch = SampleBatch::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        let x = value.get("x").and_then(json_label);
        let y = value.get("y").and_then(json_label);
        match (x, y) {
            (Some(x), Some(y)) => batch.push(&x, &y),
            _ => return Err(Error::Parse { line: lineno, message: "expected an object with scalar x and y".into() }),
        }
    }
    Ok(batch)
}

/// Empirical MAP decode `g(y)` for every observed output.
pub fn empirical_decoder(batch: &SampleBatch) -> Vec<usize> {
    let mut best: Vec<Option<(u64, usize)>> = vec![None; batch.n_outputs()];
    // Cells iterate by ascending signal index, so strict `>` keeps the earliest on ties.
    for (&(x, y), &c) in &batch.counts {
        if best[y].is_none_or(|(bc, _)| c > bc) {
            best[y] = Some((c, x));
        }
    }
    best.into_iter().map(|b| b.map_or(0, |(_, x)| x)).collect()
}

/// Integer confusion counts `[x][x̂]` and the number of samples per decode.
fn confusion_counts(batch: &SampleBatch) -> (Vec<Vec<u64>>, Vec<u64>) {
    let n = batch.n_signals();
    let decoder = empirical_decoder(batch);
    let mut counts = vec![vec![0u64; n]; n];
    let mut bins = vec![0u64; n];
    for (&(x, y), &c) in &batch.counts {
        counts[x][decoder[y]] += c;
        bins[decoder[y]] += c;
    }
    (counts, bins)
}

pub fn empirical_confusion(batch: &SampleBatch) -> Result<ConfusionMatrix> {
    if batch.n_samples() == 0 {
        return Err(Error::EmptyInput);
    }
    let total = batch.n_samples() as f64;
    let (counts, _) = confusion_counts(batch);
    let rows: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().map(|&c| c as f64 / total).collect()).collect();
    validate_confusion(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    pub n_samples: u64,
    pub n_signals: usize,
    pub n_outputs: usize,
    pub h_x: f64,
    pub h_x_given_xhat: f64,
    /// `I(X;X̂)`, a lower bound on `I(X;Y)`.
    pub i_lower: f64,
    /// `H(X) - Σ p(x̂) φ*(ε_x̂)`, an upper bound on `I(X;Y)`.
    pub mi_upper: f64,
    pub bound_confusion: f64,
    pub bound_kovalevsky: f64,
    pub sandwich_width: f64,
    pub signal_labels: Vec<String>,
    pub decode_bin_counts: Vec<u64>,
    pub tie_policy: String,
    pub warnings: Vec<String>,
}

pub fn estimate(batch: &SampleBatch) -> Result<EstimationReport> {
    let cm = empirical_confusion(batch)?;
    let r = bound_report(&cm);
    let (_, bins) = confusion_counts(batch);
    let warnings = bins
        .iter()
        .zip(&batch.signals)
        .filter(|(&c, _)| c < SMALL_BIN)
        .map(|(&c, label)| {
            format!("decode bin {label:?} has {c} samples (< {SMALL_BIN}); plug-in estimates are unreliable")
        })
        .collect();
    Ok(EstimationReport {
        n_samples: batch.n_samples(),
        n_signals: batch.n_signals(),
        n_outputs: batch.n_outputs(),
        h_x: r.h_x,
        h_x_given_xhat: r.h_x_given_xhat,
        i_lower: r.i_x_xhat,
        mi_upper: r.mi_upper,
        bound_confusion: r.bound_confusion,
        bound_kovalevsky: r.bound_kovalevsky,
        sandwich_width: r.mi_upper - r.i_x_xhat,
        signal_labels: batch.signals.iter().cloned().collect(),
        decode_bin_counts: bins,
        tie_policy: TIE_POLICY.to_string(),
        warnings,
    })
}
