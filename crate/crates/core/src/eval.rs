//! Threshold-band filtering and strict/lax evaluation against gold beads.
//!
//! Null beads (one side empty) never take part in scoring: gold files leave
//! deletions unlisted, so they cannot be checked. Scores over several
//! document pairs are micro-averaged: counts are summed before computing
//! precision and recall.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::AddAssign;

use crate::bead::{AlignmentSet, Bead};
use crate::error::{Error, Result};

/// Acceptance interval `[tau, upper]` for bead scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdBand {
    tau: f64,
    upper: f64,
}

impl ThresholdBand {
    pub const DEFAULT_UPPER: f64 = 0.95;

    pub fn new(tau: f64, upper: f64) -> Result<Self> {
        if !(0.0 <= tau && tau < upper && upper <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold band needs 0 <= tau < upper <= 1, got [{tau}, {upper}]"
            )));
        }
        Ok(Self { tau, upper })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn accepts(&self, bead: &Bead) -> bool {
        !bead.is_null() && bead.score().is_some_and(|s| self.tau <= s && s <= self.upper)
    }
}

/// Keeps exactly the scored, non-null beads whose score lies in the band.
pub fn band_filter(scored: &AlignmentSet, band: &ThresholdBand) -> AlignmentSet {
    AlignmentSet::new(
        scored.pair_id.clone(),
        scored.beads.iter().filter(|b| band.accepts(b)).cloned().collect(),
    )
}

/// Human reference alignment of one pair. Deletions are simply not listed.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldAlignment {
    pub pair_id: String,
    pub beads: Vec<Bead>,
}

impl GoldAlignment {
    pub fn new(pair_id: impl Into<String>, beads: Vec<Bead>) -> Result<Self> {
        let gold = Self { pair_id: pair_id.into(), beads };
        AlignmentSet::new(gold.pair_id.clone(), gold.beads.clone()).check_monotone(usize::MAX, usize::MAX)?;
        Ok(gold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalMode {
    /// A hypothesis bead counts only if gold has the identical bead.
    Strict,
    /// A hypothesis bead counts if some gold bead overlaps it on both sides.
    Lax,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::Strict => "strict",
            EvalMode::Lax => "lax",
        }
    }
}

impl core::str::FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(EvalMode::Strict),
            "lax" => Ok(EvalMode::Lax),
            other => Err(Error::InvalidParameter(format!("unknown evaluation mode {other:?}"))),
        }
    }
}

/// Raw counts behind precision and recall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    /// Hypothesis beads judged correct.
    pub correct: usize,
    /// Gold beads recovered by some hypothesis bead.
    pub recovered: usize,
    pub hypothesis: usize,
    pub gold: usize,
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Self) {
        self.correct += rhs.correct;
        self.recovered += rhs.recovered;
        self.hypothesis += rhs.hypothesis;
        self.gold += rhs.gold;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalReport {
    pub fn from_counts(mode: EvalMode, counts: Counts) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(counts.correct, counts.hypothesis);
        let recall = ratio(counts.recovered, counts.gold);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Self { mode, counts, precision, recall, f1 }
    }

    pub fn true_positives(&self) -> usize {
        self.counts.correct
    }
}

/// Counts for one pair; hypothesis and gold must share the pair id.
pub fn pair_counts(hypothesis: &AlignmentSet, gold: &GoldAlignment, mode: EvalMode) -> Result<Counts> {
    if hypothesis.pair_id != gold.pair_id {
        return Err(Error::PairMismatch { expected: gold.pair_id.clone(), found: hypothesis.pair_id.clone() });
    }
    let hyp: Vec<&Bead> = hypothesis.non_null().collect();
    let gold: Vec<&Bead> = gold.beads.iter().filter(|b| !b.is_null()).collect();
    let matches = |a: &Bead, b: &Bead| match mode {
        EvalMode::Strict => a.same_groups(b),
        EvalMode::Lax => a.overlaps(b),
    };
    Ok(Counts {
        correct: hyp.iter().filter(|h| gold.iter().any(|g| matches(h, g))).count(),
        recovered: gold.iter().filter(|g| hyp.iter().any(|h| matches(h, g))).count(),
        hypothesis: hyp.len(),
        gold: gold.len(),
    })
}

pub fn evaluate(hypothesis: &AlignmentSet, gold: &GoldAlignment, mode: EvalMode) -> Result<EvalReport> {
    pair_counts(hypothesis, gold, mode).map(|c| EvalReport::from_counts(mode, c))
}

/// Micro-averaged report over a corpus. Every hypothesis pair needs a gold
/// alignment; gold pairs without a hypothesis count as empty predictions.
pub fn evaluate_corpus(
    hypotheses: &[AlignmentSet],
    gold: &[GoldAlignment],
    mode: EvalMode,
) -> Result<EvalReport> {
    let mut total = Counts::default();
    for (hyp, g) in pair_up(hypotheses, gold)? {
        total += pair_counts(&hyp, g, mode)?;
    }
    Ok(EvalReport::from_counts(mode, total))
}

fn pair_up<'g>(
    hypotheses: &[AlignmentSet],
    gold: &'g [GoldAlignment],
) -> Result<Vec<(AlignmentSet, &'g GoldAlignment)>> {
    let mut by_id: BTreeMap<&str, &AlignmentSet> = BTreeMap::new();
    for h in hypotheses {
        if by_id.insert(h.pair_id.as_str(), h).is_some() {
            return Err(Error::InvalidParameter(format!("pair {:?} predicted twice", h.pair_id)));
        }
    }
    let mut out = Vec::with_capacity(gold.len());
    for g in gold {
        let hyp = match by_id.remove(g.pair_id.as_str()) {
            Some(h) => h.clone(),
            None => AlignmentSet::new(g.pair_id.clone(), Vec::new()),
        };
        out.push((hyp, g));
    }
    if let Some((id, _)) = by_id.into_iter().next() {
        return Err(Error::PairMismatch { expected: String::from("a gold alignment"), found: id.into() });
    }
    Ok(out)
}

/// Inclusive arithmetic grid `start, start + step, ... <= stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { start: 0.30, stop: 0.94, step: 0.01 }
    }
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            return Err(Error::InvalidParameter(format!(
                "grid {}:{}:{} is empty or malformed",
                self.start, self.stop, self.step
            )));
        }
        let count = libm::floor((self.stop - self.start) / self.step + 1e-9) as usize + 1;
        // rounded to 1e-9 so that 0.30 + 31 * 0.01 prints as 0.61
        Ok((0..count)
            .map(|k| libm::round((self.start + k as f64 * self.step) * 1e9) / 1e9)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub tau: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningCurve {
    pub mode: EvalMode,
    pub rows: Vec<CurveRow>,
    pub best_tau: f64,
    pub best_f1: f64,
}

/// Filters with `[tau, upper]` at every grid point and evaluates; the best
/// point is the smallest tau reaching the maximum F1.
pub fn grid_search_tau(
    scored: &[AlignmentSet],
    gold: &[GoldAlignment],
    grid: &GridSpec,
    mode: EvalMode,
    upper: f64,
) -> Result<TuningCurve> {
    if gold.is_empty() {
        return Err(Error::Empty("gold alignment set"));
    }
    let paired = pair_up(scored, gold)?;
    let mut rows = Vec::new();
    for tau in grid.points()? {
        let band = ThresholdBand::new(tau, upper)?;
        let mut total = Counts::default();
        for (hyp, g) in &paired {
            total += pair_counts(&band_filter(hyp, &band), g, mode)?;
        }
        let r = EvalReport::from_counts(mode, total);
        rows.push(CurveRow { tau, precision: r.precision, recall: r.recall, f1: r.f1 });
    }
    let best = rows.iter().skip(1).fold(rows[0], |best, r| if r.f1 > best.f1 { *r } else { best });
    Ok(TuningCurve { mode, rows, best_tau: best.tau, best_f1: best.f1 })
}
