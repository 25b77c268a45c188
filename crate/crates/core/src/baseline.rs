//! Surface-level baseline aligners.
//!
//! [`gale_church_align`] is the classic length-based dynamic program.
//! [`lexical_overlap_align`] stands in for a dictionary-based aligner: in a
//! monolingual setting the dictionary collapses to token identity, so bead
//! quality mixes the Dice overlap of lowercased token sets with a length score.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bead::{AlignmentSet, Bead};
use crate::corpus::{DocumentPair, Side};
use crate::dp::{self, Path, Shape};
use crate::error::{Error, Result};

/// The six bead shapes available to the baselines.
pub const BASELINE_SHAPES: [Shape; 6] = [
    Shape::new(1, 1),
    Shape::new(1, 0),
    Shape::new(0, 1),
    Shape::new(2, 1),
    Shape::new(1, 2),
    Shape::new(2, 2),
];

/// Prior probability of each bead shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapePriors {
    pub one_one: f64,
    pub one_zero: f64,
    pub zero_one: f64,
    pub two_one: f64,
    pub one_two: f64,
    pub two_two: f64,
}

impl ShapePriors {
    /// Rescales the priors so they sum to one.
    pub fn normalized(self) -> Self {
        let total = self.sum();
        Self {
            one_one: self.one_one / total,
            one_zero: self.one_zero / total,
            zero_one: self.zero_one / total,
            two_one: self.two_one / total,
            one_two: self.one_two / total,
            two_two: self.two_two / total,
        }
    }

    fn sum(&self) -> f64 {
        self.one_one + self.one_zero + self.zero_one + self.two_one + self.one_two + self.two_two
    }

    pub fn get(&self, shape: Shape) -> Option<f64> {
        match (shape.src, shape.tgt) {
            (1, 1) => Some(self.one_one),
            (1, 0) => Some(self.one_zero),
            (0, 1) => Some(self.zero_one),
            (2, 1) => Some(self.two_one),
            (1, 2) => Some(self.one_two),
            (2, 2) => Some(self.two_two),
            _ => None,
        }
    }

    fn values(&self) -> [f64; 6] {
        [self.one_one, self.one_zero, self.zero_one, self.two_one, self.one_two, self.two_two]
    }
}

impl Default for ShapePriors {
    /// 0.89 for 1-1, 0.0099 shared by 1-0/0-1, 0.089 shared by 2-1/1-2,
    /// 0.011 for 2-2, rescaled to sum to exactly one.
    fn default() -> Self {
        Self {
            one_one: 0.89,
            one_zero: 0.0099 / 2.0,
            zero_one: 0.0099 / 2.0,
            two_one: 0.089 / 2.0,
            one_two: 0.089 / 2.0,
            two_two: 0.011,
        }
        .normalized()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaleChurchParams {
    /// Expected simple/complex character length ratio.
    pub c: f64,
    /// Variance of the length difference per character.
    pub s2: f64,
    pub priors: ShapePriors,
}

impl Default for GaleChurchParams {
    fn default() -> Self {
        Self { c: 1.0, s2: 6.8, priors: ShapePriors::default() }
    }
}

/// Probabilities are floored here before taking logs.
const PROB_FLOOR: f64 = 1e-12;

impl GaleChurchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.s2 > 0.0 && self.s2.is_finite()) {
            return Err(Error::InvalidParameter("s2 must be positive".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter("c must be positive".into()));
        }
        let priors = self.priors.values();
        if priors.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidParameter("bead priors must be strictly positive".into()));
        }
        if libm::fabs(self.priors.sum() - 1.0) > 1e-9 {
            return Err(Error::InvalidParameter("bead priors must sum to 1".into()));
        }
        Ok(())
    }

    /// Standardized length discrepancy of a bead with `l1` complex and `l2`
    /// simple characters.
    pub fn delta(&self, l1: usize, l2: usize) -> f64 {
        let (l1, l2) = (l1 as f64, l2 as f64);
        (l2 - l1 * self.c) / libm::sqrt(l1 * self.s2)
    }

    /// `-ln prior - ln P(|Z| >= |delta|)`; skip beads pay only the prior term.
    pub fn bead_cost(&self, shape: Shape, l1: usize, l2: usize) -> Option<f64> {
        let prior = self.priors.get(shape)?;
        let mut cost = -libm::log(prior.max(PROB_FLOOR));
        if shape.src > 0 && shape.tgt > 0 {
            cost -= libm::log(two_tailed(self.delta(l1, l2)).max(PROB_FLOOR));
        }
        Some(cost)
    }
}

/// `P(|Z| >= |x|)` for a standard normal `Z`.
pub fn two_tailed(x: f64) -> f64 {
    libm::erfc(libm::fabs(x) / core::f64::consts::SQRT_2)
}

fn check_lengths(lengths: &[usize], side: &'static str) -> Result<()> {
    if lengths.is_empty() {
        return Err(Error::Empty(side));
    }
    if lengths.contains(&0) {
        return Err(Error::InvalidParameter(alloc::format!("{side} has a zero-length sentence")));
    }
    Ok(())
}

fn prefix_sums(lengths: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(lengths.len() + 1);
    out.push(0);
    for &l in lengths {
        out.push(out.last().unwrap() + l);
    }
    out
}

/// Gale-Church path restricted to `shapes` (a subset of [`BASELINE_SHAPES`]).
pub fn gale_church_path(
    complex_lengths: &[usize],
    simple_lengths: &[usize],
    params: &GaleChurchParams,
    shapes: &[Shape],
) -> Result<Path> {
    check_lengths(complex_lengths, "complex lengths")?;
    check_lengths(simple_lengths, "simple lengths")?;
    params.validate()?;
    let (pc, ps) = (prefix_sums(complex_lengths), prefix_sums(simple_lengths));
    dp::min_cost_path(complex_lengths.len(), simple_lengths.len(), shapes, |i, j, s| {
        params.bead_cost(s, pc[i + s.src] - pc[i], ps[j + s.tgt] - ps[j])
    })
}

pub fn gale_church_align(
    complex_lengths: &[usize],
    simple_lengths: &[usize],
    params: &GaleChurchParams,
) -> Result<Vec<Bead>> {
    gale_church_path(complex_lengths, simple_lengths, params, &BASELINE_SHAPES).map(|p| path_beads(&p))
}

pub fn gale_church_align_pair(pair: &DocumentPair, params: &GaleChurchParams) -> Result<AlignmentSet> {
    let beads = gale_church_align(
        &pair.char_lengths(Side::Complex),
        &pair.char_lengths(Side::Simple),
        params,
    )?;
    Ok(AlignmentSet::new(pair.pair_id(), beads))
}

pub(crate) fn path_beads(path: &Path) -> Vec<Bead> {
    path.steps
        .iter()
        .map(|s| {
            Bead::from_ranges(s.i..s.i + s.shape.src, s.j..s.j + s.shape.tgt, None)
                .expect("dp steps are non-empty")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexicalParams {
    /// Weight of the lexical score against the length score.
    pub alpha: f64,
    /// Flat cost of a 1-0 or 0-1 bead.
    pub indel_cost: f64,
    /// Length model shared with Gale-Church.
    pub c: f64,
    pub s2: f64,
}

impl Default for LexicalParams {
    fn default() -> Self {
        Self { alpha: 0.7, indel_cost: 0.9, c: 1.0, s2: 6.8 }
    }
}

impl LexicalParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter("alpha must lie in [0, 1]".into()));
        }
        if !(self.indel_cost >= 0.0) {
            return Err(Error::InvalidParameter("indel cost must be non-negative".into()));
        }
        if !(self.s2 > 0.0 && self.c > 0.0) {
            return Err(Error::InvalidParameter("c and s2 must be positive".into()));
        }
        Ok(())
    }

    /// Cost of a substitution bead: `(a + b) / 2 * (1 - quality)` where
    /// quality mixes Dice overlap and `exp(-|delta|)`. Scaling by bead size
    /// keeps a 2-2 bead from undercutting two equivalent 1-1 beads.
    pub fn substitution_cost(&self, shape: Shape, dice: f64, l1: usize, l2: usize) -> f64 {
        let delta = (l2 as f64 - l1 as f64 * self.c) / libm::sqrt(l1 as f64 * self.s2);
        let quality = self.alpha * dice + (1.0 - self.alpha) * libm::exp(-libm::fabs(delta));
        (shape.src + shape.tgt) as f64 / 2.0 * (1.0 - quality)
    }
}

pub fn dice(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    2.0 * a.intersection(b).count() as f64 / (a.len() + b.len()) as f64
}

fn token_set(text: &str) -> BTreeSet<String> {
    text.split_whitespace().map(|t| t.to_lowercase()).collect()
}

/// Path of the lexical-overlap aligner, exposed for cost inspection.
pub fn lexical_overlap_path(pair: &DocumentPair, params: &LexicalParams) -> Result<Path> {
    params.validate()?;
    let sets = |side| pair.side(side).iter().map(|s| token_set(s.text())).collect::<Vec<_>>();
    let (complex_sets, simple_sets) = (sets(Side::Complex), sets(Side::Simple));
    let pc = prefix_sums(&pair.char_lengths(Side::Complex));
    let ps = prefix_sums(&pair.char_lengths(Side::Simple));
    let union = |sets: &[BTreeSet<String>]| sets.iter().flatten().cloned().collect::<BTreeSet<_>>();
    dp::min_cost_path(pair.complex().len(), pair.simple().len(), &BASELINE_SHAPES, |i, j, s| {
        if s.src == 0 || s.tgt == 0 {
            return Some(params.indel_cost);
        }
        let d = dice(&union(&complex_sets[i..i + s.src]), &union(&simple_sets[j..j + s.tgt]));
        Some(params.substitution_cost(s, d, pc[i + s.src] - pc[i], ps[j + s.tgt] - ps[j]))
    })
}

pub fn lexical_overlap_align(pair: &DocumentPair, params: &LexicalParams) -> Result<AlignmentSet> {
    let path = lexical_overlap_path(pair, params)?;
    Ok(AlignmentSet::new(pair.pair_id(), path_beads(&path)))
}
