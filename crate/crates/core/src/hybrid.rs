//! Anchor-and-shortest-path aligner producing scored N-to-M beads.
//!
//! Three stages:
//!
//! 1. **Pre-selection.** A Gale-Church path restricted to 1-1/1-0/0-1 beads
//!    fixes a staircase of candidate cells, widened by `band_width` columns.
//! 2. **Anchoring.** In-band cells that are the best match of both their row
//!    and their column and clear `anchor_threshold` become anchor
//!    candidates; a maximum-weight non-crossing subset is kept.
//! 3. **Segments.** Every stretch between consecutive anchors is aligned by a
//!    minimum-cost monotone path over substitution beads (up to
//!    `max_group_complex x max_group_simple`) and single-sentence skips.
//!
//! The simple document is the reference: dropping a simple sentence costs
//! `skip_simple_cost`, dropping complex material only `skip_complex_cost`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::baseline::{gale_church_path, GaleChurchParams};
use crate::bead::{AlignmentSet, Bead};
use crate::corpus::{DocumentPair, Side};
use crate::dp::{self, Shape};
use crate::embed::{
    cosine, embed_sentences, embed_side, group_vector, similarity_matrix, EmbeddingProvider,
    EmbeddingVector, GroupMode, SimilarityMatrix,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HybridConfig {
    /// Candidate half-width in sentences around the pre-selection path.
    pub band_width: usize,
    pub anchor_threshold: f64,
    pub max_group_complex: usize,
    pub max_group_simple: usize,
    pub skip_complex_cost: f64,
    pub skip_simple_cost: f64,
    /// Added per sentence beyond the first on each side of a bead.
    pub size_penalty: f64,
    pub group_mode: GroupMode,
    /// Largest segment (rows x cols) the path search accepts.
    pub max_segment_cells: usize,
    /// Length model of the pre-selection stage.
    pub length_model: GaleChurchParams,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            band_width: 10,
            anchor_threshold: 0.90,
            max_group_complex: 4,
            max_group_simple: 3,
            skip_complex_cost: 0.35,
            skip_simple_cost: 0.80,
            size_penalty: 0.20,
            group_mode: GroupMode::Mean,
            max_segment_cells: 4_000_000,
            length_model: GaleChurchParams::default(),
        }
    }
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if !(self.anchor_threshold > 0.0 && self.anchor_threshold <= 1.0) {
            return bad("anchor_threshold must lie in (0, 1]");
        }
        if self.max_group_complex == 0 || self.max_group_simple == 0 {
            return bad("maximum group sizes must be at least 1");
        }
        for cost in [self.skip_complex_cost, self.skip_simple_cost, self.size_penalty] {
            if !(cost >= 0.0 && cost.is_finite()) {
                return bad("costs must be finite and non-negative");
            }
        }
        self.length_model.validate()
    }

    /// Cost of a substitution bead with the given group cosine.
    pub fn substitution_cost(&self, shape: Shape, cosine: f64) -> f64 {
        1.0 - cosine + self.size_penalty * (shape.src + shape.tgt - 2) as f64
    }

    fn shapes(&self) -> Vec<Shape> {
        let mut shapes = Vec::from([Shape::new(1, 0), Shape::new(0, 1)]);
        for a in 1..=self.max_group_complex {
            for b in 1..=self.max_group_simple {
                shapes.push(Shape::new(a, b));
            }
        }
        shapes
    }
}

/// Admissible cells: for each complex row an inclusive column interval.
/// The intervals form a monotone staircase from `(0, 0)` to `(n-1, m-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateBand {
    rows: Vec<(usize, usize)>,
    cols: usize,
}

impl CandidateBand {
    /// Every cell of an `n x m` grid.
    pub fn full(n: usize, m: usize) -> Self {
        Self { rows: alloc::vec![(0, m.saturating_sub(1)); n], cols: m }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_range(&self, i: usize) -> (usize, usize) {
        self.rows[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows.get(i).is_some_and(|&(lo, hi)| lo <= j && j <= hi)
    }

    /// Whether any cell of the block `rows x cols` lies in the band.
    pub fn touches(&self, rows: Range<usize>, cols: Range<usize>) -> bool {
        rows.into_iter().any(|i| {
            let (lo, hi) = self.rows[i];
            cols.start <= hi && lo < cols.end
        })
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, &(lo, hi))| (lo..=hi).map(move |j| (i, j)))
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|(lo, hi)| hi - lo + 1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Candidate band around the 1-1/1-0/0-1 Gale-Church path.
///
/// Each bead of the path marks grid cells: a 1-1 bead its own cell, a skip
/// the cell at the current position of the other side (clamped to the last
/// sentence). Row `i` of the band spans the marked columns of that row,
/// widened by `band_width` on both sides.
pub fn preselect_candidates(
    complex_lengths: &[usize],
    simple_lengths: &[usize],
    band_width: usize,
    params: &GaleChurchParams,
) -> Result<CandidateBand> {
    const SHAPES: [Shape; 3] = [Shape::new(1, 1), Shape::new(1, 0), Shape::new(0, 1)];
    let path = gale_church_path(complex_lengths, simple_lengths, params, &SHAPES)?;
    let (n, m) = (complex_lengths.len(), simple_lengths.len());
    let mut marked: Vec<Option<(usize, usize)>> = alloc::vec![None; n];
    for step in &path.steps {
        let cell = (step.i.min(n - 1), step.j.min(m - 1));
        let row = &mut marked[cell.0];
        *row = Some(match *row {
            None => (cell.1, cell.1),
            Some((lo, hi)) => (lo.min(cell.1), hi.max(cell.1)),
        });
    }
    let rows = marked
        .into_iter()
        .map(|r| {
            let (lo, hi) = r.expect("every complex row is visited by the path");
            (lo.saturating_sub(band_width), (hi + band_width).min(m - 1))
        })
        .collect();
    Ok(CandidateBand { rows, cols: m })
}

/// Similarity matrix with every out-of-band cell set to -1.
pub fn restrict_to_band(sim: &SimilarityMatrix, band: &CandidateBand) -> SimilarityMatrix {
    SimilarityMatrix::from_fn(sim.rows(), sim.cols(), |i, j| {
        if band.contains(i, j) {
            sim.get(i, j)
        } else {
            -1.0
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub i: usize,
    pub j: usize,
    pub similarity: f64,
}

/// Strictly increasing (in both coordinates) anchor cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnchorSet {
    pub anchors: Vec<Anchor>,
}

impl AnchorSet {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn total_similarity(&self) -> f64 {
        self.anchors.iter().map(|a| a.similarity).sum()
    }
}

/// Mutual-best in-band cells above `threshold`, reduced to the non-crossing
/// subset of maximum total similarity. Ties keep the earliest chain.
pub fn find_anchors(sim: &SimilarityMatrix, band: &CandidateBand, threshold: f64) -> AnchorSet {
    let mut row_best = alloc::vec![f64::NEG_INFINITY; sim.rows()];
    let mut col_best = alloc::vec![f64::NEG_INFINITY; sim.cols()];
    for (i, j) in band.cells() {
        let s = sim.get(i, j);
        row_best[i] = row_best[i].max(s);
        col_best[j] = col_best[j].max(s);
    }
    let candidates: Vec<Anchor> = band
        .cells()
        .filter_map(|(i, j)| {
            let s = sim.get(i, j);
            (s >= threshold && s == row_best[i] && s == col_best[j]).then_some(Anchor { i, j, similarity: s })
        })
        .collect();

    // weighted longest strictly increasing chain; candidates are in (i, j) order
    let mut best: Vec<f64> = Vec::with_capacity(candidates.len());
    let mut prev: Vec<Option<usize>> = Vec::with_capacity(candidates.len());
    for (k, c) in candidates.iter().enumerate() {
        let mut total = c.similarity;
        let mut from = None;
        for (p, q) in candidates[..k].iter().enumerate() {
            if q.i < c.i && q.j < c.j && best[p] + c.similarity > total {
                total = best[p] + c.similarity;
                from = Some(p);
            }
        }
        best.push(total);
        prev.push(from);
    }
    let Some(mut k) = (0..best.len()).fold(None, |acc: Option<usize>, k| match acc {
        Some(a) if best[a] >= best[k] => Some(a),
        _ => Some(k),
    }) else {
        return AnchorSet::default();
    };
    let mut anchors = Vec::new();
    loop {
        anchors.push(candidates[k]);
        match prev[k] {
            Some(p) => k = p,
            None => break,
        }
    }
    anchors.reverse();
    AnchorSet { anchors }
}

/// Group vectors for every contiguous run up to the configured sizes.
#[derive(Debug, Clone)]
pub struct GroupTable {
    /// `complex[len - 1][start]`
    complex: Vec<Vec<EmbeddingVector>>,
    simple: Vec<Vec<EmbeddingVector>>,
}

impl GroupTable {
    /// Mean mode: normalized means of the (unit) sentence vectors.
    pub fn mean(
        complex: &[EmbeddingVector],
        simple: &[EmbeddingVector],
        max_complex: usize,
        max_simple: usize,
    ) -> Result<Self> {
        let runs = |vectors: &[EmbeddingVector], max: usize| -> Result<Vec<Vec<EmbeddingVector>>> {
            (1..=max.min(vectors.len()))
                .map(|len| {
                    (0..=vectors.len() - len)
                        .map(|s| group_vector(vectors, &(s..s + len).collect::<Vec<_>>()))
                        .collect()
                })
                .collect()
        };
        Ok(Self { complex: runs(complex, max_complex)?, simple: runs(simple, max_simple)? })
    }

    /// Concat mode: runs of two or more sentences are embedded as their
    /// space-joined text; single sentences reuse the sentence vectors.
    pub fn concat<P: EmbeddingProvider + ?Sized>(
        provider: &P,
        pair: &DocumentPair,
        complex: &[EmbeddingVector],
        simple: &[EmbeddingVector],
        max_complex: usize,
        max_simple: usize,
    ) -> Result<Self> {
        if !provider.supports_text_groups() {
            return Err(Error::Unsupported("concat group mode with a provider that cannot embed text"));
        }
        let runs = |side: Side, vectors: &[EmbeddingVector], max: usize| -> Result<Vec<Vec<EmbeddingVector>>> {
            let mut out = Vec::from([vectors.to_vec()]);
            for len in 2..=max.min(vectors.len()) {
                let texts: Vec<_> =
                    (0..=vectors.len() - len).map(|s| pair.joined_text(side, s..s + len)).collect();
                let refs: Vec<&str> = texts.iter().map(|t| t.as_str()).collect();
                out.push(embed_sentences(provider, &refs)?);
            }
            Ok(out)
        };
        Ok(Self {
            complex: runs(Side::Complex, complex, max_complex)?,
            simple: runs(Side::Simple, simple, max_simple)?,
        })
    }

    pub fn get(&self, side: Side, range: Range<usize>) -> Option<&EmbeddingVector> {
        let table = match side {
            Side::Complex => &self.complex,
            Side::Simple => &self.simple,
        };
        table.get(range.len().checked_sub(1)?)?.get(range.start)
    }

    /// Cosine between the complex run and the simple run.
    pub fn cosine(&self, src: Range<usize>, tgt: Range<usize>) -> Result<f64> {
        let (a, b) = (src.clone(), tgt.clone());
        let u = self
            .get(Side::Complex, src)
            .ok_or_else(|| Error::InvalidParameter(format!("no complex group vector for {a:?}")))?;
        let v = self
            .get(Side::Simple, tgt)
            .ok_or_else(|| Error::InvalidParameter(format!("no simple group vector for {b:?}")))?;
        cosine(u, v)
    }
}

/// Read-only inputs of the segment stage.
#[derive(Debug, Clone, Copy)]
pub struct SegmentContext<'a> {
    /// Band-restricted sentence similarities.
    pub sim: &'a SimilarityMatrix,
    pub band: &'a CandidateBand,
    pub groups: &'a GroupTable,
}

impl SegmentContext<'_> {
    /// Similarity used for a substitution bead: the matrix cell for 1-1
    /// beads, the group cosine otherwise, and -1 for blocks outside the band.
    pub fn bead_similarity(&self, src: Range<usize>, tgt: Range<usize>) -> Result<f64> {
        if src.len() == 1 && tgt.len() == 1 {
            return Ok(self.sim.get(src.start, tgt.start));
        }
        if !self.band.touches(src.clone(), tgt.clone()) {
            return Ok(-1.0);
        }
        self.groups.cosine(src, tgt)
    }
}

/// Minimum-cost monotone bead path through one inter-anchor segment.
pub fn align_segment(
    complex: Range<usize>,
    simple: Range<usize>,
    ctx: &SegmentContext<'_>,
    config: &HybridConfig,
) -> Result<Vec<Bead>> {
    let (rows, cols) = (complex.len(), simple.len());
    if rows.saturating_mul(cols) > config.max_segment_cells {
        return Err(Error::SegmentTooLarge { rows, cols, limit: config.max_segment_cells });
    }
    let mut failure = None;
    let path = dp::min_cost_path(rows, cols, &config.shapes(), |i, j, s| match (s.src, s.tgt) {
        (1, 0) => Some(config.skip_complex_cost),
        (0, 1) => Some(config.skip_simple_cost),
        _ => {
            let (a, b) = (complex.start + i, simple.start + j);
            match ctx.bead_similarity(a..a + s.src, b..b + s.tgt) {
                Ok(cos) => Some(config.substitution_cost(s, cos)),
                Err(e) => {
                    failure.get_or_insert(e);
                    None
                }
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    path.steps
        .iter()
        .map(|step| {
            let src = complex.start + step.i..complex.start + step.i + step.shape.src;
            let tgt = simple.start + step.j..simple.start + step.j + step.shape.tgt;
            let score = if src.is_empty() || tgt.is_empty() {
                None
            } else {
                Some(ctx.bead_similarity(src.clone(), tgt.clone())?)
            };
            Bead::from_ranges(src, tgt, score)
        })
        .collect()
}

/// Intermediate products of one hybrid alignment.
#[derive(Debug, Clone)]
pub struct HybridTrace {
    pub band: CandidateBand,
    pub similarity: SimilarityMatrix,
    pub anchors: AnchorSet,
    pub alignment: AlignmentSet,
}

pub fn hybrid_align<P: EmbeddingProvider + ?Sized>(
    pair: &DocumentPair,
    provider: &P,
    config: &HybridConfig,
) -> Result<AlignmentSet> {
    hybrid_align_traced(pair, provider, config).map(|t| t.alignment)
}

pub fn hybrid_align_traced<P: EmbeddingProvider + ?Sized>(
    pair: &DocumentPair,
    provider: &P,
    config: &HybridConfig,
) -> Result<HybridTrace> {
    config.validate()?;
    let complex = embed_side(provider, pair, Side::Complex)?;
    let simple = embed_side(provider, pair, Side::Simple)?;
    let band = preselect_candidates(
        &pair.char_lengths(Side::Complex),
        &pair.char_lengths(Side::Simple),
        config.band_width,
        &config.length_model,
    )?;
    let similarity = restrict_to_band(&similarity_matrix(&complex, &simple)?, &band);
    let anchors = find_anchors(&similarity, &band, config.anchor_threshold);
    let groups = match config.group_mode {
        GroupMode::Mean => {
            GroupTable::mean(&complex, &simple, config.max_group_complex, config.max_group_simple)?
        }
        GroupMode::Concat => GroupTable::concat(
            provider,
            pair,
            &complex,
            &simple,
            config.max_group_complex,
            config.max_group_simple,
        )?,
    };
    let ctx = SegmentContext { sim: &similarity, band: &band, groups: &groups };

    let mut beads = Vec::new();
    let (mut i, mut j) = (0, 0);
    for anchor in &anchors.anchors {
        beads.extend(align_segment(i..anchor.i, j..anchor.j, &ctx, config)?);
        beads.push(Bead::from_ranges(anchor.i..anchor.i + 1, anchor.j..anchor.j + 1, Some(anchor.similarity))?);
        (i, j) = (anchor.i + 1, anchor.j + 1);
    }
    beads.extend(align_segment(i..complex.len(), j..simple.len(), &ctx, config)?);

    let alignment = AlignmentSet::new(pair.pair_id(), beads);
    Ok(HybridTrace { band, similarity, anchors, alignment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::oracle;
    use crate::embed::TrigramEmbedder;
    use alloc::vec;

    fn unit(xs: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(xs.to_vec()).unwrap().normalized().unwrap()
    }

    #[test]
    fn band_on_equal_lengths_is_diagonal() {
        let lengths = [20usize; 5];
        let band = preselect_candidates(&lengths, &lengths, 1, &GaleChurchParams::default()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(band.contains(i, j), i.abs_diff(j) <= 1, "({i},{j})");
            }
        }
    }

    #[test]
    fn wide_band_saturates() {
        let band =
            preselect_candidates(&[10, 50, 7], &[30, 4, 9, 22], 4, &GaleChurchParams::default()).unwrap();
        assert_eq!(band, CandidateBand::full(3, 4));
        assert_eq!(band.len(), 12);
    }

    #[test]
    fn band_four_by_two_follows_traced_path() {
        // complex 30,30,5,5 vs simple 30,30: the path pairs the long sentences
        // 1-1 and drops the two short ones, marking (2,1) and (3,1).
        let p = GaleChurchParams::default();
        let path = gale_church_path(
            &[30, 30, 5, 5],
            &[30, 30],
            &p,
            &[Shape::new(1, 1), Shape::new(1, 0), Shape::new(0, 1)],
        )
        .unwrap();
        let shapes: Vec<_> = path.steps.iter().map(|s| (s.shape.src, s.shape.tgt)).collect();
        assert_eq!(shapes, vec![(1, 1), (1, 1), (1, 0), (1, 0)]);
        let band = preselect_candidates(&[30, 30, 5, 5], &[30, 30], 0, &p).unwrap();
        let cells: Vec<_> = band.cells().collect();
        assert_eq!(cells, vec![(0, 0), (1, 1), (2, 1), (3, 1)]);
        let band = preselect_candidates(&[30, 30, 5, 5], &[30, 30], 1, &p).unwrap();
        assert_eq!(band.len(), 8);
    }

    #[test]
    fn anchors_on_identity() {
        let sim = SimilarityMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        let a = find_anchors(&sim, &CandidateBand::full(4, 4), 0.9);
        let cells: Vec<_> = a.anchors.iter().map(|a| (a.i, a.j)).collect();
        assert_eq!(cells, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn no_anchor_below_threshold() {
        let sim = SimilarityMatrix::from_fn(3, 3, |i, j| if i == j { 0.8 } else { 0.1 });
        assert!(find_anchors(&sim, &CandidateBand::full(3, 3), 0.9).is_empty());
    }

    #[test]
    fn crossing_anchors_keep_the_stronger() {
        let sim = SimilarityMatrix::from_fn(4, 4, |i, j| match (i, j) {
            (0, 3) => 0.95,
            (3, 0) => 0.93,
            _ => 0.2,
        });
        let a = find_anchors(&sim, &CandidateBand::full(4, 4), 0.9);
        assert_eq!(a.anchors, vec![Anchor { i: 0, j: 3, similarity: 0.95 }]);
        // enumeration of increasing subsequences of {(0,3), (3,0)}: only singletons
        let sim = SimilarityMatrix::from_fn(4, 4, |i, j| match (i, j) {
            (0, 3) => 0.91,
            (3, 0) => 0.97,
            _ => 0.2,
        });
        let a = find_anchors(&sim, &CandidateBand::full(4, 4), 0.9);
        assert_eq!((a.anchors[0].i, a.anchors[0].j), (3, 0));
    }

    #[test]
    fn weighted_selection_prefers_heavier_chain() {
        // (0,2) alone weighs 0.99; (1,0) + (2,1) chain weighs 1.9
        let sim = SimilarityMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 2) => 0.99,
            (1, 0) => 0.95,
            (2, 1) => 0.95,
            _ => 0.0,
        });
        let a = find_anchors(&sim, &CandidateBand::full(3, 3), 0.9);
        let cells: Vec<_> = a.anchors.iter().map(|a| (a.i, a.j)).collect();
        assert_eq!(cells, vec![(1, 0), (2, 1)]);
    }

    fn one_by_one(sim: f64) -> Vec<Bead> {
        let matrix = SimilarityMatrix::from_fn(1, 1, |_, _| sim);
        let vecs = [unit(&[1.0, 0.0])];
        let groups = GroupTable::mean(&vecs, &vecs, 1, 1).unwrap();
        let band = CandidateBand::full(1, 1);
        let ctx = SegmentContext { sim: &matrix, band: &band, groups: &groups };
        align_segment(0..1, 0..1, &ctx, &HybridConfig::default()).unwrap()
    }

    #[test]
    fn single_cell_segments() {
        let beads = one_by_one(0.9);
        assert_eq!(beads.len(), 1);
        assert_eq!(beads[0].score(), Some(0.9));
        // 1 - 0.05 = 0.95 < 1.15
        assert_eq!(one_by_one(0.05).len(), 1);
        // 1.5 > 1.15: both skips, complex side first is not earlier than simple
        let skips = one_by_one(-0.5);
        assert_eq!(skips.len(), 2);
        assert!(skips.iter().all(|b| b.is_null() && b.score().is_none()));
    }

    #[test]
    fn empty_and_one_sided_segments() {
        let matrix = SimilarityMatrix::from_fn(2, 2, |_, _| 0.5);
        let vecs = [unit(&[1.0, 0.0]), unit(&[0.0, 1.0])];
        let groups = GroupTable::mean(&vecs, &vecs, 2, 2).unwrap();
        let band = CandidateBand::full(2, 2);
        let ctx = SegmentContext { sim: &matrix, band: &band, groups: &groups };
        let cfg = HybridConfig::default();
        assert!(align_segment(1..1, 2..2, &ctx, &cfg).unwrap().is_empty());
        let only_complex = align_segment(0..2, 1..1, &ctx, &cfg).unwrap();
        assert_eq!(only_complex.len(), 2);
        assert!(only_complex.iter().all(|b| b.tgt().is_empty()));
        let tight = HybridConfig { max_segment_cells: 3, ..Default::default() };
        assert!(matches!(
            align_segment(0..2, 0..2, &ctx, &tight),
            Err(Error::SegmentTooLarge { rows: 2, cols: 2, limit: 3 })
        ));
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn segments_match_enumeration() {
        let mut seed = 11u64;
        let cfg = HybridConfig::default();
        for _ in 0..40 {
            let n = 1 + (lcg(&mut seed) * 5.0) as usize;
            let m = 1 + (lcg(&mut seed) * 5.0) as usize;
            let vecs = |k: usize, seed: &mut u64| -> Vec<EmbeddingVector> {
                (0..k).map(|_| unit(&[lcg(seed) + 0.01, lcg(seed), lcg(seed) - 0.5])).collect()
            };
            let (cv, sv) = (vecs(n, &mut seed), vecs(m, &mut seed));
            let sim = similarity_matrix(&cv, &sv).unwrap();
            let groups = GroupTable::mean(&cv, &sv, cfg.max_group_complex, cfg.max_group_simple).unwrap();
            let band = CandidateBand::full(n, m);
            let ctx = SegmentContext { sim: &sim, band: &band, groups: &groups };
            let beads = align_segment(0..n, 0..m, &ctx, &cfg).unwrap();
            let total: f64 = beads
                .iter()
                .map(|b| match (b.src().len(), b.tgt().len()) {
                    (_, 0) => cfg.skip_complex_cost,
                    (0, _) => cfg.skip_simple_cost,
                    (a, c) => cfg.substitution_cost(Shape::new(a, c), b.score().unwrap()),
                })
                .sum();
            let price = |i: usize, j: usize, s: Shape| match (s.src, s.tgt) {
                (1, 0) => Some(cfg.skip_complex_cost),
                (0, 1) => Some(cfg.skip_simple_cost),
                _ => {
                    let u = group_vector(&cv, &(i..i + s.src).collect::<Vec<_>>()).unwrap();
                    let v = group_vector(&sv, &(j..j + s.tgt).collect::<Vec<_>>()).unwrap();
                    Some(cfg.substitution_cost(s, cosine(&u, &v).unwrap()))
                }
            };
            let brute = oracle::brute_min(n, m, &cfg.shapes(), price).unwrap();
            assert!((total - brute).abs() < 1e-9, "{n}x{m}: {total} vs {brute}");
        }
    }

    #[test]
    fn verbatim_copy_self_aligns() {
        let text = "The city lies on the river.\nIt has a large cathedral.\nMany tourists visit every summer.\nThe climate is mild.";
        let pair = DocumentPair::from_lines("p", "en", text, text).unwrap();
        let set = hybrid_align(&pair, &TrigramEmbedder::default(), &HybridConfig::default()).unwrap();
        assert_eq!(set.beads.len(), 4);
        for (k, b) in set.beads.iter().enumerate() {
            assert_eq!((b.src(), b.tgt()), (&[k][..], &[k][..]));
            assert!((b.score().unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn split_sentence_becomes_one_to_two() {
        let s1 = "the old stone bridge crosses the wide river near the market square";
        let s2 = "quarterly tax revenue figures were published yesterday by officials";
        let pair = DocumentPair::new(
            "p",
            "en",
            [s1, s2],
            ["the old stone bridge crosses the wide river", "near the market square"],
        )
        .unwrap();
        let e = TrigramEmbedder::default();
        let trace = hybrid_align_traced(&pair, &e, &HybridConfig::default()).unwrap();
        assert!(trace.anchors.is_empty());
        let got: Vec<_> =
            trace.alignment.beads.iter().map(|b| (b.src().to_vec(), b.tgt().to_vec())).collect();
        assert_eq!(got, vec![(vec![0], vec![0, 1]), (vec![1], vec![])]);
        // score is the cosine of the independently rebuilt group vectors
        let cv = embed_side(&e, &pair, Side::Complex).unwrap();
        let sv = embed_side(&e, &pair, Side::Simple).unwrap();
        let expected = cosine(&group_vector(&cv, &[0]).unwrap(), &group_vector(&sv, &[0, 1]).unwrap()).unwrap();
        assert_eq!(trace.alignment.beads[0].score(), Some(expected));
        trace.alignment.check_partition(2, 2, true).unwrap();

        // the traced path is the strict minimum among all enumerated paths
        let cfg = HybridConfig::default();
        let price = |i: usize, j: usize, s: Shape| -> f64 {
            match (s.src, s.tgt) {
                (_, 0) => cfg.skip_complex_cost,
                (0, _) => cfg.skip_simple_cost,
                _ => {
                    let src: Vec<usize> = (i..i + s.src).collect();
                    let tgt: Vec<usize> = (j..j + s.tgt).collect();
                    let c = cosine(&group_vector(&cv, &src).unwrap(), &group_vector(&sv, &tgt).unwrap()).unwrap();
                    cfg.substitution_cost(s, c)
                }
            }
        };
        let mut costs: Vec<(f64, Vec<(usize, usize, Shape)>)> = oracle::all_paths(2, 2, &cfg.shapes())
            .into_iter()
            .map(|p| (p.iter().map(|&(i, j, s)| price(i, j, s)).sum(), p))
            .collect();
        costs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(costs[0].1, vec![(0, 0, Shape::new(1, 2)), (1, 2, Shape::new(1, 0))]);
        assert!(costs[1].0 - costs[0].0 > 1e-6);
    }

    #[test]
    fn concat_mode_needs_text_provider() {
        struct Stored;
        impl EmbeddingProvider for Stored {
            fn kind(&self) -> crate::embed::ProviderKind {
                crate::embed::ProviderKind::VectorFile
            }
            fn dim(&self) -> usize {
                2
            }
            fn supports_text_groups(&self) -> bool {
                false
            }
            fn embed_texts(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
                Ok(texts.iter().map(|t| unit(&[t.len() as f64, 1.0])).collect())
            }
        }
        let pair = DocumentPair::new("p", "en", ["a b", "c"], ["d"]).unwrap();
        let cfg = HybridConfig { group_mode: GroupMode::Concat, ..Default::default() };
        assert!(matches!(hybrid_align(&pair, &Stored, &cfg), Err(Error::Unsupported(_))));
        let ok = hybrid_align(&pair, &TrigramEmbedder::default(), &cfg).unwrap();
        ok.check_partition(2, 1, false).unwrap();
    }
}
