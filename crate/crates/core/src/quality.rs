//! Corpus validation metrics for aligned beads: meaning preservation and
//! structural simplification (maximum dependency depth, noun-phrase density).
//!
//! NP counting rule: a token with UPOS `NOUN` or `PROPN` is a nominal head
//! unless it attaches with `compound`, `flat` or `fixed` (any subtype) to a
//! head that is itself `NOUN`/`PROPN`. Punctuation is left out of the token
//! denominator.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bead::{AlignmentSet, Bead};
use crate::corpus::{DocumentPair, Side};
use crate::embed::{cosine, embed_sentences, embed_side, group_vector, EmbeddingProvider};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedToken {
    pub form: String,
    pub upos: String,
    /// 0 for the root, otherwise the 1-based index of the head token.
    pub head: usize,
    pub deprel: String,
}

impl ParsedToken {
    pub fn new(form: impl Into<String>, upos: impl Into<String>, head: usize, deprel: impl Into<String>) -> Self {
        Self { form: form.into(), upos: upos.into(), head, deprel: deprel.into() }
    }

    fn is_nominal(&self) -> bool {
        matches!(self.upos.as_str(), "NOUN" | "PROPN")
    }

    fn is_punct(&self) -> bool {
        self.upos == "PUNCT"
    }

    fn base_deprel(&self) -> &str {
        self.deprel.split(':').next().unwrap_or("")
    }
}

/// A single-rooted, acyclic dependency parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    tokens: Vec<ParsedToken>,
}

impl ParsedSentence {
    pub fn new(tokens: Vec<ParsedToken>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidParse("sentence has no tokens".into()));
        }
        let roots = tokens.iter().filter(|t| t.head == 0).count();
        if roots != 1 {
            return Err(Error::InvalidParse(format!("expected one root, found {roots}")));
        }
        if let Some(t) = tokens.iter().find(|t| t.head > tokens.len()) {
            return Err(Error::InvalidParse(format!("head {} of {:?} out of range", t.head, t.form)));
        }
        let sentence = Self { tokens };
        sentence.depths()?;
        Ok(sentence)
    }

    pub fn tokens(&self) -> &[ParsedToken] {
        &self.tokens
    }

    /// Number of head links from each token up to the root.
    fn depths(&self) -> Result<Vec<usize>> {
        let n = self.tokens.len();
        let mut depth: Vec<Option<usize>> = alloc::vec![None; n];
        for start in 0..n {
            let mut chain = Vec::new();
            let mut cur = start;
            let base = loop {
                if let Some(d) = depth[cur] {
                    break d;
                }
                if chain.len() > n {
                    return Err(Error::InvalidParse("cycle in head links".into()));
                }
                chain.push(cur);
                match self.tokens[cur].head {
                    0 => break usize::MAX,
                    h => cur = h - 1,
                }
            };
            // usize::MAX marks "the last chained token is the root"
            let mut d = if base == usize::MAX { 0 } else { base + 1 };
            while let Some(k) = chain.pop() {
                depth[k] = Some(d);
                d += 1;
            }
        }
        Ok(depth.into_iter().map(|d| d.expect("all depths assigned")).collect())
    }
}

pub fn max_tree_depth(parse: &ParsedSentence) -> usize {
    parse.depths().expect("validated on construction").into_iter().max().unwrap_or(0)
}

/// Maximum depth over the sentences of a group.
pub fn group_depth(group: &[&ParsedSentence]) -> Result<usize> {
    if group.is_empty() {
        return Err(Error::Empty("sentence group"));
    }
    Ok(group.iter().map(|p| max_tree_depth(p)).max().unwrap_or(0))
}

/// Nominal heads over non-punctuation tokens, aggregated across the group.
pub fn np_density(group: &[&ParsedSentence]) -> Result<f64> {
    let mut nps = 0usize;
    let mut tokens = 0usize;
    for parse in group {
        let toks = parse.tokens();
        for t in toks {
            if !t.is_punct() {
                tokens += 1;
            }
            if t.is_nominal() {
                let absorbed = matches!(t.base_deprel(), "compound" | "flat" | "fixed")
                    && t.head > 0
                    && toks[t.head - 1].is_nominal();
                if !absorbed {
                    nps += 1;
                }
            }
        }
    }
    if tokens == 0 {
        return Err(Error::InvalidParse("group has no non-punctuation tokens".into()));
    }
    Ok(nps as f64 / tokens as f64)
}

/// Parses for both documents of a pair, in sentence order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairParses {
    pub complex: Vec<ParsedSentence>,
    pub simple: Vec<ParsedSentence>,
}

impl PairParses {
    pub fn group(&self, side: Side, indices: &[usize]) -> Result<Vec<&ParsedSentence>> {
        let parses = match side {
            Side::Complex => &self.complex,
            Side::Simple => &self.simple,
        };
        indices
            .iter()
            .map(|&i| parses.get(i).ok_or(Error::MissingParse { side: side.as_str(), index: i }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeaningScore {
    pub value: f64,
    /// The provider could not embed concatenated text, so the score is the
    /// cosine of normalized mean vectors instead.
    pub mean_proxy: bool,
}

/// Cosine between the space-joined complex group and the space-joined simple
/// group, or between normalized mean vectors when the provider only serves
/// stored sentences.
pub fn meaning_score<P: EmbeddingProvider + ?Sized>(
    bead: &Bead,
    pair: &DocumentPair,
    provider: &P,
) -> Result<MeaningScore> {
    let mut scores = meaning_scores(core::slice::from_ref(bead), pair, provider)?;
    Ok(scores.pop().expect("one bead in, one score out"))
}

fn meaning_scores<P: EmbeddingProvider + ?Sized>(
    beads: &[Bead],
    pair: &DocumentPair,
    provider: &P,
) -> Result<Vec<MeaningScore>> {
    if let Some(b) = beads.iter().find(|b| b.is_null()) {
        return Err(Error::InvalidBead(format!("skip bead {:?}->{:?} has no meaning score", b.src(), b.tgt())));
    }
    let range = |idx: &[usize]| idx[0]..idx[idx.len() - 1] + 1;
    for b in beads {
        for (side, idx) in [(Side::Complex, b.src()), (Side::Simple, b.tgt())] {
            let len = pair.side(side).len();
            if let Some(&i) = idx.iter().find(|&&i| i >= len) {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
        }
    }
    if provider.supports_text_groups() {
        let texts: Vec<String> = beads
            .iter()
            .flat_map(|b| {
                [pair.joined_text(Side::Complex, range(b.src())), pair.joined_text(Side::Simple, range(b.tgt()))]
            })
            .collect();
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let vectors = embed_sentences(provider, &refs)?;
        vectors
            .chunks(2)
            .map(|uv| Ok(MeaningScore { value: cosine(&uv[0], &uv[1])?, mean_proxy: false }))
            .collect()
    } else {
        let complex = embed_side(provider, pair, Side::Complex)?;
        let simple = embed_side(provider, pair, Side::Simple)?;
        beads
            .iter()
            .map(|b| {
                let u = group_vector(&complex, b.src())?;
                let v = group_vector(&simple, b.tgt())?;
                Ok(MeaningScore { value: cosine(&u, &v)?, mean_proxy: true })
            })
            .collect()
    }
}

/// Everything needed to score the beads of one pair.
#[derive(Debug, Clone, Copy)]
pub struct QualityInput<'a> {
    pub alignment: &'a AlignmentSet,
    pub pair: &'a DocumentPair,
    pub parses: &'a PairParses,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeadQuality {
    pub pair_id: String,
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    pub meaning: f64,
    /// Simple minus complex maximum depth.
    pub delta_depth: i64,
    /// Simple minus complex NP density, as a fraction.
    pub delta_np: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub pair_count: usize,
    pub bead_count: usize,
    pub mean_meaning_score: f64,
    pub mean_delta_depth: f64,
    /// Mean NP density change in percentage points.
    pub mean_delta_np_density: f64,
    pub mean_proxy: bool,
    pub beads: Vec<BeadQuality>,
}

pub fn quality_report<P: EmbeddingProvider + ?Sized>(inputs: &[QualityInput<'_>], provider: &P) -> Result<QualityReport> {
    let mut beads = Vec::new();
    let mut mean_proxy = false;
    for input in inputs {
        if input.alignment.pair_id != input.pair.pair_id() {
            return Err(Error::PairMismatch {
                expected: input.pair.pair_id().into(),
                found: input.alignment.pair_id.clone(),
            });
        }
        let scored: Vec<Bead> = input.alignment.non_null().cloned().collect();
        let meanings = meaning_scores(&scored, input.pair, provider)?;
        for (bead, meaning) in scored.iter().zip(meanings) {
            mean_proxy |= meaning.mean_proxy;
            let src = input.parses.group(Side::Complex, bead.src())?;
            let tgt = input.parses.group(Side::Simple, bead.tgt())?;
            beads.push(BeadQuality {
                pair_id: input.pair.pair_id().into(),
                src: bead.src().to_vec(),
                tgt: bead.tgt().to_vec(),
                meaning: meaning.value,
                delta_depth: group_depth(&tgt)? as i64 - group_depth(&src)? as i64,
                delta_np: np_density(&tgt)? - np_density(&src)?,
            });
        }
    }
    if beads.is_empty() {
        return Err(Error::Empty("alignment set"));
    }
    let n = beads.len() as f64;
    let mean = |f: fn(&BeadQuality) -> f64| beads.iter().map(f).sum::<f64>() / n;
    Ok(QualityReport {
        pair_count: inputs.len(),
        bead_count: beads.len(),
        mean_meaning_score: mean(|b| b.meaning),
        mean_delta_depth: mean(|b| b.delta_depth as f64),
        mean_delta_np_density: mean(|b| b.delta_np) * 100.0,
        mean_proxy,
        beads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::TrigramEmbedder;
    use alloc::vec;

    fn tok(upos: &str, head: usize, deprel: &str) -> ParsedToken {
        ParsedToken::new("w", upos, head, deprel)
    }

    fn sent(tokens: Vec<ParsedToken>) -> ParsedSentence {
        ParsedSentence::new(tokens).unwrap()
    }

    #[test]
    fn depth_examples() {
        assert_eq!(max_tree_depth(&sent(vec![tok("NOUN", 0, "root")])), 0);
        let chain = sent(vec![tok("X", 0, "root"), tok("X", 1, "dep"), tok("X", 2, "dep"), tok("X", 3, "dep")]);
        assert_eq!(max_tree_depth(&chain), 3);
        // The(1)->cat(2), cat->sat(3), sat root, on(4)->mat(6), the(5)->mat, mat->sat
        let six = sent(vec![
            tok("DET", 2, "det"),
            tok("NOUN", 3, "nsubj"),
            tok("VERB", 0, "root"),
            tok("ADP", 6, "case"),
            tok("DET", 6, "det"),
            tok("NOUN", 3, "obl"),
        ]);
        assert_eq!(max_tree_depth(&six), 2);
    }

    #[test]
    fn invalid_parses() {
        assert!(ParsedSentence::new(vec![]).is_err());
        assert!(ParsedSentence::new(vec![tok("X", 0, "root"), tok("X", 0, "root")]).is_err());
        assert!(ParsedSentence::new(vec![tok("X", 2, "dep"), tok("X", 3, "dep"), tok("X", 2, "dep")]).is_err());
        assert!(ParsedSentence::new(vec![tok("X", 0, "root"), tok("X", 5, "dep")]).is_err());
        // 1 root; 2 -> 3 -> 2 cycle
        assert!(ParsedSentence::new(vec![tok("X", 0, "root"), tok("X", 3, "dep"), tok("X", 2, "dep")]).is_err());
    }

    #[test]
    fn group_depth_is_max() {
        let d2 = sent(vec![tok("X", 0, "root"), tok("X", 1, "d"), tok("X", 2, "d")]);
        let d5 = sent((0..6).map(|k| tok("X", k, "d")).collect());
        assert_eq!(group_depth(&[&d2]).unwrap(), 2);
        assert_eq!(group_depth(&[&d2, &d5]).unwrap(), 5);
        let d1 = sent(vec![tok("X", 0, "root"), tok("X", 1, "d")]);
        assert_eq!(group_depth(&[&d1, &d5, &d2]).unwrap(), 5);
        assert!(group_depth(&[]).is_err());
    }

    #[test]
    fn np_density_examples() {
        assert_eq!(np_density(&[&sent(vec![tok("NOUN", 0, "root")])]).unwrap(), 1.0);
        assert_eq!(np_density(&[&sent(vec![tok("VERB", 0, "root"), tok("ADV", 1, "advmod")])]).unwrap(), 0.0);
        // big red dog chased small cat
        let s = sent(vec![
            tok("ADJ", 3, "amod"),
            tok("ADJ", 3, "amod"),
            tok("NOUN", 4, "nsubj"),
            tok("VERB", 0, "root"),
            tok("ADJ", 6, "amod"),
            tok("NOUN", 4, "obj"),
        ]);
        assert!((np_density(&[&s]).unwrap() - 2.0 / 6.0).abs() < 1e-15);
        // New(PROPN, flat) York(PROPN) is one NP; the period is not counted
        let ny = sent(vec![
            tok("PROPN", 0, "root"),
            tok("PROPN", 1, "flat"),
            tok("NOUN", 1, "compound"),
            tok("PUNCT", 1, "punct"),
        ]);
        assert!((np_density(&[&ny]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(np_density(&[&sent(vec![tok("PUNCT", 0, "root")])]).is_err());
    }

    #[test]
    fn meaning_of_identical_and_disjoint_groups() {
        let e = TrigramEmbedder::default();
        let pair = DocumentPair::new("p", "en", ["the dog", "barks"], ["the dog barks", "xyz"]).unwrap();
        let same = meaning_score(&Bead::from_ranges(0..2, 0..1, None).unwrap(), &pair, &e).unwrap();
        assert!((same.value - 1.0).abs() < 1e-12);
        assert!(!same.mean_proxy);
        let pair = DocumentPair::new("p", "en", ["dog"], ["xyz"]).unwrap();
        let apart = meaning_score(&Bead::from_ranges(0..1, 0..1, None).unwrap(), &pair, &e).unwrap();
        assert_eq!(apart.value, 0.0);
        assert!(meaning_score(&Bead::from_ranges(0..1, 0..0, None).unwrap(), &pair, &e).is_err());
    }

    #[test]
    fn single_bead_depth_change() {
        let deep = sent((0..6).map(|k| tok("X", k, "d")).collect());
        let shallow = sent((0..4).map(|k| tok("X", k, "d")).collect());
        let pair = DocumentPair::new("p", "en", ["a b c d e f"], ["a b c d"]).unwrap();
        let parses = PairParses { complex: vec![deep], simple: vec![shallow] };
        let alignment = AlignmentSet::new("p", vec![Bead::from_ranges(0..1, 0..1, Some(0.8)).unwrap()]);
        let report = quality_report(
            &[QualityInput { alignment: &alignment, pair: &pair, parses: &parses }],
            &TrigramEmbedder::default(),
        )
        .unwrap();
        assert_eq!(report.mean_delta_depth, -2.0);
        assert_eq!(report.bead_count, 1);
    }

    #[test]
    fn missing_parse_and_empty_alignment() {
        let pair = DocumentPair::new("p", "en", ["a", "b"], ["c"]).unwrap();
        let parses = PairParses { complex: vec![sent(vec![tok("X", 0, "root")])], simple: vec![sent(vec![tok("X", 0, "root")])] };
        let alignment = AlignmentSet::new("p", vec![Bead::from_ranges(1..2, 0..1, None).unwrap()]);
        let e = TrigramEmbedder::default();
        let input = [QualityInput { alignment: &alignment, pair: &pair, parses: &parses }];
        assert!(matches!(quality_report(&input, &e), Err(Error::MissingParse { side: "complex", index: 1 })));
        let empty = AlignmentSet::new("p", vec![Bead::from_ranges(0..1, 0..0, None).unwrap()]);
        let input = [QualityInput { alignment: &empty, pair: &pair, parses: &parses }];
        assert_eq!(quality_report(&input, &e).unwrap_err(), Error::Empty("alignment set"));
    }
}
