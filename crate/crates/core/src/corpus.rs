//! Document pairs and corpus-level statistics.
//!
//! Input is pre-segmented: one sentence per line, blank lines skipped. Words
//! are whitespace-delimited tokens, punctuation is not split off.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Which document of a pair a sentence belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Complex,
    Simple,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Complex => "complex",
            Side::Simple => "simple",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRecord {
    index: usize,
    text: String,
    token_count: usize,
}

impl SentenceRecord {
    pub fn new(index: usize, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        let token_count = text.split_whitespace().count();
        if token_count == 0 {
            return Err(Error::BlankSentence { index });
        }
        Ok(Self { index, text, token_count })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    /// Length in Unicode scalar values, the unit used by the length-based aligner.
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentPair {
    pair_id: String,
    language: String,
    complex: Vec<SentenceRecord>,
    simple: Vec<SentenceRecord>,
}

impl DocumentPair {
    /// Builds a pair from already segmented sentences. Every sentence must
    /// contain at least one token and both sides must be non-empty.
    pub fn new<S: Into<String>>(
        pair_id: impl Into<String>,
        language: impl Into<String>,
        complex: impl IntoIterator<Item = S>,
        simple: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let language = language.into();
        if language.len() != 2 || !language.bytes().all(|b| b.is_ascii_lowercase()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "language must be a lowercase two-letter code, got {language:?}"
            )));
        }
        let complex = records(complex)?;
        let simple = records(simple)?;
        if complex.is_empty() {
            return Err(Error::Empty("complex document"));
        }
        if simple.is_empty() {
            return Err(Error::Empty("simple document"));
        }
        Ok(Self { pair_id: pair_id.into(), language, complex, simple })
    }

    /// Builds a pair from one-sentence-per-line text, skipping blank lines.
    pub fn from_lines(
        pair_id: impl Into<String>,
        language: impl Into<String>,
        complex_text: &str,
        simple_text: &str,
    ) -> Result<Self> {
        Self::new(pair_id, language, sentence_lines(complex_text), sentence_lines(simple_text))
    }

    pub fn pair_id(&self) -> &str {
        &self.pair_id
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn complex(&self) -> &[SentenceRecord] {
        &self.complex
    }

    pub fn simple(&self) -> &[SentenceRecord] {
        &self.simple
    }

    pub fn side(&self, side: Side) -> &[SentenceRecord] {
        match side {
            Side::Complex => &self.complex,
            Side::Simple => &self.simple,
        }
    }

    pub fn texts(&self, side: Side) -> Vec<&str> {
        self.side(side).iter().map(SentenceRecord::text).collect()
    }

    pub fn char_lengths(&self, side: Side) -> Vec<usize> {
        self.side(side).iter().map(SentenceRecord::char_len).collect()
    }

    /// Space-joined text of a contiguous run of sentences.
    pub fn joined_text(&self, side: Side, range: core::ops::Range<usize>) -> String {
        let mut out = String::new();
        for (k, rec) in self.side(side)[range].iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push_str(&rec.text);
        }
        out
    }
}

/// Non-blank lines of a sentence-per-line document, in file order.
pub fn sentence_lines(text: &str) -> impl Iterator<Item = &str> {
    text.split('\n').filter(|line| !line.trim().is_empty())
}

fn records<S: Into<String>>(sentences: impl IntoIterator<Item = S>) -> Result<Vec<SentenceRecord>> {
    sentences
        .into_iter()
        .enumerate()
        .map(|(index, text)| SentenceRecord::new(index, text))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub words_complex: usize,
    pub words_simple: usize,
    pub sents_complex: usize,
    pub sents_simple: usize,
    pub iqr_complex: (f64, f64),
    pub iqr_simple: (f64, f64),
}

pub fn corpus_stats(pairs: &[DocumentPair]) -> Result<CorpusStats> {
    if pairs.is_empty() {
        return Err(Error::Empty("document pair list"));
    }
    let lengths = |side: Side| -> Vec<usize> {
        pairs
            .iter()
            .flat_map(|p| p.side(side).iter().map(SentenceRecord::token_count))
            .collect()
    };
    let complex = lengths(Side::Complex);
    let simple = lengths(Side::Simple);
    Ok(CorpusStats {
        doc_count: pairs.len(),
        words_complex: complex.iter().sum(),
        words_simple: simple.iter().sum(),
        sents_complex: complex.len(),
        sents_simple: simple.len(),
        iqr_complex: quartiles(&complex)?,
        iqr_simple: quartiles(&simple)?,
    })
}

/// 25th and 75th percentiles, interpolating linearly between order
/// statistics at zero-based position `p * (n - 1)`.
pub fn quartiles(lengths: &[usize]) -> Result<(f64, f64)> {
    if lengths.is_empty() {
        return Err(Error::Empty("length list"));
    }
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    Ok((percentile(&sorted, 0.25), percentile(&sorted, 0.75)))
}

fn percentile(sorted: &[usize], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] as f64 + (sorted[hi] as f64 - sorted[lo] as f64) * frac
}

impl core::fmt::Display for Side {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(Side::Complex),
            "simple" => Ok(Side::Simple),
            other => Err(Error::InvalidParameter(alloc::format!("unknown side {other:?}"))),
        }
    }
}
