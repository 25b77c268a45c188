//! Sentence vectors, the provider contract, and cosine structures.
//!
//! Every vector handed out by [`embed_sentences`] or [`embed_side`] is unit
//! L2-normalized, whatever the provider returned.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{DocumentPair, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    normalized: bool,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("embedding vector"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { values, normalized: false })
    }

    /// Unit-length copy of this vector.
    pub fn normalized(&self) -> Result<Self> {
        let norm = l2_norm(&self.values);
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { values: self.values.iter().map(|v| v / norm).collect(), normalized: true })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn l2_norm(values: &[f64]) -> f64 {
    libm::sqrt(values.iter().map(|v| v * v).sum())
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(&u.values, &v.values) / denom).clamp(-1.0, 1.0))
}

/// Normalized arithmetic mean of the member vectors (mean group mode).
pub fn group_vector(vectors: &[EmbeddingVector], indices: &[usize]) -> Result<EmbeddingVector> {
    let first = *indices.first().ok_or(Error::Empty("group index set"))?;
    let head = vectors.get(first).ok_or(Error::IndexOutOfRange { index: first, len: vectors.len() })?;
    if indices.len() == 1 && head.is_normalized() {
        return Ok(head.clone());
    }
    let dim = head.dim();
    let mut sum = vec![0.0; dim];
    for &i in indices {
        let v = vectors.get(i).ok_or(Error::IndexOutOfRange { index: i, len: vectors.len() })?;
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
        }
        for (acc, x) in sum.iter_mut().zip(&v.values) {
            *acc += x;
        }
    }
    let n = indices.len() as f64;
    EmbeddingVector::new(sum.into_iter().map(|s| s / n).collect())?.normalized()
}

/// How a multi-sentence group is turned into one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupMode {
    /// Normalized mean of the member sentence vectors.
    #[default]
    Mean,
    /// Embedding of the member texts joined by single spaces. Requires a
    /// provider that can embed arbitrary text.
    Concat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                cells.push(f(i, j));
            }
        }
        Self { rows, cols, cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.cells[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }
}

pub fn similarity_matrix(
    complex: &[EmbeddingVector],
    simple: &[EmbeddingVector],
) -> Result<SimilarityMatrix> {
    if complex.is_empty() || simple.is_empty() {
        return Err(Error::Empty("vector list"));
    }
    let dim = complex[0].dim();
    if let Some(v) = complex.iter().chain(simple).find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
    }
    let mut err = None;
    let m = SimilarityMatrix::from_fn(complex.len(), simple.len(), |i, j| {
        cosine(&complex[i], &simple[j]).unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(m),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderKind {
    VectorFile,
    HttpService,
    TestTrigram,
}

impl ProviderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProviderKind::VectorFile => "vector-file",
            ProviderKind::HttpService => "http-service",
            ProviderKind::TestTrigram => "test-trigram",
        }
    }
}

/// Source of sentence vectors.
///
/// Implementations must be deterministic: the same text always maps to the
/// same vector. Raw outputs need not be normalized; callers go through
/// [`embed_sentences`] / [`embed_side`], which validate and normalize.
pub trait EmbeddingProvider {
    fn kind(&self) -> ProviderKind;

    fn dim(&self) -> usize;

    /// Whether arbitrary text (e.g. concatenated groups) can be embedded, as
    /// opposed to only the stored sentences of a document.
    fn supports_text_groups(&self) -> bool;

    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>>;

    /// Vectors for every sentence of one side of a pair. Providers backed by
    /// per-document storage override this; the default embeds the texts.
    fn embed_document(&self, pair: &DocumentPair, side: Side) -> Result<Vec<EmbeddingVector>> {
        self.embed_texts(&pair.texts(side))
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for &P {
    fn kind(&self) -> ProviderKind {
        (**self).kind()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn supports_text_groups(&self) -> bool {
        (**self).supports_text_groups()
    }
    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        (**self).embed_texts(texts)
    }
    fn embed_document(&self, pair: &DocumentPair, side: Side) -> Result<Vec<EmbeddingVector>> {
        (**self).embed_document(pair, side)
    }
}

/// One unit vector per text, in order.
pub fn embed_sentences<P: EmbeddingProvider + ?Sized>(
    provider: &P,
    texts: &[&str],
) -> Result<Vec<EmbeddingVector>> {
    if texts.is_empty() {
        return Err(Error::Empty("text list"));
    }
    let raw = provider.embed_texts(texts)?;
    checked_unit(raw, texts.len(), provider.dim())
}

/// One unit vector per sentence of `side`, in sentence order.
pub fn embed_side<P: EmbeddingProvider + ?Sized>(
    provider: &P,
    pair: &DocumentPair,
    side: Side,
) -> Result<Vec<EmbeddingVector>> {
    let raw = provider.embed_document(pair, side)?;
    checked_unit(raw, pair.side(side).len(), provider.dim())
}

fn checked_unit(raw: Vec<EmbeddingVector>, count: usize, dim: usize) -> Result<Vec<EmbeddingVector>> {
    if raw.len() != count {
        return Err(Error::CountMismatch { expected: count, found: raw.len() });
    }
    raw.iter()
        .map(|v| {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
            }
            v.normalized()
        })
        .collect()
}

/// Deterministic character-trigram embedder for tests and offline runs.
///
/// The lowercased text is padded with [`TrigramEmbedder::BOUNDARY`] on both
/// ends; each character trigram is hashed with 64-bit FNV-1a over its UTF-8
/// bytes into `dim` buckets, and the count vector is L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrigramEmbedder {
    dim: usize,
}

impl Default for TrigramEmbedder {
    fn default() -> Self {
        Self { dim: Self::DEFAULT_DIM }
    }
}

impl TrigramEmbedder {
    pub const DEFAULT_DIM: usize = 256;
    pub const BOUNDARY: char = '\u{2}';

    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("trigram dimension must be positive".into()));
        }
        Ok(Self { dim })
    }

    pub fn trigrams(text: &str) -> Vec<String> {
        let mut chars = vec![Self::BOUNDARY];
        chars.extend(text.to_lowercase().chars());
        chars.push(Self::BOUNDARY);
        chars.windows(3).map(|w| w.iter().collect()).collect()
    }

    pub fn bucket(&self, trigram: &str) -> usize {
        (fnv1a64(trigram.as_bytes()) % self.dim as u64) as usize
    }

    pub fn embed_one(&self, text: &str) -> Result<EmbeddingVector> {
        let mut counts = vec![0.0; self.dim];
        for t in Self::trigrams(text) {
            counts[self.bucket(&t)] += 1.0;
        }
        EmbeddingVector::new(counts)?.normalized()
    }
}

impl EmbeddingProvider for TrigramEmbedder {
    fn kind(&self) -> ProviderKind {
        ProviderKind::TestTrigram
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn supports_text_groups(&self) -> bool {
        true
    }

    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn v(xs: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let u = v(&[1.0, 2.0, 2.0]);
        assert_eq!(cosine(&u, &u).unwrap(), 1.0);
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        let c = cosine(&u, &v(&[2.0, 1.0, 2.0])).unwrap();
        assert!((c - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(cosine(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap_err(), Error::ZeroNorm);
        assert!(matches!(
            cosine(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(EmbeddingVector::new(vec![f64::NAN]).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn group_vector_examples() {
        let vs = [v(&[0.6, 0.8]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let single = group_vector(&vs, &[0]).unwrap();
        assert_eq!(single.values(), &[0.6, 0.8]);
        let same = group_vector(&[vs[0].clone(), vs[0].clone()], &[0, 1]).unwrap();
        assert_eq!(same.values(), &[0.6, 0.8]);
        let mean = group_vector(&vs, &[1, 2]).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((mean.values()[0] - h).abs() < 1e-15 && (mean.values()[1] - h).abs() < 1e-15);
        assert!(mean.is_normalized());
        assert_eq!(group_vector(&vs, &[]).unwrap_err(), Error::Empty("group index set"));
        assert!(matches!(group_vector(&vs, &[3]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn matrix_examples() {
        let basis = [v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
        let m = similarity_matrix(&basis, &basis).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        let complex = [v(&[1.0, 2.0, 2.0]), v(&[-1.0, 0.5, 3.0])];
        let simple = [v(&[2.0, 1.0, 2.0]), v(&[0.0, 0.0, 1.0]), v(&[3.0, -1.0, 0.5])];
        let m = similarity_matrix(&complex, &simple).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        for i in 0..2 {
            for j in 0..3 {
                let (a, b) = (complex[i].values(), simple[j].values());
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((m.get(i, j) - d / (na * nb)).abs() < 1e-12);
            }
        }
        assert!(similarity_matrix(&complex, &[v(&[1.0])]).is_err());
    }

    /// Independent re-implementation of the trigram hashing rule.
    fn oracle_counts(text: &str, dim: u64) -> BTreeMap<u64, f64> {
        let lower: std::string::String = text.to_lowercase();
        let padded: std::vec::Vec<char> =
            core::iter::once('\u{2}').chain(lower.chars()).chain(core::iter::once('\u{2}')).collect();
        let mut out = BTreeMap::new();
        for i in 0..padded.len() - 2 {
            let mut buf = [0u8; 12];
            let mut len = 0;
            for c in &padded[i..i + 3] {
                len += c.encode_utf8(&mut buf[len..]).len();
            }
            let mut h: u64 = 14695981039346656037;
            for b in &buf[..len] {
                h ^= *b as u64;
                h = h.wrapping_mul(1099511628211);
            }
            *out.entry(h % dim).or_insert(0.0) += 1.0;
        }
        out
    }

    fn oracle_cosine(a: &str, b: &str) -> f64 {
        let (ca, cb) = (oracle_counts(a, 256), oracle_counts(b, 256));
        let d: f64 = ca.iter().map(|(k, x)| x * cb.get(k).copied().unwrap_or(0.0)).sum();
        let na = ca.values().map(|x| x * x).sum::<f64>().sqrt();
        let nb = cb.values().map(|x| x * x).sum::<f64>().sqrt();
        d / (na * nb)
    }

    #[test]
    fn trigram_cat_vs_cat_dot() {
        let e = TrigramEmbedder::default();
        let got = cosine(&e.embed_one("cat").unwrap(), &e.embed_one("cat.").unwrap()).unwrap();
        // "cat" -> {^ca, cat, at$}; "cat." -> {^ca, cat, at., t.$}; no bucket collisions
        assert!((got - oracle_cosine("cat", "cat.")).abs() < 1e-12);
        assert!((got - 2.0 / (3.0f64.sqrt() * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn trigram_determinism_and_identity() {
        let e = TrigramEmbedder::default();
        let a = embed_sentences(&e, &["abc"]).unwrap();
        let b = embed_sentences(&e, &["abc"]).unwrap();
        assert_eq!(a, b);
        assert!((cosine(&a[0], &b[0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(TrigramEmbedder::trigrams("Ab").len(), 2);
    }

    #[test]
    fn trigram_disjoint_without_collisions_is_orthogonal() {
        let e = TrigramEmbedder::default();
        let (a, b) = ("dog", "xyz");
        let ba: std::collections::BTreeSet<_> =
            TrigramEmbedder::trigrams(a).iter().map(|t| e.bucket(t)).collect();
        let bb: std::collections::BTreeSet<_> =
            TrigramEmbedder::trigrams(b).iter().map(|t| e.bucket(t)).collect();
        assert!(ba.is_disjoint(&bb), "fixture must not collide");
        assert_eq!(cosine(&e.embed_one(a).unwrap(), &e.embed_one(b).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn embed_side_checks_counts() {
        struct Short;
        impl EmbeddingProvider for Short {
            fn kind(&self) -> ProviderKind {
                ProviderKind::VectorFile
            }
            fn dim(&self) -> usize {
                2
            }
            fn supports_text_groups(&self) -> bool {
                false
            }
            fn embed_texts(&self, _: &[&str]) -> Result<Vec<EmbeddingVector>> {
                Ok(vec![EmbeddingVector::new(vec![3.0, 4.0]).unwrap()])
            }
        }
        let pair = DocumentPair::new("p", "en", ["a", "b"], ["c"]).unwrap();
        assert_eq!(
            embed_side(&Short, &pair, Side::Complex).unwrap_err(),
            Error::CountMismatch { expected: 2, found: 1 }
        );
        let simple = embed_side(&Short, &pair, Side::Simple).unwrap();
        assert_eq!(simple[0].values(), &[0.6, 0.8]);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, dim)
            .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(u in vector(6), w in vector(6), alpha in 0.01f64..100.0) {
            let (a, b) = (EmbeddingVector::new(u.clone()).unwrap(), EmbeddingVector::new(w).unwrap());
            prop_assert_eq!(cosine(&a, &b).unwrap(), cosine(&b, &a).unwrap());
            let scaled = EmbeddingVector::new(u.iter().map(|x| x * alpha).collect()).unwrap();
            prop_assert!((cosine(&scaled, &b).unwrap() - cosine(&a, &b).unwrap()).abs() < 1e-9);
            let c = cosine(&a, &b).unwrap();
            prop_assert!((-1.0..=1.0).contains(&c));
        }

        #[test]
        fn matrix_equals_double_loop(xs in proptest::collection::vec(vector(4), 1..5), ys in proptest::collection::vec(vector(4), 1..5)) {
            let a: Vec<_> = xs.into_iter().map(|v| EmbeddingVector::new(v).unwrap()).collect();
            let b: Vec<_> = ys.into_iter().map(|v| EmbeddingVector::new(v).unwrap()).collect();
            let m = similarity_matrix(&a, &b).unwrap();
            for i in 0..a.len() {
                for j in 0..b.len() {
                    prop_assert_eq!(m.get(i, j), cosine(&a[i], &b[j]).unwrap());
                }
            }
        }

        #[test]
        fn trigram_identical_strings_score_one(s in "\\PC{1,30}") {
            prop_assume!(!s.trim().is_empty());
            let e = TrigramEmbedder::default();
            let v = e.embed_one(&s).unwrap();
            prop_assert!((cosine(&v, &e.embed_one(&s).unwrap()).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((v.norm() - 1.0).abs() < 1e-6);
        }
    }
}
