use std::collections::BTreeMap;
use std::path::Path;

use monoalign_core::baseline::{gale_church_align_pair, lexical_overlap_align};
use monoalign_core::hybrid::hybrid_align;
use monoalign_core::quality::{quality_report, PairParses, QualityInput, QualityReport};
use monoalign_core::{corpus_stats, AlignmentSet, CorpusStats, DocumentPair, EmbeddingProvider};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::{Context, Error, Result};
use crate::formats::{self, ManifestRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algorithm {
    GaleChurch,
    Lexical,
    Hybrid,
}

impl Algorithm {
    pub fn needs_provider(self) -> bool {
        self == Algorithm::Hybrid
    }
}

/// Runs `f` on a pool of `jobs` threads (0 = one per core).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Loads every manifest row, in manifest order.
pub fn load_corpus(rows: &[ManifestRow], jobs: usize) -> Result<Vec<DocumentPair>> {
    with_jobs(jobs, || rows.par_iter().map(formats::load_document_pair).collect())?
}

pub fn align_pair<P: EmbeddingProvider + Sync + ?Sized>(
    pair: &DocumentPair,
    algorithm: Algorithm,
    config: &PipelineConfig,
    provider: Option<&P>,
) -> Result<AlignmentSet> {
    let ctx = || format!("aligning pair {}", pair.pair_id());
    match algorithm {
        Algorithm::GaleChurch => gale_church_align_pair(pair, &config.gale_church).context(ctx),
        Algorithm::Lexical => lexical_overlap_align(pair, &config.lexical).context(ctx),
        Algorithm::Hybrid => {
            let provider = provider.ok_or_else(|| Error::Config("the hybrid aligner needs a provider".into()))?;
            hybrid_align(pair, provider, &config.hybrid).context(ctx)
        }
    }
}

/// Aligns pairs in parallel; results keep the input order, so output is
/// independent of `jobs`.
pub fn align_corpus<P: EmbeddingProvider + Sync + ?Sized>(
    pairs: &[DocumentPair],
    algorithm: Algorithm,
    config: &PipelineConfig,
    provider: Option<&P>,
    jobs: usize,
) -> Result<Vec<AlignmentSet>> {
    with_jobs(jobs, || pairs.par_iter().map(|p| align_pair(p, algorithm, config, provider)).collect())?
}

fn by_language<T>(items: &[T], lang: impl Fn(&T) -> &str) -> BTreeMap<String, Vec<&T>> {
    let mut groups: BTreeMap<String, Vec<&T>> = BTreeMap::new();
    for it in items {
        groups.entry(lang(it).to_string()).or_default().push(it);
    }
    groups
}

/// One row per language, sorted by language code.
pub fn stats_by_language(pairs: &[DocumentPair]) -> Result<Vec<(String, CorpusStats)>> {
    by_language(pairs, |p| p.language())
        .into_iter()
        .map(|(lang, group)| {
            let owned: Vec<DocumentPair> = group.into_iter().cloned().collect();
            let stats = corpus_stats(&owned).context(|| format!("statistics for {lang}"))?;
            Ok((lang, stats))
        })
        .collect()
}

/// Quality report per language over the pairs that have an alignment.
pub fn quality_by_language<P: EmbeddingProvider + Sync + ?Sized>(
    alignments: &[AlignmentSet],
    pairs: &[DocumentPair],
    parses_dir: &Path,
    provider: &P,
    jobs: usize,
) -> Result<Vec<(String, QualityReport)>> {
    let by_id: BTreeMap<&str, &DocumentPair> = pairs.iter().map(|p| (p.pair_id(), p)).collect();
    let mut matched = Vec::with_capacity(alignments.len());
    for a in alignments {
        let pair = by_id.get(a.pair_id.as_str()).ok_or_else(|| Error::Data {
            context: "quality".into(),
            source: monoalign_core::Error::PairMismatch {
                expected: "a pair listed in the manifest".into(),
                found: a.pair_id.clone(),
            },
        })?;
        a.check_monotone(pair.complex().len(), pair.simple().len()).context(|| format!("alignment {}", a.pair_id))?;
        matched.push((a, *pair));
    }
    let parses: Vec<PairParses> = with_jobs(jobs, || {
        matched.par_iter().map(|(_, p)| formats::load_pair_parses(parses_dir, p)).collect::<Result<Vec<_>>>()
    })??;
    let inputs: Vec<(QualityInput<'_>, &str)> = matched
        .iter()
        .zip(&parses)
        .map(|((a, p), parses)| (QualityInput { alignment: a, pair: p, parses }, p.language()))
        .collect();
    by_language(&inputs, |(_, lang)| lang)
        .into_iter()
        .map(|(lang, group)| {
            let group: Vec<QualityInput<'_>> = group.into_iter().map(|(q, _)| *q).collect();
            let report = quality_report(&group, provider).context(|| format!("quality for {lang}"))?;
            Ok((lang, report))
        })
        .collect()
}
