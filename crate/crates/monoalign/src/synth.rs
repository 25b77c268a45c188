//! Seeded synthetic corpora with a known alignment.
//!
//! Each complex sentence is rewritten by one operation: a noisy 1-1
//! rewrite, a split into two simple sentences, a merge with the next complex
//! sentence, or a deletion. The operations applied become the gold record.

use std::path::{Path, PathBuf};

use monoalign_core::eval::GoldAlignment;
use monoalign_core::{Bead, DocumentPair, Side};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Context, Result};
use crate::formats::{self, ManifestRow};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub pairs: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub language: String,
    pub p_split: f64,
    pub p_merge: f64,
    pub p_delete: f64,
    /// Share of tokens substituted in every rewritten unit; half as many
    /// again are dropped.
    pub token_noise: f64,
    /// Fraction of simple sentences that are verbatim copies of their source.
    pub copy_fraction: f64,
    pub vocabulary: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            pairs: 20,
            min_sentences: 15,
            max_sentences: 25,
            language: "en".into(),
            p_split: 0.15,
            p_merge: 0.15,
            p_delete: 0.10,
            token_noise: 0.15,
            copy_fraction: 0.0,
            vocabulary: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPair {
    pub pair: DocumentPair,
    pub gold: GoldAlignment,
    /// Simple-side indices that copy a complex sentence verbatim.
    pub copies: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Rewrite,
    Copy,
    Split,
    Merge,
    Delete,
}

pub fn generate(spec: &SynthSpec, seed: u64) -> Result<Vec<SynthPair>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = vocabulary(&mut rng, spec.vocabulary.max(50));
    (0..spec.pairs).map(|k| generate_pair(spec, &vocab, &mut rng, format!("synth-{k:03}"))).collect()
}

fn vocabulary(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    const ONSETS: [&str; 18] = ["b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr"];
    const VOWELS: [&str; 7] = ["a", "e", "i", "o", "u", "ai", "ou"];
    let mut seen = std::collections::BTreeSet::new();
    let mut words = Vec::with_capacity(size);
    while words.len() < size {
        let syllables = rng.random_range(1..=4);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(VOWELS.choose(rng).unwrap());
        }
        if rng.random_bool(0.4) {
            w.push_str(ONSETS[..15].choose(rng).unwrap());
        }
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

fn sentence(rng: &mut ChaCha8Rng, vocab: &[String]) -> Vec<String> {
    let len = rng.random_range(10..=22);
    (0..len).map(|_| vocab.choose(rng).unwrap().clone()).collect()
}

fn render(tokens: &[String]) -> String {
    let mut s = tokens.join(" ");
    if let Some(first) = s.get(..1) {
        let upper = first.to_uppercase();
        s.replace_range(..1, &upper);
    }
    s.push('.');
    s
}

/// Rewrites a unit with a fixed edit budget: `ceil(rate * len)` tokens are
/// replaced and `round(rate / 2 * len)` dropped, keeping at least three.
fn perturb(rng: &mut ChaCha8Rng, vocab: &[String], tokens: &[String], rate: f64) -> Vec<String> {
    let len = tokens.len();
    let replace = ((rate * len as f64).ceil() as usize).min(len);
    let drop = ((rate / 2.0 * len as f64).round() as usize).min(len.saturating_sub(3));
    let mut positions: Vec<usize> = (0..len).collect();
    positions.shuffle(rng);
    let mut out: Vec<Option<String>> = tokens.iter().cloned().map(Some).collect();
    for &k in &positions[..drop] {
        out[k] = None;
    }
    for &k in &positions[drop..(drop + replace).min(len)] {
        out[k] = Some(vocab.choose(rng).unwrap().clone());
    }
    let mut out: Vec<String> = out.into_iter().flatten().collect();
    while out.len() < 3 {
        out.push(vocab.choose(rng).unwrap().clone());
    }
    out
}

fn generate_pair(spec: &SynthSpec, vocab: &[String], rng: &mut ChaCha8Rng, pair_id: String) -> Result<SynthPair> {
    let n = rng.random_range(spec.min_sentences..=spec.max_sentences.max(spec.min_sentences));
    let complex: Vec<Vec<String>> = (0..n).map(|_| sentence(rng, vocab)).collect();

    let mut ops = Vec::new();
    let mut i = 0;
    while i < n {
        let r: f64 = rng.random();
        let op = if r < spec.p_delete {
            Op::Delete
        } else if r < spec.p_delete + spec.p_merge && i + 1 < n {
            Op::Merge
        } else if r < spec.p_delete + spec.p_merge + spec.p_split {
            Op::Split
        } else {
            Op::Rewrite
        };
        i += if op == Op::Merge { 2 } else { 1 };
        ops.push(op);
    }
    if ops.iter().all(|&op| op == Op::Delete) {
        ops[0] = Op::Rewrite;
    }

    let simple_count: usize = ops
        .iter()
        .map(|op| match op {
            Op::Split => 2,
            Op::Delete => 0,
            _ => 1,
        })
        .sum();
    let wanted = (spec.copy_fraction * simple_count as f64).round() as usize;
    let mut rewrites: Vec<usize> = (0..ops.len()).filter(|&k| ops[k] == Op::Rewrite).collect();
    rewrites.shuffle(rng);
    for &k in rewrites.iter().take(wanted) {
        ops[k] = Op::Copy;
    }

    let mut simple: Vec<String> = Vec::new();
    let mut beads = Vec::new();
    let mut copies = Vec::new();
    let mut i = 0;
    for op in ops {
        let j = simple.len();
        match op {
            Op::Rewrite => {
                simple.push(render(&perturb(rng, vocab, &complex[i], spec.token_noise)));
                beads.push(Bead::new(vec![i], vec![j], None));
            }
            Op::Copy => {
                simple.push(render(&complex[i]));
                copies.push(j);
                beads.push(Bead::new(vec![i], vec![j], None));
            }
            Op::Split => {
                let cut = complex[i].len() / 2;
                let (a, b) = complex[i].split_at(cut);
                simple.push(render(&perturb(rng, vocab, a, spec.token_noise)));
                simple.push(render(&perturb(rng, vocab, b, spec.token_noise)));
                beads.push(Bead::new(vec![i], vec![j, j + 1], None));
            }
            Op::Merge => {
                let joined: Vec<String> = complex[i].iter().chain(&complex[i + 1]).cloned().collect();
                simple.push(render(&perturb(rng, vocab, &joined, spec.token_noise)));
                beads.push(Bead::new(vec![i, i + 1], vec![j], None));
            }
            Op::Delete => {}
        }
        i += if op == Op::Merge { 2 } else { 1 };
    }

    let complex_text: Vec<String> = complex.iter().map(|t| render(t)).collect();
    let pair = DocumentPair::new(pair_id.clone(), spec.language.clone(), complex_text, simple)
        .context(|| format!("synthetic pair {pair_id}"))?;
    let beads = beads.into_iter().collect::<Result<Vec<_>, _>>().context(|| pair_id.clone())?;
    let gold = GoldAlignment::new(pair_id.clone(), beads).context(|| pair_id.clone())?;
    Ok(SynthPair { pair, gold, copies })
}

/// Writes `manifest.tsv`, `docs/<id>.{complex,simple}.txt` and
/// `gold/<id>.gold` under `dir`; returns the manifest path.
pub fn write_corpus(dir: &Path, pairs: &[SynthPair]) -> Result<PathBuf> {
    let mut rows = Vec::with_capacity(pairs.len());
    for sp in pairs {
        let id = sp.pair.pair_id();
        let mut paths = [PathBuf::new(), PathBuf::new()];
        for (slot, side) in paths.iter_mut().zip([Side::Complex, Side::Simple]) {
            *slot = PathBuf::from("docs").join(format!("{id}.{}.txt", side.as_str()));
            let text = formats::sentences_to_text(sp.pair.side(side).iter().map(|s| s.text()));
            formats::write_text(&dir.join(&*slot), &text)?;
        }
        formats::write_text(&dir.join("gold").join(formats::gold_file_name(id)), &formats::gold_text(&sp.gold.beads))?;
        let [complex_path, simple_path] = paths;
        rows.push(ManifestRow {
            pair_id: id.to_string(),
            language: sp.pair.language().to_string(),
            complex_path,
            simple_path,
        });
    }
    let manifest = dir.join("manifest.tsv");
    formats::write_manifest(&manifest, &rows)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_corpus() {
        let spec = SynthSpec { pairs: 3, ..SynthSpec::default() };
        assert_eq!(generate(&spec, 7).unwrap(), generate(&spec, 7).unwrap());
        assert_ne!(generate(&spec, 7).unwrap(), generate(&spec, 8).unwrap());
    }

    #[test]
    fn gold_partitions_the_simple_side() {
        for sp in generate(&SynthSpec::default(), 1).unwrap() {
            let n = sp.pair.complex().len();
            assert!((15..=25).contains(&n));
            let set = monoalign_core::AlignmentSet::new(sp.pair.pair_id(), sp.gold.beads.clone());
            set.check_partition(n, sp.pair.simple().len(), false).unwrap();
        }
    }

    #[test]
    fn copy_fraction_is_honoured() {
        let spec = SynthSpec { copy_fraction: 0.3, ..SynthSpec::default() };
        for sp in generate(&spec, 3).unwrap() {
            let m = sp.pair.simple().len();
            assert_eq!(sp.copies.len(), (0.3 * m as f64).round() as usize);
            for &j in &sp.copies {
                let bead = sp.gold.beads.iter().find(|b| b.tgt() == [j]).unwrap();
                assert_eq!(sp.pair.simple()[j].text(), sp.pair.complex()[bead.src()[0]].text());
            }
        }
    }
}
