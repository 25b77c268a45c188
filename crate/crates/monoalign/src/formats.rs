//! On-disk formats: manifest, sentence files, vector files, gold files,
//! scored JSONL, CoNLL-U parses and the tabular reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use monoalign_core::eval::{GoldAlignment, TuningCurve};
use monoalign_core::quality::{ParsedSentence, ParsedToken, PairParses, QualityReport};
use monoalign_core::{AlignmentSet, Bead, CorpusStats, DocumentPair, EmbeddingVector, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Context, Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| {
        Error::format(path, 0, format!("invalid UTF-8 at byte {}", e.utf8_error().valid_up_to()))
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub pair_id: String,
    pub language: String,
    pub complex_path: PathBuf,
    pub simple_path: PathBuf,
}

/// Reads a headerless `pair_id<TAB>lang<TAB>complex<TAB>simple` manifest.
/// Relative document paths resolve against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut rows = Vec::new();
    let mut seen = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [pair_id, language, complex, simple] = fields[..] else {
            return Err(Error::format(path, n + 1, format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        if pair_id.is_empty() || pair_id.contains(['/', '\\']) {
            return Err(Error::format(path, n + 1, format!("invalid pair id {pair_id:?}")));
        }
        if let Some(prev) = seen.insert(pair_id.to_string(), n + 1) {
            return Err(Error::format(path, n + 1, format!("pair {pair_id:?} already listed on line {prev}")));
        }
        rows.push(ManifestRow {
            pair_id: pair_id.into(),
            language: language.into(),
            complex_path: base.join(complex),
            simple_path: base.join(simple),
        });
    }
    if rows.is_empty() {
        return Err(Error::format(path, 0, "manifest lists no document pairs"));
    }
    Ok(rows)
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<()> {
    let mut out = String::new();
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{}", r.pair_id, r.language, r.complex_path.display(), r.simple_path.display())
            .unwrap();
    }
    write_text(path, &out)
}

pub fn load_document_pair(row: &ManifestRow) -> Result<DocumentPair> {
    let complex = read_text(&row.complex_path)?;
    let simple = read_text(&row.simple_path)?;
    DocumentPair::from_lines(&row.pair_id, &row.language, &complex, &simple).map_err(|source| {
        let path = match source {
            monoalign_core::Error::Empty("simple document") => &row.simple_path,
            _ => &row.complex_path,
        };
        Error::Data { context: format!("pair {} ({})", row.pair_id, path.display()), source }
    })
}

/// One sentence per line, LF-terminated.
pub fn sentences_to_text<'a>(sentences: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(s);
        out.push('\n');
    }
    out
}

pub fn vector_file_name(pair_id: &str, side: Side) -> String {
    format!("{pair_id}.{}.vec", side.as_str())
}

/// Parses `dim=<d> count=<n>` followed by `n` rows of `d` floats.
pub fn parse_vector_file(path: &Path, text: &str) -> Result<Vec<EmbeddingVector>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::format(path, 1, "missing header"))?;
    let (dim, count) = parse_vector_header(header).ok_or_else(|| {
        Error::format(path, 1, format!("expected `dim=<d> count=<n>`, found {header:?}"))
    })?;
    let mut rows = Vec::with_capacity(count);
    for (n, line) in lines {
        let values = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::format(path, n + 1, e.to_string()))?;
        if values.len() != dim {
            return Err(Error::format(path, n + 1, format!("row has {} values, header says dim={dim}", values.len())));
        }
        rows.push(EmbeddingVector::new(values).context(|| format!("{}:{}", path.display(), n + 1))?);
    }
    if rows.len() != count {
        return Err(Error::format(path, 0, format!("header says count={count}, found {} rows", rows.len())));
    }
    Ok(rows)
}

fn parse_vector_header(header: &str) -> Option<(usize, usize)> {
    let mut parts = header.split_whitespace();
    let dim = parts.next()?.strip_prefix("dim=")?.parse().ok().filter(|&d| d > 0)?;
    let count = parts.next()?.strip_prefix("count=")?.parse().ok()?;
    parts.next().is_none().then_some((dim, count))
}

/// Reads only the header of a vector file.
pub fn read_vector_header(path: &Path) -> Result<(usize, usize)> {
    let text = read_text(path)?;
    let header = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    parse_vector_header(header)
        .ok_or_else(|| Error::format(path, 1, format!("expected `dim=<d> count=<n>`, found {header:?}")))
}

pub fn vector_file_text(vectors: &[EmbeddingVector]) -> Result<String> {
    let dim = vectors.first().map(EmbeddingVector::dim).ok_or_else(|| Error::Usage("no vectors to write".into()))?;
    let mut out = format!("dim={dim} count={}\n", vectors.len());
    for v in vectors {
        let mut first = true;
        for x in v.values() {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{x}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn gold_file_name(pair_id: &str) -> String {
    format!("{pair_id}.gold")
}

/// Parses lines of the form `[i1, i2]:[j1]`.
pub fn parse_gold(path: &Path, pair_id: &str, text: &str) -> Result<GoldAlignment> {
    let mut beads = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (src, tgt) = line
            .split_once(':')
            .ok_or_else(|| Error::format(path, n + 1, format!("expected `[..]:[..]`, found {line:?}")))?;
        let src = parse_index_list(src).ok_or_else(|| Error::format(path, n + 1, format!("bad index list {src:?}")))?;
        let tgt = parse_index_list(tgt).ok_or_else(|| Error::format(path, n + 1, format!("bad index list {tgt:?}")))?;
        beads.push(Bead::new(src, tgt, None).context(|| format!("{}:{}", path.display(), n + 1))?);
    }
    GoldAlignment::new(pair_id, beads).context(|| path.display().to_string())
}

fn parse_index_list(s: &str) -> Option<Vec<usize>> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?.trim();
    if inner.is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(|x| x.trim().parse().ok()).collect()
}

pub fn gold_text(beads: &[Bead]) -> String {
    let list = |xs: &[usize]| xs.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
    let mut out = String::new();
    for b in beads {
        writeln!(out, "[{}]:[{}]", list(b.src()), list(b.tgt())).unwrap();
    }
    out
}

/// Loads `<dir>/<pair_id>.gold` for every pair id.
pub fn load_gold_dir(dir: &Path, pair_ids: &[String]) -> Result<Vec<GoldAlignment>> {
    pair_ids
        .iter()
        .map(|id| {
            let path = dir.join(gold_file_name(id));
            parse_gold(&path, id, &read_text(&path)?)
        })
        .collect()
}

/// Loads every `*.gold` file in `dir`, sorted by pair id.
pub fn load_all_gold(dir: &Path) -> Result<Vec<GoldAlignment>> {
    let ids: Vec<String> = files_with_suffix(dir, ".gold")?.into_iter().map(|(id, _)| id).collect();
    if ids.is_empty() {
        return Err(Error::format(dir, 0, "no .gold files found"));
    }
    load_gold_dir(dir, &ids)
}

/// `(stem, path)` for files in `dir` ending in `suffix`, sorted by stem.
fn files_with_suffix(dir: &Path, suffix: &str) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(stem) = name.strip_suffix(suffix) {
            if entry.path().is_file() && !stem.is_empty() {
                out.push((stem.to_string(), entry.path()));
            }
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeadRecord {
    pair_id: String,
    src: Vec<usize>,
    tgt: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

pub fn alignment_jsonl(set: &AlignmentSet) -> String {
    let mut out = String::new();
    for b in &set.beads {
        let rec = BeadRecord {
            pair_id: set.pair_id.clone(),
            src: b.src().to_vec(),
            tgt: b.tgt().to_vec(),
            score: b.score(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("bead record serializes"));
        out.push('\n');
    }
    out
}

/// Groups JSONL bead lines by pair id, keeping first-appearance order.
pub fn parse_alignment_jsonl(path: &Path, text: &str) -> Result<Vec<AlignmentSet>> {
    let mut sets: Vec<AlignmentSet> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: BeadRecord =
            serde_json::from_str(line).map_err(|e| Error::format(path, n + 1, e.to_string()))?;
        let bead = Bead::new(rec.src, rec.tgt, rec.score).context(|| format!("{}:{}", path.display(), n + 1))?;
        let k = *index.entry(rec.pair_id.clone()).or_insert_with(|| {
            sets.push(AlignmentSet::new(rec.pair_id, Vec::new()));
            sets.len() - 1
        });
        sets[k].beads.push(bead);
    }
    Ok(sets)
}

/// Reads predictions from a JSONL file, or from every `*.jsonl` file of a
/// directory in name order.
pub fn read_alignments(path: &Path) -> Result<Vec<AlignmentSet>> {
    if path.is_dir() {
        let mut all: Vec<AlignmentSet> = Vec::new();
        for (_, file) in files_with_suffix(path, ".jsonl")? {
            all.extend(parse_alignment_jsonl(&file, &read_text(&file)?)?);
        }
        Ok(all)
    } else {
        parse_alignment_jsonl(path, &read_text(path)?)
    }
}

pub fn conllu_file_name(pair_id: &str, side: Side) -> String {
    format!("{pair_id}.{}.conllu", side.as_str())
}

/// Reads CoNLL-U sentences, keeping ID, FORM, UPOS, HEAD and DEPREL.
/// Comment lines, multiword ranges (`1-2`) and empty nodes (`1.1`) are skipped.
pub fn parse_conllu(path: &Path, text: &str) -> Result<Vec<ParsedSentence>> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<ParsedToken> = Vec::new();
    let mut start = 0;
    let mut finish = |tokens: &mut Vec<ParsedToken>, start: usize| -> Result<()> {
        if !tokens.is_empty() {
            let s = ParsedSentence::new(std::mem::take(tokens))
                .context(|| format!("{}:{start}: sentence {}", path.display(), sentences.len()))?;
            sentences.push(s);
        }
        Ok(())
    };
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish(&mut tokens, start)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::format(path, n + 1, format!("expected 10 columns, found {}", cols.len())));
        }
        if cols[0].contains(['-', '.']) {
            continue;
        }
        let id: usize = cols[0].parse().map_err(|_| Error::format(path, n + 1, format!("bad ID {:?}", cols[0])))?;
        if tokens.is_empty() {
            start = n + 1;
        }
        if id != tokens.len() + 1 {
            return Err(Error::format(path, n + 1, format!("expected token ID {}, found {id}", tokens.len() + 1)));
        }
        let head: usize =
            cols[6].parse().map_err(|_| Error::format(path, n + 1, format!("bad HEAD {:?}", cols[6])))?;
        tokens.push(ParsedToken::new(cols[1], cols[3], head, cols[7]));
    }
    finish(&mut tokens, start)?;
    Ok(sentences)
}

pub fn load_pair_parses(dir: &Path, pair: &DocumentPair) -> Result<PairParses> {
    let load = |side: Side| -> Result<Vec<ParsedSentence>> {
        let path = dir.join(conllu_file_name(pair.pair_id(), side));
        let parses = parse_conllu(&path, &read_text(&path)?)?;
        let expected = pair.side(side).len();
        if parses.len() != expected {
            return Err(Error::format(
                &path,
                0,
                format!("{} parsed sentences for a {expected}-sentence document", parses.len()),
            ));
        }
        Ok(parses)
    };
    Ok(PairParses { complex: load(Side::Complex)?, simple: load(Side::Simple)? })
}

pub const STATS_HEADER: &str = "lang\tdocs\twords_complex\tsents_complex\tiqr25_complex\tiqr75_complex\twords_simple\tsents_simple\tiqr25_simple\tiqr75_simple";

pub fn stats_tsv(rows: &[(String, CorpusStats)]) -> String {
    let mut out = format!("{STATS_HEADER}\n");
    for (lang, s) in rows {
        writeln!(
            out,
            "{lang}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.doc_count,
            s.words_complex,
            s.sents_complex,
            s.iqr_complex.0,
            s.iqr_complex.1,
            s.words_simple,
            s.sents_simple,
            s.iqr_simple.0,
            s.iqr_simple.1
        )
        .unwrap();
    }
    out
}

pub const QUALITY_HEADER: &str = "lang\tpairs\tbeads\tmeaning\tdelta_depth\tdelta_np_pct";

pub fn quality_tsv(rows: &[(String, QualityReport)]) -> String {
    let mut out = format!("{QUALITY_HEADER}\n");
    for (lang, r) in rows {
        writeln!(
            out,
            "{lang}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            r.pair_count, r.bead_count, r.mean_meaning_score, r.mean_delta_depth, r.mean_delta_np_density
        )
        .unwrap();
    }
    out
}

pub fn curve_csv(curve: &TuningCurve) -> String {
    let mut out = String::from("tau,precision,recall,f1\n");
    for r in &curve.rows {
        writeln!(out, "{},{:.6},{:.6},{:.6}", r.tau, r.precision, r.recall, r.f1).unwrap();
    }
    writeln!(out, "# best_tau={} best_f1={:.6}", curve.best_tau, curve.best_f1).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("fixture")
    }

    #[test]
    fn gold_lines_round_trip() {
        let g = parse_gold(p(), "d", "[1, 2]:[3]\n\n[4]:[]\n[]:[4]\n").unwrap();
        assert_eq!(g.beads.len(), 3);
        assert_eq!(g.beads[0].src(), &[1, 2]);
        assert_eq!(g.beads[0].tgt(), &[3]);
        assert!(g.beads[1].tgt().is_empty());
        assert_eq!(gold_text(&g.beads), "[1, 2]:[3]\n[4]:[]\n[]:[4]\n");
    }

    #[test]
    fn gold_rejects_garbage() {
        assert!(parse_gold(p(), "d", "[1, x]:[3]\n").is_err());
        assert!(parse_gold(p(), "d", "1:[3]\n").is_err());
        assert!(parse_gold(p(), "d", "[2]:[0]\n[1]:[1]\n").is_err());
    }

    #[test]
    fn jsonl_omits_missing_score() {
        let set = AlignmentSet::new(
            "a",
            vec![Bead::new(vec![0], vec![0, 1], Some(0.5)).unwrap(), Bead::new(vec![1], vec![], None).unwrap()],
        );
        let text = alignment_jsonl(&set);
        assert_eq!(
            text,
            "{\"pair_id\":\"a\",\"src\":[0],\"tgt\":[0,1],\"score\":0.5}\n{\"pair_id\":\"a\",\"src\":[1],\"tgt\":[]}\n"
        );
        assert_eq!(parse_alignment_jsonl(p(), &text).unwrap(), vec![set]);
    }

    #[test]
    fn vector_file_checks_shape() {
        let ok = parse_vector_file(p(), "dim=2 count=2\n1 0\n0.5 0.5\n").unwrap();
        assert_eq!(ok.len(), 2);
        assert!(parse_vector_file(p(), "dim=2 count=2\n1 0\n").is_err());
        assert!(parse_vector_file(p(), "dim=3 count=1\n1 0\n").is_err());
        assert!(parse_vector_file(p(), "count=1 dim=2\n1 0\n").is_err());
        let text = vector_file_text(&ok).unwrap();
        assert_eq!(parse_vector_file(p(), &text).unwrap(), ok);
    }

    #[test]
    fn conllu_skips_ranges_and_empty_nodes() {
        let text = "# text = Au chat dort\n\
            1-2\tAu\t_\t_\t_\t_\t_\t_\t_\t_\n\
            1\tà\tà\tADP\t_\t_\t3\tcase\t_\t_\n\
            2\tle\tle\tDET\t_\t_\t3\tdet\t_\t_\n\
            3\tchat\tchat\tNOUN\t_\t_\t4\tnsubj\t_\t_\n\
            3.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n\
            4\tdort\tdormir\tVERB\t_\t_\t0\troot\t_\t_\n\
            \n\
            1\tOui\toui\tINTJ\t_\t_\t0\troot\t_\t_\n";
        let s = parse_conllu(p(), text).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].tokens().len(), 4);
        assert_eq!(s[0].tokens()[2].upos, "NOUN");
        assert_eq!(s[1].tokens()[0].head, 0);
    }

    #[test]
    fn conllu_rejects_gaps_and_cycles() {
        let gap = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n3\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n";
        assert!(parse_conllu(p(), gap).is_err());
        let cycle = "1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n2\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n3\tc\tc\tX\t_\t_\t0\troot\t_\t_\n";
        assert!(parse_conllu(p(), cycle).is_err());
    }
}
