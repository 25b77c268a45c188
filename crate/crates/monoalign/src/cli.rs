use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use monoalign_core::embed::ProviderKind;
use monoalign_core::eval::{band_filter, evaluate_corpus, grid_search_tau, EvalMode, ThresholdBand};
use monoalign_core::{AlignmentSet, EmbeddingProvider, Side};

use crate::config::{parse_grid, parse_provider_kind, PipelineConfig};
use crate::error::{Context, Error, Result};
use crate::formats;
use crate::pipeline::{self, Algorithm};
use crate::provider::Provider;
use crate::synth::{self, SynthSpec};

#[derive(Debug, Parser)]
#[command(name = "monoalign", version, about = "Sentence alignment for complex/simple document pairs")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus statistics per language, as TSV.
    Stats(StatsArgs),
    /// Align every pair of a manifest and write scored JSONL.
    Align(AlignArgs),
    /// Grid-search the lower similarity threshold against gold alignments.
    Tune(TuneArgs),
    /// Keep beads whose score lies in [tau, upper].
    Filter(FilterArgs),
    /// Precision, recall and F1 against gold alignments.
    Eval(EvalArgs),
    /// Meaning preservation and structural deltas per language, as TSV.
    Quality(QualityArgs),
    /// Write provider vectors as vector files.
    Embed(EmbedArgs),
    /// Generate a seeded synthetic corpus with gold alignments.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct ManifestArg {
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProviderArgs {
    /// vector-file, http-service, test-trigram, or an http(s) base URL.
    #[arg(long)]
    provider: Option<String>,
    #[arg(long)]
    vectors_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct JobsArg {
    /// Worker threads over document pairs; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    manifest: ManifestArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AlignArgs {
    #[command(flatten)]
    manifest: ManifestArg,
    #[arg(long, value_enum, default_value_t = Algorithm::Hybrid)]
    algorithm: Algorithm,
    #[command(flatten)]
    provider: ProviderArgs,
    /// Output file, or directory with --split-output; stdout by default.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one `<pair_id>.jsonl` per pair into the --out directory.
    #[arg(long)]
    split_output: bool,
    #[command(flatten)]
    jobs: JobsArg,
}

#[derive(Debug, Args)]
struct TuneArgs {
    /// Scored JSONL file or directory of JSONL files.
    pred: PathBuf,
    #[arg(long)]
    gold_dir: Option<PathBuf>,
    /// start:stop:step
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    mode: Option<EvalMode>,
    #[arg(long)]
    upper: Option<f64>,
    /// Curve CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FilterArgs {
    pred: PathBuf,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    upper: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    split_output: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    pred: PathBuf,
    #[arg(long)]
    gold_dir: Option<PathBuf>,
    #[arg(long)]
    mode: Option<EvalMode>,
}

#[derive(Debug, Args)]
struct QualityArgs {
    /// Aligned JSONL file or directory.
    aligned: PathBuf,
    #[command(flatten)]
    manifest: ManifestArg,
    #[arg(long)]
    parses_dir: Option<PathBuf>,
    #[command(flatten)]
    provider: ProviderArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    jobs: JobsArg,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[command(flatten)]
    manifest: ManifestArg,
    #[command(flatten)]
    provider: ProviderArgs,
    /// Directory for `<pair_id>.<side>.vec` files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    jobs: JobsArg,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pairs: usize,
    /// Fraction of simple sentences that copy their source verbatim.
    #[arg(long, default_value_t = 0.0)]
    copy_fraction: f64,
}

/// Parses `args` (including the program name) and runs the command,
/// writing primary output to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{e}").map_err(|e| Error::io("<stdout>", e))?;
            return Ok(());
        }
        Err(e) => return Err(Error::Usage(e.render().to_string().trim_end().to_string())),
    };
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Stats(a) => stats(a, &mut cfg, stdout),
        Command::Align(a) => align(a, &mut cfg, stdout),
        Command::Tune(a) => tune(a, &mut cfg, stdout),
        Command::Filter(a) => filter(a, &mut cfg, stdout),
        Command::Eval(a) => eval(a, &mut cfg, stdout),
        Command::Quality(a) => quality(a, &mut cfg, stdout),
        Command::Embed(a) => embed(a, &mut cfg, stdout),
        Command::Synth(a) => synthesize(a, stdout),
    }
}

fn override_opt<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn manifest_path(cfg: &mut PipelineConfig, arg: ManifestArg) -> Result<PathBuf> {
    override_opt(&mut cfg.paths.manifest, arg.manifest);
    cfg.paths.manifest.clone().ok_or_else(|| Error::Usage("--manifest is required".into()))
}

fn existing_dir(slot: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    let dir = slot.clone().ok_or_else(|| Error::Usage(format!("{flag} is required")))?;
    if !dir.is_dir() {
        return Err(Error::io(&dir, std::io::Error::new(std::io::ErrorKind::NotFound, "directory not found")));
    }
    Ok(dir)
}

fn apply_provider(cfg: &mut PipelineConfig, args: ProviderArgs) -> Result<()> {
    if let Some(p) = args.provider {
        if p.starts_with("http://") || p.starts_with("https://") {
            cfg.provider.kind = ProviderKind::HttpService;
            cfg.provider.base_url = Some(p);
        } else {
            cfg.provider.kind = parse_provider_kind(&p).map_err(|e| Error::Usage(e.to_string()))?;
        }
    }
    if let Some(d) = args.vectors_dir {
        cfg.provider.kind = ProviderKind::VectorFile;
        cfg.provider.vectors_dir = Some(d);
    }
    Ok(())
}

fn load_pairs(manifest: &Path, jobs: usize) -> Result<Vec<monoalign_core::DocumentPair>> {
    let rows = formats::read_manifest(manifest)?;
    pipeline::load_corpus(&rows, jobs)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => formats::write_text(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn write_alignments(sets: &[AlignmentSet], out: Option<&Path>, split: bool, stdout: &mut dyn Write) -> Result<()> {
    if split {
        let dir = out.ok_or_else(|| Error::Usage("--split-output needs --out <dir>".into()))?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for set in sets {
            formats::write_text(&dir.join(format!("{}.jsonl", set.pair_id)), &formats::alignment_jsonl(set))?;
        }
        Ok(())
    } else {
        let text: String = sets.iter().map(formats::alignment_jsonl).collect();
        emit(out, &text, stdout)
    }
}

fn stats(a: StatsArgs, cfg: &mut PipelineConfig, stdout: &mut dyn Write) -> Result<()> {
    let manifest = manifest_path(cfg, a.manifest)?;
    override_opt(&mut cfg.paths.out, a.out);
    let pairs = load_pairs(&manifest, 1)?;
    let rows = pipeline::stats_by_language(&pairs)?;
    emit(cfg.paths.out.as_deref(), &formats::stats_tsv(&rows), stdout)
}

fn align(a: AlignArgs, cfg: &mut PipelineConfig, stdout: &mut dyn Write) -> Result<()> {
    let manifest = manifest_path(cfg, a.manifest)?;
    apply_provider(cfg, a.provider)?;
    override_opt(&mut cfg.paths.out, a.out);
    cfg.validate()?;
    let provider = if a.algorithm.needs_provider() { Some(Provider::from_config(&cfg.provider)?) } else { None };
    let pairs = load_pairs(&manifest, a.jobs.jobs)?;
    let sets = pipeline::align_corpus(&pairs, a.algorithm, cfg, provider.as_ref(), a.jobs.jobs)?;
    write_alignments(&sets, cfg.paths.out.as_deref(), a.split_output, stdout)
}

fn tune(a: TuneArgs, cfg: &mut PipelineConfig, stdout: &mut dyn Write) -> Result<()> {
    override_opt(&mut cfg.paths.gold_dir, a.gold_dir);
    if let Some(g) = a.grid {
        cfg.grid = parse_grid(&g)?;
    }
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(u) = a.upper {
        cfg.upper = u;
    }
    cfg.validate()?;
    let gold_dir = existing_dir(&cfg.paths.gold_dir, "--gold-dir")?;
    let scored = formats::read_alignments(&a.pred)?;
    let gold = formats::load_all_gold(&gold_dir)?;
    let curve = grid_search_tau(&scored, &gold, &cfg.grid, cfg.mode, cfg.upper).context(|| "grid search".into())?;
    if let Some(out) = &a.out {
        formats::write_text(out, &formats::curve_csv(&curve))?;
    }
    writeln!(stdout, "best_tau={} best_f1={:.6}", curve.best_tau, curve.best_f1).map_err(|e| Error::io("<stdout>", e))
}

fn filter(a: FilterArgs, cfg: &mut PipelineConfig, stdout: &mut dyn Write) -> Result<()> {
    override_opt(&mut cfg.tau, a.tau);
    if let Some(u) = a.upper {
        cfg.upper = u;
    }
    cfg.validate()?;
    let tau = cfg.tau.ok_or_else(|| Error::Usage("--tau is required".into()))?;
    let band = ThresholdBand::new(tau, cfg.upper).map_err(|e| Error::Usage(e.to_string()))?;
    let sets: Vec<AlignmentSet> = formats::read_alignments(&a.pred)?.iter().map(|s| band_filter(s, &band)).collect();
    write_alignments(&sets, a.out.as_deref(), a.split_output, stdout)
}

fn eval(a: EvalArgs, cfg: &mut PipelineConfig, stdout: &mut dyn Write) -> Result<()> {
    override_opt(&mut cfg.paths.gold_dir, a.gold_dir);
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    let gold_dir = existing_dir(&cfg.paths.gold_dir, "--gold-dir")?;
    let pred = formats::read_alignments(&a.pred)?;
    let gold = formats::load_all_gold(&gold_dir)?;
    let r = evaluate_corpus(&pred, &gold, cfg.mode).context(|| "evaluation".into())?;
    writeln!(stdout, "P={:.6} R={:.6} F1={:.6}", r.precision, r.recall, r.f1).map_err(|e| Error::io("<stdout>", e))
}

fn quality(a: QualityArgs, cfg: &mut PipelineConfig, stdout: &mut dyn Write) -> Result<()> {
    let manifest = manifest_path(cfg, a.manifest)?;
    override_opt(&mut cfg.paths.parses_dir, a.parses_dir);
    override_opt(&mut cfg.paths.out, a.out);
    apply_provider(cfg, a.provider)?;
    cfg.validate()?;
    let parses_dir = existing_dir(&cfg.paths.parses_dir, "--parses-dir")?;
    let provider = Provider::from_config(&cfg.provider)?;
    let pairs = load_pairs(&manifest, a.jobs.jobs)?;
    let aligned = formats::read_alignments(&a.aligned)?;
    let rows = pipeline::quality_by_language(&aligned, &pairs, &parses_dir, &provider, a.jobs.jobs)?;
    if rows.iter().any(|(_, r)| r.mean_proxy) {
        eprintln!("monoalign: note: meaning scores use the mean-vector proxy (provider cannot embed group text)");
    }
    emit(cfg.paths.out.as_deref(), &formats::quality_tsv(&rows), stdout)
}

fn embed(a: EmbedArgs, cfg: &mut PipelineConfig, _stdout: &mut dyn Write) -> Result<()> {
    let manifest = manifest_path(cfg, a.manifest)?;
    apply_provider(cfg, a.provider)?;
    override_opt(&mut cfg.paths.out, a.out);
    cfg.validate()?;
    let out = cfg.paths.out.clone().ok_or_else(|| Error::Usage("--out <dir> is required".into()))?;
    let provider = Provider::from_config(&cfg.provider)?;
    let pairs = load_pairs(&manifest, a.jobs.jobs)?;
    let files: Vec<(PathBuf, String)> = pipeline::with_jobs(a.jobs.jobs, || {
        use rayon::prelude::*;
        pairs
            .par_iter()
            .flat_map_iter(|p| [(p, Side::Complex), (p, Side::Simple)])
            .map(|(pair, side)| {
                let ctx = || format!("embedding {} {}", pair.pair_id(), side.as_str());
                let vectors = provider.embed_document(pair, side).context(ctx)?;
                let expected = pair.side(side).len();
                if vectors.len() != expected {
                    return Err(monoalign_core::Error::CountMismatch { expected, found: vectors.len() }).context(ctx);
                }
                if let Some(v) = vectors.iter().find(|v| v.dim() != vectors[0].dim()) {
                    let e = monoalign_core::Error::DimensionMismatch { expected: vectors[0].dim(), found: v.dim() };
                    return Err(e).context(ctx);
                }
                Ok((out.join(formats::vector_file_name(pair.pair_id(), side)), formats::vector_file_text(&vectors)?))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    for (path, text) in files {
        formats::write_text(&path, &text)?;
    }
    Ok(())
}

fn synthesize(a: SynthArgs, stdout: &mut dyn Write) -> Result<()> {
    if !(0.0..=1.0).contains(&a.copy_fraction) {
        return Err(Error::Usage("--copy-fraction must lie in [0, 1]".into()));
    }
    if a.pairs == 0 {
        return Err(Error::Usage("--pairs must be positive".into()));
    }
    let spec = SynthSpec { pairs: a.pairs, copy_fraction: a.copy_fraction, ..SynthSpec::default() };
    let corpus = synth::generate(&spec, a.seed)?;
    let manifest = synth::write_corpus(&a.out, &corpus)?;
    writeln!(stdout, "{}", manifest.display()).map_err(|e| Error::io("<stdout>", e))
}
