//! Pipeline configuration: a TOML file with one table per stage.
//!
//! ```toml
//! [provider]
//! kind = "test-trigram"        # or "vector-file", "http-service"
//!
//! [hybrid]
//! anchor_threshold = 0.9
//! group_mode = "mean"
//!
//! [band]
//! tau = 0.6
//! ```
//!
//! Every key is optional; command-line flags override file values.

use std::path::{Path, PathBuf};

use monoalign_core::baseline::{GaleChurchParams, LexicalParams, ShapePriors};
use monoalign_core::embed::ProviderKind;
use monoalign_core::eval::{EvalMode, GridSpec, ThresholdBand};
use monoalign_core::hybrid::HybridConfig;
use monoalign_core::GroupMode;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::formats;

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub dim: Option<usize>,
    pub base_url: Option<String>,
    pub vectors_dir: Option<PathBuf>,
    pub timeout_secs: f64,
    pub batch_size: usize,
    pub retries: u32,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::TestTrigram,
            dim: None,
            base_url: None,
            vectors_dir: None,
            timeout_secs: 30.0,
            batch_size: 64,
            retries: 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    pub gold_dir: Option<PathBuf>,
    pub parses_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub provider: ProviderConfig,
    pub hybrid: HybridConfig,
    pub gale_church: GaleChurchParams,
    pub lexical: LexicalParams,
    pub tau: Option<f64>,
    pub upper: f64,
    pub grid: GridSpec,
    pub mode: EvalMode,
    pub paths: Paths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            provider: ProviderConfig::default(),
            hybrid: HybridConfig::default(),
            gale_church: GaleChurchParams::default(),
            lexical: LexicalParams::default(),
            tau: None,
            upper: ThresholdBand::DEFAULT_UPPER,
            grid: GridSpec::default(),
            mode: EvalMode::Strict,
            paths: Paths::default(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    provider: RawProvider,
    #[serde(default)]
    hybrid: RawHybrid,
    #[serde(default)]
    gale_church: RawGaleChurch,
    #[serde(default)]
    lexical: RawLexical,
    #[serde(default)]
    band: RawBand,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    eval: RawEval,
    #[serde(default)]
    paths: RawPaths,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProvider {
    kind: Option<String>,
    dim: Option<usize>,
    base_url: Option<String>,
    vectors_dir: Option<PathBuf>,
    timeout_secs: Option<f64>,
    batch_size: Option<usize>,
    retries: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHybrid {
    band_width: Option<usize>,
    anchor_threshold: Option<f64>,
    max_group_complex: Option<usize>,
    max_group_simple: Option<usize>,
    skip_complex_cost: Option<f64>,
    skip_simple_cost: Option<f64>,
    size_penalty: Option<f64>,
    group_mode: Option<String>,
    max_segment_cells: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGaleChurch {
    c: Option<f64>,
    s2: Option<f64>,
    priors: Option<RawPriors>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPriors {
    one_one: f64,
    one_zero: f64,
    zero_one: f64,
    two_one: f64,
    one_two: f64,
    two_two: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLexical {
    alpha: Option<f64>,
    indel_cost: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    tau: Option<f64>,
    upper: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEval {
    mode: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPaths {
    manifest: Option<PathBuf>,
    gold_dir: Option<PathBuf>,
    parses_dir: Option<PathBuf>,
    out: Option<PathBuf>,
}

pub fn parse_provider_kind(s: &str) -> Result<ProviderKind> {
    match s {
        "vector-file" => Ok(ProviderKind::VectorFile),
        "http-service" => Ok(ProviderKind::HttpService),
        "test-trigram" => Ok(ProviderKind::TestTrigram),
        other => Err(Error::Config(format!(
            "unknown provider {other:?} (expected vector-file, http-service or test-trigram)"
        ))),
    }
}

pub fn parse_group_mode(s: &str) -> Result<GroupMode> {
    match s {
        "mean" => Ok(GroupMode::Mean),
        "concat" => Ok(GroupMode::Concat),
        other => Err(Error::Config(format!("unknown group_mode {other:?} (expected mean or concat)"))),
    }
}

pub fn parse_grid(s: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
    match nums.as_deref() {
        Some(&[start, stop, step]) => {
            let grid = GridSpec { start, stop, step };
            grid.points().map_err(|e| Error::Usage(e.to_string()))?;
            Ok(grid)
        }
        _ => Err(Error::Usage(format!("grid must be start:stop:step, got {s:?}"))),
    }
}

impl PipelineConfig {
    /// Defaults, overlaid with `path` when given. Relative paths inside the
    /// file resolve against the file's directory.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = formats::read_text(path).map_err(|e| Error::Config(e.to_string()))?;
            let raw: RawConfig =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply(raw, path.parent().unwrap_or(Path::new("")))?;
        }
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = Self::default();
        cfg.apply(raw, Path::new(""))?;
        Ok(cfg)
    }

    fn apply(&mut self, raw: RawConfig, base: &Path) -> Result<()> {
        let p = raw.provider;
        if let Some(k) = p.kind {
            self.provider.kind = parse_provider_kind(&k)?;
        }
        set(&mut self.provider.dim, p.dim.map(Some));
        set(&mut self.provider.base_url, p.base_url.map(Some));
        set(&mut self.provider.vectors_dir, p.vectors_dir.map(|d| Some(base.join(d))));
        set(&mut self.provider.timeout_secs, p.timeout_secs);
        set(&mut self.provider.batch_size, p.batch_size);
        set(&mut self.provider.retries, p.retries);

        let h = raw.hybrid;
        set(&mut self.hybrid.band_width, h.band_width);
        set(&mut self.hybrid.anchor_threshold, h.anchor_threshold);
        set(&mut self.hybrid.max_group_complex, h.max_group_complex);
        set(&mut self.hybrid.max_group_simple, h.max_group_simple);
        set(&mut self.hybrid.skip_complex_cost, h.skip_complex_cost);
        set(&mut self.hybrid.skip_simple_cost, h.skip_simple_cost);
        set(&mut self.hybrid.size_penalty, h.size_penalty);
        set(&mut self.hybrid.max_segment_cells, h.max_segment_cells);
        if let Some(m) = h.group_mode {
            self.hybrid.group_mode = parse_group_mode(&m)?;
        }

        let g = raw.gale_church;
        set(&mut self.gale_church.c, g.c);
        set(&mut self.gale_church.s2, g.s2);
        if let Some(pr) = g.priors {
            self.gale_church.priors = ShapePriors {
                one_one: pr.one_one,
                one_zero: pr.one_zero,
                zero_one: pr.zero_one,
                two_one: pr.two_one,
                one_two: pr.one_two,
                two_two: pr.two_two,
            };
        }
        self.hybrid.length_model = self.gale_church;
        self.lexical.c = self.gale_church.c;
        self.lexical.s2 = self.gale_church.s2;

        set(&mut self.lexical.alpha, raw.lexical.alpha);
        set(&mut self.lexical.indel_cost, raw.lexical.indel_cost);

        set(&mut self.tau, raw.band.tau.map(Some));
        set(&mut self.upper, raw.band.upper);
        set(&mut self.grid.start, raw.grid.start);
        set(&mut self.grid.stop, raw.grid.stop);
        set(&mut self.grid.step, raw.grid.step);
        if let Some(m) = raw.eval.mode {
            self.mode = m.parse().map_err(|e: monoalign_core::Error| Error::Config(e.to_string()))?;
        }

        let rp = raw.paths;
        set(&mut self.paths.manifest, rp.manifest.map(|d| Some(base.join(d))));
        set(&mut self.paths.gold_dir, rp.gold_dir.map(|d| Some(base.join(d))));
        set(&mut self.paths.parses_dir, rp.parses_dir.map(|d| Some(base.join(d))));
        set(&mut self.paths.out, rp.out.map(|d| Some(base.join(d))));
        Ok(())
    }

    /// Checks every numeric field against its owning type.
    pub fn validate(&self) -> Result<()> {
        let cfg = |e: monoalign_core::Error| Error::Config(e.to_string());
        self.gale_church.validate().map_err(cfg)?;
        let priors = self.gale_church.priors;
        let sum = priors.one_one + priors.one_zero + priors.zero_one + priors.two_one + priors.one_two + priors.two_two;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("gale_church priors sum to {sum}, expected 1")));
        }
        self.lexical.validate().map_err(cfg)?;
        self.hybrid.validate().map_err(cfg)?;
        if let Some(tau) = self.tau {
            ThresholdBand::new(tau, self.upper).map_err(cfg)?;
        } else if !(self.upper > 0.0 && self.upper <= 1.0) {
            return Err(Error::Config(format!("upper bound {} outside (0, 1]", self.upper)));
        }
        self.grid.points().map_err(cfg)?;
        if self.provider.batch_size == 0 {
            return Err(Error::Config("provider batch_size must be positive".into()));
        }
        if !(self.provider.timeout_secs > 0.0 && self.provider.timeout_secs.is_finite()) {
            return Err(Error::Config("provider timeout_secs must be positive".into()));
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
