//! Embedding providers backed by vector files or an HTTP service.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Duration;

use monoalign_core::embed::ProviderKind;
use monoalign_core::{DocumentPair, EmbeddingProvider, EmbeddingVector, Side, TrigramEmbedder};
use serde::{Deserialize, Serialize};

use crate::config::ProviderConfig;
use crate::error::{Error, Result};
use crate::formats;

type CoreResult<T> = monoalign_core::Result<T>;

pub const TIMEOUT_ENV: &str = "MONOALIGN_HTTP_TIMEOUT_SECS";

/// Reads precomputed `<dir>/<pair_id>.<side>.vec` files. Only stored
/// sentences can be looked up, so group text cannot be embedded.
#[derive(Debug, Clone)]
pub struct VectorFileProvider {
    dir: PathBuf,
    dim: usize,
}

impl VectorFileProvider {
    /// `dim` defaults to the header of the first vector file in `dir`.
    pub fn open(dir: impl Into<PathBuf>, dim: Option<usize>) -> Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(Error::Config(format!("vectors directory {} does not exist", dir.display())));
        }
        let dim = match dim {
            Some(d) => d,
            None => {
                let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)
                    .map_err(|e| Error::io(&dir, e))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "vec"))
                    .collect();
                entries.sort();
                let first = entries
                    .first()
                    .ok_or_else(|| Error::Config(format!("no .vec files in {}", dir.display())))?;
                formats::read_vector_header(first)?.0
            }
        };
        Ok(Self { dir, dim })
    }

    pub fn path(&self, pair_id: &str, side: Side) -> PathBuf {
        self.dir.join(formats::vector_file_name(pair_id, side))
    }
}

impl EmbeddingProvider for VectorFileProvider {
    fn kind(&self) -> ProviderKind {
        ProviderKind::VectorFile
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn supports_text_groups(&self) -> bool {
        false
    }

    fn embed_texts(&self, _texts: &[&str]) -> CoreResult<Vec<EmbeddingVector>> {
        Err(monoalign_core::Error::Unsupported("vector files only hold stored sentences"))
    }

    fn embed_document(&self, pair: &DocumentPair, side: Side) -> CoreResult<Vec<EmbeddingVector>> {
        let path = self.path(pair.pair_id(), side);
        let text = formats::read_text(&path).map_err(|e| monoalign_core::Error::Provider(e.to_string()))?;
        let vectors =
            formats::parse_vector_file(&path, &text).map_err(|e| monoalign_core::Error::Provider(e.to_string()))?;
        let expected = pair.side(side).len();
        if vectors.len() != expected {
            return Err(monoalign_core::Error::CountMismatch { expected, found: vectors.len() });
        }
        Ok(vectors)
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

/// Client for a service answering `POST <base>/embed`.
#[derive(Debug)]
pub struct HttpProvider {
    url: String,
    agent: ureq::Agent,
    batch_size: usize,
    retries: u32,
    backoff: Duration,
    dim: OnceLock<usize>,
}

impl HttpProvider {
    pub fn new(base_url: &str, dim: Option<usize>, timeout: Duration, batch_size: usize, retries: u32) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::Config("provider batch_size must be positive".into()));
        }
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build();
        let dim_cell = OnceLock::new();
        if let Some(d) = dim {
            dim_cell.set(d).expect("fresh cell");
        }
        Ok(Self {
            url: format!("{}/embed", base_url.trim_end_matches('/')),
            agent: agent.into(),
            batch_size,
            retries,
            backoff: Duration::from_millis(200),
            dim: dim_cell,
        })
    }

    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    fn post(&self, texts: &[&str]) -> std::result::Result<Vec<Vec<f64>>, String> {
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(EmbedRequest { texts })
            .map_err(|e| format!("{}: {e}", self.url))?;
        let status = response.status();
        if status != 200 {
            return Err(format!("{}: HTTP {status}", self.url));
        }
        let body: EmbedResponse =
            response.body_mut().read_json().map_err(|e| format!("{}: malformed response: {e}", self.url))?;
        if body.embeddings.len() != texts.len() {
            return Err(format!(
                "{}: {} embeddings returned for {} texts",
                self.url,
                body.embeddings.len(),
                texts.len()
            ));
        }
        Ok(body.embeddings)
    }

    fn post_with_retries(&self, texts: &[&str]) -> CoreResult<Vec<Vec<f64>>> {
        let mut attempt = 0;
        loop {
            match self.post(texts) {
                Ok(rows) => return Ok(rows),
                Err(e) if attempt >= self.retries => {
                    return Err(monoalign_core::Error::Provider(format!("{e} (after {} attempts)", attempt + 1)))
                }
                Err(_) => {
                    std::thread::sleep(self.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
            }
        }
    }
}

impl EmbeddingProvider for HttpProvider {
    fn kind(&self) -> ProviderKind {
        ProviderKind::HttpService
    }

    /// Configured dimension, or the one observed in the first response.
    fn dim(&self) -> usize {
        self.dim.get().copied().unwrap_or(0)
    }

    fn supports_text_groups(&self) -> bool {
        true
    }

    fn embed_texts(&self, texts: &[&str]) -> CoreResult<Vec<EmbeddingVector>> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.batch_size) {
            for row in self.post_with_retries(batch)? {
                let dim = *self.dim.get_or_init(|| row.len());
                if row.len() != dim {
                    return Err(monoalign_core::Error::DimensionMismatch { expected: dim, found: row.len() });
                }
                out.push(EmbeddingVector::new(row)?);
            }
        }
        Ok(out)
    }
}

/// A provider chosen at run time.
#[derive(Debug)]
pub enum Provider {
    Trigram(TrigramEmbedder),
    VectorFile(VectorFileProvider),
    Http(HttpProvider),
}

impl Provider {
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self> {
        match cfg.kind {
            ProviderKind::TestTrigram => {
                let dim = cfg.dim.unwrap_or(TrigramEmbedder::DEFAULT_DIM);
                TrigramEmbedder::new(dim).map(Provider::Trigram).map_err(|e| Error::Config(e.to_string()))
            }
            ProviderKind::VectorFile => {
                let dir = cfg
                    .vectors_dir
                    .as_ref()
                    .ok_or_else(|| Error::Config("vector-file provider needs a vectors directory".into()))?;
                VectorFileProvider::open(dir, cfg.dim).map(Provider::VectorFile)
            }
            ProviderKind::HttpService => {
                let url = cfg
                    .base_url
                    .as_deref()
                    .ok_or_else(|| Error::Config("http-service provider needs base_url".into()))?;
                let timeout = timeout_override()?.unwrap_or(cfg.timeout_secs);
                HttpProvider::new(url, cfg.dim, Duration::from_secs_f64(timeout), cfg.batch_size, cfg.retries)
                    .map(Provider::Http)
            }
        }
    }

    fn inner(&self) -> &(dyn EmbeddingProvider + Send + Sync) {
        match self {
            Provider::Trigram(p) => p,
            Provider::VectorFile(p) => p,
            Provider::Http(p) => p,
        }
    }
}

fn timeout_override() -> Result<Option<f64>> {
    match std::env::var(TIMEOUT_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|s| s.is_finite() && *s > 0.0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{TIMEOUT_ENV} must be a positive number of seconds, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

impl EmbeddingProvider for Provider {
    fn kind(&self) -> ProviderKind {
        self.inner().kind()
    }

    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn supports_text_groups(&self) -> bool {
        self.inner().supports_text_groups()
    }

    fn embed_texts(&self, texts: &[&str]) -> CoreResult<Vec<EmbeddingVector>> {
        self.inner().embed_texts(texts)
    }

    fn embed_document(&self, pair: &DocumentPair, side: Side) -> CoreResult<Vec<EmbeddingVector>> {
        self.inner().embed_document(pair, side)
    }
}
