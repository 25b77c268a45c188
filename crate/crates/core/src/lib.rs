//! Sentence-level alignment of comparable complex/simple document pairs.
//!
//! This crate holds the pure algorithmic part of `monoalign` and only needs
//! `alloc`: corpus statistics, the embedding contract and cosine structures,
//! the length-based and lexical baseline aligners, the anchor-and-shortest-path
//! hybrid aligner, threshold-band filtering with strict/lax evaluation, and the
//! structural quality metrics. File formats, providers that talk to the outside
//! world and the command line live in the `monoalign` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod bead;
pub mod corpus;
pub mod dp;
pub mod embed;
mod error;
pub mod eval;
pub mod hybrid;
pub mod quality;

pub use bead::{AlignmentSet, Bead};
pub use corpus::{corpus_stats, quartiles, CorpusStats, DocumentPair, SentenceRecord, Side};
pub use embed::{
    cosine, group_vector, similarity_matrix, EmbeddingProvider, EmbeddingVector, GroupMode,
    ProviderKind, SimilarityMatrix, TrigramEmbedder,
};
pub use error::{Error, Result};
