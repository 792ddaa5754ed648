//! Tag recommendation over folksonomies with association-confidence
//! re-ranking.
//!
//! The pipeline: parse user-item-tag assignments into a [`corpus::Corpus`],
//! optionally reduce it to a p-core and split it, fit a base recommender from
//! [`recommend`], re-rank its candidates with [`foldcons`] and measure the
//! result with [`evaluation`].

pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod foldcons;
pub mod graph;
pub mod ids;
pub mod recommend;
pub mod snapshot;
pub mod synthetic;

pub use error::{Error, Result};
