//! File formats, dataset ingestion and experiment drivers around
//! [`weightwalk_core`].

pub mod config;
pub mod datasets;
pub mod edgelist;
pub mod export;
pub mod fsutil;
pub mod plot;
pub mod sweep;
pub mod table2;

pub use weightwalk_core as core;
