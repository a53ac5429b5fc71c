//! Climate knowledge graph toolkit: NOAA daily summaries mapped to RDF,
//! queried through a small SPARQL engine and summarised into temperature
//! and weather-type analyses.

pub mod analytics;
pub mod ca;
pub mod cli;
pub mod endpoint;
pub mod noaa;
pub mod rdf;
pub mod sparql;
pub mod store;
