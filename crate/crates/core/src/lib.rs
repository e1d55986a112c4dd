//! Generates themed slide decks from a single topic word.
//!
//! A seed walk over a word web picks one word per slide, a weighted schedule
//! assigns a slide generator to each position, the generators fill their
//! templates from content sources, grammars and chart recipes, and a
//! validate-and-repair loop removes cross-slide conflicts. Decks export to
//! pptx, HTML or a canonical JSON manifest.

pub mod assemble;
pub mod chart;
pub mod cli;
pub mod conceptnet;
pub mod export;
pub mod generators;
pub mod grammar;
pub mod graph;
pub mod manifest;
pub mod model;
pub mod net;
pub mod rng;
pub mod schema;
pub mod seeds;
pub mod services;
pub mod sources;
