//! Deterministic evaluation toolkit for Pashto (and general Arabic-script
//! extension) ASR output.
//!
//! The crate is organized around the evaluation pipeline:
//!
//! * [`inventory`] — the character inventories everything else shares
//!   (Pashto-unique code points, stratification classes, stripped punctuation).
//! * [`textnorm`] — the deterministic text-normalization pipeline (NFC,
//!   kashida removal, punctuation stripping, whitespace collapse).
//! * [`corpus`] — transcript manifest ingestion, validation, empty-reference
//!   filtering, and system pairing.
//! * [`metrics`] — edit-distance alignment and WER/CER at utterance and
//!   corpus level.
//! * [`script`] — the five-way script-fidelity audit of hypothesis text.
//! * [`strata`] — character-class error stratification.
//! * [`stats`] — seeded bootstrap confidence intervals and paired
//!   significance tests.
//! * [`diagnostics`] — decoder-failure detection (repetition loops,
//!   language-switched loops, near-empty output) and real-time-factor
//!   aggregation.
//! * [`report`] — the end-to-end pipeline and table/score-file rendering.
//!
//! Everything is pure and deterministic: identical inputs (manifest bytes,
//! configuration, seed) produce byte-identical outputs.

pub mod config;
pub mod corpus;
pub mod diagnostics;
pub mod fixtures;
pub mod inventory;
pub mod metrics;
pub mod report;
pub mod script;
pub mod stats;
pub mod strata;
pub mod textnorm;
