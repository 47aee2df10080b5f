//! Seizure-frequency extraction toolkit.
//!
//! * [`label`]: the structured label language and normalisation to
//!   seizures per month.
//! * [`binning`]: ten-way purist and four-way pragmatic categories.
//! * [`template`]: label-aware description templates and placeholder fill.
//! * [`pipeline`]: letter drafting and multi-pass teacher verification.
//! * [`codec`]: parsers for the four model output formats.
//! * [`metrics`]: confusion matrices, classification reports, aggregation.
//! * [`io`], [`config`] and [`commands`]: JSONL corpora and the workflows
//!   behind the `seizure-freq` binary.

pub mod binning;
pub mod codec;
pub mod commands;
pub mod config;
pub mod io;
pub mod label;
pub mod metrics;
pub mod pipeline;
pub mod template;

pub use binning::{bin_pragmatic, bin_purist, coarsen, Category, PragmaticClass, PuristClass};
pub use codec::{check_evidence, to_categories, OutputFormat, Prediction};
pub use label::{format_label, normalize, parse_label, FrequencyLabel, NormConfig, NormalizedFrequency};
pub use metrics::{class_report, confusion, ClassReport, ConfusionMatrix, Scored};
pub use template::{expand, expand_corpus, fill_placeholders, DescriptionPair, DescriptionTemplate, SyntheticIdentity};
