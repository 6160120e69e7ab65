//! Survey chatbot core: catalogs, scoring, the dialogue engine, record storage
//! and the summary statistics used in reports.

pub mod analytics;
pub mod flow;
pub mod localization;
pub mod message;
pub mod persistence;
pub mod scoring;

mod bundle;

pub use bundle::{Bundle, BundleError};
