//! The flow definition together with the catalogs it was validated against.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::flow::{load_flow, FlowDefinition, FlowError};
use crate::localization::{Catalogs, LocalizationError};

pub(crate) const DEFAULT_FLOW: &str = include_str!("../config/flow.toml");
pub(crate) const DEFAULT_CATALOG_PL: &str = include_str!("../config/catalog/pl.catalog");
pub(crate) const DEFAULT_CATALOG_UK: &str = include_str!("../config/catalog/uk.catalog");
pub(crate) const DEFAULT_CATALOG_EN: &str = include_str!("../config/catalog/en.catalog");

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub flow: FlowDefinition,
    pub catalogs: Catalogs,
}

impl Bundle {
    /// The flow and catalogs compiled into the binary.
    pub fn default_bundle() -> Result<Self, BundleError> {
        Self::from_sources(DEFAULT_FLOW, DEFAULT_CATALOG_PL, DEFAULT_CATALOG_UK, DEFAULT_CATALOG_EN)
    }

    pub fn from_sources(flow: &str, pl: &str, uk: &str, en: &str) -> Result<Self, BundleError> {
        let catalogs = Catalogs::parse(pl, uk, en)?;
        let flow = load_flow(flow, &catalogs)?;
        Ok(Self { flow, catalogs })
    }

    /// Reads `flow.toml` and `catalog/{pl,uk,en}.catalog` from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, BundleError> {
        let read = |rel: &str| {
            let path = dir.join(rel);
            std::fs::read_to_string(&path).map_err(|source| BundleError::Io { path, source })
        };
        Self::from_sources(
            &read("flow.toml")?,
            &read("catalog/pl.catalog")?,
            &read("catalog/uk.catalog")?,
            &read("catalog/en.catalog")?,
        )
    }
}
