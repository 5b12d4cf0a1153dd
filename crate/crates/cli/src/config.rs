//! Optional TOML config file. Each subcommand has its own table whose keys
//! are the long flag names, e.g.
//!
//! ```toml
//! [regress]
//! models = "poly:0..3"
//! preset = "fig4"
//! sigma-w = 10.0
//! ```
//!
//! Flags given on the command line take precedence.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

use crate::{CoinArgs, ContingencyArgs, GenerateArgs, RegressArgs};

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub regress: RegressArgs,
    pub coin: CoinArgs,
    pub contingency: ContingencyArgs,
    pub generate: GenerateArgs,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Fills every `None` field of `flags` from `file`.
macro_rules! overlay {
    ($flags:expr, $file:expr, [$($field:ident),* $(,)?]) => {{
        let (mut flags, file) = ($flags, $file);
        $(
            if flags.$field.is_none() {
                flags.$field = file.$field;
            }
        )*
        flags
    }};
}

impl RegressArgs {
    pub fn overlay(self, file: Self) -> Self {
        overlay!(self, file, [models, preset, data, sigma, sigma_w, seed, out, format])
    }
}

impl CoinArgs {
    pub fn overlay(self, file: Self) -> Self {
        overlay!(self, file, [bits, n, k, preset, seed, prior_fair, trajectory])
    }
}

impl ContingencyArgs {
    pub fn overlay(self, file: Self) -> Self {
        overlay!(self, file, [dataset, table, method])
    }
}

impl GenerateArgs {
    pub fn overlay(self, file: Self) -> Self {
        overlay!(
            self,
            file,
            [preset, family, weights, noise, x_min, x_max, points, sampling, ordering, seed, out]
        )
    }
}
