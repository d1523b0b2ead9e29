//! Named presets, stored as config documents under `presets/`.

use crate::{CliError, RunConfig};

const PRESETS: [(&str, &str); 7] = [
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4_top", include_str!("../presets/fig4_top.toml")),
    ("fig4_bottom", include_str!("../presets/fig4_bottom.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// The preset's TOML text as shipped.
pub fn source(name: &str) -> Result<&'static str, CliError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset {name:?}; valid presets: {}",
                names().join(", ")
            ))
        })
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    RunConfig::from_toml(source(name)?)
}
