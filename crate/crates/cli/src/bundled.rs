//! Example documents shipped with the binary.

use crate::doc::CrystalDocument;
use crate::CliError;

macro_rules! bundle {
    ($($name:literal),* $(,)?) => {
        /// (name, JSON text) for every bundled document.
        pub const DOCUMENTS: &[(&str, &str)] = &[$(($name, include_str!(concat!("../data/", $name, ".json")))),*];
    };
}

bundle!(
    "unit",
    "twist",
    "ordinary",
    "supersingular",
    "non_exact",
    "unit_line",
    "unit_torus",
    "p_divisible_line",
    "rank_three_line",
    "rank_three_plane",
    "lifting_torus",
);

pub fn text(name: &str) -> Option<&'static str> {
    DOCUMENTS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load(name: &str) -> Result<CrystalDocument, CliError> {
    let t = text(name).ok_or_else(|| CliError::input(format!("no bundled document named {name:?}")))?;
    CrystalDocument::parse(t).map_err(|e| CliError::input(format!("bundled {name}: {e}")))
}

/// A document argument: a bundled name or a path.
pub fn resolve(arg: &str) -> Result<CrystalDocument, CliError> {
    match text(arg) {
        Some(_) => load(arg),
        None => CrystalDocument::load(std::path::Path::new(arg)),
    }
}
