//! Family and skew-map definition files (TOML).

use std::path::Path;

use circlock_core::circle_map::FamilyHarmonic;
use circlock_core::skew::SkewHarmonic;
use circlock_core::{CircleFamily, SkewMap, TPoly};
use serde::Deserialize;

use crate::CliError;

/// ```toml
/// label = "arnold"
/// winding = 1
/// constant = []          # optional, t-polynomial coefficients
/// [[harmonics]]
/// j = 1
/// a = []                 # coefficients of 1, t, t², …
/// b = [0.1]
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDef {
    pub label: Option<String>,
    pub winding: u32,
    #[serde(default)]
    pub constant: Vec<f64>,
    #[serde(default)]
    pub harmonics: Vec<HarmonicDef>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicDef {
    pub j: u32,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

/// ```toml
/// label = "arnold fiber"
/// m = 2
/// [[harmonics]]
/// jx = 0
/// jy = 1
/// b = [0.05]
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkewDef {
    pub label: Option<String>,
    pub m: u32,
    #[serde(default)]
    pub constant: Vec<f64>,
    #[serde(default)]
    pub harmonics: Vec<SkewHarmonicDef>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkewHarmonicDef {
    pub jx: i64,
    pub jy: i64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

/// Raw bytes of a definition file plus its parsed form.
pub struct Loaded<T> {
    pub bytes: Vec<u8>,
    pub def: T,
}

pub fn read(path: &Path) -> Result<(Vec<u8>, String), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| CliError::Input(format!("{}: not UTF-8: {e}", path.display())))?;
    Ok((bytes, text))
}

/// Parse TOML, reporting failures as `path:line:col: message`.
pub fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| {
        let (line, col) = e
            .span()
            .map(|s| line_col(text, s.start))
            .unwrap_or((1, 1));
        CliError::Input(format!(
            "{}:{line}:{col}: {}",
            path.display(),
            e.message()
        ))
    })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Loaded<T>, CliError> {
    let (bytes, text) = read(path)?;
    let def = parse(path, &text)?;
    Ok(Loaded {
        bytes,
        def,
    })
}

fn default_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "family".into())
}

pub fn load_family(path: &Path) -> Result<(Loaded<FamilyDef>, CircleFamily), CliError> {
    let l: Loaded<FamilyDef> = load(path)?;
    let d = &l.def;
    let fam = CircleFamily::new(
        d.winding,
        TPoly(d.constant.clone()),
        d.harmonics
            .iter()
            .map(|h| FamilyHarmonic {
                j: h.j,
                a: TPoly(h.a.clone()),
                b: TPoly(h.b.clone()),
            })
            .collect(),
        d.label.clone().unwrap_or_else(|| default_label(path)),
    )?;
    Ok((l, fam))
}

pub fn load_skew(path: &Path) -> Result<(Loaded<SkewDef>, SkewMap), CliError> {
    let l: Loaded<SkewDef> = load(path)?;
    let d = &l.def;
    let map = SkewMap::new(
        d.m,
        TPoly(d.constant.clone()),
        d.harmonics
            .iter()
            .map(|h| SkewHarmonic {
                jx: h.jx,
                jy: h.jy,
                a: TPoly(h.a.clone()),
                b: TPoly(h.b.clone()),
            })
            .collect(),
        d.label.clone().unwrap_or_else(|| default_label(path)),
    )?;
    Ok((l, map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_and_column() {
        let text = "a = 1\nb = [\nwinding = x\n";
        assert_eq!(line_col(text, 0), (1, 1));
        assert_eq!(line_col(text, 6), (2, 1));
        assert_eq!(line_col(text, 20), (3, 9));
    }

    #[test]
    fn parse_error_has_position() {
        let e = parse::<FamilyDef>(Path::new("f.toml"), "winding = 1\nharmonics = 3\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.starts_with("f.toml:2:"), "{msg}");
    }

    #[test]
    fn family_roundtrip() {
        let d: FamilyDef = parse(
            Path::new("x.toml"),
            "label = \"a\"\nwinding = 1\n[[harmonics]]\nj = 1\nb = [0.1]\n",
        )
        .unwrap();
        assert_eq!(d.winding, 1);
        assert_eq!(d.harmonics[0].b, vec![0.1]);
        assert!(d.harmonics[0].a.is_empty());
    }
}
