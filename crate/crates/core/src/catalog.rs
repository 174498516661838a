//! Compact state references:
//!
//! - `werner:d=3,phi=-0.5`
//! - `singlet`
//! - `mixdiag:file=mix.json`, a [`DiagonalMixture`] as JSON
//! - `file:state.json`, a matrix in the JSON matrix format

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};
use crate::states::{singlet, werner_state, BipartiteState, DiagonalMixture};
use crate::tensor::ComplexMatrix;

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Werner { d: usize, phi: f64 },
    Singlet,
    MixDiag { file: PathBuf },
    File { path: PathBuf },
}

impl StateSpec {
    /// Builds the state, reading any referenced file.
    pub fn resolve(&self) -> Result<BipartiteState> {
        match self {
            StateSpec::Werner { d, phi } => werner_state(*d, *phi),
            StateSpec::Singlet => Ok(singlet()),
            StateSpec::MixDiag { file } => load_json::<DiagonalMixture>(file)?.state(),
            StateSpec::File { path } => BipartiteState::new(load_json::<ComplexMatrix>(path)?),
        }
    }
}

/// Reads and deserializes a JSON file, distinguishing I/O from format errors.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_params(body: &str) -> Result<Vec<(&str, &str)>> {
    body.split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{kv}'")))
        })
        .collect()
}

fn parse_werner(body: &str) -> Result<StateSpec> {
    let (mut d, mut phi) = (None, None);
    for (k, v) in parse_params(body)? {
        match k {
            "d" => {
                d = Some(
                    v.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("d must be a positive integer, got '{v}'")))?,
                )
            }
            "phi" => {
                phi = Some(
                    v.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("phi must be a number, got '{v}'")))?,
                )
            }
            other => return Err(Error::Parse(format!("unknown werner parameter '{other}'"))),
        }
    }
    match (d, phi) {
        (Some(d), Some(phi)) => Ok(StateSpec::Werner { d, phi }),
        _ => Err(Error::Parse("werner needs both d and phi".into())),
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "singlet" if body.is_empty() => Ok(StateSpec::Singlet),
            "werner" => parse_werner(body),
            "mixdiag" => match parse_params(body)?.as_slice() {
                [("file", f)] => Ok(StateSpec::MixDiag { file: PathBuf::from(f) }),
                _ => Err(Error::Parse("mixdiag expects exactly file=<path>".into())),
            },
            "file" if !body.is_empty() => Ok(StateSpec::File {
                path: PathBuf::from(body),
            }),
            "file" => Err(Error::Parse("file: needs a path".into())),
            _ => Err(Error::Parse(format!(
                "unknown state spec '{s}' (expected werner:d=..,phi=.., singlet, mixdiag:file=.., file:..)"
            ))),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Werner { d, phi } => write!(f, "werner:d={d},phi={phi}"),
            StateSpec::Singlet => write!(f, "singlet"),
            StateSpec::MixDiag { file } => write!(f, "mixdiag:file={}", file.display()),
            StateSpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_werner_in_any_order() {
        let a: StateSpec = "werner:d=3,phi=-0.5".parse().unwrap();
        let b: StateSpec = "werner:phi=-0.5, d=3".parse().unwrap();
        assert_eq!(a, StateSpec::Werner { d: 3, phi: -0.5 });
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "werner:d=3,phi=-0.5");
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "werner:d=3",
            "werner:d=x,phi=0",
            "werner:d=3,phi=0,q=1",
            "werner:d=3;phi=0",
            "singlet:x",
            "file:",
            "mixdiag:path=a",
            "isotropic:d=3",
            "",
        ] {
            assert!(matches!(bad.parse::<StateSpec>(), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn singlet_resolves() {
        let rho = "singlet".parse::<StateSpec>().unwrap().resolve().unwrap();
        assert_eq!(rho, singlet());
    }

    #[test]
    fn werner_out_of_range_fails_on_resolve() {
        let spec: StateSpec = "werner:d=3,phi=1.5".parse().unwrap();
        assert!(matches!(spec.resolve(), Err(Error::PhiOutOfRange(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        let spec: StateSpec = "file:/nonexistent/state.json".parse().unwrap();
        assert!(matches!(spec.resolve(), Err(Error::Io { .. })));
    }
}
