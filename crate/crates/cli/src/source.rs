//! Where a channel comes from: a JSON file or a built-in family.

use std::fs;

use covert_core::channel::families;
use covert_core::{parse_channel, Channel};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Bsc(f64),
    /// BSC on `{-1, 1}` with an off input whose output is uniform.
    BscOff(f64),
    Kary(usize, f64),
    Ternary,
}

impl Family {
    /// `bsc:P`, `bsc-off:P`, `kary:K,P` or `ternary`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || {
            CliError::Usage(format!(
                "unknown family {spec:?}; expected bsc:P, bsc-off:P, kary:K,P or ternary"
            ))
        };
        let real = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        match name.trim() {
            "bsc" => Ok(Family::Bsc(real(args)?)),
            "bsc-off" => Ok(Family::BscOff(real(args)?)),
            "kary" => {
                let (k, p) = args.split_once(',').ok_or_else(bad)?;
                let k = k.trim().parse::<usize>().map_err(|_| bad())?;
                Ok(Family::Kary(k, real(p)?))
            }
            "ternary" if args.is_empty() => Ok(Family::Ternary),
            _ => Err(bad()),
        }
    }

    pub fn build(&self) -> Result<Channel> {
        Ok(match *self {
            Family::Bsc(p) => families::bsc(p)?,
            Family::BscOff(p) => families::bsc_with_off(p)?,
            Family::Kary(k, p) => families::kary_uniform_error(k, p)?,
            Family::Ternary => families::ternary_cyclic(),
        })
    }
}

pub fn read_channel(path: &str) -> Result<Channel> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_string(),
        source,
    })?;
    Ok(parse_channel(&text)?)
}

/// Exactly one of `file` and `family` must be given.
pub fn load(file: Option<&str>, family: Option<&str>) -> Result<Channel> {
    match (file, family) {
        (Some(path), None) => read_channel(path),
        (None, Some(spec)) => Family::parse(spec)?.build(),
        _ => Err(CliError::Usage(
            "give exactly one of --channel and --family".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_specs() {
        assert_eq!(Family::parse("bsc:0.11").unwrap(), Family::Bsc(0.11));
        assert_eq!(Family::parse("kary:3, 0.2").unwrap(), Family::Kary(3, 0.2));
        assert_eq!(Family::parse("bsc-off:0.1").unwrap(), Family::BscOff(0.1));
        assert_eq!(Family::parse("ternary").unwrap(), Family::Ternary);
        assert!(Family::parse("bsc").is_err());
        assert!(Family::parse("kary:3").is_err());
        assert!(Family::parse("bec:0.1").is_err());
    }

    #[test]
    fn needs_one_source() {
        assert!(load(None, None).is_err());
        assert!(load(Some("x.json"), Some("bsc:0.1")).is_err());
        assert_eq!(load(None, Some("bsc:0.1")).unwrap().num_inputs(), 2);
    }
}
