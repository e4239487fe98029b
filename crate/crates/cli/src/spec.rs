//! Sweep specifications: parameter ranges read from a JSON file and/or flags.

use std::path::Path;

use serde::Deserialize;

use crate::table::Format;
use crate::CliError;

/// A parameter axis: an inclusive linear range or an explicit list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RangeRepr")]
pub enum Range {
    Linear { start: f64, stop: f64, count: usize },
    List(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RangeRepr {
    Single(f64),
    List(Vec<f64>),
    Text(String),
    Linear { start: f64, stop: f64, count: usize },
}

impl TryFrom<RangeRepr> for Range {
    type Error = String;

    fn try_from(repr: RangeRepr) -> Result<Self, String> {
        let range = match repr {
            RangeRepr::Single(v) => Range::List(vec![v]),
            RangeRepr::List(v) => Range::List(v),
            RangeRepr::Text(s) => return s.parse(),
            RangeRepr::Linear { start, stop, count } => Range::Linear { start, stop, count },
        };
        range.validate()?;
        Ok(range)
    }
}

impl std::str::FromStr for Range {
    type Err = String;

    /// Accepts `a:b:n`, a comma-separated list, or a single number.
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number in range `{s}`"))
        };
        let range = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("range `{s}` must have the form start:stop:count"));
            }
            let count = parts[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("count `{}` in range `{s}` is not a non-negative integer", parts[2]))?;
            Range::Linear {
                start: num(parts[0])?,
                stop: num(parts[1])?,
                count,
            }
        } else {
            Range::List(s.split(',').map(num).collect::<Result<_, _>>()?)
        };
        range.validate()?;
        Ok(range)
    }
}

impl Range {
    pub fn single(v: f64) -> Self {
        Range::List(vec![v])
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            Range::Linear { start, stop, count } => {
                if *count == 0 {
                    return Err("range count must be at least 1".into());
                }
                if !(start.is_finite() && stop.is_finite()) {
                    return Err("range bounds must be finite".into());
                }
                if start > stop {
                    return Err(format!("range start {start} exceeds stop {stop}"));
                }
            }
            Range::List(values) => {
                if values.is_empty() {
                    return Err("range list is empty".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err("range values must be finite".into());
                }
            }
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Range::List(v) => v.clone(),
            Range::Linear { start, count: 1, .. } => vec![*start],
            Range::Linear { start, stop, count } => {
                let step = (stop - start) / (*count - 1) as f64;
                (0..*count)
                    .map(|i| if i + 1 == *count { *stop } else { start + step * i as f64 })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    RemotePrep,
    Teleport,
    OracleCheck,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::RemotePrep => "remote-prep",
            Protocol::Teleport => "teleport",
            Protocol::OracleCheck => "oracle-check",
        }
    }
}

/// Squeezing of the twin beam, given either directly or as mean photon number.
#[derive(Debug, Clone, PartialEq)]
pub enum Gain {
    R(Range),
    N(Range),
}

/// Everything a run needs. Fields left `None` fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub protocol: Option<Protocol>,
    pub r: Option<Range>,
    #[serde(rename = "N")]
    pub n: Option<Range>,
    pub eta: Option<Range>,
    pub x: Option<Range>,
    pub gamma_t: Option<Range>,
    #[serde(rename = "M")]
    pub m: Option<Range>,
    pub lambda: Option<Range>,
    pub cutoff: Option<usize>,
    pub nodes: Option<usize>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub mc_samples: Option<usize>,
    pub z_re: Option<f64>,
    pub z_im: Option<f64>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid spec: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read spec {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies `other` on top of `self`. Setting `r` clears `N` and vice versa.
    pub fn overridden_by(mut self, other: SweepSpec) -> Self {
        if other.r.is_some() {
            self.n = None;
        }
        if other.n.is_some() {
            self.r = None;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(protocol, r, n, eta, x, gamma_t, m, lambda, cutoff, nodes, format, seed, mc_samples, z_re, z_im);
        self
    }

    pub fn gain(&self) -> Result<Gain, CliError> {
        match (&self.r, &self.n) {
            (Some(r), None) => Ok(Gain::R(r.clone())),
            (None, Some(n)) => Ok(Gain::N(n.clone())),
            (Some(_), Some(_)) => Err(CliError::Usage("give exactly one of r or N, not both".into())),
            (None, None) => Err(CliError::Usage("one of r or N is required".into())),
        }
    }

    pub fn check_protocol(&self, expected: Protocol) -> Result<(), CliError> {
        match self.protocol {
            Some(p) if p != expected => Err(CliError::Usage(format!(
                "spec is for `{}` but the `{}` command was run",
                p.name(),
                expected.name()
            ))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_colon_ranges() {
        let r: Range = "0:1:5".parse().unwrap();
        assert_eq!(r.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let single: Range = "0.3:0.3:1".parse().unwrap();
        assert_eq!(single.values(), vec![0.3]);
        let list: Range = "0.4, 0.5,0.6".parse().unwrap();
        assert_eq!(list.values(), vec![0.4, 0.5, 0.6]);
        assert_eq!("-2".parse::<Range>().unwrap().values(), vec![-2.0]);
    }

    #[test]
    fn rejects_bad_ranges() {
        for bad in ["1:0:3", "0:1:0", "0:1", "a:b:2", "0:1:2.5", "", "1,,2", "nan"] {
            assert!(bad.parse::<Range>().is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn last_point_is_exact() {
        let r = Range::Linear { start: 0.1, stop: 0.7, count: 7 };
        assert_eq!(*r.values().last().unwrap(), 0.7);
    }

    #[test]
    fn spec_accepts_every_range_form() {
        let spec = SweepSpec::from_json(
            r#"{"protocol": "teleport", "r": {"start": 0, "stop": 1, "count": 3},
                "eta": [0.7, 1.0], "gamma_t": "0:1:2", "M": 0.5, "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(spec.protocol, Some(Protocol::Teleport));
        assert_eq!(spec.r.unwrap().values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(spec.eta.unwrap().values(), vec![0.7, 1.0]);
        assert_eq!(spec.gamma_t.unwrap().values(), vec![0.0, 1.0]);
        assert_eq!(spec.m.unwrap().values(), vec![0.5]);
        assert_eq!(spec.seed, Some(7));
    }

    #[test]
    fn spec_rejects_invalid_input() {
        assert!(SweepSpec::from_json(r#"{"r": {"start": 1, "stop": 0, "count": 3}}"#).is_err());
        assert!(SweepSpec::from_json(r#"{"r": {"start": 0, "stop": 1, "count": 0}}"#).is_err());
        assert!(SweepSpec::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = SweepSpec::from_json(r#"{"N": 1, "eta": 0.8, "x": 0.5}"#).unwrap();
        let flags = SweepSpec {
            r: Some(Range::single(0.3)),
            x: Some(Range::single(-1.0)),
            ..Default::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.gain().unwrap(), Gain::R(Range::single(0.3)));
        assert_eq!(merged.x, Some(Range::single(-1.0)));
        assert_eq!(merged.eta, Some(Range::single(0.8)));
    }

    #[test]
    fn gain_needs_exactly_one() {
        let both = SweepSpec {
            r: Some(Range::single(0.1)),
            n: Some(Range::single(1.0)),
            ..Default::default()
        };
        assert!(both.gain().is_err());
        assert!(SweepSpec::default().gain().is_err());
    }
}
