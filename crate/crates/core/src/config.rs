//! Flat `key=value` configuration files.
//!
//! ```text
//! # running example
//! dv1 = 3
//! dc1 = 6
//! lambda1 = 0.1
//! dv2 = 2     # dv2 = 0 drops the relay layer
//! ```
//!
//! Unset keys fall back to the running example, see
//! [`BilayerConfig::running_example`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::code_model::{BilayerConfig, LayerParams};
use crate::error::{Error, Result};

pub const CONFIG_KEYS: [&str; 9] = [
    "dv1", "dc1", "lambda1", "dv2", "dc2", "lambda2", "eps_sd", "eps_sr", "eps_rd",
];

/// Splits `text` into `key=value` pairs. Everything after `#` on a line is a
/// comment, whitespace around keys and values is ignored, and later
/// occurrences of a key win.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: n + 1,
            message: format!("expected key=value, got `{line}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: n + 1,
                message: "empty key".into(),
            });
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// A partially specified [`BilayerConfig`]. Layers of sources (file, flags)
/// are combined with [`RawConfig::merge`] and then resolved against the
/// defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    pub dv1: Option<usize>,
    pub dc1: Option<usize>,
    pub lambda1: Option<f64>,
    pub dv2: Option<usize>,
    pub dc2: Option<usize>,
    pub lambda2: Option<f64>,
    pub eps_sd: Option<f64>,
    pub eps_sr: Option<f64>,
    pub eps_rd: Option<f64>,
}

fn parse_field<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|_| Error::Parse {
            line: 0,
            message: format!("bad value `{v}` for `{key}`"),
        }),
    }
}

impl RawConfig {
    /// Reads the config keys out of a parsed map. Unknown keys are rejected
    /// when `strict` is set and ignored otherwise.
    pub fn from_map(map: &BTreeMap<String, String>, strict: bool) -> Result<Self> {
        if strict {
            if let Some(k) = map.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("unknown key `{k}`"),
                });
            }
        }
        Ok(RawConfig {
            dv1: parse_field(map, "dv1")?,
            dc1: parse_field(map, "dc1")?,
            lambda1: parse_field(map, "lambda1")?,
            dv2: parse_field(map, "dv2")?,
            dc2: parse_field(map, "dc2")?,
            lambda2: parse_field(map, "lambda2")?,
            eps_sd: parse_field(map, "eps_sd")?,
            eps_sr: parse_field(map, "eps_sr")?,
            eps_rd: parse_field(map, "eps_rd")?,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&parse_key_values(text)?, true)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: &RawConfig) -> RawConfig {
        RawConfig {
            dv1: over.dv1.or(self.dv1),
            dc1: over.dc1.or(self.dc1),
            lambda1: over.lambda1.or(self.lambda1),
            dv2: over.dv2.or(self.dv2),
            dc2: over.dc2.or(self.dc2),
            lambda2: over.lambda2.or(self.lambda2),
            eps_sd: over.eps_sd.or(self.eps_sd),
            eps_sr: over.eps_sr.or(self.eps_sr),
            eps_rd: over.eps_rd.or(self.eps_rd),
        }
    }

    pub fn resolve(&self) -> Result<BilayerConfig> {
        let d = BilayerConfig::running_example();
        let layer1 = LayerParams::new(
            self.dv1.unwrap_or(d.layer1.dv()),
            self.dc1.unwrap_or(d.layer1.dc()),
            self.lambda1.unwrap_or(d.layer1.lambda()),
        )?;
        let dv2 = self.dv2.unwrap_or(d.layer2.dv());
        let dc2 = self.dc2.unwrap_or(d.layer2.dc());
        let lambda2 = self.lambda2.unwrap_or(d.layer2.lambda());
        let layer2 = if dv2 == 0 {
            LayerParams::inactive(dc2, lambda2)?
        } else {
            LayerParams::new(dv2, dc2, lambda2)?
        };
        BilayerConfig::with_relay_links(
            layer1,
            layer2,
            self.eps_sd.unwrap_or(d.eps_sd),
            self.eps_sr.unwrap_or(d.eps_sr),
            self.eps_rd.unwrap_or(d.eps_rd),
        )
    }
}

impl From<&BilayerConfig> for RawConfig {
    fn from(c: &BilayerConfig) -> Self {
        RawConfig {
            dv1: Some(c.layer1.dv()),
            dc1: Some(c.layer1.dc()),
            lambda1: Some(c.layer1.lambda()),
            dv2: Some(c.layer2.dv()),
            dc2: Some(c.layer2.dc()),
            lambda2: Some(c.layer2.lambda()),
            eps_sd: Some(c.eps_sd),
            eps_sr: Some(c.eps_sr),
            eps_rd: Some(c.eps_rd),
        }
    }
}

/// Writes `cfg` as `key=value` lines in [`CONFIG_KEYS`] order, each line
/// prefixed by `prefix`. Floats use the shortest representation that reads
/// back bit-exactly.
pub fn write_config(cfg: &BilayerConfig, prefix: &str) -> String {
    let mut s = String::new();
    let rows: [(&str, String); 9] = [
        ("dv1", cfg.layer1.dv().to_string()),
        ("dc1", cfg.layer1.dc().to_string()),
        ("lambda1", cfg.layer1.lambda().to_string()),
        ("dv2", cfg.layer2.dv().to_string()),
        ("dc2", cfg.layer2.dc().to_string()),
        ("lambda2", cfg.layer2.lambda().to_string()),
        ("eps_sd", cfg.eps_sd.to_string()),
        ("eps_sr", cfg.eps_sr.to_string()),
        ("eps_rd", cfg.eps_rd.to_string()),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{prefix}{k}={v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let text = "# header\n  dv1 =  4 \n\nlambda1=0.15 # trailing\neps_sd\t=\t0.3\n";
        let raw = RawConfig::parse(text).unwrap();
        assert_eq!(raw.dv1, Some(4));
        assert_eq!(raw.lambda1, Some(0.15));
        assert_eq!(raw.eps_sd, Some(0.3));
        assert_eq!(raw.dc1, None);
        let cfg = raw.resolve().unwrap();
        assert_eq!(cfg.layer1.dv(), 4);
        assert_eq!(cfg.layer2.dv(), 2);
    }

    #[test]
    fn rejects_garbage() {
        assert!(RawConfig::parse("dv1 3").is_err());
        assert!(RawConfig::parse("dv1=three").is_err());
        assert!(RawConfig::parse("colour=blue").is_err());
        assert!(RawConfig::parse("lambda1=1.5").unwrap().resolve().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RawConfig::parse("dv1=4\neps_sd=0.3").unwrap();
        let flags = RawConfig {
            eps_sd: Some(0.5),
            ..Default::default()
        };
        let cfg = file.merge(&flags).resolve().unwrap();
        assert_eq!(cfg.layer1.dv(), 4);
        assert_eq!(cfg.eps_sd, 0.5);
    }

    #[test]
    fn dv2_zero_is_single_layer() {
        let cfg = RawConfig::parse("dv2=0").unwrap().resolve().unwrap();
        assert!(cfg.is_single_layer());
    }

    #[test]
    fn written_config_reads_back() {
        let cfg = BilayerConfig::running_example()
            .with_eps_sd(0.1 + 0.2)
            .unwrap();
        let text = write_config(&cfg, "");
        assert_eq!(RawConfig::parse(&text).unwrap().resolve().unwrap(), cfg);
    }
}
