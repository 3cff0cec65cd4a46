//! The resolved description of a run, stamped as `# key=value` lines at the
//! top of every output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anytime_core::config::{write_config, RawConfig, CONFIG_KEYS};
use anytime_core::{BilayerConfig, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub command: String,
    pub config: BilayerConfig,
    /// Command settings in stamp order, values as written.
    pub settings: Vec<(String, String)>,
}

impl RunSpec {
    pub fn new(command: &str, config: BilayerConfig) -> Self {
        RunSpec {
            command: command.to_string(),
            config,
            settings: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.settings.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.settings
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn stamp(&self) -> String {
        let mut s = format!("# command={}\n", self.command);
        s.push_str(&write_config(&self.config, "# "));
        for (k, v) in &self.settings {
            let _ = writeln!(s, "# {k}={v}");
        }
        s
    }

    /// Reads the leading `#` lines of an output back into a spec.
    pub fn from_stamp(text: &str) -> Result<Self> {
        let mut command = None;
        let mut code = BTreeMap::new();
        let mut settings = Vec::new();
        for line in text.lines().map_while(|l| l.strip_prefix('#')) {
            let Some((k, v)) = line.trim().split_once('=') else {
                continue;
            };
            match k {
                "command" => command = Some(v.to_string()),
                k if CONFIG_KEYS.contains(&k) => {
                    code.insert(k.to_string(), v.to_string());
                }
                _ => settings.push((k.to_string(), v.to_string())),
            }
        }
        let config = RawConfig::from_map(&code, true)?.resolve()?;
        Ok(RunSpec {
            command: command.ok_or_else(|| Error::Parse {
                line: 1,
                message: "stamp has no command line".into(),
            })?,
            config,
            settings,
        })
    }
}
