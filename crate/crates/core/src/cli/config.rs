//! Run configuration: a flat TOML file, overridden field by field by flags.
//!
//! Every field is optional in both sources. The resolved configuration, minus
//! the fields that cannot change results (output path, threads, timestamp), is
//! hashed into the config digest embedded in every output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::hierarchy::machines::content_hash;

/// Version of the config schema this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Union of the parameters of every command. `None` means "use the default".
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub schema_version: Option<u32>,
    pub command: Option<String>,

    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub precision_bits: Option<u32>,
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    #[serde(skip_serializing)]
    pub no_timestamp: Option<bool>,

    pub pdf: Option<String>,
    pub channel: Option<String>,
    pub f1: Option<String>,
    pub f2: Option<String>,
    pub power: Option<Rational>,
    pub sigma_sq: Option<Rational>,
    pub sigma1_sq: Option<Rational>,
    pub sigma2_sq: Option<Rational>,
    pub radius: Option<u64>,
    pub kernel: Option<String>,
    pub mc_samples: Option<u64>,
    pub enumerator: Option<String>,
    pub k: Option<u64>,
    pub only: Option<Vec<String>>,
    #[serde(skip_serializing)]
    pub golden_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($top:expr, $base:expr; $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: Settings) -> Settings {
        overlay!(self, base;
            schema_version, command, out, format, precision_bits, seed, threads, no_timestamp,
            pdf, channel, f1, f2, power, sigma_sq, sigma1_sq, sigma2_sq, radius, kernel,
            mc_samples, enumerator, k, only, golden_dir)
    }

    /// Parses a config file. Errors name the file, line and field.
    pub fn parse(text: &str, origin: &str) -> Result<Settings> {
        let s: Settings = toml::from_str(text).map_err(|e| Error::Validation(format!("{origin}: {e}")))?;
        if let Some(v) = s.schema_version {
            if v != SCHEMA_VERSION {
                return Err(Error::Validation(format!(
                    "{origin}: schema_version {v} is not supported (this build reads {SCHEMA_VERSION})"
                )));
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        Settings::parse(&text, &path.display().to_string())
    }

    /// sha256 of the canonical JSON of the result-relevant fields.
    pub fn digest(&self) -> String {
        content_hash(&serde_json::to_string(self).expect("settings serialize"))
    }

    /// Rejects fields the command does not read, so that a typo cannot pass silently.
    pub fn restrict(&self, command: &str, allowed: &[&str]) -> Result<()> {
        if let Some(c) = &self.command {
            if c != command {
                return Err(Error::Validation(format!("config is for command {c:?}, not {command:?}")));
            }
        }
        let json = serde_json::to_value(self).expect("settings serialize");
        let common = ["schema_version", "command", "format", "precision_bits", "seed"];
        for (key, v) in json.as_object().expect("struct").iter() {
            if !v.is_null() && !common.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
                return Err(Error::Validation(format!("field {key:?} does not apply to {command}")));
            }
        }
        if self.golden_dir.is_some() && !allowed.contains(&"golden_dir") {
            return Err(Error::Validation(format!("field \"golden_dir\" does not apply to {command}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = Settings::parse("schema_version = 1\npower = \"3/2\"\nradius = 8\n", "t").unwrap();
        let flags = Settings { radius: Some(16), ..Default::default() };
        let s = flags.over(file);
        assert_eq!(s.radius, Some(16));
        assert_eq!(s.power, Some(Rational::frac(3, 2)));
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let e = Settings::parse("radius = 8\npower = 3\n", "cfg.toml").unwrap_err().to_string();
        assert!(e.contains("cfg.toml") && e.contains("line 2"), "{e}");
        let e = Settings::parse("raduis = 8\n", "cfg.toml").unwrap_err().to_string();
        assert!(e.contains("raduis"), "{e}");
        let e = Settings::parse("power = \"1/0\"\n", "cfg.toml").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        assert!(Settings::parse("schema_version = 2\n", "cfg.toml").is_err());
    }

    #[test]
    fn digest_ignores_output_plumbing() {
        let a = Settings { radius: Some(4), ..Default::default() };
        let b = Settings { radius: Some(4), threads: Some(3), out: Some("x".into()), ..Default::default() };
        assert_eq!(a.digest(), b.digest());
        let c = Settings { radius: Some(5), ..Default::default() };
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn restrict_rejects_foreign_fields() {
        let s = Settings { enumerator: Some("identity".into()), ..Default::default() };
        assert!(s.restrict("specker", &["enumerator", "k"]).is_ok());
        assert!(s.restrict("quad", &["pdf"]).is_err());
        let s = Settings { command: Some("quad".into()), ..Default::default() };
        assert!(s.restrict("specker", &[]).is_err());
    }
}
