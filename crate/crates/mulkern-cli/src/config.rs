//! Run configuration, from flags or a JSON file mirroring them.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mulkern::exact::Rat;
use mulkern::ode::Family;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Expand,
    Sctable,
    Gensctable,
    Kernel,
    Assoc,
    Genassoc,
    Productcheck,
    Oracle,
    Birat,
    Verlinde,
    All,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Expand,
        Command::Sctable,
        Command::Gensctable,
        Command::Kernel,
        Command::Assoc,
        Command::Genassoc,
        Command::Productcheck,
        Command::Oracle,
        Command::Birat,
        Command::Verlinde,
        Command::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Expand => "expand",
            Command::Sctable => "sctable",
            Command::Gensctable => "gensctable",
            Command::Kernel => "kernel",
            Command::Assoc => "assoc",
            Command::Genassoc => "genassoc",
            Command::Productcheck => "productcheck",
            Command::Oracle => "oracle",
            Command::Birat => "birat",
            Command::Verlinde => "verlinde",
            Command::All => "all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| CliError::Config(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Oracle id, birational fixture or file, or verlinde level / `fibers`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default)]
    pub params: BTreeMap<String, Rat>,
    /// Operator terms `k -> P_k(x, l1..lg)` for the custom family.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub terms: BTreeMap<usize, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Total y-degree bound for the multi-point `Q` solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default = "default_precision")]
    pub precision: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    #[serde(default)]
    pub assoc: bool,
    #[serde(default)]
    pub timings: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

fn default_seed() -> u64 {
    1
}

fn default_precision() -> usize {
    200
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            target: None,
            family: None,
            params: BTreeMap::new(),
            terms: BTreeMap::new(),
            g: None,
            n: None,
            m: None,
            degree: None,
            seed: default_seed(),
            samples: None,
            precision: default_precision(),
            max_n: None,
            assoc: false,
            timings: false,
            cache: None,
            report: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn target(&self) -> Result<&str> {
        self.target.as_deref().ok_or_else(|| CliError::Config(format!("{} needs a target", self.command)))
    }
}

/// Parses `k=v` pairs separated by commas, with exact rational values.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, Rat>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| CliError::Config(format!("expected key=value, got {item:?}")))?;
        let v: Rat = v.parse().map_err(|e: mulkern::Error| CliError::Config(format!("{k}: {e}")))?;
        if out.insert(k.trim().to_string(), v).is_some() {
            return Err(CliError::Config(format!("parameter {k} given twice")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let mut c = RunConfig::new(Command::Kernel);
        c.family = Some(Family::Heun4);
        c.params = parse_params("t=2, s1=1/3,r1=-1/2").unwrap();
        c.n = Some(6);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"-1/2\""));
        assert!(text.contains("\"N\":6"));
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_keys_and_floats() {
        assert!(RunConfig::from_json(r#"{"command":"kernel","bogus":1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command":"kernel","params":{"t":"0.5"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command":"kernel","params":{"t":0.5}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command":"nope"}"#).is_err());
        let c = RunConfig::from_json(r#"{"command":"verlinde","assoc":true,"max_n":3}"#).unwrap();
        assert_eq!(c.max_n, Some(3));
        assert_eq!(c.seed, 1);
    }

    #[test]
    fn params_parse_exactly() {
        let p = parse_params("a=3/9,b=-2").unwrap();
        assert_eq!(p["a"], Rat::new(1, 3));
        assert!(parse_params("a=1,a=2").is_err());
        assert!(parse_params("a").is_err());
        assert!(parse_params("a=1.5").is_err());
        assert_eq!("genassoc".parse::<Command>().unwrap(), Command::Genassoc);
    }

    proptest::proptest! {
        #[test]
        fn params_roundtrip_through_json(vals in proptest::collection::btree_map("[a-z][a-z0-9]{0,3}", (-1000i64..1000, 1i64..1000), 0..6)) {
            let mut c = RunConfig::new(Command::Expand);
            c.params = vals.iter().map(|(k, (p, q))| (k.clone(), Rat::new(*p, *q))).collect();
            let text = serde_json::to_string(&c).unwrap();
            proptest::prop_assert_eq!(RunConfig::from_json(&text).unwrap(), c.clone());
            let flags: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            proptest::prop_assert_eq!(parse_params(&flags.join(",")).unwrap(), c.params);
        }
    }
}
