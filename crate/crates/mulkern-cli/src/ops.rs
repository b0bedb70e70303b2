//! Operator presets from a family name and rational parameters.

use std::collections::BTreeMap;

use mulkern::exact::Rat;
use mulkern::ode::{first_order_g, heun4, heun_n, third_order3, DiffOp, Family};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

const ODD_PRIMES: [i64; 8] = [3, 5, 7, 11, 13, 17, 19, 23];

fn r(p: i64, q: i64) -> Rat {
    Rat::new(p, q)
}

/// Default parameters for each family.
pub fn defaults(family: Family, g: usize) -> BTreeMap<String, Rat> {
    let mut d = BTreeMap::new();
    match family {
        Family::Heun4 => {
            d.insert("t".into(), Rat::int(2));
            for (i, p) in [3, 5, 7].into_iter().enumerate() {
                d.insert(format!("s{}", i + 1), r(1, p));
            }
            d.insert("r1".into(), r(1, 2));
        }
        Family::HeunN => {
            for i in 1..=g {
                d.insert(format!("t{i}"), Rat::int(i as i64 + 1));
            }
            for i in 0..g + 2 {
                d.insert(format!("s{}", i + 1), r(1, ODD_PRIMES[i % ODD_PRIMES.len()]));
            }
            d.insert("r1".into(), r(1, 2));
        }
        Family::ThirdOrder3 => {
            for (i, p) in [2, 3, 5, 7, 11, 13].into_iter().enumerate() {
                d.insert(format!("a{}", i + 1), r(1, p));
            }
        }
        Family::FirstOrderG | Family::Custom => {}
    }
    d
}

fn allowed(family: Family, g: usize) -> Vec<String> {
    let mut keys: Vec<String> = defaults(family, g).into_keys().collect();
    if matches!(family, Family::Heun4 | Family::HeunN) {
        keys.push("r2".into());
    }
    keys
}

pub fn family_of(cfg: &RunConfig) -> Result<Family> {
    cfg.family.ok_or_else(|| CliError::Config(format!("{} needs --family", cfg.command)))
}

/// Genus-like dimension `g` implied by the config.
pub fn g_of(cfg: &RunConfig, family: Family) -> Result<usize> {
    let g = match family {
        Family::Heun4 | Family::ThirdOrder3 => 1,
        Family::HeunN => cfg.g.unwrap_or(2),
        Family::FirstOrderG | Family::Custom => cfg.g.unwrap_or(1),
    };
    if let Some(given) = cfg.g {
        if given != g {
            return Err(CliError::Config(format!("{} has g = {g}, got g = {given}", family.name())));
        }
    }
    if g == 0 {
        return Err(CliError::Config("g must be at least 1".into()));
    }
    Ok(g)
}

/// Builds the operator, filling unset parameters with `base` and then the
/// family defaults.
pub fn operator_with(cfg: &RunConfig, family: Family, base: &BTreeMap<String, Rat>) -> Result<DiffOp> {
    let g = g_of(cfg, family)?;
    if family == Family::Custom {
        if cfg.terms.is_empty() {
            return Err(CliError::Config("custom family needs terms".into()));
        }
        if !cfg.params.is_empty() {
            return Err(CliError::Config("custom family takes no params".into()));
        }
        let terms: Vec<(usize, String)> = cfg.terms.iter().map(|(k, v)| (*k, v.clone())).collect();
        return DiffOp::from_strings(g, &terms).map_err(|e| CliError::Config(e.to_string()));
    }
    if !cfg.terms.is_empty() {
        return Err(CliError::Config("terms are only accepted for the custom family".into()));
    }
    let keys = allowed(family, g);
    if let Some(k) = cfg.params.keys().find(|k| !keys.contains(k)) {
        return Err(CliError::Config(format!("unknown parameter {k:?} for {}", family.name())));
    }
    let mut p = defaults(family, g);
    p.extend(base.iter().map(|(k, v)| (k.clone(), v.clone())));
    p.extend(cfg.params.iter().map(|(k, v)| (k.clone(), v.clone())));
    let get = |k: &str| p[k].clone();
    let op = match family {
        Family::FirstOrderG => first_order_g(g),
        Family::Heun4 => heun4(&get("t"), [&get("s1"), &get("s2"), &get("s3")], &get("r1"), p.get("r2")),
        Family::HeunN => {
            let ts: Vec<Rat> = (1..=g).map(|i| get(&format!("t{i}"))).collect();
            let s: Vec<Rat> = (1..=g + 2).map(|i| get(&format!("s{i}"))).collect();
            heun_n(&ts, &s, &get("r1"), p.get("r2"))
        }
        Family::ThirdOrder3 => {
            let a: [Rat; 6] = std::array::from_fn(|i| get(&format!("a{}", i + 1)));
            third_order3(&a)
        }
        Family::Custom => unreachable!("handled above"),
    };
    op.map_err(|e| CliError::Config(e.to_string()))
}

pub fn operator(cfg: &RunConfig) -> Result<DiffOp> {
    operator_with(cfg, family_of(cfg)?, &BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_params, Command};

    fn cfg(family: Family, params: &str) -> RunConfig {
        let mut c = RunConfig::new(Command::Kernel);
        c.family = Some(family);
        c.params = parse_params(params).unwrap();
        c
    }

    #[test]
    fn defaults_build() {
        for f in [Family::FirstOrderG, Family::Heun4, Family::HeunN, Family::ThirdOrder3] {
            let op = operator(&cfg(f, "")).unwrap();
            assert_eq!(op.family(), f);
        }
        let op = operator(&cfg(Family::Heun4, "t=3")).unwrap();
        assert_eq!(op.param("t").unwrap(), Rat::int(3));
        assert_eq!(op.param("r2").unwrap(), r(1, 3) + r(1, 5) + r(1, 7) - Rat::one() - r(1, 2));
    }

    #[test]
    fn bad_configs() {
        assert!(operator(&cfg(Family::Heun4, "q=1")).is_err());
        assert!(operator(&cfg(Family::Heun4, "t=1")).is_err());
        assert!(operator(&cfg(Family::Heun4, "r2=5")).is_err());
        let mut c = cfg(Family::Heun4, "");
        c.g = Some(2);
        assert!(operator(&c).is_err());
        assert!(operator(&cfg(Family::Custom, "")).is_err());
        let mut c = RunConfig::new(Command::Kernel);
        assert!(operator(&c).is_err());
        c.family = Some(Family::Custom);
        c.terms.insert(1, "1".into());
        c.terms.insert(0, "-l1".into());
        assert_eq!(operator(&c).unwrap().order(), 1);
    }
}
