//! Resolved settings: a key=value file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use dpsqkd_core::optimize::{linspace, logspace};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            bad(format!(
                "config line {}: expected key=value, got {raw:?}",
                k + 1
            ))
        })?;
        let key = key.trim().replace('-', "_");
        if key.is_empty() {
            return Err(bad(format!("config line {}: empty key", k + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Final key/value view for one command. Defaults are written in too, so
/// the output header can echo everything a run depended on.
#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
    allowed: &'static [&'static str],
}

impl Settings {
    pub fn new(
        file: BTreeMap<String, String>,
        flags: Vec<(&'static str, Option<String>)>,
        allowed: &'static [&'static str],
    ) -> Result<Self, ConfigError> {
        let mut values = file;
        for (key, v) in flags {
            if let Some(v) = v {
                values.insert(key.to_string(), v);
            }
        }
        if let Some(k) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(bad(format!(
                "unknown setting {k:?} (allowed: {})",
                allowed.join(", ")
            )));
        }
        Ok(Self { values, allowed })
    }

    pub fn set_default(&mut self, key: &str, value: &str) {
        debug_assert!(self.allowed.contains(&key));
        self.values
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, ConfigError> {
        self.raw(key)
            .ok_or_else(|| bad(format!("missing required setting {key:?}")))
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let s = self.required(key)?;
        s.parse()
            .map_err(|_| bad(format!("{key}: expected a non-negative integer, got {s:?}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        parse_f64(key, self.required(key)?)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(key).map(|s| parse_f64(key, s)).transpose()
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        let s = self.required(key)?;
        let list = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| bad(format!("{key}: bad integer {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if list.is_empty() {
            return Err(bad(format!("{key}: empty list")));
        }
        Ok(list)
    }

    pub fn grid(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        parse_grid(self.required(key)?).map_err(|e| bad(format!("{key}: {}", e.0)))
    }

    pub fn policy(&self, key: &str) -> Result<PhotonPolicy, ConfigError> {
        parse_policy(self.required(key)?).map_err(|e| bad(format!("{key}: {}", e.0)))
    }

    /// Resolved settings in key order, for the output header.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64, ConfigError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| bad(format!("{key}: expected a number, got {s:?}")))?;
    if !v.is_finite() {
        return Err(bad(format!("{key}: {s:?} is not finite")));
    }
    Ok(v)
}

/// `start:stop:points`, `log:start:stop:points`, a comma list, or one number.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = text.trim().split(':').collect();
    let num = |s: &str| parse_f64("grid", s);
    let count = |s: &str| -> Result<usize, ConfigError> {
        match s.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(bad(format!(
                "point count must be a positive integer, got {s:?}"
            ))),
        }
    };
    let grid = match parts.as_slice() {
        ["log", a, b, k] => {
            let (a, b, k) = (num(a)?, num(b)?, count(k)?);
            if !(a > 0.0 && b > 0.0) {
                return Err(bad(format!(
                    "log grid needs positive endpoints in {text:?}"
                )));
            }
            if a > b || (k == 1 && a != b) {
                return Err(bad(format!("bad log grid {text:?}")));
            }
            logspace(a, b, k)
        }
        [a, b, k] => {
            let (a, b, k) = (num(a)?, num(b)?, count(k)?);
            if a > b || (k == 1 && a != b) {
                return Err(bad(format!("bad grid {text:?}")));
            }
            linspace(a, b, k)
        }
        [single] => single.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad(format!("cannot parse grid {text:?}"))),
    };
    if grid.is_empty() {
        return Err(bad("empty grid"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(bad(format!("grid {text:?} is not strictly increasing")));
    }
    Ok(grid)
}

/// How the per-pulse mean photon number α² is chosen at each η.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonPolicy {
    /// Fixed block mean nα².
    FixedMean(f64),
    /// α² = c·η.
    Linear(f64),
    /// α² = c·√η.
    Sqrt(f64),
    Optimize,
}

impl PhotonPolicy {
    /// α² at transmittance `eta`; None for `Optimize`.
    pub fn alpha2(&self, n: usize, eta: f64) -> Option<f64> {
        match *self {
            PhotonPolicy::FixedMean(m) => Some(m / n as f64),
            PhotonPolicy::Linear(c) => Some(c * eta),
            PhotonPolicy::Sqrt(c) => Some(c * eta.sqrt()),
            PhotonPolicy::Optimize => None,
        }
    }
}

pub fn parse_policy(text: &str) -> Result<PhotonPolicy, ConfigError> {
    let text = text.trim();
    if text == "optimize" {
        return Ok(PhotonPolicy::Optimize);
    }
    let (kind, value) = text.split_once(':').ok_or_else(|| {
        bad(format!(
            "expected fixed-mean:X, linear:C, sqrt:C or optimize, got {text:?}"
        ))
    })?;
    let c = parse_f64("photon", value)?;
    if c < 0.0 {
        return Err(bad(format!("coefficient must be >= 0, got {c}")));
    }
    match kind {
        "fixed-mean" => Ok(PhotonPolicy::FixedMean(c)),
        "linear" => Ok(PhotonPolicy::Linear(c)),
        "sqrt" => Ok(PhotonPolicy::Sqrt(c)),
        _ => Err(bad(format!("unknown photon policy {kind:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:2:3").unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(parse_grid("6:6:1").unwrap(), vec![6.0]);
        assert_eq!(parse_grid("0.5,1,3").unwrap(), vec![0.5, 1.0, 3.0]);
        let g = parse_grid("log:1e-4:1e-2:3").unwrap();
        assert_eq!(g[0], 1e-4);
        assert!((g[1] - 1e-3).abs() < 1e-18);
        assert_eq!(g[2], 1e-2);
        for text in [
            "",
            "1:0:3",
            "0:1:0",
            "log:0:1:3",
            "0:1",
            "a:b:c",
            "1,1",
            "0:1:1",
        ] {
            assert!(parse_grid(text).is_err(), "{text}");
        }
    }

    #[test]
    fn policies() {
        assert_eq!(parse_policy("optimize").unwrap(), PhotonPolicy::Optimize);
        assert_eq!(
            parse_policy("fixed-mean:0.02").unwrap(),
            PhotonPolicy::FixedMean(0.02)
        );
        assert_eq!(
            parse_policy("sqrt:0.105").unwrap().alpha2(9, 0.01),
            Some(0.0105)
        );
        assert_eq!(parse_policy("linear:2").unwrap().alpha2(9, 0.5), Some(1.0));
        for text in ["fixed", "linear:-1", "cubic:1", "sqrt:x"] {
            assert!(parse_policy(text).is_err(), "{text}");
        }
    }

    #[test]
    fn config_text() {
        let m = parse_config_text("# sweep\nn = 9\nnu-bar=1,2 # trailing\n\n").unwrap();
        assert_eq!(m["n"], "9");
        assert_eq!(m["nu_bar"], "1,2");
        assert!(parse_config_text("n 9").is_err());
    }

    #[test]
    fn flags_override_file_and_unknown_keys_fail() {
        const KEYS: &[&str] = &["n", "nu"];
        let file = parse_config_text("n = 4\nnu = 1").unwrap();
        let s = Settings::new(
            file.clone(),
            vec![("n", Some("9".into())), ("nu", None)],
            KEYS,
        )
        .unwrap();
        assert_eq!(s.usize("n").unwrap(), 9);
        assert_eq!(s.usize("nu").unwrap(), 1);
        let mut extra = file;
        extra.insert("eta".into(), "0.1".into());
        assert!(Settings::new(extra, vec![], KEYS).is_err());
    }
}
