//! Flat key=value configuration with command-line override semantics.
//! A file sets defaults; any flag given on the command line wins.

use std::collections::BTreeMap;
use std::path::Path;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioChoice {
    Vacuum,
    OnePhoton,
    DoublePsi,
    DoublePhi,
}

impl ScenarioChoice {
    pub fn parse(s: &str) -> Result<Self, Failure> {
        match s {
            "1" | "vacuum" => Ok(ScenarioChoice::Vacuum),
            "2" | "one-photon" => Ok(ScenarioChoice::OnePhoton),
            "3" | "double-psi" => Ok(ScenarioChoice::DoublePsi),
            "4" | "double-phi" => Ok(ScenarioChoice::DoublePhi),
            other => Err(Failure::config(format!(
                "scenario: `{other}` is not 1|vacuum, 2|one-photon, 3|double-psi, 4|double-phi"
            ))),
        }
    }

    pub fn is_double(self) -> bool {
        matches!(self, ScenarioChoice::DoublePsi | ScenarioChoice::DoublePhi)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn parse(s: &str) -> Result<Self, Failure> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Failure::config(format!(
                "grid: `{s}` is not start:stop:count"
            )));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| Failure::config(format!("grid: bad start `{}`", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| Failure::config(format!("grid: bad stop `{}`", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| Failure::config(format!("grid: bad count `{}`", parts[2])))?;
        if count < 2 {
            return Err(Failure::config("grid: count must be at least 2".into()));
        }
        // the negated form also rejects NaN endpoints
        if !(stop > start) || !start.is_finite() || !stop.is_finite() {
            return Err(Failure::config("grid: need finite stop > start".into()));
        }
        Ok(GridSpec { start, stop, count })
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start + (self.stop - self.start) * k as f64 / (self.count - 1) as f64
    }
}

/// The key=value file, order-insensitive, `#` comments and blank lines
/// allowed. Unknown keys are configuration errors so typos cannot silently
/// fall back to defaults.
pub struct FileSettings {
    values: BTreeMap<String, String>,
}

const KNOWN_KEYS: [&str; 16] = [
    "scenario",
    "alpha",
    "beta",
    "g",
    "grid",
    "bath",
    "modes",
    "spacing",
    "detuning",
    "columns",
    "out",
    "suite",
    "perturb",
    "instances",
    "seed",
    "resolution",
];

impl FileSettings {
    pub fn empty() -> Self {
        FileSettings {
            values: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::io(format!("config `{}`: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::config(format!(
                    "config line {}: `{line}` is not key=value",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Failure::config(format!(
                    "config line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(FileSettings { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Flag value if given, else the file value parsed by `parse`, else none.
    pub fn resolve<T, F>(&self, flag: Option<T>, key: &str, parse: F) -> Result<Option<T>, Failure>
    where
        F: FnOnce(&str) -> Result<T, Failure>,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            Some(s) => parse(s).map(Some),
            None => Ok(None),
        }
    }

    pub fn resolve_f64(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>, Failure> {
        self.resolve(flag, key, |s| {
            s.parse::<f64>()
                .map_err(|_| Failure::config(format!("{key}: `{s}` is not a number")))
        })
    }

    pub fn resolve_usize(&self, flag: Option<usize>, key: &str) -> Result<Option<usize>, Failure> {
        self.resolve(flag, key, |s| {
            s.parse::<usize>()
                .map_err(|_| Failure::config(format!("{key}: `{s}` is not a count")))
        })
    }

    pub fn resolve_u64(&self, flag: Option<u64>, key: &str) -> Result<Option<u64>, Failure> {
        self.resolve(flag, key, |s| {
            s.parse::<u64>()
                .map_err(|_| Failure::config(format!("{key}: `{s}` is not an integer")))
        })
    }

    pub fn resolve_string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.raw(key).map(|s| s.to_string()))
    }
}
