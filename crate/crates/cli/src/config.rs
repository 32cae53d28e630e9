//! `key = value` experiment files. The recognised keys are listed in
//! `KEYS`; anything else is rejected so typos do not silently fall back to
//! defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use frugal_core::forest::MaxFeatures;
use frugal_core::harness::{ConfigId, ExperimentSpec, Selection};

pub const KEYS: &[(&str, &str)] = &[
    ("configs", "comma-separated configuration names; overrides the three option keys below"),
    ("selection", "uncertainty | random; unset runs both"),
    ("timeout_predictor", "true | false; unset runs both"),
    ("dynamic_timeout", "true | false; unset runs both"),
    ("folds", "a count N (folds 0..N), a list `0,3,7` or a range `2..5`"),
    ("seeds", "same forms as folds"),
    ("seed", "base seed for the train/validation/test split; FRUGAL_SEED overrides"),
    ("batch_frac", "batch size as a fraction of the training set, in (0, 1]"),
    ("out", "output directory for step logs"),
    ("jobs", "worker threads; 0 means all available cores"),
    ("n_trees", "trees per forest"),
    ("max_features", "sqrt | all | an integer"),
    ("max_depth", "maximum tree depth"),
    ("min_samples_split", "smallest node that may be split"),
    ("bootstrap", "true | false"),
    ("initial_timeout_fraction", "first dynamic timeout as a fraction of the cutoff"),
    ("growth_factor", "multiplier applied on each timeout increase"),
    ("plateau_window", "validation steps compared when looking for a plateau"),
    ("plateau_tolerance", "relative improvement below which the timeout grows"),
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Every knob, unset unless a file, flag or the environment provided it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub configs: Option<Vec<ConfigId>>,
    pub selection: Option<Selection>,
    pub timeout_predictor: Option<bool>,
    pub dynamic_timeout: Option<bool>,
    pub folds: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    pub seed: Option<u64>,
    pub batch_frac: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub n_trees: Option<usize>,
    pub max_features: Option<MaxFeatures>,
    pub max_depth: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub bootstrap: Option<bool>,
    pub initial_timeout_fraction: Option<f64>,
    pub growth_factor: Option<f64>,
    pub plateau_window: Option<usize>,
    pub plateau_tolerance: Option<f64>,
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError(format!("{key}: cannot parse {v:?}")))
}

pub fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

pub fn parse_selection(v: &str) -> Result<Selection, String> {
    match v {
        "uncertainty" => Ok(Selection::Uncertainty),
        "random" => Ok(Selection::Random),
        _ => Err(format!("expected uncertainty or random, got {v:?}")),
    }
}

/// `N`, `a,b,c` or `a..b`.
pub fn parse_index_set<T>(v: &str) -> Result<Vec<T>, String>
where
    T: FromStr + TryFrom<u64>,
{
    let num = |s: &str| -> Result<u64, String> { s.trim().parse().map_err(|_| format!("not an index: {s:?}")) };
    let conv = |n: u64| T::try_from(n).map_err(|_| format!("index {n} out of range"));
    let values: Vec<u64> = if let Some((a, b)) = v.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else if v.contains(',') {
        v.split(',').map(num).collect::<Result<_, _>>()?
    } else {
        (0..num(v)?).collect()
    };
    if values.is_empty() {
        return Err(format!("{v:?} selects nothing"));
    }
    values.into_iter().map(conv).collect()
}

pub fn parse_max_features(v: &str) -> Result<MaxFeatures, String> {
    match v {
        "sqrt" => Ok(MaxFeatures::Sqrt),
        "all" => Ok(MaxFeatures::All),
        n => n
            .parse()
            .map(MaxFeatures::Fixed)
            .map_err(|_| format!("expected sqrt, all or an integer, got {n:?}")),
    }
}

pub fn parse_configs(v: &str) -> Result<Vec<ConfigId>, String> {
    v.split(',')
        .map(|c| c.trim().parse::<ConfigId>().map_err(|e| e.to_string()))
        .collect()
}

impl Settings {
    pub fn parse_file(text: &str, origin: &Path) -> Result<Settings, ConfigError> {
        let mut s = Settings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| ConfigError(format!("{}:{}: {msg}", origin.display(), n + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            s.set(key, value).map_err(|e| at(e.0))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Settings, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Settings::parse_file(&text, path)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        fn lift<T>(key: &str, r: Result<T, String>) -> Result<T, ConfigError> {
            r.map_err(|e| ConfigError(format!("{key}: {e}")))
        }
        match key {
            "configs" => self.configs = Some(lift(key, parse_configs(v))?),
            "selection" => self.selection = Some(lift(key, parse_selection(v))?),
            "timeout_predictor" => self.timeout_predictor = Some(lift(key, parse_bool(v))?),
            "dynamic_timeout" => self.dynamic_timeout = Some(lift(key, parse_bool(v))?),
            "folds" => self.folds = Some(lift(key, parse_index_set(v))?),
            "seeds" => self.seeds = Some(lift(key, parse_index_set(v))?),
            "seed" => self.seed = Some(parse(key, v)?),
            "batch_frac" => self.batch_frac = Some(parse(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "jobs" => self.jobs = Some(parse(key, v)?),
            "n_trees" => self.n_trees = Some(parse(key, v)?),
            "max_features" => self.max_features = Some(lift(key, parse_max_features(v))?),
            "max_depth" => self.max_depth = Some(parse(key, v)?),
            "min_samples_split" => self.min_samples_split = Some(parse(key, v)?),
            "bootstrap" => self.bootstrap = Some(lift(key, parse_bool(v))?),
            "initial_timeout_fraction" => self.initial_timeout_fraction = Some(parse(key, v)?),
            "growth_factor" => self.growth_factor = Some(parse(key, v)?),
            "plateau_window" => self.plateau_window = Some(parse(key, v)?),
            "plateau_tolerance" => self.plateau_tolerance = Some(parse(key, v)?),
            _ => return Err(ConfigError(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Fills every field of `self` that `over` sets. Returns the names of
    /// keys where both were set and disagree.
    pub fn override_with(&mut self, over: Settings) -> Vec<&'static str> {
        let mut conflicts = Vec::new();
        macro_rules! take {
            ($($f:ident),*) => {$(
                if let Some(v) = over.$f {
                    if self.$f.as_ref().is_some_and(|old| *old != v) {
                        conflicts.push(stringify!($f));
                    }
                    self.$f = Some(v);
                }
            )*};
        }
        take!(
            configs,
            selection,
            timeout_predictor,
            dynamic_timeout,
            folds,
            seeds,
            seed,
            batch_frac,
            out,
            jobs,
            n_trees,
            max_features,
            max_depth,
            min_samples_split,
            bootstrap,
            initial_timeout_fraction,
            growth_factor,
            plateau_window,
            plateau_tolerance
        );
        conflicts
    }

    /// Configurations implied by the option keys: each set option is pinned,
    /// each unset one runs both ways.
    pub fn config_list(&self) -> Vec<ConfigId> {
        if let Some(c) = &self.configs {
            return c.clone();
        }
        ConfigId::frugal_grid()
            .into_iter()
            .filter(|c| match *c {
                ConfigId::Frugal {
                    selection,
                    timeout_predictor,
                    dynamic_timeout,
                } => {
                    self.selection.is_none_or(|s| s == selection)
                        && self.timeout_predictor.is_none_or(|t| t == timeout_predictor)
                        && self.dynamic_timeout.is_none_or(|d| d == dynamic_timeout)
                }
                ConfigId::Passive { .. } => false,
            })
            .collect()
    }

    pub fn to_spec(&self) -> ExperimentSpec {
        let mut spec = ExperimentSpec::standard(self.out.clone().unwrap_or_else(|| PathBuf::from("runs")));
        spec.configs = self.config_list();
        if let Some(f) = &self.folds {
            spec.folds = f.clone();
        }
        if let Some(s) = &self.seeds {
            spec.seeds = s.clone();
        }
        if let Some(s) = self.seed {
            spec.split_seed = s;
        }
        if let Some(b) = self.batch_frac {
            spec.batch_frac = b;
        }
        let f = &mut spec.forest;
        if let Some(v) = self.n_trees {
            f.n_trees = v;
        }
        if let Some(v) = self.max_features {
            f.max_features = v;
        }
        if let Some(v) = self.max_depth {
            f.max_depth = v;
        }
        if let Some(v) = self.min_samples_split {
            f.min_samples_split = v;
        }
        if let Some(v) = self.bootstrap {
            f.bootstrap = v;
        }
        let c = &mut spec.controller;
        if let Some(v) = self.initial_timeout_fraction {
            c.initial_fraction = v;
        }
        if let Some(v) = self.growth_factor {
            c.growth_factor = v;
        }
        if let Some(v) = self.plateau_window {
            c.plateau_window = v;
        }
        if let Some(v) = self.plateau_tolerance {
            c.plateau_tolerance = v;
        }
        spec
    }
}
