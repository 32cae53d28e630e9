use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::arff::{parse_arff, ArffError, ArffRelation, AttributeKind, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Ok,
    Timeout,
    OtherFailure,
}

/// Recorded outcome of one algorithm on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub runtime: f64,
    pub status: RunStatus,
}

impl RunRecord {
    pub fn solved(&self) -> bool {
        self.status == RunStatus::Ok
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("missing scenario file {0}")]
    MissingFile(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: {source}")]
    Arff {
        file: PathBuf,
        #[source]
        source: ArffError,
    },
    #[error("description.txt: {0}")]
    Description(String),
    #[error("scenario is not a runtime-minimisation scenario ({0})")]
    NotRuntime(String),
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: PathBuf, column: String },
    #[error("{file}: unknown instance `{instance}`")]
    UnknownInstance { file: PathBuf, instance: String },
    #[error("{file}: duplicate entry for `{key}`")]
    Duplicate { file: PathBuf, key: String },
    #[error("runs are not total: no record for instance `{instance}` and algorithm `{algorithm}`")]
    NonTotal { instance: String, algorithm: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// A parsed ASLib runtime scenario.
///
/// Instances, algorithms and features are addressed by their index in the
/// respective ordered lists. `runs` is stored row-major by instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub algorithms: Vec<String>,
    pub features: Vec<String>,
    pub instances: Vec<String>,
    pub feature_values: Vec<Vec<Option<f64>>>,
    runs: Vec<RunRecord>,
    pub cutoff: f64,
    /// Per-instance feature computation cost in seconds; informational only.
    pub feature_costs: Option<Vec<Option<f64>>>,
}

impl Scenario {
    /// Builds a scenario from row-major runs (`runs[i][a]`), checking every invariant.
    pub fn new(
        id: impl Into<String>,
        algorithms: Vec<String>,
        features: Vec<String>,
        instances: Vec<String>,
        feature_values: Vec<Vec<Option<f64>>>,
        runs: Vec<Vec<RunRecord>>,
        cutoff: f64,
    ) -> Result<Self, ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        if algorithms.len() < 2 {
            return invalid(format!("need at least 2 algorithms, got {}", algorithms.len()));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return invalid(format!("cutoff must be positive, got {cutoff}"));
        }
        if feature_values.len() != instances.len() || runs.len() != instances.len() {
            return invalid("feature and run tables must cover every instance".into());
        }
        if let Some(row) = feature_values.iter().find(|r| r.len() != features.len()) {
            return invalid(format!(
                "feature row has {} values for {} features",
                row.len(),
                features.len()
            ));
        }
        let mut flat = Vec::with_capacity(instances.len() * algorithms.len());
        for (i, row) in runs.into_iter().enumerate() {
            if row.len() != algorithms.len() {
                return invalid(format!("instance `{}` has {} runs", instances[i], row.len()));
            }
            for r in row {
                if !(r.runtime.is_finite() && r.runtime >= 0.0) {
                    return invalid(format!("bad runtime {} on `{}`", r.runtime, instances[i]));
                }
                if r.solved() && r.runtime > cutoff {
                    return invalid(format!(
                        "solved runtime {} exceeds cutoff on `{}`",
                        r.runtime, instances[i]
                    ));
                }
                flat.push(r);
            }
        }
        Ok(Scenario {
            id: id.into(),
            algorithms,
            features,
            instances,
            feature_values,
            runs: flat,
            cutoff,
            feature_costs: None,
        })
    }

    pub fn n_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn n_algorithms(&self) -> usize {
        self.algorithms.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn run(&self, instance: usize, algorithm: usize) -> &RunRecord {
        &self.runs[instance * self.algorithms.len() + algorithm]
    }

    pub fn runs_of(&self, instance: usize) -> &[RunRecord] {
        let n = self.algorithms.len();
        &self.runs[instance * n..(instance + 1) * n]
    }

    /// CPU seconds actually spent by a run that is stopped at the cutoff.
    pub fn capped_runtime(&self, instance: usize, algorithm: usize) -> f64 {
        self.run(instance, algorithm).runtime.min(self.cutoff)
    }
}

/// Descriptive statistics, all times in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioStats {
    pub n_instances: usize,
    pub n_algorithms: usize,
    pub n_features: usize,
    pub total_time: f64,
    pub vbs_time: f64,
    pub sbs_time: f64,
}

impl ScenarioStats {
    pub fn hours(seconds: f64) -> f64 {
        seconds / 3600.0
    }
}

pub fn scenario_stats(s: &Scenario) -> ScenarioStats {
    let n_alg = s.n_algorithms();
    let mut total = 0.0;
    let mut vbs = 0.0;
    let mut per_alg = vec![0.0; n_alg];
    for i in 0..s.n_instances() {
        let mut best = f64::INFINITY;
        for (a, col) in per_alg.iter_mut().enumerate() {
            let t = s.capped_runtime(i, a);
            total += t;
            *col += t;
            best = best.min(t);
        }
        vbs += best;
    }
    let sbs = per_alg.iter().copied().fold(f64::INFINITY, f64::min);
    ScenarioStats {
        n_instances: s.n_instances(),
        n_algorithms: n_alg,
        n_features: s.n_features(),
        total_time: total,
        vbs_time: vbs,
        sbs_time: sbs,
    }
}

/// Required fields of `description.txt`.
#[derive(Debug, Clone, PartialEq)]
struct Description {
    scenario_id: String,
    cutoff: f64,
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    for q in ['\'', '"'] {
        if let Some(inner) = s.strip_prefix(q).and_then(|r| r.strip_suffix(q)) {
            return inner;
        }
    }
    s
}

/// Reads the "key: value" lines of an ASLib description. List values may be
/// given inline (`[a, b]`) or as following `- item` lines.
fn parse_description(text: &str) -> Result<Description, ScenarioError> {
    let mut fields: HashMap<String, Vec<String>> = HashMap::new();
    let mut current: Option<String> = None;
    for raw in text.lines() {
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let trimmed = raw.trim();
        if let Some(item) = trimmed.strip_prefix('-') {
            if let Some(key) = &current {
                fields
                    .entry(key.clone())
                    .or_default()
                    .push(unquote(item).to_string());
            }
            continue;
        }
        if raw.starts_with(char::is_whitespace) {
            current = None;
            continue;
        }
        let Some((key, value)) = trimmed.split_once(':') else {
            current = None;
            continue;
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        let values: Vec<String> = if let Some(inner) =
            value.strip_prefix('[').and_then(|v| v.strip_suffix(']'))
        {
            inner
                .split(',')
                .map(|v| unquote(v).to_string())
                .filter(|v| !v.is_empty())
                .collect()
        } else if value.is_empty() {
            Vec::new()
        } else {
            vec![unquote(value).to_string()]
        };
        fields.insert(key.clone(), values);
        current = Some(key);
    }

    let first = |key: &str| -> Result<String, ScenarioError> {
        fields
            .get(key)
            .and_then(|v| v.first())
            .cloned()
            .ok_or_else(|| ScenarioError::Description(format!("missing required key `{key}`")))
    };
    let scenario_id = first("scenario_id")?;
    let perf = first("performance_type")?;
    if !perf.eq_ignore_ascii_case("runtime") {
        return Err(ScenarioError::NotRuntime(format!("performance_type = {perf}")));
    }
    let maximize = first("maximize")?;
    if !maximize.eq_ignore_ascii_case("false") {
        return Err(ScenarioError::NotRuntime(format!("maximize = {maximize}")));
    }
    let cutoff_text = first("algorithm_cutoff_time")?;
    let cutoff: f64 = cutoff_text.parse().map_err(|_| {
        ScenarioError::Description(format!("algorithm_cutoff_time `{cutoff_text}` is not a number"))
    })?;
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(ScenarioError::Description(format!(
            "algorithm_cutoff_time must be positive, got {cutoff}"
        )));
    }
    Ok(Description {
        scenario_id,
        cutoff,
    })
}

fn read_file(path: &Path) -> Result<String, ScenarioError> {
    if !path.exists() {
        return Err(ScenarioError::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_arff(path: &Path) -> Result<ArffRelation, ScenarioError> {
    parse_arff(&read_file(path)?).map_err(|source| ScenarioError::Arff {
        file: path.to_path_buf(),
        source,
    })
}

fn column(rel: &ArffRelation, file: &Path, name: &str) -> Result<usize, ScenarioError> {
    rel.column(name).ok_or_else(|| ScenarioError::MissingColumn {
        file: file.to_path_buf(),
        column: name.to_string(),
    })
}

fn repetition(v: &Value) -> i64 {
    v.as_number().map(|x| x.round() as i64).unwrap_or(1)
}

/// Per-instance values of a `instance_id, repetition, ...` table, first repetition only.
struct InstanceTable {
    names: Vec<String>,
    values: Vec<Vec<Option<f64>>>,
}

fn instance_table(rel: &ArffRelation, file: &Path) -> Result<InstanceTable, ScenarioError> {
    let id_col = column(rel, file, "instance_id")?;
    let rep_col = rel.column("repetition");
    let value_cols: Vec<usize> = (0..rel.attributes.len())
        .filter(|&c| c != id_col && Some(c) != rep_col)
        .collect();
    for &c in &value_cols {
        if rel.attributes[c].kind != AttributeKind::Numeric {
            return Err(ScenarioError::Invalid(format!(
                "{}: column `{}` is not numeric",
                file.display(),
                rel.attributes[c].name
            )));
        }
    }
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut seen = HashMap::new();
    for row in &rel.rows {
        if rep_col.is_some_and(|c| repetition(&row[c]) != 1) {
            continue;
        }
        let name = row[id_col].as_text().ok_or_else(|| {
            ScenarioError::Invalid(format!("{}: missing instance_id", file.display()))
        })?;
        if seen.insert(name.clone(), names.len()).is_some() {
            return Err(ScenarioError::Duplicate {
                file: file.to_path_buf(),
                key: name,
            });
        }
        names.push(name);
        values.push(value_cols.iter().map(|&c| row[c].as_number()).collect());
    }
    Ok(InstanceTable { names, values })
}

/// Loads an ASLib scenario directory.
///
/// Non-`ok` run statuses become [`RunStatus::Timeout`] when the recorded
/// runtime reaches the cutoff (or is missing) and [`RunStatus::OtherFailure`]
/// otherwise. An `ok` run recorded above the cutoff counts as a timeout.
pub fn load_scenario(dir: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let dir = dir.as_ref();
    let desc = parse_description(&read_file(&dir.join("description.txt"))?)?;
    let runs_path = dir.join("algorithm_runs.arff");
    let feats_path = dir.join("feature_values.arff");
    let runs_rel = read_arff(&runs_path)?;
    let feats_rel = read_arff(&feats_path)?;

    let feats = instance_table(&feats_rel, &feats_path)?;
    let id_col = column(&feats_rel, &feats_path, "instance_id")?;
    let rep_col = feats_rel.column("repetition");
    let features: Vec<String> = feats_rel
        .attributes
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != id_col && Some(c) != rep_col)
        .map(|(_, a)| a.name.clone())
        .collect();
    let index: HashMap<String, usize> = feats
        .names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();

    let inst_col = column(&runs_rel, &runs_path, "instance_id")?;
    let rep_col = runs_rel.column("repetition");
    let alg_col = column(&runs_rel, &runs_path, "algorithm")?;
    let rt_col = column(&runs_rel, &runs_path, "runtime")?;
    let st_col = column(&runs_rel, &runs_path, "runstatus")?;

    let mut algorithms: Vec<String> = Vec::new();
    let mut alg_index: HashMap<String, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), RunRecord> = HashMap::new();
    for row in &runs_rel.rows {
        if rep_col.is_some_and(|c| repetition(&row[c]) != 1) {
            continue;
        }
        let inst = row[inst_col].as_text().unwrap_or_default();
        let &i = index
            .get(inst.as_str())
            .ok_or_else(|| ScenarioError::UnknownInstance {
                file: runs_path.clone(),
                instance: inst.clone(),
            })?;
        let alg = row[alg_col].as_text().ok_or_else(|| {
            ScenarioError::Invalid(format!("{}: missing algorithm", runs_path.display()))
        })?;
        let a = *alg_index.entry(alg.clone()).or_insert_with(|| {
            algorithms.push(alg.clone());
            algorithms.len() - 1
        });
        let status_text = row[st_col].as_text().unwrap_or_default();
        let runtime = row[rt_col].as_number();
        let record = match (status_text.eq_ignore_ascii_case("ok"), runtime) {
            (true, Some(rt)) if rt <= desc.cutoff => RunRecord {
                runtime: rt,
                status: RunStatus::Ok,
            },
            (true, Some(rt)) => RunRecord {
                runtime: rt,
                status: RunStatus::Timeout,
            },
            (true, None) => {
                return Err(ScenarioError::Invalid(format!(
                    "{}: solved run of `{alg}` on `{inst}` has no runtime",
                    runs_path.display()
                )))
            }
            (false, Some(rt)) if rt < desc.cutoff => RunRecord {
                runtime: rt,
                status: RunStatus::OtherFailure,
            },
            (false, rt) => RunRecord {
                runtime: rt.unwrap_or(desc.cutoff),
                status: RunStatus::Timeout,
            },
        };
        if cells.insert((i, a), record).is_some() {
            return Err(ScenarioError::Duplicate {
                file: runs_path.clone(),
                key: format!("{inst} / {alg}"),
            });
        }
    }

    let mut runs = Vec::with_capacity(feats.names.len());
    for (i, name) in feats.names.iter().enumerate() {
        let mut row = Vec::with_capacity(algorithms.len());
        for (a, alg) in algorithms.iter().enumerate() {
            let rec = cells.get(&(i, a)).ok_or_else(|| ScenarioError::NonTotal {
                instance: name.clone(),
                algorithm: alg.clone(),
            })?;
            row.push(*rec);
        }
        runs.push(row);
    }

    let mut scenario = Scenario::new(
        desc.scenario_id,
        algorithms,
        features,
        feats.names,
        feats.values,
        runs,
        desc.cutoff,
    )?;

    let costs_path = dir.join("feature_costs.arff");
    if costs_path.exists() {
        let costs_rel = read_arff(&costs_path)?;
        let table = instance_table(&costs_rel, &costs_path)?;
        let mut costs = vec![None; scenario.n_instances()];
        for (name, vals) in table.names.iter().zip(table.values) {
            let &i = index
                .get(name.as_str())
                .ok_or_else(|| ScenarioError::UnknownInstance {
                    file: costs_path.clone(),
                    instance: name.clone(),
                })?;
            if vals.iter().any(Option::is_some) {
                costs[i] = Some(vals.iter().flatten().sum());
            }
        }
        scenario.feature_costs = Some(costs);
    }
    Ok(scenario)
}

/// Writes `s` as an ASLib directory (description, runs and feature tables).
pub fn write_scenario(s: &Scenario, dir: impl AsRef<Path>) -> std::io::Result<()> {
    use super::arff::Attribute;
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let description = format!(
        "scenario_id: {}\nperformance_measures:\n  - runtime\nmaximize:\n  - false\n\
         performance_type:\n  - runtime\nalgorithm_cutoff_time: {}\nalgorithm_cutoff_memory: ?\n",
        s.id, s.cutoff
    );
    fs::write(dir.join("description.txt"), description)?;

    let attr = |name: &str, kind: AttributeKind| Attribute {
        name: name.to_string(),
        kind,
    };
    let mut runs = ArffRelation {
        name: format!("{}_runs", s.id),
        attributes: vec![
            attr("instance_id", AttributeKind::String),
            attr("repetition", AttributeKind::Numeric),
            attr("algorithm", AttributeKind::String),
            attr("runtime", AttributeKind::Numeric),
            attr(
                "runstatus",
                AttributeKind::Nominal(vec!["ok".into(), "timeout".into(), "crash".into()]),
            ),
        ],
        rows: Vec::new(),
    };
    for (i, inst) in s.instances.iter().enumerate() {
        for (a, alg) in s.algorithms.iter().enumerate() {
            let r = s.run(i, a);
            let status = match r.status {
                RunStatus::Ok => "ok",
                RunStatus::Timeout => "timeout",
                RunStatus::OtherFailure => "crash",
            };
            runs.rows.push(vec![
                Value::Text(inst.clone()),
                Value::Number(1.0),
                Value::Text(alg.clone()),
                Value::Number(r.runtime),
                Value::Text(status.into()),
            ]);
        }
    }
    fs::write(dir.join("algorithm_runs.arff"), runs.to_string())?;

    let mut attributes = vec![
        attr("instance_id", AttributeKind::String),
        attr("repetition", AttributeKind::Numeric),
    ];
    attributes.extend(s.features.iter().map(|f| attr(f, AttributeKind::Numeric)));
    let feats = ArffRelation {
        name: format!("{}_features", s.id),
        attributes,
        rows: s
            .instances
            .iter()
            .zip(&s.feature_values)
            .map(|(inst, vals)| {
                let mut row = vec![Value::Text(inst.clone()), Value::Number(1.0)];
                row.extend(vals.iter().map(|v| v.map_or(Value::Missing, Value::Number)));
                row
            })
            .collect(),
    };
    fs::write(dir.join("feature_values.arff"), feats.to_string())
}
