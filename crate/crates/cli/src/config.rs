//! Experiment configuration: TOML with a fixed schema.
//!
//! Parsing happens in three passes so that a single run reports every
//! problem at once: unknown keys are collected against the schema (with a
//! spelling suggestion), then the table is deserialized into typed sections,
//! then values are checked for consistency.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted location, e.g. `grids.eps_grid`.
    pub path: String,
    pub message: String,
    pub suggestion: Option<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)?;
        } else {
            write!(f, "{}: {}", self.path, self.message)?;
        }
        if let Some(s) = &self.suggestion {
            write!(f, " (did you mean `{s}`?)")?;
        }
        Ok(())
    }
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into(), suggestion: None }
    }
}

/// All problems found in one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    pub system: SystemConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub target: TargetConfig,
    #[serde(default)]
    pub grids: GridsConfig,
    pub task: TaskConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<MeasuresConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Dotted key → list of values; expanded by the `sweep` verb.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sweep: BTreeMap<String, toml::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Circle,
    Interval,
    Torus,
    Symbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub space: SpaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<usize>,
    /// Stored length of symbol strings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default)]
    pub preamble: Vec<Vec<MapConfig>>,
    pub period: Vec<Vec<MapConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    AffineMod1 {
        slope: i64,
        #[serde(default)]
        offset: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        left_values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    ContinuousPiecewiseLinear {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        start: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    AffineContraction {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    Shift {
        #[serde(default)]
        fill: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKindConfig {
    #[default]
    Zero,
    Constant,
    Affine,
    SymbolTable,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default)]
    pub kind: PotentialKindConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    #[default]
    Whole,
    Cylinders,
    Points,
    /// Evenly spaced points on `[start, start + length)`.
    Arc,
}

/// A point as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointConfig {
    Int(i64),
    Real(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(default)]
    pub kind: TargetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PointConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Cylinder length (symbolic) or grid size (continuous) of the sample of `Z`.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub fill: u8,
}

fn default_resolution() -> usize {
    10
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig {
            kind: TargetKind::Whole,
            words: None,
            points: None,
            start: None,
            length: None,
            count: None,
            resolution: default_resolution(),
            fill: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MetricConfig {
    Dn,
    #[default]
    DnStar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsConfig {
    /// Orbit lengths for the entropy table.
    #[serde(default)]
    pub n_range: Vec<usize>,
    #[serde(default)]
    pub eps_grid: Vec<f64>,
    #[serde(default)]
    pub delta_grid: Vec<f64>,
    /// Minimal cover lengths `N`.
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub metric: MetricConfig,
    /// Sample used by the entropy estimator; defaults to the target sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_resolution: Option<usize>,
    /// Extra ball centres for the cover estimators, sampled from the whole space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_resolution: Option<usize>,
    #[serde(default = "default_node_budget")]
    pub node_budget: u64,
    #[serde(default = "default_beam_width")]
    pub beam_width: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_expansions")]
    pub max_expansions: usize,
}

fn default_window() -> usize {
    3
}
fn default_node_budget() -> u64 {
    1 << 22
}
fn default_beam_width() -> usize {
    4096
}
fn default_tol() -> f64 {
    1e-3
}
fn default_max_expansions() -> usize {
    60
}

impl Default for GridsConfig {
    fn default() -> Self {
        GridsConfig {
            n_range: Vec::new(),
            eps_grid: Vec::new(),
            delta_grid: Vec::new(),
            n_grid: Vec::new(),
            window: default_window(),
            metric: MetricConfig::default(),
            sample_resolution: None,
            pool_resolution: None,
            node_budget: default_node_budget(),
            beam_width: default_beam_width(),
            tol: default_tol(),
            max_expansions: default_max_expansions(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    SupEntropy,
    PpPressure,
    Capacity,
    Weighted,
    MeasurePressure,
    Variational,
    CheckSuite,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::SupEntropy => "sup_entropy",
            TaskKind::PpPressure => "pp_pressure",
            TaskKind::Capacity => "capacity",
            TaskKind::Weighted => "weighted",
            TaskKind::MeasurePressure => "measure_pressure",
            TaskKind::Variational => "variational",
            TaskKind::CheckSuite => "check_suite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub kind: TaskKind,
    /// Exponent for the weighted task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Exponent shift of the sandwich inequality.
    #[serde(default = "default_eps_shift")]
    pub eps: f64,
    /// Ball radius for the weighted task; defaults to the smallest of `grids.delta_grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Cover lengths for the weighted task; defaults to `grids.n_grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
    #[serde(default = "default_threshold")]
    pub n_threshold: usize,
    /// Known pressure; replaces the cover estimate in measure-side tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    /// Test values `s` for the two-part local-pressure bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<f64>>,
    /// Allowed excess of measure pressures over the pressure.
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
}

fn default_eps_shift() -> f64 {
    0.2
}
fn default_threshold() -> usize {
    6
}
fn default_gap_tol() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Explicit probability vectors.
    Bernoulli,
    /// Two-symbol Bernoulli measures with `p = k/(steps + 1)`, `k = 1..=steps`.
    BernoulliSweep,
    /// Empirical measure of uniform draws.
    UniformSample,
    /// Weighted atoms.
    Atomic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationConfig {
    #[default]
    MonteCarlo,
    ExactAtomic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuresConfig {
    pub family: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PointConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_r_grid")]
    pub r_grid: Vec<f64>,
    #[serde(default = "default_n_window")]
    pub n_window: [usize; 2],
    #[serde(default)]
    pub integration: IntegrationConfig,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_r_grid() -> Vec<f64> {
    vec![0.5, 0.25, 0.125]
}
fn default_n_window() -> [usize; 2] {
    [200, 300]
}
fn default_samples() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
}

fn default_directory() -> String {
    "pressure-out".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: default_directory() }
    }
}

// ---------------------------------------------------------------------------
// schema

const TOP: &[&str] = &["seed", "system", "potential", "target", "grids", "task", "measures", "output", "sweep"];
const REQUIRED: &[&str] = &["system", "task"];
const SYSTEM: &[&str] = &["space", "alphabet", "length", "dim", "preamble", "period"];
const POTENTIAL: &[&str] = &["kind", "value", "weights", "offset", "values", "nodes", "shift"];
const TARGET: &[&str] = &["kind", "words", "points", "start", "length", "count", "resolution", "fill"];
const GRIDS: &[&str] = &[
    "n_range",
    "eps_grid",
    "delta_grid",
    "n_grid",
    "window",
    "metric",
    "sample_resolution",
    "pool_resolution",
    "node_budget",
    "beam_width",
    "tol",
    "max_expansions",
];
const TASK: &[&str] = &["kind", "alpha", "eps", "delta", "n_values", "n_threshold", "reference", "probes", "gap_tol"];
const MEASURES: &[&str] =
    &["family", "probs", "steps", "count", "points", "weights", "r_grid", "n_window", "integration", "samples"];
const OUTPUT: &[&str] = &["directory"];

fn section_keys(name: &str) -> Option<&'static [&'static str]> {
    Some(match name {
        "system" => SYSTEM,
        "potential" => POTENTIAL,
        "target" => TARGET,
        "grids" => GRIDS,
        "task" => TASK,
        "measures" => MEASURES,
        "output" => OUTPUT,
        _ => return None,
    })
}

fn map_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "affine_mod1" => &["kind", "lipschitz", "slope", "offset"],
        "piecewise_linear" => &["kind", "lipschitz", "breakpoints", "slopes", "left_values"],
        "continuous_piecewise_linear" => &["kind", "lipschitz", "breakpoints", "slopes", "start"],
        "affine_contraction" => &["kind", "lipschitz", "matrix", "offset"],
        "shift" => &["kind", "lipschitz", "fill"],
        _ => return None,
    })
}

const MAP_KINDS: &[&str] = &["affine_mod1", "piecewise_linear", "continuous_piecewise_linear", "affine_contraction", "shift"];

/// Closest known key, if any is reasonably close.
pub fn suggest(key: &str, known: &[&str]) -> Option<String> {
    let mut best: Option<(f64, &str)> = None;
    for k in known {
        let mut score = strsim::jaro_winkler(key, k).max(strsim::normalized_damerau_levenshtein(key, k));
        // `epsilon` for `eps_grid`: the leading word of a key is often spelled out
        let stem = k.split('_').next().unwrap_or(k);
        if stem.len() >= 2 && key.starts_with(stem) {
            score = score.max(0.75);
        }
        if score >= 0.7 && best.is_none_or(|(s, _)| score > s) {
            best = Some((score, k));
        }
    }
    best.map(|(_, k)| k.to_string())
}

fn unknown(path: String, key: &str, known: &[&str]) -> ConfigError {
    ConfigError { path, message: "unknown key".into(), suggestion: suggest(key, known) }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Unknown keys and missing sections, without looking at value types.
pub fn schema_errors(table: &toml::Table) -> Vec<ConfigError> {
    let mut errs = Vec::new();
    for (key, value) in table {
        if !TOP.contains(&key.as_str()) {
            errs.push(unknown(key.clone(), key, TOP));
            continue;
        }
        let Some(keys) = section_keys(key) else { continue };
        let Some(inner) = value.as_table() else {
            errs.push(ConfigError::new(key.clone(), "expected a table"));
            continue;
        };
        for (k, v) in inner {
            let path = join(key, k);
            if !keys.contains(&k.as_str()) {
                errs.push(unknown(path, k, keys));
                continue;
            }
            if key == "system" && (k == "preamble" || k == "period") {
                map_schema_errors(&path, v, &mut errs);
            }
        }
    }
    for s in REQUIRED {
        if !table.contains_key(*s) {
            errs.push(ConfigError::new(*s, "missing section"));
        }
    }
    errs
}

fn map_schema_errors(path: &str, schedule: &toml::Value, errs: &mut Vec<ConfigError>) {
    let Some(families) = schedule.as_array() else { return };
    for (j, fam) in families.iter().enumerate() {
        let Some(maps) = fam.as_array() else { continue };
        for (i, m) in maps.iter().enumerate() {
            let here = format!("{path}[{j}][{i}]");
            let Some(t) = m.as_table() else { continue };
            let Some(kind) = t.get("kind").and_then(|k| k.as_str()) else {
                errs.push(ConfigError::new(here, "map needs a `kind`"));
                continue;
            };
            let Some(keys) = map_keys(kind) else {
                errs.push(ConfigError {
                    path: join(&here, "kind"),
                    message: format!("unknown map kind `{kind}`"),
                    suggestion: suggest(kind, MAP_KINDS),
                });
                continue;
            };
            for k in t.keys() {
                if !keys.contains(&k.as_str()) {
                    errs.push(unknown(join(&here, k), k, keys));
                }
            }
        }
    }
}

/// Parses and validates a configuration, collecting every problem found.
pub fn parse(text: &str) -> Result<Config, ConfigErrors> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigError::new("", format!("TOML syntax: {}", e.message()))])
    })?;
    from_table(table)
}

pub fn from_table(table: toml::Table) -> Result<Config, ConfigErrors> {
    let errs = schema_errors(&table);
    if !errs.is_empty() {
        return Err(ConfigErrors(errs));
    }
    // typed pass, one section at a time so that each section reports its own error
    let mut errs = Vec::new();
    for (key, value) in &table {
        let res = match key.as_str() {
            "seed" => value.clone().try_into::<u64>().map(|_| ()),
            "system" => value.clone().try_into::<SystemConfig>().map(|_| ()),
            "potential" => value.clone().try_into::<PotentialConfig>().map(|_| ()),
            "target" => value.clone().try_into::<TargetConfig>().map(|_| ()),
            "grids" => value.clone().try_into::<GridsConfig>().map(|_| ()),
            "task" => value.clone().try_into::<TaskConfig>().map(|_| ()),
            "measures" => value.clone().try_into::<MeasuresConfig>().map(|_| ()),
            "output" => value.clone().try_into::<OutputConfig>().map(|_| ()),
            _ => Ok(()),
        };
        if let Err(e) = res {
            errs.push(ConfigError::new(key.clone(), e.message().trim().to_string()));
        }
    }
    if !errs.is_empty() {
        return Err(ConfigErrors(errs));
    }
    let cfg: Config = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![ConfigError::new("", e.message().trim().to_string())]))?;
    let errs = cfg.semantic_errors();
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errs))
    }
}

fn positive(path: &str, values: &[f64], errs: &mut Vec<ConfigError>) {
    for (i, v) in values.iter().enumerate() {
        if !(*v > 0.0) || !v.is_finite() {
            errs.push(ConfigError::new(format!("{path}[{i}]"), format!("expected a positive number, got {v}")));
        }
    }
}

fn ordered<T: PartialOrd + fmt::Display>(path: &str, v: &[T], decreasing: bool, errs: &mut Vec<ConfigError>) {
    for (i, w) in v.windows(2).enumerate() {
        let ok = if decreasing { w[1] < w[0] } else { w[1] > w[0] };
        if !ok {
            let how = if decreasing { "strictly decreasing" } else { "strictly increasing" };
            errs.push(ConfigError::new(path, format!("must be {how} (entries {i} and {}: {}, {})", i + 1, w[0], w[1])));
            return;
        }
    }
}

fn need<T>(path: &str, v: &[T], task: TaskKind, errs: &mut Vec<ConfigError>) {
    if v.is_empty() {
        errs.push(ConfigError::new(path, format!("required by task `{}`", task.name())));
    }
}

impl Config {
    /// Value checks that do not need the core library.
    pub fn semantic_errors(&self) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        let s = &self.system;
        match s.space {
            SpaceKind::Symbolic => {
                if s.alphabet.is_none() {
                    errs.push(ConfigError::new("system.alphabet", "required for symbolic spaces"));
                }
                if s.length.is_none() {
                    errs.push(ConfigError::new("system.length", "required for symbolic spaces"));
                }
            }
            SpaceKind::Torus
                if s.dim.is_none() => {
                    errs.push(ConfigError::new("system.dim", "required for torus spaces"));
                }
            _ => {}
        }
        if s.period.is_empty() {
            errs.push(ConfigError::new("system.period", "needs at least one family"));
        }
        let g = &self.grids;
        positive("grids.eps_grid", &g.eps_grid, &mut errs);
        positive("grids.delta_grid", &g.delta_grid, &mut errs);
        ordered("grids.eps_grid", &g.eps_grid, true, &mut errs);
        ordered("grids.delta_grid", &g.delta_grid, true, &mut errs);
        ordered("grids.n_range", &g.n_range, false, &mut errs);
        ordered("grids.n_grid", &g.n_grid, false, &mut errs);
        if !(g.tol > 0.0) {
            errs.push(ConfigError::new("grids.tol", "must be positive"));
        }
        if g.node_budget == 0 {
            errs.push(ConfigError::new("grids.node_budget", "must be positive"));
        }
        if g.beam_width == 0 {
            errs.push(ConfigError::new("grids.beam_width", "must be positive"));
        }
        let t = &self.task;
        match t.kind {
            TaskKind::SupEntropy => {
                need("grids.n_range", &g.n_range, t.kind, &mut errs);
                need("grids.eps_grid", &g.eps_grid, t.kind, &mut errs);
            }
            TaskKind::PpPressure | TaskKind::Capacity => {
                need("grids.delta_grid", &g.delta_grid, t.kind, &mut errs);
                need("grids.n_grid", &g.n_grid, t.kind, &mut errs);
            }
            TaskKind::Weighted => {
                if t.alpha.is_none() {
                    errs.push(ConfigError::new("task.alpha", "required by task `weighted`"));
                }
                if t.delta.is_none() {
                    need("grids.delta_grid", &g.delta_grid, t.kind, &mut errs);
                }
                if t.n_values.is_none() {
                    need("grids.n_grid", &g.n_grid, t.kind, &mut errs);
                }
            }
            TaskKind::MeasurePressure => {
                if self.measures.is_none() {
                    errs.push(ConfigError::new("measures", "section required by task `measure_pressure`"));
                }
            }
            TaskKind::Variational => {
                if self.measures.is_none() {
                    errs.push(ConfigError::new("measures", "section required by task `variational`"));
                }
                if t.reference.is_none() {
                    need("grids.delta_grid", &g.delta_grid, t.kind, &mut errs);
                    need("grids.n_grid", &g.n_grid, t.kind, &mut errs);
                }
            }
            TaskKind::CheckSuite => {
                need("grids.n_range", &g.n_range, t.kind, &mut errs);
                need("grids.eps_grid", &g.eps_grid, t.kind, &mut errs);
                need("grids.delta_grid", &g.delta_grid, t.kind, &mut errs);
                need("grids.n_grid", &g.n_grid, t.kind, &mut errs);
            }
        }
        if let Some(m) = &self.measures {
            positive("measures.r_grid", &m.r_grid, &mut errs);
            ordered("measures.r_grid", &m.r_grid, true, &mut errs);
            if m.r_grid.is_empty() {
                errs.push(ConfigError::new("measures.r_grid", "must not be empty"));
            }
            if m.n_window[0] == 0 || m.n_window[0] > m.n_window[1] {
                errs.push(ConfigError::new("measures.n_window", "expected [lo, hi] with 1 ≤ lo ≤ hi"));
            }
            if m.samples == 0 {
                errs.push(ConfigError::new("measures.samples", "must be positive"));
            }
            let field = |name: &str, present: bool, errs: &mut Vec<ConfigError>| {
                if !present {
                    errs.push(ConfigError::new(format!("measures.{name}"), "required by this family"));
                }
            };
            match m.family {
                FamilyKind::Bernoulli => field("probs", m.probs.is_some(), &mut errs),
                FamilyKind::BernoulliSweep => field("steps", m.steps.is_some(), &mut errs),
                FamilyKind::UniformSample => field("count", m.count.is_some(), &mut errs),
                FamilyKind::Atomic => {
                    field("points", m.points.is_some(), &mut errs);
                    field("weights", m.weights.is_some(), &mut errs);
                }
            }
        }
        for (k, v) in &self.sweep {
            if !v.is_array() {
                errs.push(ConfigError::new(format!("sweep.{k}"), "expected a list of values"));
            }
        }
        errs
    }

    /// Canonical form of everything that affects results (not `output` or `sweep`).
    pub fn canonical(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "system": self.system,
            "potential": self.potential,
            "target": self.target,
            "grids": self.grids,
            "task": self.task,
            "measures": self.measures,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Flattens a `[sweep]` table into dotted paths with their value lists.
/// Both `"grids.window" = [..]` and nested `grids.window = [..]` are accepted.
pub fn sweep_axes(sweep: &BTreeMap<String, toml::Value>) -> Vec<(String, Vec<toml::Value>)> {
    fn walk(prefix: String, v: &toml::Value, out: &mut Vec<(String, Vec<toml::Value>)>) {
        match v {
            toml::Value::Table(t) => {
                for (k, v) in t {
                    walk(join(&prefix, k), v, out);
                }
            }
            toml::Value::Array(a) => out.push((prefix, a.clone())),
            other => out.push((prefix, vec![other.clone()])),
        }
    }
    let mut out = Vec::new();
    for (k, v) in sweep {
        walk(k.clone(), v, &mut out);
    }
    out
}

/// Cartesian product of the sweep axes applied to `base` (with `sweep` removed).
pub fn expand_sweep(base: &toml::Table) -> Result<Vec<(String, toml::Table)>, ConfigErrors> {
    let mut base = base.clone();
    let axes = match base.remove("sweep") {
        Some(toml::Value::Table(t)) => sweep_axes(&t.into_iter().collect()),
        Some(_) => return Err(ConfigErrors(vec![ConfigError::new("sweep", "expected a table")])),
        None => Vec::new(),
    };
    let mut out = vec![(String::new(), base)];
    for (path, values) in &axes {
        if values.is_empty() {
            return Err(ConfigErrors(vec![ConfigError::new(format!("sweep.{path}"), "empty value list")]));
        }
        let mut next = Vec::new();
        for (label, t) in &out {
            for v in values {
                let mut t = t.clone();
                set_path(&mut t, path, v.clone()).map_err(|m| ConfigErrors(vec![ConfigError::new(format!("sweep.{path}"), m)]))?;
                let part = format!("{}={}", path, v);
                let label = if label.is_empty() { part } else { format!("{label},{part}") };
                next.push((label, t));
            }
        }
        out = next;
    }
    Ok(out)
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), String> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().ok_or("empty path")?;
    let mut t = table;
    for p in parts {
        t = t
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| format!("`{p}` is not a table"))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[system]
space = "symbolic"
alphabet = 2
length = 12
period = [[{ kind = "shift" }]]

[grids]
n_range = [2, 3, 4]
eps_grid = [0.5, 0.25]

[task]
kind = "sup_entropy"
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.grids.metric, MetricConfig::DnStar);
        assert_eq!(cfg.system.period[0][0], MapConfig::Shift { fill: 0, lipschitz: None });
        assert_eq!(cfg.potential.kind, PotentialKindConfig::Zero);
    }

    #[test]
    fn misspelled_key_gets_a_suggestion() {
        let text = MINIMAL.replace("eps_grid", "epsilonn");
        let errs = parse(&text).unwrap_err();
        assert_eq!(errs.0.len(), 1);
        assert_eq!(errs.0[0].path, "grids.epsilonn");
        assert_eq!(errs.0[0].suggestion.as_deref(), Some("eps_grid"));
    }

    #[test]
    fn all_problems_are_reported_together() {
        let text = MINIMAL.replace("[task]\nkind = \"sup_entropy\"\n", "").replace("length", "lenght")
            + "\n[output]\ndirectroy = \"x\"\n";
        let errs = parse(&text).unwrap_err();
        let paths: Vec<&str> = errs.0.iter().map(|e| e.path.as_str()).collect();
        assert!(paths.contains(&"system.lenght"), "{paths:?}");
        assert!(paths.contains(&"output.directroy"), "{paths:?}");
        assert!(paths.contains(&"task"), "{paths:?}");
    }

    #[test]
    fn map_keys_are_checked_per_kind() {
        let text = MINIMAL.replace("{ kind = \"shift\" }", "{ kind = \"shift\", slope = 2 }");
        let errs = parse(&text).unwrap_err();
        assert_eq!(errs.0[0].path, "system.period[0][0].slope");
        let text = MINIMAL.replace("{ kind = \"shift\" }", "{ kind = \"shfit\" }");
        let errs = parse(&text).unwrap_err();
        assert_eq!(errs.0[0].suggestion.as_deref(), Some("shift"));
    }

    #[test]
    fn type_errors_are_reported_per_section() {
        let text = MINIMAL.replace("eps_grid = [0.5, 0.25]", "eps_grid = \"small\"").replace("length = 12", "length = -1");
        let errs = parse(&text).unwrap_err();
        let paths: Vec<&str> = errs.0.iter().map(|e| e.path.as_str()).collect();
        assert_eq!(paths, vec!["grids", "system"]);
    }

    #[test]
    fn increasing_delta_grid_is_named() {
        let text = MINIMAL.replace("eps_grid = [0.5, 0.25]", "eps_grid = [0.5, 0.25]\ndelta_grid = [0.125, 0.25]");
        let errs = parse(&text).unwrap_err();
        assert_eq!(errs.0.len(), 1);
        assert_eq!(errs.0[0].path, "grids.delta_grid");
        assert!(errs.0[0].message.contains("decreasing"));
    }

    #[test]
    fn task_requirements_are_checked() {
        let text = MINIMAL.replace("sup_entropy", "weighted");
        let errs = parse(&text).unwrap_err();
        let paths: Vec<&str> = errs.0.iter().map(|e| e.path.as_str()).collect();
        assert_eq!(paths, vec!["task.alpha", "grids.delta_grid", "grids.n_grid"]);
    }

    #[test]
    fn config_survives_toml_round_trip() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn sweep_is_a_cartesian_product() {
        let text = format!("{MINIMAL}\n[sweep]\n\"grids.window\" = [2, 3]\nseed = [1, 2, 3]\n");
        let table: toml::Table = text.parse().unwrap();
        let runs = expand_sweep(&table).unwrap();
        assert_eq!(runs.len(), 6);
        let cfgs: Vec<Config> = runs.into_iter().map(|(_, t)| from_table(t).unwrap()).collect();
        assert_eq!(cfgs[0].grids.window, 2);
        assert_eq!(cfgs[0].seed, 1);
        assert_eq!(cfgs[5].grids.window, 3);
        assert_eq!(cfgs[5].seed, 3);
        assert!(cfgs.iter().all(|c| c.sweep.is_empty()));
    }
}
