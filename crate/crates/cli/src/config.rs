//! Experiment configuration: TOML schema, `--set` overrides and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use gnsq::analysis::{MPolicy, Method};
use gnsq::graph::CloudKind;
use gnsq::quant::Alphabet;
use gnsq::shape::{Algorithm, DEFAULT_EPOCHS};
use serde::{Deserialize, Serialize};

/// A configuration problem located by its dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config field `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Grid,
    Cycle,
    Star,
    EdgeList,
    /// Points from a CSV file (`x,y,z` per row, optional header).
    PointCloud,
    /// Generated point cloud.
    Synthetic,
}

/// `[graph]` table. Which fields are required depends on `kind`:
///
/// | kind          | fields                       |
/// |---------------|------------------------------|
/// | `grid`        | `rows`, `cols`               |
/// | `cycle`       | `n`                          |
/// | `star`        | `leaves`                     |
/// | `edge_list`   | `path`                       |
/// | `point_cloud` | `path`, `k`, `sigma`?        |
/// | `synthetic`   | `cloud`, `n`, `k`, `sigma`?, `seed`? |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub kind: GraphKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaves: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<CloudKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A fully specified graph source.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Grid { rows: usize, cols: usize },
    Cycle { n: usize },
    Star { leaves: usize },
    EdgeList { path: PathBuf },
    PointCloud { path: PathBuf, k: usize, sigma: Option<f64> },
    Synthetic { cloud: CloudKind, n: usize, k: usize, sigma: Option<f64>, seed: u64 },
}

impl GraphConfig {
    pub fn grid(rows: usize, cols: usize) -> Self {
        Self {
            rows: Some(rows),
            cols: Some(cols),
            ..Self::empty(GraphKind::Grid)
        }
    }

    pub fn cycle(n: usize) -> Self {
        Self {
            n: Some(n),
            ..Self::empty(GraphKind::Cycle)
        }
    }

    pub fn synthetic(cloud: CloudKind, n: usize, k: usize, seed: u64) -> Self {
        Self {
            cloud: Some(cloud),
            n: Some(n),
            k: Some(k),
            seed: Some(seed),
            ..Self::empty(GraphKind::Synthetic)
        }
    }

    fn empty(kind: GraphKind) -> Self {
        Self {
            kind,
            rows: None,
            cols: None,
            n: None,
            leaves: None,
            path: None,
            k: None,
            sigma: None,
            cloud: None,
            seed: None,
        }
    }

    pub fn is_point_cloud(&self) -> bool {
        matches!(self.kind, GraphKind::PointCloud | GraphKind::Synthetic)
    }

    /// Checks that exactly the fields `kind` uses are present.
    pub fn resolve(&self) -> Result<GraphSource, ConfigError> {
        let kind = serde_json::to_value(self.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let present: [(&str, bool); 9] = [
            ("rows", self.rows.is_some()),
            ("cols", self.cols.is_some()),
            ("n", self.n.is_some()),
            ("leaves", self.leaves.is_some()),
            ("path", self.path.is_some()),
            ("k", self.k.is_some()),
            ("sigma", self.sigma.is_some()),
            ("cloud", self.cloud.is_some()),
            ("seed", self.seed.is_some()),
        ];
        let (required, optional): (&[&str], &[&str]) = match self.kind {
            GraphKind::Grid => (&["rows", "cols"], &[]),
            GraphKind::Cycle => (&["n"], &[]),
            GraphKind::Star => (&["leaves"], &[]),
            GraphKind::EdgeList => (&["path"], &[]),
            GraphKind::PointCloud => (&["path", "k"], &["sigma"]),
            GraphKind::Synthetic => (&["cloud", "n", "k"], &["sigma", "seed"]),
        };
        for (name, is_set) in present {
            let field = format!("graph.{name}");
            if required.contains(&name) && !is_set {
                return Err(ConfigError::new(field, format!("required for kind `{kind}`")));
            }
            if is_set && !required.contains(&name) && !optional.contains(&name) {
                return Err(ConfigError::new(field, format!("not used by kind `{kind}`")));
            }
        }
        let req = |v: Option<usize>| v.expect("checked above");
        Ok(match self.kind {
            GraphKind::Grid => GraphSource::Grid {
                rows: req(self.rows),
                cols: req(self.cols),
            },
            GraphKind::Cycle => GraphSource::Cycle { n: req(self.n) },
            GraphKind::Star => GraphSource::Star {
                leaves: req(self.leaves),
            },
            GraphKind::EdgeList => GraphSource::EdgeList {
                path: self.path.clone().expect("checked above"),
            },
            GraphKind::PointCloud => GraphSource::PointCloud {
                path: self.path.clone().expect("checked above"),
                k: req(self.k),
                sigma: self.sigma,
            },
            GraphKind::Synthetic => GraphSource::Synthetic {
                cloud: self.cloud.expect("checked above"),
                n: req(self.n),
                k: req(self.k),
                sigma: self.sigma,
                seed: self.seed.unwrap_or(0),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: usize,
    pub stop: usize,
    #[serde(default = "one")]
    pub step: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_list: Option<Vec<usize>>,
    /// Inclusive range `start, start + step, ... <= stop`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_range: Option<RangeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn items(&self) -> Vec<String> {
        match self {
            Self::One(s) => vec![s.clone()],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// One tag or a list of tags: MSQ, SSS, SDW, PERM, SSSR.
    #[serde(default = "default_tags", alias = "tag")]
    pub tags: OneOrMany,
    #[serde(rename = "T", default = "default_epochs")]
    pub epochs: usize,
    /// `NlogN`, `<k>NlogN` or a fixed integer.
    #[serde(rename = "M", default = "default_m")]
    pub m: String,
    #[serde(rename = "M_list", default, skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<usize>>,
    #[serde(default = "default_fail_prob")]
    pub fail_prob: f64,
    /// Per-tag alphabet overriding the top-level one.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub alphabets: BTreeMap<String, String>,
}

fn default_tags() -> OneOrMany {
    OneOrMany::One("SSSR".into())
}

fn default_epochs() -> usize {
    DEFAULT_EPOCHS
}

fn default_m() -> String {
    "NlogN".into()
}

fn default_fail_prob() -> f64 {
    gnsq::analysis::DEFAULT_FAIL_PROB
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            tags: default_tags(),
            epochs: default_epochs(),
            m: default_m(),
            m_list: None,
            fail_prob: default_fail_prob(),
            alphabets: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalftoneConfig {
    /// `x`, `y`, `z` or a zero-based column index.
    #[serde(default = "default_coordinate")]
    pub coordinate: String,
    #[serde(default = "default_halftone_tags")]
    pub tags: Vec<String>,
}

fn default_coordinate() -> String {
    "z".into()
}

fn default_halftone_tags() -> Vec<String> {
    vec!["MSQ".into(), "SDW".into(), "SSSR".into()]
}

impl Default for HalftoneConfig {
    fn default() -> Self {
        Self {
            coordinate: default_coordinate(),
            tags: default_halftone_tags(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-12
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { tol: default_tol() }
    }
}

/// Halftone bandwidth when none is configured.
pub const DEFAULT_HALFTONE_R: usize = 20;

/// Default alphabet: the three levels {-1, 0, 1}, which fit in two bits.
pub const DEFAULT_ALPHABET: &str = "mt:1:1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphConfig,
    #[serde(default)]
    pub bandwidth: BandwidthConfig,
    #[serde(default)]
    pub algorithm: AlgorithmConfig,
    #[serde(default = "default_alphabet")]
    pub alphabet: String,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub halftone: HalftoneConfig,
}

fn default_alphabet() -> String {
    DEFAULT_ALPHABET.into()
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Parses `--set` values as TOML literals, falling back to a bare string.
fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

enum Step {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> Result<Vec<Step>, ConfigError> {
    let bad = || ConfigError::new(path, "malformed override path");
    let mut steps = Vec::new();
    for part in path.split('.') {
        let (name, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if name.is_empty() && steps.is_empty() {
            return Err(bad());
        }
        if !name.is_empty() {
            match name.parse::<usize>() {
                Ok(i) if !steps.is_empty() => steps.push(Step::Index(i)),
                _ => steps.push(Step::Key(name.to_string())),
            }
        }
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            let idx = rest[1..close].parse::<usize>().map_err(|_| bad())?;
            steps.push(Step::Index(idx));
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return Err(bad());
            }
        }
    }
    Ok(steps)
}

/// Applies `key.path[i]=value` to a parsed TOML document, creating tables on the way.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::new("", format!("override `{assignment}` is not key=value")))?;
    let path = path.trim();
    let steps = parse_path(path)?;
    let value = parse_literal(raw.trim());
    let mut cursor: &mut toml::Value = {
        let Step::Key(first) = &steps[0] else {
            unreachable!("paths start with a key")
        };
        if steps.len() == 1 {
            doc.insert(first.clone(), value);
            return Ok(());
        }
        doc.entry(first.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
    };
    for (i, step) in steps.iter().enumerate().skip(1) {
        let last = i + 1 == steps.len();
        cursor = match step {
            Step::Key(k) => {
                let table = cursor
                    .as_table_mut()
                    .ok_or_else(|| ConfigError::new(path, "parent is not a table"))?;
                if last {
                    table.insert(k.clone(), value);
                    return Ok(());
                }
                table
                    .entry(k.clone())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            }
            Step::Index(idx) => {
                let arr = cursor
                    .as_array_mut()
                    .ok_or_else(|| ConfigError::new(path, "parent is not an array"))?;
                let len = arr.len();
                let slot = arr
                    .get_mut(*idx)
                    .ok_or_else(|| ConfigError::new(path, format!("index {idx} out of bounds (length {len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
        };
    }
    unreachable!("loop returns on the last step")
}

/// Parses TOML text, applies overrides in order and deserializes, reporting
/// the offending field path on failure.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| ConfigError::new("", e.message().to_string()))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    serde_path_to_error::deserialize(toml::Value::Table(doc)).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
    parse_config(&text, overrides)
}

/// Parsed method list for `tags`, with per-tag alphabet overrides.
pub(crate) fn methods(cfg: &ExperimentConfig, tags: &[String], field: &str) -> Result<Vec<Method>, ConfigError> {
    if tags.is_empty() {
        return Err(ConfigError::new(field, "at least one algorithm tag is required"));
    }
    let mut out: Vec<Method> = Vec::new();
    for (i, tag) in tags.iter().enumerate() {
        let algorithm: Algorithm = tag.parse().map_err(|e: String| ConfigError::new(format!("{field}[{i}]"), e))?;
        let (spec, path) = match cfg.algorithm.alphabets.get(algorithm.as_str()) {
            Some(s) => (s.as_str(), format!("algorithm.alphabets.{}", algorithm.as_str())),
            None => (cfg.alphabet.as_str(), "alphabet".to_string()),
        };
        let alphabet: Alphabet = spec.parse().map_err(|e: gnsq::quant::QuantError| ConfigError::new(path, e.to_string()))?;
        if out.iter().any(|m| m.algorithm == algorithm) {
            return Err(ConfigError::new(format!("{field}[{i}]"), format!("duplicate algorithm {algorithm}")));
        }
        out.push(Method { algorithm, alphabet });
    }
    for key in cfg.algorithm.alphabets.keys() {
        if key.parse::<Algorithm>().is_err() {
            return Err(ConfigError::new(format!("algorithm.alphabets.{key}"), "unknown algorithm tag"));
        }
    }
    Ok(out)
}

/// Checks everything that does not need the graph itself.
pub(crate) fn validate_static(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if cfg.seeds.is_empty() {
        return Err(ConfigError::new("seeds", "at least one seed is required"));
    }
    let a = &cfg.algorithm;
    if a.epochs == 0 {
        return Err(ConfigError::new("algorithm.T", "must be at least 1"));
    }
    a.m.parse::<MPolicy>().map_err(|e| ConfigError::new("algorithm.M", e.to_string()))?;
    if let Some(list) = &a.m_list {
        if list.is_empty() || list.contains(&0) {
            return Err(ConfigError::new("algorithm.M_list", "entries must be positive and the list nonempty"));
        }
    }
    if !(a.fail_prob > 0.0 && a.fail_prob < 1.0) {
        return Err(ConfigError::new("algorithm.fail_prob", "must lie in (0, 1)"));
    }
    if !(cfg.spectral.tol > 0.0 && cfg.spectral.tol.is_finite()) {
        return Err(ConfigError::new("spectral.tol", "must be positive"));
    }
    let b = &cfg.bandwidth;
    if b.r == Some(0) {
        return Err(ConfigError::new("bandwidth.r", "must be at least 1"));
    }
    if let Some(list) = &b.r_list {
        if let Some(i) = list.iter().position(|&r| r == 0) {
            return Err(ConfigError::new(format!("bandwidth.r_list[{i}]"), "must be at least 1"));
        }
    }
    if let Some(rg) = &b.r_range {
        if rg.step == 0 {
            return Err(ConfigError::new("bandwidth.r_range.step", "must be at least 1"));
        }
        if rg.start == 0 || rg.start > rg.stop {
            return Err(ConfigError::new("bandwidth.r_range", "need 1 <= start <= stop"));
        }
    }
    match cfg.graph.resolve()? {
        GraphSource::Grid { rows, cols } if rows * cols < 2 => {
            return Err(ConfigError::new("graph", "grid needs at least two vertices"))
        }
        GraphSource::Cycle { n } if n < 3 => return Err(ConfigError::new("graph.n", "cycle needs n >= 3")),
        GraphSource::Star { leaves } if leaves < 1 => return Err(ConfigError::new("graph.leaves", "must be at least 1")),
        GraphSource::EdgeList { path } | GraphSource::PointCloud { path, .. } if !path.exists() => {
            return Err(ConfigError::new("graph.path", format!("{} does not exist", path.display())))
        }
        GraphSource::PointCloud { k, sigma, .. } | GraphSource::Synthetic { k, sigma, .. } => {
            if k == 0 {
                return Err(ConfigError::new("graph.k", "must be at least 1"));
            }
            if let Some(s) = sigma {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(ConfigError::new("graph.sigma", "must be positive"));
                }
            }
        }
        _ => {}
    }
    Ok(())
}

impl ExperimentConfig {
    /// Bandwidths requested by `r_list`, `r_range` and `r`, in that order of precedence.
    pub fn bandwidths(&self) -> Option<Vec<usize>> {
        let b = &self.bandwidth;
        if let Some(list) = &b.r_list {
            return Some(list.clone());
        }
        if let Some(rg) = &b.r_range {
            return Some((rg.start..=rg.stop).step_by(rg.step).collect());
        }
        b.r.map(|r| vec![r])
    }

    pub fn tags_list(&self) -> Vec<String> {
        self.algorithm.tags.items()
    }

    pub fn m_policy(&self) -> MPolicy {
        self.algorithm.m.parse().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seeds = [1, 2]
output = "o"

[graph]
kind = "grid"
rows = 4
cols = 5

[bandwidth]
r = 3
"#;

    #[test]
    fn defaults_fill_in() {
        let c = parse_config(BASE, &[]).unwrap();
        assert_eq!(c.algorithm.epochs, 10);
        assert_eq!(c.algorithm.m, "NlogN");
        assert_eq!(c.alphabet, DEFAULT_ALPHABET);
        assert_eq!(c.bandwidths(), Some(vec![3]));
        validate_static(&c).unwrap();
    }

    #[test]
    fn overrides_reach_nested_fields_and_arrays() {
        let c = parse_config(
            BASE,
            &[
                "seeds[1]=9".into(),
                "graph.rows=6".into(),
                "algorithm.tags=[\"SDW\",\"SSSR\"]".into(),
                "algorithm.alphabets.SSSR=lv:-1,1".into(),
                "bandwidth.r_range.start=2".into(),
                "bandwidth.r_range.stop=8".into(),
                "bandwidth.r_range.step=3".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.seeds, vec![1, 9]);
        assert_eq!(c.graph, GraphConfig::grid(6, 5));
        assert_eq!(c.bandwidths(), Some(vec![2, 5, 8]));
        let m = methods(&c, &c.algorithm.tags.items(), "algorithm.tags").unwrap();
        assert_eq!(m[1].alphabet.to_string(), "lv:-1,1");
        assert_eq!(m[0].alphabet.to_string(), "mt:1:1");
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_config(BASE, &["graph.rows=\"many\"".into()]).unwrap_err();
        assert_eq!(e.path, "graph.rows");
        let e = parse_config(BASE, &["bandwidth.q=1".into()]).unwrap_err();
        assert!(e.to_string().contains("bandwidth"), "{e}");
        let e = parse_config(BASE, &["seeds[5]=1".into()]).unwrap_err();
        assert_eq!(e.path, "seeds[5]");
        let c = parse_config(BASE, &["algorithm.T=0".into()]).unwrap();
        assert_eq!(validate_static(&c).unwrap_err().path, "algorithm.T");
        let c = parse_config(BASE, &["algorithm.M=\"often\"".into()]).unwrap();
        assert_eq!(validate_static(&c).unwrap_err().path, "algorithm.M");
        let c = parse_config(BASE, &["seeds=[]".into()]).unwrap();
        assert_eq!(validate_static(&c).unwrap_err().path, "seeds");
        let c = parse_config(BASE, &["alphabet=\"mt:0:1\"".into()]).unwrap();
        assert_eq!(methods(&c, &["MSQ".into()], "algorithm.tags").unwrap_err().path, "alphabet");
        assert_eq!(methods(&c, &["XYZ".into()], "algorithm.tags").unwrap_err().path, "algorithm.tags[0]");
    }

    #[test]
    fn missing_files_are_rejected() {
        let text = "[graph]\nkind = \"edge_list\"\npath = \"/definitely/not/here.txt\"\n";
        let c = parse_config(text, &[]).unwrap();
        assert_eq!(validate_static(&c).unwrap_err().path, "graph.path");
        let c = parse_config("[graph]\nkind = \"point_cloud\"\nk = 3\n", &[]).unwrap();
        let e = validate_static(&c).unwrap_err();
        assert_eq!(e.path, "graph.path");
        assert!(e.message.contains("required"));
    }

    #[test]
    fn literal_fallback_to_string() {
        assert_eq!(parse_literal("3"), toml::Value::Integer(3));
        assert_eq!(parse_literal("mt:1:1"), toml::Value::String("mt:1:1".into()));
        assert_eq!(parse_literal("true"), toml::Value::Boolean(true));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let c = parse_config(BASE, &["graph.kind=\"synthetic\"".into(), "graph.cloud=\"sphere\"".into(), "graph.n=50".into(), "graph.k=5".into()]).unwrap();
        assert_eq!(validate_static(&c).unwrap_err().path, "graph.rows");
        let text = "[graph]\nkind = \"synthetic\"\ncloud = \"swiss_roll\"\nn = 50\nk = 5\n";
        let c = parse_config(text, &[]).unwrap();
        let again = parse_config(&toml::to_string(&c).unwrap(), &[]).unwrap();
        assert_eq!(c, again);
    }
}
