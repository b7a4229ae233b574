//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::beta::{EnumOptions, Interval, DEFAULT_NODE_CAP};
use crate::dimension::{Generator, TargetSpec, ThetaRule, DEFAULT_TOLERANCE, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::geometry::{BetaSystem, Parallelepiped};
use crate::lab::{LabOptions, DEFAULT_COPY_CAP, DEFAULT_ROW_CAP};
use crate::precision::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaKind {
    #[serde(rename = "const")]
    Const,
    #[serde(rename = "arccos_pow2")]
    ArccosPow2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum TargetConfig {
    #[serde(rename = "rotated2d")]
    Rotated2d {
        theta: ThetaKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta_value: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default = "unit_pair")]
        side_exponents: [f64; 2],
        #[serde(default = "half_pair")]
        translation: [f64; 2],
    },
    #[serde(rename = "axis")]
    Axis {
        exponents: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        translation: Option<Vec<f64>>,
    },
    #[serde(rename = "explicit")]
    Explicit { parallelepipeds: Vec<Parallelepiped> },
    /// CSV with a header row and columns n, then the d² entries of the
    /// columns of P_n in column-major order. Relative paths are resolved
    /// against the config file's directory.
    #[serde(rename = "table")]
    Table {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        translation: Option<Vec<f64>>,
    },
}

fn unit_pair() -> [f64; 2] {
    [1.0, 1.0]
}

fn half_pair() -> [f64; 2] {
    [0.5, 0.5]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default = "default_nodes")]
    pub nodes: u64,
    #[serde(default = "default_copies")]
    pub copies: u64,
    #[serde(default = "default_rows")]
    pub grid_rows: u64,
}

fn default_nodes() -> u64 {
    DEFAULT_NODE_CAP
}
fn default_copies() -> u64 {
    DEFAULT_COPY_CAP
}
fn default_rows() -> u64 {
    DEFAULT_ROW_CAP
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            nodes: DEFAULT_NODE_CAP,
            copies: DEFAULT_COPY_CAP,
            grid_rows: DEFAULT_ROW_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DigitsConfig {
    pub x: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylindersConfig {
    pub n: usize,
    #[serde(default)]
    pub full_only: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentConfig {
    pub shape: Parallelepiped,
    pub exponents: Vec<f64>,
    #[serde(default = "default_depths")]
    pub depths: Vec<u32>,
}

fn default_depths() -> Vec<u32> {
    crate::content::DEFAULT_DEPTHS.collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverConfig {
    pub levels: Vec<u32>,
    /// Scales to test; the candidate scales of each level when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub levels: Vec<u32>,
    /// Sides of D; the unit square when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cube: Option<Vec<[f64; 2]>>,
    /// t = s_n − t_offset at each level.
    #[serde(default = "default_offset")]
    pub t_offset: f64,
    /// ε; (s* − t)/2 when absent, with s* from the dimension settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_offset() -> f64 {
    0.1
}
fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub betas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetConfig>,
    #[serde(default = "default_n_min")]
    pub n_min: u32,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<DigitsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinders: Option<CylindersConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelepiped: Option<Parallelepiped>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<ContentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    /// Directory relative table paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_n_min() -> u32 {
    1
}
fn default_n_max() -> u32 {
    50
}
fn default_window() -> usize {
    DEFAULT_WINDOW
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl RunConfig {
    /// Defaults for everything but the betas.
    pub fn with_betas(betas: Vec<f64>) -> Self {
        serde_json::from_value(serde_json::json!({ "betas": betas })).expect("defaults deserialize")
    }

    pub fn validate(&self) -> Result<()> {
        BetaSystem::new(self.betas.clone())?;
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(Error::Config(format!(
                "n_min must satisfy 1 ≤ n_min ≤ n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        let span = (self.n_max - self.n_min + 1) as usize;
        if self.window < 1 || self.window > span {
            return Err(Error::Config(format!("window must lie in [1, {span}], got {}", self.window)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be > 0".into()));
        }
        if self.caps.nodes == 0 || self.caps.copies == 0 || self.caps.grid_rows == 0 {
            return Err(Error::Config("caps must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn enum_options(&self) -> EnumOptions {
        EnumOptions {
            precision: self.precision,
            node_cap: self.caps.nodes,
        }
    }

    pub fn lab_options(&self) -> LabOptions {
        LabOptions {
            enumeration: self.enum_options(),
            copy_cap: self.caps.copies,
            row_cap: self.caps.grid_rows,
        }
    }

    /// The target family described by `target`.
    pub fn target_spec(&self) -> Result<TargetSpec> {
        let system = BetaSystem::new(self.betas.clone())?;
        let d = system.dim();
        let target = self
            .target
            .as_ref()
            .ok_or_else(|| Error::Config("missing field `target`".into()))?;
        let generator = match target {
            TargetConfig::Rotated2d {
                theta,
                theta_value,
                a,
                side_exponents,
                translation,
            } => {
                let rule = match theta {
                    ThetaKind::Const => ThetaRule::Constant(
                        theta_value.ok_or_else(|| Error::Config("target.theta_value is required for theta \"const\"".into()))?,
                    ),
                    ThetaKind::ArccosPow2 => ThetaRule::ArccosPow2(
                        a.ok_or_else(|| Error::Config("target.a is required for theta \"arccos_pow2\"".into()))?,
                    ),
                };
                Generator::Rotated2d {
                    theta: rule,
                    side_exponents: *side_exponents,
                    translation: *translation,
                }
            }
            TargetConfig::Axis {
                exponents,
                translation,
            } => Generator::Axis {
                exponents: exponents.clone(),
                translation: translation.clone().unwrap_or_else(|| vec![0.0; d]),
            },
            TargetConfig::Explicit { parallelepipeds } => Generator::Explicit(parallelepipeds.clone()),
            TargetConfig::Table { path, translation } => Generator::Table {
                rows: read_table(&self.resolve(path), d)?,
                translation: translation.clone().unwrap_or_else(|| vec![0.0; d]),
            },
        };
        TargetSpec::new(system, generator)
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    pub fn cube(&self) -> Result<Vec<Interval>> {
        let d = self.betas.len();
        match self.measure.as_ref().and_then(|m| m.cube.as_ref()) {
            None => Ok(vec![Interval::unit(); d]),
            Some(sides) => sides.iter().map(|[lo, hi]| Interval::new(*lo, *hi)).collect(),
        }
    }
}

fn read_table(path: &Path, d: usize) -> Result<Vec<(u32, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 1 + d * d {
            return Err(Error::Config(format!(
                "table {} has a row with {} fields, expected {}",
                path.display(),
                record.len(),
                1 + d * d
            )));
        }
        let n: u32 = record[0]
            .parse()
            .map_err(|_| Error::Config(format!("table {}: bad level {:?}", path.display(), &record[0])))?;
        let vals = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Config(format!("table {}: bad number {f:?}", path.display())))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((n, vals));
    }
    Ok(rows)
}

/// Parses and validates a JSON config; unknown and missing keys are
/// reported by name.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::s_n;

    #[test]
    fn rotated_examples() {
        let c = parse_config(r#"{"betas":[2,4],"target":{"kind":"rotated2d","theta":"const","theta_value":0}}"#).unwrap();
        let spec = c.target_spec().unwrap();
        assert_eq!(s_n(&spec, 3).unwrap().s_n, 1.25);
        assert_eq!(c.n_max, 50);
        let c = parse_config(r#"{"betas":[2,4],"target":{"kind":"rotated2d","theta":"arccos_pow2","a":0.5}}"#).unwrap();
        assert!(matches!(
            c.target_spec().unwrap().generator,
            Generator::Rotated2d {
                theta: ThetaRule::ArccosPow2(a),
                ..
            } if a == 0.5
        ));
    }

    #[test]
    fn schema_errors_name_the_key() {
        let e = parse_config(r#"{"target":{"kind":"axis","exponents":[1]}}"#).unwrap_err();
        assert!(e.to_string().contains("betas"), "{e}");
        let e = parse_config(r#"{"betas":[2],"colour":1}"#).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = parse_config(r#"{"betas":[2],"target":{"kind":"axis","exponents":[1],"extra":0}}"#).unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
    }

    #[test]
    fn invalid_values() {
        assert!(matches!(parse_config(r#"{"betas":[1.0]}"#), Err(Error::Domain { .. })));
        assert!(parse_config(r#"{"betas":[2],"n_min":5,"n_max":4}"#).is_err());
        assert!(parse_config(r#"{"betas":[2],"caps":{"nodes":0}}"#).is_err());
        assert!(parse_config(r#"{"betas":[2],"n_max":10,"window":11}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let c = parse_config(r#"{"betas":[2,4],"target":{"kind":"rotated2d","theta":"const","theta_value":0.5},"measure":{"levels":[2]}}"#).unwrap();
        let again = parse_config(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn table_target() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("t.csv"), "n,a11,a21,a12,a22\n# comment\n1,0.5,0,0,0.25\n2,0.25,0,0,0.0625\n").unwrap();
        let cfg_path = dir.path().join("c.json");
        std::fs::write(&cfg_path, r#"{"betas":[2,2],"target":{"kind":"table","path":"t.csv"}}"#).unwrap();
        let spec = load_config(&cfg_path).unwrap().target_spec().unwrap();
        assert_eq!(spec.p_n(2).unwrap().columns()[1], vec![0.0, 0.0625]);
        assert!(spec.p_n(3).is_err());
    }
}
