//! Run configuration: TOML schema, overrides and the config hash.

use std::fs;
use std::path::{Path, PathBuf};

use gamow::energy::QuadratureSettings;
use gamow::kernel::{FourierGrid, KernelSpec};
use gamow::minimize::OptimizerConfig;
use gamow::{Kernel, Raster, Star};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Everything a subcommand reads. Unknown keys are rejected.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// If set, must name the subcommand being run.
    pub operation: Option<String>,
    pub kernel: Option<KernelConfig>,
    pub epsilon: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub components: Vec<ComponentSource>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub quadrature: QuadratureSettings,
    pub checks: CheckConfig,
    pub energy: EnergyConfig,
    pub optimizer: OptimizerConfig,
    pub minimize: MinimizeConfig,
    pub lens: LensConfig,
    pub cut: CutConfig,
}

/// `kernel = "power(alpha=-0.5)"` or a full table such as
/// `kernel = { family = "tabulated", table = [[0.1, 3.0], [1.0, 1.0]] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelConfig {
    Grammar(String),
    Spec(KernelSpec<f64>),
}

impl KernelConfig {
    pub fn build(&self) -> Result<Kernel, CliError> {
        match self {
            KernelConfig::Grammar(s) => s.parse().map_err(CliError::config),
            KernelConfig::Spec(k) => {
                k.validate().map_err(CliError::config)?;
                Ok(k.clone())
            }
        }
    }
}

/// One component: inline star, disk, ellipse, or a `.json` star / `.pgm`
/// raster file. Relative paths are taken from the config file's directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentSource {
    Star(Star),
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        semi_x: f64,
        semi_y: f64,
        #[serde(default = "default_ellipse_modes")]
        n_modes: u32,
    },
    File(PathBuf),
}

fn default_ellipse_modes() -> u32 {
    16
}

/// A loaded component.
#[derive(Clone, Debug)]
pub enum Loaded {
    Star(Star),
    Raster(Raster),
}

impl ComponentSource {
    pub fn load(&self) -> Result<Loaded, CliError> {
        Ok(match self {
            ComponentSource::Star(s) => Loaded::Star(s.clone()),
            ComponentSource::Disk { center, radius } => {
                Loaded::Star(Star::disk(*center, *radius).map_err(CliError::config)?)
            }
            ComponentSource::Ellipse {
                center,
                semi_x,
                semi_y,
                n_modes,
            } => Loaded::Star(
                Star::ellipse(*center, *semi_x, *semi_y, *n_modes).map_err(CliError::config)?,
            ),
            ComponentSource::File(path) => load_shape_file(path)?,
        })
    }
}

pub fn load_shape_file(path: &Path) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let bad = |e: String| CliError::Config(format!("{}: {e}", path.display()));
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text)
            .map(Loaded::Star)
            .map_err(|e| bad(e.to_string())),
        Some("pgm") => Raster::from_pgm(&text)
            .map(Loaded::Raster)
            .map_err(|e| bad(e.to_string())),
        _ => Err(bad(
            "shape files must end in .json (star) or .pgm (raster)".into()
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Admissibility,
    Lipschitz,
    Decreasing,
    Pd,
    Fourier,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub run: Vec<CheckKind>,
    /// Random raster pairs tested by the `pd` check.
    pub pd_pairs: usize,
    pub pd_pitch: f64,
    pub pd_cells: usize,
    pub pd_tolerance: f64,
    /// Pitch of the strip search, in kernel length scales.
    pub strip_pitch: f64,
    pub fourier: FourierGrid,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            run: vec![
                CheckKind::Admissibility,
                CheckKind::Lipschitz,
                CheckKind::Decreasing,
                CheckKind::Pd,
            ],
            pd_pairs: 100,
            pd_pitch: 0.125,
            pd_cells: 16,
            pd_tolerance: 1e-6,
            strip_pitch: 1.0 / 16.0,
            fourier: FourierGrid::default(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    /// Evaluate the components as one set instead of infinitely apart.
    pub union: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizeMode {
    Single,
    Generalized,
    BallTest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Disk,
    Random,
    /// The first configured component.
    Component,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeConfig {
    pub mode: MinimizeMode,
    pub start: StartKind,
    pub max_components: usize,
    pub perturbations: usize,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            mode: MinimizeMode::Single,
            start: StartKind::Random,
            max_components: 2,
            perturbations: 50,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LensConfig {
    pub angles: usize,
    pub offsets: usize,
    /// Offsets span this multiple of the admissible range; above 1 the
    /// outer rows fall outside the domain and are flagged.
    pub offset_factor: f64,
    /// Slack below `-tolerance` fails the check.
    pub tolerance: f64,
    /// Contact angle of the lens drawn in `lens.svg`.
    pub figure_angle: f64,
}

impl Default for LensConfig {
    fn default() -> Self {
        Self {
            angles: 40,
            offsets: 40,
            offset_factor: 1.0,
            tolerance: 1e-12,
            figure_angle: 0.7,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutConfig {
    /// `.pgm` raster; the dumbbell fixture when absent.
    pub raster: Option<PathBuf>,
    /// Pitch of the dumbbell fixture.
    pub pitch: f64,
    pub band: [f64; 2],
    pub mass_budget: f64,
    pub window: Option<f64>,
}

impl Default for CutConfig {
    fn default() -> Self {
        Self {
            raster: None,
            pitch: 0.025,
            band: [1.5, 4.5],
            mass_budget: 0.2,
            window: None,
        }
    }
}

/// Reads the config (or starts from defaults), applies `KEY=VAL` overrides
/// and the seed, and validates against the schema.
pub fn load(
    path: Option<&Path>,
    overrides: &[String],
    seed: Option<u64>,
) -> Result<RunConfig, CliError> {
    let (mut table, base) = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            let table: toml::Table = toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            (table, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (toml::Table::new(), PathBuf::new()),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    if let Some(s) = seed {
        let s = i64::try_from(s).map_err(|_| CliError::Config(format!("seed {s} too large")))?;
        table.insert("seed".into(), toml::Value::Integer(s));
    }
    let mut cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    cfg.optimizer.seed = cfg.seed;
    cfg.optimizer.quadrature = cfg.quadrature;
    cfg.optimizer.validate().map_err(CliError::config)?;
    resolve_paths(&mut cfg, &base);
    Ok(cfg)
}

fn resolve_paths(cfg: &mut RunConfig, base: &Path) {
    let fix = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    for c in &mut cfg.components {
        if let ComponentSource::File(p) = c {
            fix(p);
        }
    }
    if let Some(p) = cfg.cut.raster.as_mut() {
        fix(p);
    }
}

/// `a.b.c=value`, where the value is TOML (`1e-6`, `true`, `"text"`) or else
/// taken as a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {spec:?} is not KEY=VAL")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad override key {key:?}")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override {key:?}: {part} is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// SHA-256 of the resolved configuration and the command, leaving out the
/// output directory so identical runs in different places agree.
pub fn config_hash(cfg: &RunConfig, command: &str) -> String {
    let mut hashed = cfg.clone();
    hashed.out = None;
    let text = serde_json::to_string(&(command, &hashed)).expect("config serializes");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_set_nested_keys() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "quadrature.rel_tol=1e-10").unwrap();
        apply_override(&mut t, "kernel=power(alpha=-0.5)").unwrap();
        apply_override(&mut t, "lens.offset_factor=2").unwrap();
        let cfg: RunConfig = toml::Value::Table(t).try_into().unwrap();
        assert_eq!(cfg.quadrature.rel_tol, 1e-10);
        assert_eq!(cfg.lens.offset_factor, 2.0);
        assert!(
            matches!(cfg.kernel, Some(KernelConfig::Grammar(ref s)) if s == "power(alpha=-0.5)")
        );
        assert!(apply_override(&mut toml::Table::new(), "no_equals").is_err());
        assert!(apply_override(&mut toml::Table::new(), "a..b=1").is_err());
    }

    #[test]
    fn hash_ignores_the_output_directory() {
        let a = RunConfig::default();
        let b = RunConfig {
            out: Some("elsewhere".into()),
            ..RunConfig::default()
        };
        assert_eq!(config_hash(&a, "energy"), config_hash(&b, "energy"));
        assert_ne!(config_hash(&a, "energy"), config_hash(&a, "sweep"));
        let seeded = RunConfig {
            seed: 1,
            ..RunConfig::default()
        };
        assert_ne!(config_hash(&a, "energy"), config_hash(&seeded, "energy"));
    }

    #[test]
    fn tabulated_kernels_load_from_tables() {
        let cfg: RunConfig = toml::from_str(
            "kernel = { family = \"tabulated\", table = [[0.1, 3.0], [0.5, 1.5], [1.0, 1.0], [2.0, 0.5]] }",
        )
        .unwrap();
        assert!(cfg.kernel.unwrap().build().is_ok());
    }
}
