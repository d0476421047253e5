//! TOML run configuration.
//!
//! ```toml
//! [grid]
//! n = 256
//!
//! [init]
//! type = "ellipse"   # circle | ellipse | support_fourier | random
//! a = 1.5
//! b = 1.0
//!
//! [flow]
//! variant = "length_preserving"
//!
//! [time]
//! t_end = 5.0
//! ```

use std::fmt;
use std::path::PathBuf;

use convexflow::curve::{self, Harmonic, SupportCoefficients};
use convexflow::flow::{FlowSpec, Scheme, SolverConfig};
use convexflow::geometry::DEFAULT_SHUFFLE_SEED;
use convexflow::{AngleGrid, CurvatureProfile};
use serde::{Deserialize, Serialize};

/// Environment variable that replaces every seed in a config.
pub const SEED_ENV: &str = "CONVEXFLOW_SEED";

/// Largest seed a TOML integer can hold.
pub const MAX_SEED: u64 = i64::MAX as u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridConfig,
    pub init: InitConfig,
    pub flow: FlowConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n")]
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: default_n() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    Circle {
        r: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    SupportFourier {
        a0: f64,
        #[serde(default)]
        harmonics: Vec<HarmonicConfig>,
    },
    Random {
        seed: u64,
        budget: f64,
        j_max: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub j: u32,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowName {
    LengthPreserving,
    AreaPreserving,
    Shortening,
    PanYang,
}

impl From<FlowName> for FlowSpec {
    fn from(f: FlowName) -> Self {
        match f {
            FlowName::LengthPreserving => FlowSpec::LengthPreserving,
            FlowName::AreaPreserving => FlowSpec::AreaPreserving,
            FlowName::Shortening => FlowSpec::Shortening,
            FlowName::PanYang => FlowSpec::PanYang,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    ExplicitRk4,
    Imex,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::ExplicitRk4 => Scheme::ExplicitRk4,
            SchemeName::Imex => Scheme::Imex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub variant: FlowName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeName,
    #[serde(default = "default_record_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub projection: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_ceiling: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default = "default_radii_seed")]
    pub radii_seed: u64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            radii_seed: default_radii_seed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    /// Write snapshot files every this many records.
    #[serde(default = "default_snapshot_stride")]
    pub snapshot_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            snapshot_stride: default_snapshot_stride(),
        }
    }
}

fn default_n() -> usize {
    256
}
fn default_cfl() -> f64 {
    0.25
}
fn default_scheme() -> SchemeName {
    SchemeName::ExplicitRk4
}
fn default_record_stride() -> usize {
    20
}
fn default_radii_seed() -> u64 {
    DEFAULT_SHUFFLE_SEED
}
fn default_snapshot_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Parses and validates a config. Unknown keys are rejected by name.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, why: String| Err(ConfigError(format!("`{key}`: {why}")));
        if let Err(e) = AngleGrid::new(self.grid.n) {
            return bad("grid.n", e.to_string());
        }
        let t = &self.time;
        if !(t.t_end > 0.0 && t.t_end.is_finite()) {
            return bad("time.t_end", format!("must be positive, got {}", t.t_end));
        }
        if !(t.cfl > 0.0 && t.cfl <= 1.0) {
            return bad("time.cfl", format!("must lie in (0, 1], got {}", t.cfl));
        }
        if t.record_stride == 0 {
            return bad("time.record_stride", "must be at least 1".into());
        }
        if self.output.snapshot_stride == 0 {
            return bad("output.snapshot_stride", "must be at least 1".into());
        }
        let mut seeds = vec![("geometry.radii_seed", self.geometry.radii_seed)];
        if let InitConfig::Random { seed, .. } = self.init {
            seeds.push(("init.seed", seed));
        }
        for (key, seed) in seeds {
            if seed > MAX_SEED {
                return bad(key, format!("seeds must not exceed {MAX_SEED}, got {seed}"));
            }
        }
        for (key, v) in [("time.k_floor", t.k_floor), ("time.k_ceiling", t.k_ceiling)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(key, format!("must be positive, got {v}"));
                }
            }
        }
        Ok(())
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            scheme: self.time.scheme.into(),
            cfl: self.time.cfl,
            t_end: self.time.t_end,
            k_floor: self.time.k_floor,
            k_ceiling: self.time.k_ceiling,
            record_stride: self.time.record_stride,
            projection: self.time.projection,
            radii_seed: self.geometry.radii_seed,
        }
    }

    pub fn initial_profile(&self) -> convexflow::Result<CurvatureProfile> {
        self.init.profile(&AngleGrid::new(self.grid.n)?)
    }

    /// Replaces the init and geometry seeds.
    pub fn override_seed(&mut self, seed: u64) {
        self.geometry.radii_seed = seed;
        if let InitConfig::Random { seed: s, .. } = &mut self.init {
            *s = seed;
        }
    }

    /// Applies [`SEED_ENV`] if it is set.
    pub fn apply_seed_env(&mut self) -> Result<(), ConfigError> {
        if let Some(seed) = seed_from_env()? {
            self.override_seed(seed);
        }
        Ok(())
    }
}

/// Reads [`SEED_ENV`]; `None` when unset.
pub fn seed_from_env() -> Result<Option<u64>, ConfigError> {
    let Ok(v) = std::env::var(SEED_ENV) else {
        return Ok(None);
    };
    match v.trim().parse::<u64>() {
        Ok(seed) if seed <= MAX_SEED => Ok(Some(seed)),
        _ => Err(ConfigError(format!(
            "`{SEED_ENV}` must be an integer in [0, {MAX_SEED}], got {v:?}"
        ))),
    }
}

impl InitConfig {
    pub fn profile(&self, grid: &AngleGrid) -> convexflow::Result<CurvatureProfile> {
        match self {
            InitConfig::Circle { r } => curve::circle_profile(*r, grid),
            InitConfig::Ellipse { a, b } => curve::ellipse_profile(*a, *b, grid),
            InitConfig::SupportFourier { a0, harmonics } => {
                let coeffs = SupportCoefficients {
                    a0: *a0,
                    harmonics: harmonics.iter().map(|h| Harmonic { j: h.j, c: h.c, s: h.s }).collect(),
                };
                curve::support_fourier_profile(&coeffs, grid)
            }
            InitConfig::Random { seed, budget, j_max } => curve::random_convex_profile(*seed, *budget, *j_max, grid),
        }
    }

    /// Parses `type[:key=value,...]`, e.g. `ellipse:a=2,b=1` or
    /// `support_fourier:a0=1,c2=0.1,s3=0.02`.
    pub fn from_spec(spec: &str) -> Result<Self, ConfigError> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut pairs = Vec::new();
        for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("expected key=value, got `{item}`")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut take = |key: &str| -> Result<Option<String>, ConfigError> {
            Ok(pairs
                .iter()
                .position(|(k, _)| k == key)
                .map(|i| pairs.remove(i).1))
        };
        fn num<T: std::str::FromStr>(key: &str, v: Option<String>) -> Result<T, ConfigError> {
            let v = v.ok_or_else(|| ConfigError(format!("missing `{key}`")))?;
            v.parse().map_err(|_| ConfigError(format!("`{key}`: cannot parse `{v}`")))
        }
        let init = match kind.trim() {
            "circle" => InitConfig::Circle { r: num("r", take("r")?)? },
            "ellipse" => InitConfig::Ellipse {
                a: num("a", take("a")?)?,
                b: num("b", take("b")?)?,
            },
            "random" => InitConfig::Random {
                seed: num("seed", take("seed")?)?,
                budget: num("budget", take("budget")?)?,
                j_max: num("j_max", take("j_max")?)?,
            },
            "support_fourier" => {
                let a0 = num("a0", take("a0")?)?;
                let mut harmonics: Vec<HarmonicConfig> = Vec::new();
                for (k, v) in std::mem::take(&mut pairs) {
                    let (part, j) = k.split_at(1.min(k.len()));
                    let j: u32 = match (part, j.parse()) {
                        ("c" | "s", Ok(j)) => j,
                        _ => return Err(ConfigError(format!("unknown key `{k}`"))),
                    };
                    let x: f64 = num(&k, Some(v))?;
                    let pos = match harmonics.iter().position(|h| h.j == j) {
                        Some(p) => p,
                        None => {
                            harmonics.push(HarmonicConfig { j, c: 0.0, s: 0.0 });
                            harmonics.len() - 1
                        }
                    };
                    if part == "c" {
                        harmonics[pos].c = x;
                    } else {
                        harmonics[pos].s = x;
                    }
                }
                harmonics.sort_by_key(|h| h.j);
                InitConfig::SupportFourier { a0, harmonics }
            }
            other => {
                return Err(ConfigError(format!(
                    "unknown init type `{other}` (expected circle, ellipse, support_fourier, random)"
                )))
            }
        };
        if let Some((k, _)) = pairs.first() {
            return Err(ConfigError(format!("unknown key `{k}`")));
        }
        Ok(init)
    }
}
