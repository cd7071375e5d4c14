//! Plain-text `key = value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use logobs::fields::{InterpOrder, Point, QuadratureConfig};
use logobs::weiss::WeissConfig;
use logobs::ForcingMode;

#[derive(Debug)]
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

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Planar,
    ClassicalLine,
    SingularLine,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensitySource {
    /// Extrapolated limit of the energy scan.
    Scan,
    /// The field itself read as a homogeneous blow-up limit around the center.
    Profile,
}

pub const KEYS: &[&str] = &[
    "problem",
    "mode",
    "n",
    "omega",
    "tol",
    "max_sweeps",
    "epsilons",
    "noise",
    "field",
    "center",
    "radii",
    "growth_radii",
    "check_radii",
    "blowup_radii",
    "gamma",
    "n_theta",
    "n_rad",
    "interp",
    "fd_step",
    "classify_tol",
    "density",
    "x_seed",
    "x_max",
    "seed",
    "output_dir",
];

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: Problem,
    pub mode: Option<ForcingMode>,
    pub n: Option<usize>,
    pub omega: Option<f64>,
    pub tol: f64,
    pub max_sweeps: usize,
    pub epsilons: Option<Vec<f64>>,
    pub noise: f64,
    pub field: Option<PathBuf>,
    pub center: Point,
    pub radii: Vec<f64>,
    pub growth_radii: Vec<f64>,
    pub check_radii: Vec<f64>,
    pub blowup_radii: Vec<f64>,
    pub weiss: WeissConfig,
    pub classify_tol: f64,
    pub density: DensitySource,
    pub x_seed: f64,
    pub x_max: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: Problem::Planar,
            mode: None,
            n: None,
            omega: None,
            tol: logobs::solver::DEFAULT_TOL,
            max_sweeps: logobs::solver::DEFAULT_MAX_SWEEPS,
            epsilons: None,
            noise: 0.0,
            field: None,
            center: [0.0, 0.0],
            radii: (0..15).map(|k| 0.3 * (0.05f64 / 0.3).powf(k as f64 / 14.0)).collect(),
            growth_radii: vec![0.1, 0.05, 0.02, 0.01],
            check_radii: vec![0.05, 0.1, 0.2],
            blowup_radii: vec![0.2, 0.1, 0.05, 0.025],
            weiss: WeissConfig::default(),
            classify_tol: 0.1,
            density: DensitySource::Scan,
            x_seed: logobs::oracle1d::DEFAULT_SEED,
            x_max: logobs::oracle1d::DEFAULT_X_MAX,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| bad(format!("invalid value `{v}` for `{key}`")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',').map(|s| number(key, s.trim())).collect()
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("line {}: expected key = value", no + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "problem" => {
                self.problem = match v {
                    "planar" => Problem::Planar,
                    "classical-line" => Problem::ClassicalLine,
                    "singular-line" => Problem::SingularLine,
                    "zero" => Problem::Zero,
                    _ => return Err(bad(format!("unknown problem `{v}`"))),
                }
            }
            "mode" => self.mode = Some(ForcingMode::parse(v).ok_or_else(|| bad(format!("unknown mode `{v}`")))?),
            "n" => self.n = Some(number(key, v)?),
            "omega" => self.omega = Some(number(key, v)?),
            "tol" => self.tol = number(key, v)?,
            "max_sweeps" => self.max_sweeps = number(key, v)?,
            "epsilons" => self.epsilons = Some(list(key, v)?),
            "noise" => self.noise = number(key, v)?,
            "field" => self.field = Some(PathBuf::from(v)),
            "center" => {
                let c = list(key, v)?;
                self.center = match c.as_slice() {
                    [x] => [*x, 0.0],
                    [x, y] => [*x, *y],
                    _ => return Err(bad("center takes one or two coordinates")),
                }
            }
            "radii" => self.radii = list(key, v)?,
            "growth_radii" => self.growth_radii = list(key, v)?,
            "check_radii" => self.check_radii = list(key, v)?,
            "blowup_radii" => self.blowup_radii = list(key, v)?,
            "gamma" => self.weiss.gamma = number(key, v)?,
            "n_theta" => self.weiss.quadrature.n_theta = number(key, v)?,
            "n_rad" => self.weiss.quadrature.n_rad = number(key, v)?,
            "interp" => {
                self.weiss.quadrature.interp = InterpOrder::from_order(number(key, v)?)
                    .ok_or_else(|| bad(format!("interp must be 1 or 3, got `{v}`")))?
            }
            "fd_step" => self.weiss.fd_step = number(key, v)?,
            "classify_tol" => self.classify_tol = number(key, v)?,
            "density" => {
                self.density = match v {
                    "scan" => DensitySource::Scan,
                    "profile" => DensitySource::Profile,
                    _ => return Err(bad(format!("density must be `scan` or `profile`, got `{v}`"))),
                }
            }
            "x_seed" => self.x_seed = number(key, v)?,
            "x_max" => self.x_max = number(key, v)?,
            "seed" => self.seed = number(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(bad(format!("unknown config key `{key}` (known: {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        self.weiss.quadrature
    }

    /// Input field path, defaulting to the solver output in the output directory.
    pub fn field_path(&self) -> PathBuf {
        self.field.clone().unwrap_or_else(|| self.output_dir.join("field.logobs"))
    }

    /// Makes relative paths absolute against `base` and validates numeric settings.
    pub fn resolve(&mut self, base: &Path) -> Result<(), ConfigError> {
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
        if let Some(f) = &self.field {
            if f.is_relative() {
                self.field = Some(base.join(f));
            }
        }
        self.weiss.validate().map_err(|e| bad(e.to_string()))?;
        if !(self.classify_tol > 0.0) {
            return Err(bad("classify_tol must be positive"));
        }
        if self.noise < 0.0 {
            return Err(bad("noise must be non-negative"));
        }
        Ok(())
    }
}
