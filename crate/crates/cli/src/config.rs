//! Run configuration. Every field has a default, and the defaults match the
//! parameters of the acceptance suite.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use hierlab::flows::Scheme;
use hierlab::{GridFunction, Kappa, PeriodicGrid, StateFile};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Smallest accepted tolerance override.
pub const MIN_TOLERANCE: f64 = 1e3 * f64::EPSILON;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub kappa: Kappa,
    pub n_max: usize,
    pub seed: u64,
    pub state: StateSource,
    pub tolerances: Tolerances,
    pub flow: FlowConfig,
    pub lax: LaxConfig,
    pub gradcheck: GradcheckConfig,
    pub involution: InvolutionConfig,
    pub gp: GpConfig,
    pub rank1: Rank1Config,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            kappa: Kappa::Defocusing,
            n_max: 6,
            seed: 0,
            state: StateSource::default(),
            tolerances: Tolerances::default(),
            flow: FlowConfig::default(),
            lax: LaxConfig::default(),
            gradcheck: GradcheckConfig::default(),
            involution: InvolutionConfig::default(),
            gp: GpConfig::default(),
            rank1: Rank1Config::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 256, l: PI }
    }
}

/// Where the initial state comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    /// Band-limited pseudo-random state drawn with the run seed.
    Random { cutoff: usize, amplitude: f64 },
    PlaneWave { re: f64, im: f64, mode: i64 },
    File(PathBuf),
}

impl Default for StateSource {
    fn default() -> Self {
        StateSource::Random {
            cutoff: 3,
            amplitude: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub gradient: f64,
    pub involution: f64,
    pub conservation_strang: f64,
    pub conservation_ifrk4: f64,
    pub lax_identity: f64,
    pub trace_drift: f64,
    pub zero_curvature: f64,
    pub rmatrix: f64,
    pub energy: f64,
    pub spot_check: f64,
    pub gp3: f64,
    pub gp4: f64,
    pub xhn: f64,
    pub rank1: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gradient: 1e-6,
            involution: 1e-6,
            conservation_strang: 1e-6,
            conservation_ifrk4: 1e-5,
            lax_identity: 1e-8,
            trace_drift: 1e-5,
            zero_curvature: 1e-4,
            rmatrix: 1e-5,
            energy: 1e-10,
            spot_check: 1e-8,
            gp3: 1e-4,
            gp4: 1e-3,
            xhn: 1e-10,
            rank1: 1e-8,
        }
    }
}

impl Tolerances {
    fn named(&self) -> [(&'static str, f64); 14] {
        [
            ("gradient", self.gradient),
            ("involution", self.involution),
            ("conservation_strang", self.conservation_strang),
            ("conservation_ifrk4", self.conservation_ifrk4),
            ("lax_identity", self.lax_identity),
            ("trace_drift", self.trace_drift),
            ("zero_curvature", self.zero_curvature),
            ("rmatrix", self.rmatrix),
            ("energy", self.energy),
            ("spot_check", self.spot_check),
            ("gp3", self.gp3),
            ("gp4", self.gp4),
            ("xhn", self.xhn),
            ("rank1", self.rank1),
        ]
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub stride: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            n: 3,
            dt: 1e-3,
            steps: 1000,
            scheme: Scheme::Strang,
            stride: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaxConfig {
    /// Sweep points of the large-λ comparison.
    pub lambdas: Vec<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    pub max_decay_exponent: f64,
    /// Spectral parameters of the transition-matrix identities.
    pub identity_lambdas: Vec<f64>,
    pub trace_lambda: f64,
    pub curvature_lambda: f64,
    /// Step sizes of the zero-curvature refinement; the bound applies to
    /// the last one.
    pub curvature_dts: [f64; 2],
    pub curvature_time: f64,
    pub min_refinement: f64,
    pub rmatrix: [f64; 2],
}

impl Default for LaxConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![20.0, 40.0, 80.0],
            k: 3,
            max_decay_exponent: -3.5,
            identity_lambdas: vec![-3.3, 0.7, 2.0, 5.0, 11.5],
            trace_lambda: 5.0,
            curvature_lambda: 2.0,
            curvature_dts: [1e-3, 5e-4],
            curvature_time: 0.02,
            min_refinement: 3.5,
            rmatrix: [2.0, 5.0],
        }
    }
}

/// Index pairs `(n, m)` for the involution check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Pairs {
    List(Vec<(usize, usize)>),
    Keyword(String),
}

impl Default for Pairs {
    fn default() -> Self {
        Pairs::Keyword("all".into())
    }
}

impl Pairs {
    /// `all` or a comma-separated list like `1:3,2:5`.
    pub fn parse(text: &str) -> CliResult<Self> {
        if text == "all" {
            return Ok(Pairs::Keyword("all".into()));
        }
        let list = text
            .split(',')
            .map(|item| {
                let (a, b) = item
                    .split_once(':')
                    .ok_or_else(|| CliError::Config(format!("pair '{item}' is not of the form n:m")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Config(format!("bad index '{s}' in pair '{item}'")))
                };
                Ok((parse(a)?, parse(b)?))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Pairs::List(list))
    }

    pub fn resolve(&self, n_max: usize) -> CliResult<Vec<(usize, usize)>> {
        let list = match self {
            Pairs::Keyword(k) if k == "all" => (1..=n_max)
                .flat_map(|n| (n + 1..=n_max).map(move |m| (n, m)))
                .collect(),
            Pairs::Keyword(k) => return Err(CliError::Config(format!("unknown pair keyword '{k}'"))),
            Pairs::List(list) => list.clone(),
        };
        if let Some(&(n, m)) = list.iter().find(|(n, m)| *n == 0 || *m == 0 || *n > n_max || *m > n_max) {
            return Err(CliError::Config(format!("pair {n}:{m} outside 1..={n_max}")));
        }
        Ok(list)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradcheckConfig {
    pub trials: usize,
    pub cutoff: usize,
    pub amplitude: f64,
    /// Central-difference step.
    pub h: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            trials: 10,
            cutoff: 8,
            amplitude: 0.8,
            h: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvolutionConfig {
    pub pairs: Pairs,
    pub trials: usize,
    pub cutoff: usize,
    pub amplitude: f64,
}

impl Default for InvolutionConfig {
    fn default() -> Self {
        Self {
            pairs: Pairs::default(),
            trials: 10,
            cutoff: 10,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GpConfig {
    /// Step sizes of the residual refinement; the bounds apply to the first.
    pub dts: [f64; 2],
    pub time: f64,
    pub cutoff: usize,
    pub amplitude: f64,
    pub min_refinement: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            dts: [1e-3, 5e-4],
            time: 0.01,
            cutoff: 2,
            amplitude: 0.5,
            min_refinement: 3.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Rank1Config {
    pub d: usize,
    pub n: usize,
    /// Row-major `[re, im]` entries; a random symmetric tensor when absent.
    pub entries: Option<Vec<[f64; 2]>>,
}

impl Default for Rank1Config {
    fn default() -> Self {
        Self { d: 3, n: 3, entries: None }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> CliResult<()> {
        for (name, tol) in self.tolerances.named() {
            if !(tol >= MIN_TOLERANCE && tol.is_finite()) {
                return Err(CliError::Config(format!(
                    "tolerance '{name}' = {tol:e} is below {MIN_TOLERANCE:e}"
                )));
            }
        }
        if self.n_max == 0 || self.n_max > hierlab::hierarchy::MAX_ORDER {
            return Err(CliError::Config(format!(
                "n_max = {} outside 1..={}",
                self.n_max,
                hierlab::hierarchy::MAX_ORDER
            )));
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> CliResult<PeriodicGrid> {
        Ok(PeriodicGrid::new(self.grid.n, self.grid.l)?)
    }

    /// Initial state from the configured source; a state file must match
    /// the configured grid.
    pub fn initial_state(&self) -> CliResult<GridFunction> {
        let grid = self.grid()?;
        match &self.state {
            StateSource::Random { cutoff, amplitude } => {
                Ok(GridFunction::random_band_limited(grid, *cutoff, self.seed, *amplitude)?)
            }
            StateSource::PlaneWave { re, im, mode } => {
                Ok(GridFunction::plane_wave(grid, Complex64::new(*re, *im), *mode))
            }
            StateSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let state = StateFile::from_json(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let phi = GridFunction::from_state(&state)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                if *phi.grid() != grid {
                    return Err(CliError::Config(format!(
                        "{}: state grid N={}, L={} differs from the configured grid N={}, L={}",
                        path.display(),
                        phi.grid().n(),
                        phi.grid().half_period(),
                        grid.n(),
                        grid.half_period()
                    )));
                }
                Ok(phi)
            }
        }
    }
}
